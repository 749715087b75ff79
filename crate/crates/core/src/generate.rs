//! Seeded synthetic instances.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::domain::{
    explode_order, Factory, FactoryId, Order, OrderId, PalletQuantity, RoadNetwork, RouteEdge, Vehicle, VehicleId,
};
use crate::instance::{Instance, InstanceError};
use crate::Seconds;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub seed: u64,
    pub factories: usize,
    pub vehicles: usize,
    pub orders: usize,
    /// Standard pallets per vehicle.
    pub capacity: u32,
    pub min_docks: u32,
    pub max_docks: u32,
    /// Orders are created uniformly over `[0, horizon)`.
    pub horizon: Seconds,
    /// Committed completion time minus creation time.
    pub lead_time: Seconds,
    /// Side of the square the factories are scattered over, km.
    pub region_km: f64,
    /// Route distance never drops below this, km.
    pub min_distance_km: f64,
    pub speed_kmh: f64,
    /// Each route is stretched by a factor drawn from `[1, 1 + slack]`.
    pub slack: f64,
    /// Share of orders larger than one vehicle.
    pub large_order_rate: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            seed: 0,
            factories: 10,
            vehicles: 5,
            orders: 50,
            capacity: 15,
            min_docks: 1,
            max_docks: 4,
            horizon: 86_400,
            lead_time: 14_400,
            region_km: 60.0,
            min_distance_km: 1.0,
            speed_kmh: 40.0,
            slack: 0.2,
            large_order_rate: 0.03,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GenerateError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("need at least two factories")]
    TooFewFactories,
    #[error("dock range {0}..={1} is empty")]
    DockRange(u32, u32),
    #[error("lead time must be below one day")]
    LeadTime,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn hex(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| char::from_digit(rng.gen_range(0..16), 16).expect("hex digit")).collect()
}

/// Deterministic in `params` and `config.omega`.
pub fn generate_instance(params: &GeneratorParams, config: SimConfig) -> Result<Instance, GenerateError> {
    let p = params;
    if p.vehicles == 0 {
        return Err(GenerateError::NonPositive("vehicles"));
    }
    if p.orders == 0 {
        return Err(GenerateError::NonPositive("orders"));
    }
    if p.capacity == 0 {
        return Err(GenerateError::NonPositive("capacity"));
    }
    if p.horizon <= 0 {
        return Err(GenerateError::NonPositive("horizon"));
    }
    if !(p.speed_kmh > 0.0) {
        return Err(GenerateError::NonPositive("speed_kmh"));
    }
    if p.factories < 2 {
        return Err(GenerateError::TooFewFactories);
    }
    if p.min_docks == 0 || p.min_docks > p.max_docks {
        return Err(GenerateError::DockRange(p.min_docks, p.max_docks));
    }
    if !(0..86_400).contains(&p.lead_time) {
        return Err(GenerateError::LeadTime);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let mut ids = BTreeSet::new();
    let mut points = Vec::with_capacity(p.factories);
    let mut factories = Vec::with_capacity(p.factories);
    while factories.len() < p.factories {
        let id = hex(&mut rng, 32);
        if !ids.insert(id.clone()) {
            continue;
        }
        let (x, y) = (rng.gen_range(0.0..p.region_km), rng.gen_range(0.0..p.region_km));
        points.push((x, y));
        factories.push(Factory {
            id: FactoryId(id),
            longitude: round_to(113.8 + x / 100.0, 1e6),
            latitude: round_to(22.4 + y / 111.0, 1e6),
            dock_count: rng.gen_range(p.min_docks..=p.max_docks),
        });
    }

    let mut edges = Vec::with_capacity(p.factories * (p.factories - 1));
    for i in 0..p.factories {
        for j in 0..p.factories {
            if i == j {
                continue;
            }
            let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
            let stretch = 1.0 + rng.gen_range(0.0..=p.slack.max(0.0));
            let km = round_to(p.min_distance_km + libm::sqrt(dx * dx + dy * dy) * stretch, 10.0);
            let travel_time = (libm::round(km / p.speed_kmh * 3600.0) as Seconds).max(1);
            edges.push(RouteEdge {
                route_code: format!("{}-{}-{}-{}-{}", hex(&mut rng, 8), hex(&mut rng, 4), hex(&mut rng, 4), hex(&mut rng, 4), hex(&mut rng, 12)),
                from: factories[i].id.clone(),
                to: factories[j].id.clone(),
                distance: km,
                travel_time,
            });
        }
    }

    let fleet = (1..=p.vehicles)
        .map(|k| Vehicle {
            id: VehicleId(format!("V_{k}")),
            capacity: p.capacity,
            operation_time: 24,
            gps_id: format!("G_{k}"),
        })
        .collect();

    let mut creations: Vec<Seconds> = (0..p.orders).map(|_| rng.gen_range(0..p.horizon)).collect();
    creations.sort_unstable();
    let mut order_ids = BTreeSet::new();
    let mut orders = Vec::with_capacity(p.orders);
    for creation in creations {
        let id = loop {
            let n: u64 = rng.gen_range(1_000_000_000..10_000_000_000);
            if order_ids.insert(n) {
                break n;
            }
        };
        let pickup = rng.gen_range(0..p.factories);
        let delivery = (pickup + rng.gen_range(1..p.factories)) % p.factories;
        let quantity = if rng.gen_bool(p.large_order_rate.clamp(0.0, 1.0)) {
            PalletQuantity::new(p.capacity + rng.gen_range(1..=p.capacity / 2 + 1), rng.gen_range(0..4), rng.gen_range(0..4))
        } else {
            loop {
                let q = PalletQuantity::new(rng.gen_range(0..=4), rng.gen_range(0..=4), rng.gen_range(0..=4));
                if !q.is_empty() && q.demand().0 <= p.capacity * 4 {
                    break q;
                }
            }
        };
        let mut order = Order {
            id: OrderId(format!("{id:010}")),
            pickup: factories[pickup].id.clone(),
            delivery: factories[delivery].id.clone(),
            quantity,
            creation_time: creation,
            committed_completion_time: creation + p.lead_time,
            load_time: 0,
            unload_time: 0,
        };
        let items = explode_order(&order, config.omega).expect("non-empty quantity");
        order.load_time = items.iter().map(|i| i.load_time).sum();
        order.unload_time = items.iter().map(|i| i.unload_time).sum();
        orders.push(order);
    }

    let network = RoadNetwork::new(factories, edges).expect("generated network is complete");
    Ok(Instance::new(network, fleet, orders, config)?)
}

fn round_to(x: f64, scale: f64) -> f64 {
    libm::round(x * scale) / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let p = GeneratorParams { seed: 7, ..GeneratorParams::default() };
        let a = generate_instance(&p, SimConfig::default()).unwrap();
        let b = generate_instance(&p, SimConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&GeneratorParams { seed: 8, ..p }, SimConfig::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn default_lead_time_is_four_hours() {
        let inst = generate_instance(&GeneratorParams::default(), SimConfig::default()).unwrap();
        assert!(inst.orders.iter().all(|o| o.committed_completion_time - o.creation_time == 14_400));
        assert_eq!(inst.orders.len(), 50);
        assert_eq!(inst.fleet.len(), 5);
    }

    #[test]
    fn triangle_inequality_within_slack() {
        let p = GeneratorParams { factories: 8, ..GeneratorParams::default() };
        let inst = generate_instance(&p, SimConfig::default()).unwrap();
        let net = &inst.network;
        let bound = (1.0 + p.slack) * 1.0001;
        for a in 0..8 {
            for b in 0..8 {
                for c in 0..8 {
                    if a != b && b != c && a != c {
                        let direct = net.distance_idx(a, c);
                        let via = net.distance_idx(a, b) + net.distance_idx(b, c);
                        assert!(direct <= bound * via + 0.1, "{direct} > {bound} * {via}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_zero_orders() {
        let p = GeneratorParams { orders: 0, ..GeneratorParams::default() };
        assert_eq!(generate_instance(&p, SimConfig::default()), Err(GenerateError::NonPositive("orders")));
    }
}
