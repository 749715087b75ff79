//! Rebuilds the objective from the event log alone.
//!
//! Nothing here reads engine state: vehicle positions, dock occupancy, cargo
//! stacks and item lifecycles are replayed from scratch, so agreement with
//! the engine ledger is a meaningful check.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::score::ScoreReport;
use crate::config::{CompletionSemantics, ServiceTimes, SimConfig};
use crate::domain::{explode_order, explode_order_with_table_times, FactoryId, ItemId, OrderId, Quarters, VehicleId};
use crate::instance::Instance;
use crate::sim::{EventKind, EventLog, RunResult, SimEvent};
use crate::Seconds;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("replay failed at event {index}: {message}")]
pub struct OracleFailure {
    /// Position in the log; equals the log length for end-of-log checks.
    pub index: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Where {
    Nowhere,
    At(FactoryId),
    Docked(FactoryId),
    Moving { to: FactoryId, eta: Seconds },
}

struct Shadow {
    place: Where,
    stack: Vec<ItemId>,
    load: Quarters,
    capacity: Quarters,
    arrived: Seconds,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Life {
    Pending,
    Released,
    Loaded,
    Delivered,
}

struct ItemFacts {
    order: OrderId,
    pickup: FactoryId,
    delivery: FactoryId,
    demand: Quarters,
    life: Life,
}

struct OrderFacts {
    open: usize,
    released: bool,
    latest_arrival: Seconds,
}

/// Replays `log` against `instance` and scores it. `complete` marks whether
/// the run is expected to have delivered everything.
pub fn replay_score(log: &EventLog, instance: &Instance, config: &SimConfig, complete: bool) -> Result<ScoreReport, OracleFailure> {
    let network = &instance.network;
    let mut items: BTreeMap<ItemId, ItemFacts> = BTreeMap::new();
    let mut orders: BTreeMap<OrderId, OrderFacts> = BTreeMap::new();
    for order in &instance.orders {
        let exploded = match config.service_times {
            ServiceTimes::Omega => explode_order(order, config.omega),
            ServiceTimes::OrderTable => explode_order_with_table_times(order),
        }
        .map_err(|e| OracleFailure { index: 0, message: format!("{e}") })?;
        orders.insert(order.id.clone(), OrderFacts { open: exploded.len(), released: false, latest_arrival: 0 });
        for item in exploded {
            items.insert(
                item.id,
                ItemFacts {
                    order: order.id.clone(),
                    pickup: order.pickup.clone(),
                    delivery: order.delivery.clone(),
                    demand: item.demand,
                    life: Life::Pending,
                },
            );
        }
    }
    let mut fleet: BTreeMap<VehicleId, Shadow> = instance
        .fleet
        .iter()
        .map(|v| {
            let shadow = Shadow {
                place: Where::Nowhere,
                stack: Vec::new(),
                load: Quarters::ZERO,
                capacity: v.capacity_quarters(),
                arrived: 0,
            };
            (v.id.clone(), shadow)
        })
        .collect();
    let mut docks: BTreeMap<FactoryId, u32> = BTreeMap::new();
    let mut completions: BTreeMap<OrderId, Seconds> = BTreeMap::new();
    let mut distances: BTreeMap<VehicleId, f64> = instance.fleet.iter().map(|v| (v.id.clone(), 0.0)).collect();
    let mut last_time = Seconds::MIN;

    for (index, SimEvent { time, kind }) in log.iter().enumerate() {
        let time = *time;
        let fail = |message: String| OracleFailure { index, message };
        if time < last_time {
            return Err(fail(format!("time goes backwards to {time}")));
        }
        last_time = time;
        match kind {
            EventKind::OrderReleased { order_id } => {
                let facts = orders.get_mut(order_id).ok_or_else(|| fail(format!("unknown order {order_id}")))?;
                if facts.released {
                    return Err(fail(format!("order {order_id} released twice")));
                }
                facts.released = true;
                for item in items.values_mut().filter(|i| i.order == *order_id) {
                    item.life = Life::Released;
                }
            }
            EventKind::VehicleArrived { vehicle_id, factory_id } => {
                if !network.contains(factory_id) {
                    return Err(fail(format!("unknown factory {factory_id}")));
                }
                let v = fleet.get_mut(vehicle_id).ok_or_else(|| fail(format!("unknown vehicle {vehicle_id}")))?;
                match &v.place {
                    Where::Nowhere if time == 0 => {}
                    Where::Moving { to, eta } if to == factory_id && *eta == time => {}
                    other => {
                        return Err(fail(format!("{vehicle_id} cannot arrive at {factory_id} from {other:?}")));
                    }
                }
                v.place = Where::At(factory_id.clone());
                v.arrived = time;
            }
            EventKind::DockAllocated { vehicle_id, factory_id } => {
                let v = fleet.get_mut(vehicle_id).ok_or_else(|| fail(format!("unknown vehicle {vehicle_id}")))?;
                if v.place != Where::At(factory_id.clone()) {
                    return Err(fail(format!("{vehicle_id} docks at {factory_id} without being there")));
                }
                let used = docks.entry(factory_id.clone()).or_default();
                *used += 1;
                let cap = network.factory_by_id(factory_id).map_or(0, |f| f.dock_count);
                if *used > cap {
                    return Err(fail(format!("{factory_id} has {used} vehicles docked but {cap} docks")));
                }
                v.place = Where::Docked(factory_id.clone());
            }
            EventKind::ItemDelivered { vehicle_id, factory_id, item_id } => {
                let item = items.get_mut(item_id).ok_or_else(|| fail(format!("unknown item {item_id}")))?;
                if item.life != Life::Loaded {
                    return Err(fail(format!("item {item_id} delivered before being loaded")));
                }
                let v = fleet.get_mut(vehicle_id).ok_or_else(|| fail(format!("unknown vehicle {vehicle_id}")))?;
                if v.place != Where::Docked(factory_id.clone()) {
                    return Err(fail(format!("{vehicle_id} unloads at {factory_id} without a dock")));
                }
                if v.stack.last() != Some(item_id) {
                    return Err(fail(format!("item {item_id} is not on top of {vehicle_id}'s stack")));
                }
                if item.delivery != *factory_id {
                    return Err(fail(format!("item {item_id} delivered to the wrong factory {factory_id}")));
                }
                v.stack.pop();
                v.load -= item.demand;
                item.life = Life::Delivered;
                let facts = orders.get_mut(&item.order).expect("item order exists");
                facts.open -= 1;
                facts.latest_arrival = facts.latest_arrival.max(v.arrived);
                if facts.open == 0 {
                    let done = match config.completion {
                        CompletionSemantics::UnloadDone => time,
                        CompletionSemantics::Arrival => facts.latest_arrival,
                    };
                    completions.insert(item.order.clone(), done);
                }
            }
            EventKind::ItemLoaded { vehicle_id, factory_id, item_id } => {
                let v = fleet.get_mut(vehicle_id).ok_or_else(|| fail(format!("unknown vehicle {vehicle_id}")))?;
                if v.place != Where::Docked(factory_id.clone()) {
                    return Err(fail(format!("{vehicle_id} loads at {factory_id} without a dock")));
                }
                let item = items.get_mut(item_id).ok_or_else(|| fail(format!("unknown item {item_id}")))?;
                if item.life != Life::Released {
                    return Err(fail(format!("item {item_id} loaded while not waiting for pickup")));
                }
                if item.pickup != *factory_id {
                    return Err(fail(format!("item {item_id} loaded at the wrong factory {factory_id}")));
                }
                v.load += item.demand;
                if v.load > v.capacity {
                    return Err(fail(format!("{vehicle_id} carries {} over capacity {}", v.load, v.capacity)));
                }
                v.stack.push(item_id.clone());
                item.life = Life::Loaded;
            }
            EventKind::ServiceDone { vehicle_id, factory_id } => {
                let v = fleet.get_mut(vehicle_id).ok_or_else(|| fail(format!("unknown vehicle {vehicle_id}")))?;
                if v.place != Where::Docked(factory_id.clone()) {
                    return Err(fail(format!("{vehicle_id} finishes service at {factory_id} without a dock")));
                }
                *docks.get_mut(factory_id).expect("dock was taken") -= 1;
                v.place = Where::At(factory_id.clone());
            }
            EventKind::VehicleDeparted { vehicle_id, from_factory_id, to_factory_id } => {
                let v = fleet.get_mut(vehicle_id).ok_or_else(|| fail(format!("unknown vehicle {vehicle_id}")))?;
                if v.place != Where::At(from_factory_id.clone()) {
                    return Err(fail(format!("{vehicle_id} departs {from_factory_id} from {:?}", v.place)));
                }
                let (Some(d), Some(tt)) =
                    (network.distance(from_factory_id, to_factory_id), network.travel_time(from_factory_id, to_factory_id))
                else {
                    return Err(fail(format!("no route {from_factory_id} -> {to_factory_id}")));
                };
                *distances.get_mut(vehicle_id).expect("fleet vehicle") += d;
                v.place = Where::Moving { to: to_factory_id.clone(), eta: time + tt };
            }
            EventKind::EpochBoundary { .. } => {}
        }
    }

    let end = log.len();
    if complete {
        if let Some((id, _)) = orders.iter().find(|(_, o)| o.open > 0) {
            return Err(OracleFailure { index: end, message: format!("order {id} never completed") });
        }
    }
    Ok(ScoreReport::from_totals(&completions, &distances, &instance.orders, config.lambda, complete))
}

/// Replays a run's log and checks that it agrees with the engine's report
/// field for field.
pub fn verify_run(run: &RunResult, instance: &Instance) -> Result<ScoreReport, OracleFailure> {
    let replayed = replay_score(&run.log, instance, &instance.config, run.report.complete)?;
    if replayed != run.report {
        return Err(OracleFailure {
            index: run.log.len(),
            message: format!("replayed report differs from engine report: {replayed:?} vs {:?}", run.report),
        });
    }
    Ok(replayed)
}
