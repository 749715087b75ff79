//! Small hand-built fixtures for unit tests.

use alloc::format;
use alloc::vec::Vec;

use crate::config::SimConfig;
use crate::domain::{Factory, FactoryId, Order, OrderId, PalletQuantity, RoadNetwork, RouteEdge, Vehicle, VehicleId};
use crate::instance::Instance;
use crate::Seconds;

/// Factories `F0..F{n-1}` on a line, 10 km and 900 s per step.
pub(crate) fn line(n: usize, docks: u32) -> RoadNetwork {
    let factories: Vec<Factory> = (0..n)
        .map(|i| Factory { id: fid(i), longitude: i as f64, latitude: 0.0, dock_count: docks })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let steps = i.abs_diff(j) as i64;
                edges.push(RouteEdge {
                    route_code: format!("r{i}-{j}"),
                    from: fid(i),
                    to: fid(j),
                    distance: 10.0 * steps as f64,
                    travel_time: 900 * steps,
                });
            }
        }
    }
    RoadNetwork::new(factories, edges).unwrap()
}

pub(crate) fn fid(i: usize) -> FactoryId {
    FactoryId(format!("F{i}"))
}

pub(crate) fn vid(k: usize) -> VehicleId {
    VehicleId(format!("V_{k}"))
}

pub(crate) fn fleet(k: usize, capacity: u32) -> Vec<Vehicle> {
    (1..=k).map(|i| Vehicle { id: vid(i), capacity, operation_time: 24, gps_id: format!("G_{i}") }).collect()
}

pub(crate) fn order(id: &str, pickup: usize, delivery: usize, q: PalletQuantity, creation: Seconds, committed: Seconds) -> Order {
    Order {
        id: OrderId::from(id),
        pickup: fid(pickup),
        delivery: fid(delivery),
        quantity: q,
        creation_time: creation,
        committed_completion_time: committed,
        load_time: 0,
        unload_time: 0,
    }
}

pub(crate) fn instance(factories: usize, docks: u32, vehicles: usize, capacity: u32, orders: Vec<Order>) -> Instance {
    Instance::new(line(factories, docks), fleet(vehicles, capacity), orders, SimConfig::default()).unwrap()
}
