//! Dispatch output: per-vehicle destination and future stops.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::domain::{FactoryId, ItemId, VehicleId};
use crate::Seconds;

/// One planned factory visit.
///
/// `delivery_items` is in unload order (the first entry must be on top of
/// the cargo stack); `pickup_items` is in load order. The times are the
/// planner's estimates and do not drive the simulation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stop {
    pub factory_id: FactoryId,
    pub pickup_items: Vec<ItemId>,
    pub delivery_items: Vec<ItemId>,
    pub arrive_time: Seconds,
    pub leave_time: Seconds,
}

impl Stop {
    pub fn new(factory_id: FactoryId) -> Self {
        Self { factory_id, pickup_items: Vec::new(), delivery_items: Vec::new(), arrive_time: 0, leave_time: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.pickup_items.is_empty() && self.delivery_items.is_empty()
    }

    /// Same factory and identical lists; estimated times are ignored.
    pub fn same_work(&self, other: &Stop) -> bool {
        self.factory_id == other.factory_id
            && self.pickup_items == other.pickup_items
            && self.delivery_items == other.delivery_items
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VehiclePlan {
    pub destination: Option<Stop>,
    pub route: Vec<Stop>,
}

impl VehiclePlan {
    /// Destination followed by the route.
    pub fn stops(&self) -> impl Iterator<Item = &Stop> {
        self.destination.iter().chain(self.route.iter())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispatchPlan {
    pub vehicles: BTreeMap<VehicleId, VehiclePlan>,
}

impl DispatchPlan {
    pub fn get(&self, id: &VehicleId) -> Option<&VehiclePlan> {
        self.vehicles.get(id)
    }
}
