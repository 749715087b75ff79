use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::domain::{FactoryId, ItemId, OrderId, VehicleId};
use crate::Seconds;

/// One entry of the audit log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: Seconds,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    OrderReleased { order_id: OrderId },
    /// Also logged at time 0 for each vehicle's initial placement.
    VehicleArrived { vehicle_id: VehicleId, factory_id: FactoryId },
    DockAllocated { vehicle_id: VehicleId, factory_id: FactoryId },
    ItemDelivered { vehicle_id: VehicleId, factory_id: FactoryId, item_id: ItemId },
    ItemLoaded { vehicle_id: VehicleId, factory_id: FactoryId, item_id: ItemId },
    ServiceDone { vehicle_id: VehicleId, factory_id: FactoryId },
    VehicleDeparted { vehicle_id: VehicleId, from_factory_id: FactoryId, to_factory_id: FactoryId },
    EpochBoundary { epoch: u32 },
}

/// Time-ordered event log of one run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventLog {
    pub events: Vec<SimEvent>,
}

impl EventLog {
    pub fn push(&mut self, time: Seconds, kind: EventKind) {
        debug_assert!(self.events.last().is_none_or(|e| e.time <= time), "event log must be non-decreasing");
        self.events.push(SimEvent { time, kind });
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, SimEvent> {
        self.events.iter()
    }
}
