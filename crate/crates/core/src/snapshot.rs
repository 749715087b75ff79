//! What the dispatcher sees at the start of an epoch.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::domain::{FactoryId, ItemId, ItemStatus, OrderId, PalletType, Quarters, VehicleId};
use crate::plan::Stop;
use crate::Seconds;

/// An item together with its order's routing and time data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemInfo {
    pub id: ItemId,
    pub pallet_type: PalletType,
    pub order_id: OrderId,
    pub demand: Quarters,
    pub pickup_factory_id: FactoryId,
    pub delivery_factory_id: FactoryId,
    pub creation_time: Seconds,
    pub committed_completion_time: Seconds,
    pub load_time: Seconds,
    pub unload_time: Seconds,
    pub status: ItemStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VehicleView {
    pub id: VehicleId,
    pub operation_time: u32,
    /// Standard pallets.
    pub capacity: u32,
    pub update_time: Seconds,
    /// `None` while in transit.
    pub cur_factory_id: Option<FactoryId>,
    /// Arrival at the current (or, in transit, the last) factory.
    pub arrive_time: Seconds,
    /// Departure from the current factory (estimated while still there).
    pub leave_time: Seconds,
    /// Bottom of the stack first.
    pub carrying_items: Vec<ItemId>,
    /// In transit: the locked next stop. At a factory: the stop being served,
    /// whose lists are committed. Parked: `None`.
    pub destination: Option<Stop>,
    /// Accepted future stops after the destination.
    pub route: Vec<Stop>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PositionView<'a> {
    Parked { factory: &'a FactoryId },
    /// Serving (or queued for) a committed stop.
    AtFactory { factory: &'a FactoryId, committed: &'a Stop },
    InTransit { destination: &'a Stop, eta: Seconds },
}

impl VehicleView {
    pub fn capacity_quarters(&self) -> Quarters {
        Quarters::from_pallets(self.capacity)
    }

    /// `None` for inconsistent combinations (in transit with no destination,
    /// or at one factory while committed to another).
    pub fn position(&self) -> Option<PositionView<'_>> {
        match (&self.cur_factory_id, &self.destination) {
            (None, Some(dest)) => Some(PositionView::InTransit { destination: dest, eta: dest.arrive_time }),
            (Some(f), None) => Some(PositionView::Parked { factory: f }),
            (Some(f), Some(dest)) if dest.factory_id == *f => {
                Some(PositionView::AtFactory { factory: f, committed: dest })
            }
            _ => None,
        }
    }

    pub fn is_destination_committed(&self) -> bool {
        matches!(self.position(), Some(PositionView::AtFactory { .. }))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub now: Seconds,
    /// Fleet order.
    pub vehicles: Vec<VehicleView>,
    /// Released, status 1, not on any plan or committed list.
    pub unallocated_items: Vec<ItemInfo>,
    /// Status 1 items already assigned, and status 2 items.
    pub ongoing_items: Vec<ItemInfo>,
}

impl Snapshot {
    pub fn vehicle(&self, id: &VehicleId) -> Option<&VehicleView> {
        self.vehicles.iter().find(|v| &v.id == id)
    }

    pub fn items(&self) -> impl Iterator<Item = &ItemInfo> {
        self.unallocated_items.iter().chain(self.ongoing_items.iter())
    }

    /// Largest capacity in the fleet (the fleet is homogeneous in practice).
    pub fn fleet_capacity(&self) -> Quarters {
        self.vehicles.iter().map(|v| v.capacity_quarters()).max().unwrap_or_default()
    }
}
