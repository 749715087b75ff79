use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::{DomainError, FactoryId, ItemId, OrderId, PalletQuantity, Quarters, VehicleId};
use crate::Seconds;

/// A pickup-and-delivery request as it appears in the order table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub id: OrderId,
    pub pickup: FactoryId,
    pub delivery: FactoryId,
    pub quantity: PalletQuantity,
    pub creation_time: Seconds,
    pub committed_completion_time: Seconds,
    /// Order-level loading time as listed in the order table.
    pub load_time: Seconds,
    /// Order-level unloading time as listed in the order table.
    pub unload_time: Seconds,
}

impl Order {
    pub fn demand(&self) -> Quarters {
        self.quantity.demand()
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.quantity.is_empty() {
            return Err(DomainError::ZeroQuantity(self.id.0.clone()));
        }
        if self.pickup == self.delivery {
            return Err(DomainError::SameEndpoints(self.id.0.clone()));
        }
        if self.committed_completion_time <= self.creation_time {
            return Err(DomainError::CommittedBeforeCreation(self.id.0.clone()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PalletType {
    #[serde(rename = "STANDARD")]
    Standard,
    #[serde(rename = "SMALL")]
    Small,
    #[serde(rename = "BOX")]
    Box,
}

impl PalletType {
    pub fn demand(self) -> Quarters {
        match self {
            PalletType::Standard => Quarters(4),
            PalletType::Small => Quarters(2),
            PalletType::Box => Quarters(1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PalletType::Standard => "STANDARD",
            PalletType::Small => "SMALL",
            PalletType::Box => "BOX",
        }
    }
}

/// Item lifecycle. Transitions only go forward: 0 → 1 → 2 → 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
#[repr(u8)]
pub enum ItemStatus {
    Initialized = 0,
    Generated = 1,
    Loaded = 2,
    Delivered = 3,
}

impl ItemStatus {
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Moves one step forward. Anything else is a lifecycle violation.
    pub fn advance(self, next: ItemStatus) -> Result<ItemStatus, DomainError> {
        if next.code() == self.code() + 1 {
            Ok(next)
        } else {
            Err(DomainError::StatusRegression { from: self.code(), to: next.code() })
        }
    }
}

impl From<ItemStatus> for u8 {
    fn from(s: ItemStatus) -> u8 {
        s.code()
    }
}

impl TryFrom<u8> for ItemStatus {
    type Error = InvalidStatus;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(ItemStatus::Initialized),
            1 => Ok(ItemStatus::Generated),
            2 => Ok(ItemStatus::Loaded),
            3 => Ok(ItemStatus::Delivered),
            other => Err(InvalidStatus(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InvalidStatus(pub u8);

impl fmt::Display for InvalidStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "item status {} is outside 0..=3", self.0)
    }
}

/// The smallest indivisible unit of cargo: one standard pallet, one small
/// pallet or one box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderItem {
    pub id: ItemId,
    pub order_id: OrderId,
    pub pallet_type: PalletType,
    pub demand: Quarters,
    pub load_time: Seconds,
    pub unload_time: Seconds,
    pub status: ItemStatus,
}

/// Homogeneous fleet member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: VehicleId,
    /// Standard pallets.
    pub capacity: u32,
    /// Hours.
    pub operation_time: u32,
    pub gps_id: String,
}

impl Vehicle {
    pub fn capacity_quarters(&self) -> Quarters {
        Quarters::from_pallets(self.capacity)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.capacity == 0 {
            return Err(DomainError::ZeroCapacity(self.id.0.clone()));
        }
        Ok(())
    }
}

fn item_types(q: &PalletQuantity) -> impl Iterator<Item = PalletType> {
    core::iter::repeat_n(PalletType::Standard, q.standard as usize)
        .chain(core::iter::repeat_n(PalletType::Small, q.small as usize))
        .chain(core::iter::repeat_n(PalletType::Box, q.boxes as usize))
}

fn item_id(order: &OrderId, ordinal: usize) -> ItemId {
    ItemId(format!("{}-{:04}", order, ordinal))
}

/// `omega * demand` rounded half-up to whole seconds (demand in quarters).
fn omega_time(omega: Seconds, demand: Quarters) -> Seconds {
    (omega * Seconds::from(demand.0) + 2).div_euclid(4)
}

/// Splits an order into one item per pallet or box, standard pallets first,
/// then small pallets, then boxes. Items start in status 1 (generated) and
/// load/unload in `omega * demand` seconds, rounded half-up.
pub fn explode_order(order: &Order, omega: Seconds) -> Result<Vec<OrderItem>, DomainError> {
    if order.quantity.is_empty() {
        return Err(DomainError::ZeroQuantity(order.id.0.clone()));
    }
    Ok(item_types(&order.quantity)
        .enumerate()
        .map(|(k, pallet_type)| {
            let t = omega_time(omega, pallet_type.demand());
            OrderItem {
                id: item_id(&order.id, k + 1),
                order_id: order.id.clone(),
                pallet_type,
                demand: pallet_type.demand(),
                load_time: t,
                unload_time: t,
                status: ItemStatus::Generated,
            }
        })
        .collect())
}

/// Like [`explode_order`] but distributes the order table's `load_time` and
/// `unload_time` over the items in proportion to demand. The per-item times
/// sum exactly to the order totals.
pub fn explode_order_with_table_times(order: &Order) -> Result<Vec<OrderItem>, DomainError> {
    let mut items = explode_order(order, 0)?;
    let total = Seconds::from(order.demand().0);
    let share = |order_total: Seconds, cum: Seconds| (2 * cum * order_total + total).div_euclid(2 * total);
    let mut cum = 0;
    for item in &mut items {
        let prev = cum;
        cum += Seconds::from(item.demand.0);
        item.load_time = share(order.load_time, cum) - share(order.load_time, prev);
        item.unload_time = share(order.unload_time, cum) - share(order.unload_time, prev);
    }
    Ok(items)
}

/// Order status is the minimum of its item statuses.
pub fn order_status(items: &[OrderItem]) -> Result<ItemStatus, DomainError> {
    let first = items.first().ok_or(DomainError::EmptyItemList)?;
    if let Some(other) = items.iter().find(|i| i.order_id != first.order_id) {
        return Err(DomainError::MixedOrders(first.order_id.0.clone(), other.order_id.0.clone()));
    }
    Ok(items.iter().map(|i| i.status).min().unwrap_or(first.status))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitViolation {
    /// The order fits in one vehicle but was divided.
    SplitNotAllowed,
    /// Some part (possibly the only one) exceeds the vehicle capacity.
    PartExceedsCapacity,
    EmptyPart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitVerdict {
    Legal,
    Violation(SplitViolation),
}

/// Structural problems with the proposed partition, reported separately
/// from the legality verdict.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("item {0} appears in more than one part")]
    DuplicateItem(String),
    #[error("item {0} is not covered by any part")]
    MissingItem(String),
    #[error("item {0} does not belong to the order")]
    UnknownItem(String),
}

/// Checks whether dividing an order's items into `parts` is allowed.
///
/// `items` is the set of items being partitioned; `order_demand` is the full
/// order demand used for the "only split what does not fit" rule.
pub fn split_legality<P: AsRef<[ItemId]>>(
    order_demand: Quarters,
    items: &[OrderItem],
    capacity: Quarters,
    parts: &[P],
) -> Result<SplitVerdict, SplitError> {
    let known: BTreeSet<&ItemId> = items.iter().map(|i| &i.id).collect();
    let mut seen = BTreeSet::new();
    for part in parts {
        for id in part.as_ref() {
            if !known.contains(id) {
                return Err(SplitError::UnknownItem(id.0.clone()));
            }
            if !seen.insert(id) {
                return Err(SplitError::DuplicateItem(id.0.clone()));
            }
        }
    }
    if let Some(missing) = known.iter().find(|id| !seen.contains(*id)) {
        return Err(SplitError::MissingItem(missing.0.clone()));
    }

    let demand_of = |id: &ItemId| items.iter().find(|i| &i.id == id).map(|i| i.demand).unwrap_or_default();
    let mut verdict = SplitVerdict::Legal;
    for part in parts {
        let part = part.as_ref();
        if part.is_empty() {
            return Ok(SplitVerdict::Violation(SplitViolation::EmptyPart));
        }
        if part.iter().map(demand_of).sum::<Quarters>() > capacity {
            verdict = SplitVerdict::Violation(SplitViolation::PartExceedsCapacity);
        }
    }
    if verdict == SplitVerdict::Legal && parts.len() > 1 && order_demand <= capacity {
        verdict = SplitVerdict::Violation(SplitViolation::SplitNotAllowed);
    }
    Ok(verdict)
}
