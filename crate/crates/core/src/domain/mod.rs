//! Value types for orders, items, vehicles and the road network.

mod ids;
mod network;
mod order;
mod quantity;

pub use ids::{FactoryId, ItemId, OrderId, VehicleId};
pub use network::{Factory, NetworkError, RoadNetwork, RouteEdge};
pub use order::{
    explode_order, explode_order_with_table_times, order_status, split_legality, ItemStatus,
    Order, OrderItem, PalletType, SplitError, SplitVerdict, SplitViolation, Vehicle,
};
pub use quantity::{demand, PalletQuantity, Quarters};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("order {0} has zero quantity")]
    ZeroQuantity(String),
    #[error("order {0} has identical pickup and delivery factory")]
    SameEndpoints(String),
    #[error("order {0}: committed completion time is not after creation time")]
    CommittedBeforeCreation(String),
    #[error("order status is undefined for an empty item list")]
    EmptyItemList,
    #[error("items belong to different orders ({0} and {1})")]
    MixedOrders(String, String),
    #[error("vehicle {0} has zero capacity")]
    ZeroCapacity(String),
    #[error("item status cannot move from {from} to {to}")]
    StatusRegression { from: u8, to: u8 },
}
