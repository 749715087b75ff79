//! Immutable description of one benchmark day.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::config::{ConfigError, SimConfig};
use crate::domain::{DomainError, Order, RoadNetwork, Vehicle};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstanceError {
    #[error("fleet is empty")]
    EmptyFleet,
    #[error("order list is empty")]
    NoOrders,
    #[error("order {order} references unknown factory {factory}")]
    UnknownFactory { order: String, factory: String },
    #[error("duplicate order id {0}")]
    DuplicateOrder(String),
    #[error("duplicate vehicle id {0}")]
    DuplicateVehicle(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub network: RoadNetwork,
    pub fleet: Vec<Vehicle>,
    /// Sorted by creation time (stable with respect to input order).
    pub orders: Vec<Order>,
    pub config: SimConfig,
}

impl Instance {
    pub fn new(
        network: RoadNetwork,
        fleet: Vec<Vehicle>,
        mut orders: Vec<Order>,
        config: SimConfig,
    ) -> Result<Self, InstanceError> {
        config.validate()?;
        if fleet.is_empty() {
            return Err(InstanceError::EmptyFleet);
        }
        if orders.is_empty() {
            return Err(InstanceError::NoOrders);
        }
        let mut vehicle_ids = BTreeSet::new();
        for v in &fleet {
            v.validate()?;
            if !vehicle_ids.insert(&v.id) {
                return Err(InstanceError::DuplicateVehicle(v.id.0.clone()));
            }
        }
        let mut order_ids = BTreeSet::new();
        for o in &orders {
            o.validate()?;
            if !order_ids.insert(&o.id) {
                return Err(InstanceError::DuplicateOrder(o.id.0.clone()));
            }
            for f in [&o.pickup, &o.delivery] {
                if !network.contains(f) {
                    return Err(InstanceError::UnknownFactory { order: o.id.0.clone(), factory: f.0.clone() });
                }
            }
        }
        orders.sort_by_key(|o| o.creation_time);
        Ok(Self { network, fleet, orders, config })
    }

    pub fn with_config(mut self, config: SimConfig) -> Result<Self, InstanceError> {
        config.validate()?;
        self.config = config;
        Ok(self)
    }
}
