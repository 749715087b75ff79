use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{OrderId, VehicleId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    DestinationLocked,
    ListCommitted,
    CapacityExceeded,
    LifoViolation,
    IllegalSplit,
    UnknownId,
    DuplicateItem,
    OrphanedItem,
    MalformedRoute,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::DestinationLocked => "DESTINATION_LOCKED",
            ViolationCode::ListCommitted => "LIST_COMMITTED",
            ViolationCode::CapacityExceeded => "CAPACITY_EXCEEDED",
            ViolationCode::LifoViolation => "LIFO_VIOLATION",
            ViolationCode::IllegalSplit => "ILLEGAL_SPLIT",
            ViolationCode::UnknownId => "UNKNOWN_ID",
            ViolationCode::DuplicateItem => "DUPLICATE_ITEM",
            ViolationCode::OrphanedItem => "ORPHANED_ITEM",
            ViolationCode::MalformedRoute => "MALFORMED_ROUTE",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a violation was found. Stop index 0 is the destination.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locus {
    Vehicle(VehicleId),
    Stop { vehicle: VehicleId, index: usize },
    Order(OrderId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub locus: Locus,
    pub message: String,
}

impl Violation {
    pub fn new(code: ViolationCode, locus: Locus, message: impl Into<String>) -> Self {
        Self { code, locus, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.locus {
            Locus::Vehicle(v) => write!(f, "{} [vehicle {}]: {}", self.code, v, self.message),
            Locus::Stop { vehicle, index } => {
                write!(f, "{} [vehicle {} stop {}]: {}", self.code, vehicle, index, self.message)
            }
            Locus::Order(o) => write!(f, "{} [order {}]: {}", self.code, o, self.message),
        }
    }
}
