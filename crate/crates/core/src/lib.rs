//! Dynamic pickup and delivery (DPDP) core.
//!
//! Everything in this crate is pure computation over owned values and only
//! needs `alloc`: the domain model and pallet arithmetic, the epoch-driven
//! simulator, the dispatch validator and objective scorers, and the bundled
//! dispatch policies. File formats, the external-process protocol and the
//! CLI live in the `dpdp` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod config;
pub mod domain;
pub mod eval;
pub mod generate;
pub mod instance;
pub mod plan;
mod rng;
pub mod sim;
pub mod snapshot;
pub mod solvers;
#[cfg(test)]
mod testkit;

pub use config::{CompletionSemantics, ServiceTimes, ShiftWindow, SimConfig};
pub use domain::{
    demand, explode_order, order_status, split_legality, DomainError, Factory, FactoryId, ItemId,
    ItemStatus, Order, OrderId, OrderItem, PalletQuantity, PalletType, Quarters, RoadNetwork,
    RouteEdge, Vehicle, VehicleId,
};
pub use eval::{replay_score, score, validate_dispatch, verify_run, OracleFailure, ScoreReport, Violation, ViolationCode};
pub use generate::{generate_instance, GenerateError, GeneratorParams};
pub use instance::{Instance, InstanceError};
pub use plan::{DispatchPlan, Stop, VehiclePlan};
pub use sim::{
    run_to_completion, AbortReason, DispatchPolicy, EpochOutcome, EventKind, EventLog, RunLedger,
    PlanningContext, PolicyError, RunOutcome, RunResult, SimEvent, SimState,
};
pub use snapshot::{ItemInfo, PositionView, Snapshot, VehicleView};

/// Simulation clock unit: whole seconds since the start of the horizon.
pub type Seconds = i64;
