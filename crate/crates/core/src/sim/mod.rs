//! Epoch-driven discrete-event simulator.
//!
//! Each epoch the dispatcher gets a [`Snapshot`](crate::Snapshot), returns a
//! [`DispatchPlan`](crate::DispatchPlan), and the simulator replays the next
//! `epoch_length` seconds: order releases, arrivals, FCFS dock allocation,
//! unloading then loading, and departures.

mod event;
mod run;
mod state;

pub use event::{EventKind, EventLog, SimEvent};
pub use run::{finish, run_to_completion, DispatchPolicy, PlanningContext, PolicyError, RunResult};
pub use state::{AbortReason, EpochOutcome, RunLedger, RunOutcome, SimState};
