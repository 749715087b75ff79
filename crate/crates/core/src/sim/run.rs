use alloc::string::String;

use serde::{Deserialize, Serialize};

use super::event::EventLog;
use super::state::{AbortReason, EpochOutcome, RunLedger, RunOutcome, SimState};
use crate::config::SimConfig;
use crate::domain::RoadNetwork;
use crate::eval::{score, ScoreReport};
use crate::instance::Instance;
use crate::plan::DispatchPlan;
use crate::snapshot::Snapshot;

/// Static data a dispatcher may consult besides the snapshot.
#[derive(Clone, Copy, Debug)]
pub struct PlanningContext<'a> {
    pub network: &'a RoadNetwork,
    pub config: &'a SimConfig,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", content = "detail", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolicyError {
    #[error("dispatcher exceeded its time limit")]
    Timeout,
    #[error("dispatcher protocol error: {0}")]
    Protocol(String),
    #[error("dispatcher failed: {0}")]
    Other(String),
}

/// A dispatching algorithm, called once per epoch.
pub trait DispatchPolicy {
    fn dispatch(&mut self, ctx: &PlanningContext<'_>, snapshot: &Snapshot) -> Result<DispatchPlan, PolicyError>;
}

impl<P: DispatchPolicy + ?Sized> DispatchPolicy for &mut P {
    fn dispatch(&mut self, ctx: &PlanningContext<'_>, snapshot: &Snapshot) -> Result<DispatchPlan, PolicyError> {
        (**self).dispatch(ctx, snapshot)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub epochs: u32,
    pub ledger: RunLedger,
    pub report: ScoreReport,
    pub log: EventLog,
}

impl RunResult {
    pub fn is_finished(&self) -> bool {
        self.outcome == RunOutcome::Finished
    }
}

/// Runs the dispatch loop until every order is delivered or the run aborts.
pub fn run_to_completion<P: DispatchPolicy + ?Sized>(instance: &Instance, policy: &mut P) -> RunResult {
    let mut sim = SimState::new(instance.clone());
    let ctx = PlanningContext { network: &instance.network, config: &instance.config };
    let mut snapshot = sim.snapshot();
    loop {
        let epoch = sim.epoch();
        let plan = match policy.dispatch(&ctx, &snapshot) {
            Ok(plan) => plan,
            Err(error) => {
                sim.abort(AbortReason::Policy { epoch, error });
                break;
            }
        };
        if let Err(violations) = sim.apply_dispatch(&plan) {
            sim.abort(AbortReason::Validation { epoch, violations });
            break;
        }
        match sim.advance_epoch() {
            EpochOutcome::Continue(next) => snapshot = next,
            EpochOutcome::Finished | EpochOutcome::Aborted(_) => break,
        }
    }
    finish(sim)
}

/// Packages a stopped simulation into a scored result.
pub fn finish(sim: SimState) -> RunResult {
    let config = sim.config().clone();
    let orders = sim.instance().orders.clone();
    let (log, ledger, outcome, epochs) = sim.into_parts();
    let outcome = outcome.expect("simulation has stopped");
    let report = score(&ledger, &orders, &config, outcome == RunOutcome::Finished);
    RunResult { outcome, epochs, ledger, report, log }
}
