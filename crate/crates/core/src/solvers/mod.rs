//! Bundled dispatch policies.
//!
//! All policies keep whatever the snapshot already plans and only add to or
//! reorder the editable part of each route.

mod fleet;
mod greedy;
mod route;
mod threshold;
mod vns;

pub use greedy::{greedy_plan, GreedyPolicy};
pub use threshold::{should_release, threshold_plan, ThresholdConfig, ThresholdPolicy};
pub use vns::{plan_cost, vns_improve, vns_improve_with, Budget, Neighborhood, Unlimited, VnsConfig, VnsError, VnsOutcome, VnsPolicy};

use crate::plan::DispatchPlan;
use crate::sim::{DispatchPolicy, PlanningContext, PolicyError};
use crate::snapshot::Snapshot;

/// Never dispatches anything; existing plans run on unchanged.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdlePolicy;

impl DispatchPolicy for IdlePolicy {
    fn dispatch(&mut self, _ctx: &PlanningContext<'_>, _snapshot: &Snapshot) -> Result<DispatchPlan, PolicyError> {
        Ok(DispatchPlan::default())
    }
}
