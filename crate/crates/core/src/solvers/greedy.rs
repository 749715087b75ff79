use super::fleet::{pending_orders, Fleet};
use super::route::Planner;
use crate::plan::DispatchPlan;
use crate::sim::{DispatchPolicy, PlanningContext, PolicyError};
use crate::snapshot::Snapshot;

/// Dispatches every waiting order at once by appending it to the end of the
/// route of the vehicle that can deliver it earliest without lateness, then
/// with the least extra driving.
#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyPolicy;

impl DispatchPolicy for GreedyPolicy {
    fn dispatch(&mut self, ctx: &PlanningContext<'_>, snapshot: &Snapshot) -> Result<DispatchPlan, PolicyError> {
        Ok(greedy_plan(ctx, snapshot))
    }
}

pub fn greedy_plan(ctx: &PlanningContext<'_>, snapshot: &Snapshot) -> DispatchPlan {
    let planner = Planner::new(ctx, snapshot);
    let mut fleet = Fleet::new(&planner);
    for order in pending_orders(&planner) {
        fleet.assign_order(&order);
    }
    fleet.into_plan()
}
