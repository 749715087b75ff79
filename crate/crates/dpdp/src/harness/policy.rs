use std::time::{Duration, Instant};

use dpdp_core::solvers::{Budget, GreedyPolicy, IdlePolicy, ThresholdConfig, ThresholdPolicy, VnsConfig, VnsPolicy};
use dpdp_core::{run_to_completion, DispatchPolicy, Instance, RunResult};

use super::external::{ExternalAlgorithm, ExternalConfig};

/// Stops a search once a wall-clock allowance, counted from the start of
/// each call, is used up.
#[derive(Clone, Copy, Debug)]
pub struct WallClock {
    limit: Duration,
    deadline: Instant,
}

impl WallClock {
    pub fn new(limit: Duration) -> Self {
        WallClock { limit, deadline: Instant::now() + limit }
    }
}

impl Budget for WallClock {
    fn start(&mut self) {
        self.deadline = Instant::now() + self.limit;
    }

    fn exhausted(&mut self) -> bool {
        Instant::now() >= self.deadline
    }
}

#[derive(Clone, Debug)]
pub enum PolicySpec {
    Idle,
    Greedy,
    Threshold(ThresholdConfig),
    /// Greedy followed by VNS. Without a wall-clock limit the search is
    /// bounded by its iteration cap only and is fully reproducible.
    Vns { config: VnsConfig, wall_clock: Option<Duration> },
    External(ExternalConfig),
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Idle => "idle",
            PolicySpec::Greedy => "greedy",
            PolicySpec::Threshold(_) => "threshold",
            PolicySpec::Vns { .. } => "vns",
            PolicySpec::External(_) => "external",
        }
    }

    pub fn build(&self) -> Box<dyn DispatchPolicy + Send> {
        match self {
            PolicySpec::Idle => Box::new(IdlePolicy),
            PolicySpec::Greedy => Box::new(GreedyPolicy),
            PolicySpec::Threshold(c) => Box::new(ThresholdPolicy::new(*c)),
            PolicySpec::Vns { config, wall_clock: None } => Box::new(VnsPolicy::new(config.clone())),
            PolicySpec::Vns { config, wall_clock: Some(limit) } => {
                Box::new(VnsPolicy::with_budget(config.clone(), Box::new(WallClock::new(*limit))))
            }
            PolicySpec::External(c) => Box::new(ExternalAlgorithm::new(c.clone())),
        }
    }

    /// Gives an external policy its own interaction subdirectory.
    pub fn isolated(&self, tag: &str) -> PolicySpec {
        match self {
            PolicySpec::External(c) => PolicySpec::External(ExternalConfig { dir: c.dir.join(tag), ..c.clone() }),
            other => other.clone(),
        }
    }
}

pub fn simulate(instance: &Instance, spec: &PolicySpec) -> RunResult {
    let mut policy = spec.build();
    run_to_completion(instance, policy.as_mut())
}
