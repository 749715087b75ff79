use dpdp_core::{AbortReason, PolicyError, RunOutcome, RunResult, ScoreReport};
use serde::{Deserialize, Serialize};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const DEADLINE: i32 = 10;
    pub const TIMEOUT: i32 = 11;
    pub const VALIDATION: i32 = 12;
    pub const PROTOCOL: i32 = 13;
    pub const HORIZON: i32 = 14;
}

/// Status name and exit code of a run outcome.
pub fn classify(outcome: &RunOutcome) -> (&'static str, i32) {
    match outcome {
        RunOutcome::Finished => ("FINISHED", exit::OK),
        RunOutcome::Aborted(reason) => match reason {
            AbortReason::DispatchDeadline { .. } => ("DISPATCH_DEADLINE", exit::DEADLINE),
            AbortReason::HorizonExceeded { .. } => ("HORIZON_EXCEEDED", exit::HORIZON),
            AbortReason::Validation { .. } => ("VALIDATION", exit::VALIDATION),
            AbortReason::Policy { error: PolicyError::Timeout, .. } => ("TIMEOUT", exit::TIMEOUT),
            AbortReason::Policy { error: PolicyError::Protocol(_), .. } => ("PROTOCOL", exit::PROTOCOL),
            AbortReason::Policy { error: PolicyError::Other(_), .. } => ("POLICY_FAILURE", exit::FAILURE),
        },
    }
}

/// What `simulate` writes: the outcome (with abort details such as the
/// violation list) and the score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub status: String,
    pub exit_code: i32,
    pub policy: String,
    pub epochs: u32,
    pub outcome: RunOutcome,
    pub score: ScoreReport,
}

impl RunReport {
    pub fn new(run: &RunResult, policy: &str) -> Self {
        let (status, exit_code) = classify(&run.outcome);
        RunReport {
            status: status.to_owned(),
            exit_code,
            policy: policy.to_owned(),
            epochs: run.epochs,
            outcome: run.outcome.clone(),
            score: run.report.clone(),
        }
    }
}
