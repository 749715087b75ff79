//! Dispatch validation and objective scoring.

mod replay;
mod score;
mod validate;
mod violation;
mod walk;

pub use replay::{replay_score, verify_run, OracleFailure};
pub use score::{score, ScoreReport};
pub use validate::{normalized_plan, validate_dispatch};
pub use violation::{Locus, Violation, ViolationCode};
pub use walk::{StackWalker, WalkIssue};
