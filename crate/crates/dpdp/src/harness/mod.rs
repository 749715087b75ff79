//! Running policies against instances: embedded or external, one run or a
//! whole benchmark matrix.

pub mod bench;
pub mod external;
mod policy;
mod report;

pub use bench::{run_bench, write_bench_csv, BenchRow};
pub use external::{ExternalAlgorithm, ExternalConfig, ProcessMode, RoundError, INTERACTION_DIR_ENV, SUCCESS_TOKEN};
pub use policy::{simulate, PolicySpec, WallClock};
pub use report::{classify, exit, RunReport};
