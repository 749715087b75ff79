//! Files, processes and the command line around `dpdp-core`.
//!
//! [`io`] reads and writes the instance tables and the JSON interaction
//! documents; [`harness`] runs policies embedded or as external programs
//! and collects benchmark matrices.

pub mod harness;
pub mod io;

pub use dpdp_core as core;
