//! Inequality verifier: runs every estimate over a seeded corpus and
//! reports margins, integration errors and pass/fail status per case.

mod checks;
mod config;
mod norms;
mod report;
mod suite;

pub use checks::{demonstrate_counterexample, Checker};
pub use config::{CheckId, CorpusConfig, Grids, Tolerances, VerifyConfig};
pub use norms::{NormCache, NormKind, Val};
pub use report::{exit, exit_code, CheckReport, CheckRow, CheckSummary, Status, SuiteReport};
pub use suite::{run_checks, run_suite, write_reports};
