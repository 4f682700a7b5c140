//! Seeded instance generators and the randomized verification suite.

mod checks;
pub mod gen;
mod suite;

pub use gen::{gen_nested, gen_pair, gen_psd, gen_subspace, SpectrumKind, SpectrumSpec};
pub use suite::{run_suite, CheckReport, ControlReport, SuiteConfig, TheoremReport, VerificationReport, REPORT_SCHEMA};
