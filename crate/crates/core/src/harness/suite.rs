use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{negative_controls, Ctx, Property, PROPERTIES, THEOREMS};
use super::gen::mix;
use crate::tol::Tolerances;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Dimensions cycled through by trial index.
    pub dims: Vec<usize>,
    /// Trials per theorem.
    pub trials: usize,
    pub seed: u64,
    pub tol: Tolerances,
    /// Acceptance thresholds replacing the built-in ones, keyed by theorem id
    /// (`"T3"`) or by theorem id and check name (`"T3.agreement"`).
    pub overrides: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { dims: (2..=12).collect(), trials: 50, seed: 42, tol: Tolerances::default(), overrides: BTreeMap::new() }
    }
}

impl SuiteConfig {
    fn threshold(&self, id: &str, check: &str, default: f64) -> f64 {
        self.overrides.get(&format!("{id}.{check}")).or_else(|| self.overrides.get(id)).copied().unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub tolerance: f64,
    pub worst_residual: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub id: String,
    pub title: String,
    pub trials: usize,
    /// Trials in which at least one check exceeded its tolerance.
    pub failures: usize,
    pub worst_residual: f64,
    /// Sub-seed and dimension of the first failing trial.
    pub failing_seed: Option<u64>,
    pub failing_dim: Option<usize>,
    /// False when failures are reported but do not affect the verdict.
    pub gating: bool,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlReport {
    pub id: String,
    pub description: String,
    pub value: f64,
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub tolerances: Tolerances,
    pub theorems: Vec<TheoremReport>,
    pub properties: Vec<TheoremReport>,
    pub negative_controls: Vec<ControlReport>,
    pub total_failures: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.total_failures == 0
    }

    pub fn theorem(&self, id: &str) -> Option<&TheoremReport> {
        self.theorems.iter().chain(&self.properties).find(|t| t.id == id)
    }
}

/// Sub-seed of one trial; depends only on the suite seed, the theorem and the
/// trial index, never on execution order.
pub(crate) fn trial_seed(seed: u64, group: u64, trial: usize) -> u64 {
    mix(mix(seed ^ mix(group)) ^ trial as u64)
}

fn sanitize(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

fn run_group(items: &[Property], group_offset: u64, config: &SuiteConfig) -> Vec<TheoremReport> {
    let dims = if config.dims.is_empty() { vec![2] } else { config.dims.clone() };
    let jobs: Vec<(usize, usize)> = (0..items.len()).flat_map(|p| (0..config.trials).map(move |t| (p, t))).collect();
    let outcomes: Vec<(u64, usize, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(p, t)| {
            let seed = trial_seed(config.seed, group_offset + p as u64, t);
            let n = dims[t % dims.len()];
            let prop = &items[p];
            let mut ctx = Ctx::new(n, seed, config.tol);
            let values = match (prop.run)(&mut ctx) {
                Ok(v) => v.into_iter().map(sanitize).collect(),
                Err(_) => vec![f64::MAX; prop.checks.len()],
            };
            (seed, n, values)
        })
        .collect();

    items
        .iter()
        .enumerate()
        .map(|(p, prop)| {
            let mut checks: Vec<CheckReport> = prop
                .checks
                .iter()
                .map(|&(name, default)| CheckReport {
                    name: name.to_string(),
                    tolerance: config.threshold(prop.id, name, default),
                    worst_residual: 0.0,
                    failures: 0,
                })
                .collect();
            let mut failures = 0;
            let mut failing = None;
            for (seed, n, values) in &outcomes[p * config.trials..(p + 1) * config.trials] {
                assert_eq!(values.len(), checks.len(), "{} returned the wrong number of residuals", prop.id);
                let mut failed = false;
                for (check, &v) in checks.iter_mut().zip(values) {
                    check.worst_residual = check.worst_residual.max(v);
                    if v > check.tolerance {
                        check.failures += 1;
                        failed = true;
                    }
                }
                if failed {
                    failures += 1;
                    failing.get_or_insert((*seed, *n));
                }
            }
            TheoremReport {
                id: prop.id.to_string(),
                title: prop.title.to_string(),
                trials: config.trials,
                failures,
                worst_residual: checks.iter().map(|c| c.worst_residual).fold(0.0, f64::max),
                failing_seed: failing.map(|f| f.0),
                failing_dim: failing.map(|f| f.1),
                gating: prop.gating,
                checks,
            }
        })
        .collect()
}

/// Runs every theorem and property check over seeded random instances.
///
/// The report is a deterministic function of `config`.
pub fn run_suite(config: &SuiteConfig) -> VerificationReport {
    let theorems = run_group(THEOREMS, 0, config);
    let properties = run_group(PROPERTIES, 1000, config);
    let negative_controls = negative_controls(&config.tol);
    let total_failures = theorems.iter().chain(&properties).filter(|t| t.gating).map(|t| t.failures).sum::<usize>()
        + negative_controls.iter().filter(|c| !c.detected).count();
    VerificationReport {
        schema: REPORT_SCHEMA,
        seed: config.seed,
        dims: config.dims.clone(),
        trials: config.trials,
        tolerances: config.tol,
        theorems,
        properties,
        negative_controls,
        total_failures,
    }
}
