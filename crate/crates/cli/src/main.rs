use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use specshort::harness::{run_suite, SuiteConfig};
use specshort::kolmogorov::{kolmogorov_closed, kolmogorov_duality, kolmogorov_power, DEFAULT_N_MAX};
use specshort::order::spectral_leq;
use specshort::shorted::{short_at, short_schur};
use specshort::spectral_short::{spectral_short_closed, spectral_short_iterative, SpectralShortResult, DEFAULT_K_MAX};
use specshort::tol::Profile;
use specshort::{SymMatrix, Tolerances};

mod error;
mod io;

use error::CliError;
use io::{read_json, write_json, MatrixFile, SubspaceFile};

#[derive(Debug, Parser)]
#[command(name = "specshort", version, about = "Shorted operators, spectral shorted operators and the spectral order")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Tolerance preset the --tol-* flags start from.
    #[arg(long, global = true, env = "SPECSHORT_TOL_PROFILE", default_value = "default")]
    tol_profile: String,
    /// Relative width for grouping eigenvalues into one level.
    #[arg(long, global = true)]
    tol_eig: Option<f64>,
    /// Relative cutoff below which eigenvalues count as zero.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Threshold for counting a direction as common to two subspaces.
    #[arg(long, global = true)]
    tol_meet: Option<f64>,
    /// Stopping threshold for the iterative methods.
    #[arg(long, global = true)]
    tol_conv: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the verification suite.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Print the elapsed time to stderr.
    #[arg(long, global = true)]
    timing: bool,
}

impl Global {
    fn tolerances(&self) -> Result<Tolerances, CliError> {
        let profile: Profile = self.tol_profile.parse()?;
        let mut tol = Tolerances::from_profile(profile);
        if let Some(v) = self.tol_eig {
            tol.cluster_tol = v;
        }
        if let Some(v) = self.tol_rank {
            tol.rank_tol = v;
        }
        if let Some(v) = self.tol_meet {
            tol.meet_tol = v;
        }
        if let Some(v) = self.tol_conv {
            tol.conv_tol = v;
        }
        tol.validate()?;
        Ok(tol)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shorted operator of a PSD matrix to a subspace.
    Short {
        matrix: PathBuf,
        subspace: PathBuf,
        #[arg(long, value_enum, default_value_t = ShortChoice::At)]
        method: ShortChoice,
    },
    /// Spectral shorted operator of a PSD matrix to a subspace.
    SpectralShort {
        matrix: PathBuf,
        subspace: PathBuf,
        #[arg(long, value_enum, default_value_t = SpectralChoice::Closed)]
        method: SpectralChoice,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        k_max: u32,
    },
    /// Kolmogorov complexity of a vector under a PSD matrix.
    Kolmogorov {
        matrix: PathBuf,
        vector: PathBuf,
        #[arg(long, value_enum, default_value_t = KolmogorovChoice::Closed)]
        method: KolmogorovChoice,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: u32,
    },
    /// Decide whether A is below B in the spectral order. Exits 1 when not.
    Order { a: PathBuf, b: PathBuf },
    /// Run the randomized verification suite. Exits 1 on any failure.
    Verify {
        /// Dimensions as a range `2..=12` or a list `2,4,8`.
        #[arg(long, default_value = "2..=12", value_parser = parse_dims)]
        dims: Dims,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Replace an acceptance threshold, as `T3=1e-5` or `T3.agreement=1e-5`.
        #[arg(long = "threshold", value_parser = parse_override)]
        thresholds: Vec<(String, f64)>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ShortChoice {
    At,
    Schur,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpectralChoice {
    Closed,
    Iterative,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KolmogorovChoice {
    Closed,
    Power,
    Duality,
}

#[derive(Debug, Clone)]
struct Dims(Vec<usize>);

fn parse_dims(s: &str) -> Result<Dims, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad dimension '{t}': {e}"));
    let dims: Vec<usize> = if let Some((lo, hi)) = s.split_once("..=") {
        (parse(lo)?..=parse(hi)?).collect()
    } else {
        s.split(',').map(parse).collect::<Result<_, _>>()?
    };
    if dims.is_empty() || dims.contains(&0) {
        return Err("dimensions must be a nonempty list of positive integers".into());
    }
    Ok(Dims(dims))
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (key, value) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    let value: f64 = value.parse().map_err(|e| format!("bad threshold '{value}': {e}"))?;
    Ok((key.to_owned(), value))
}

/// A report to emit and the exit code that goes with it.
struct Outcome {
    report: Value,
    code: u8,
}

impl Outcome {
    fn ok<T: Serialize>(report: T) -> Self {
        Outcome { report: to_value(report), code: 0 }
    }
}

fn to_value<T: Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("report types always serialize")
}

fn load_matrix(path: &Path, tol: &Tolerances) -> Result<SymMatrix, CliError> {
    read_json::<MatrixFile>(path)?.to_matrix(tol)
}

fn spectral_report(r: &SpectralShortResult) -> Value {
    let levels: Vec<Value> = r.levels.iter().map(|l| json!({ "mu": l.mu, "rank": l.rank })).collect();
    json!({
        "rho": MatrixFile::from_matrix(&r.value),
        "method": r.method,
        "levels": levels,
        "nesting_residual": r.nesting_residual,
    })
}

fn run(command: &Command, global: &Global) -> Result<Outcome, CliError> {
    let tol = global.tolerances()?;
    match command {
        Command::Short { matrix, subspace, method } => {
            let a = load_matrix(matrix, &tol)?;
            let s = read_json::<SubspaceFile>(subspace)?.to_subspace(&tol)?;
            let report = match method {
                ShortChoice::At | ShortChoice::Schur => {
                    let r = if matches!(method, ShortChoice::At) { short_at(&a, &s, &tol)? } else { short_schur(&a, &s, &tol)? };
                    json!({ "sigma": MatrixFile::from_matrix(&r.value), "method": r.method, "residual_range": r.residual_range })
                }
                ShortChoice::Both => {
                    let at = short_at(&a, &s, &tol)?;
                    let schur = short_schur(&a, &s, &tol)?;
                    json!({
                        "sigma": MatrixFile::from_matrix(&at.value),
                        "method": "both",
                        "residual_range": at.residual_range,
                        "cross_residual": at.value.max_abs_diff(&schur.value),
                    })
                }
            };
            Ok(Outcome::ok(report))
        }
        Command::SpectralShort { matrix, subspace, method, k_max } => {
            let a = load_matrix(matrix, &tol)?;
            let s = read_json::<SubspaceFile>(subspace)?.to_subspace(&tol)?;
            let report = match method {
                SpectralChoice::Closed => spectral_report(&spectral_short_closed(&a, &s, &tol)?),
                SpectralChoice::Iterative => {
                    let it = spectral_short_iterative(&a, &s, *k_max, &tol)?;
                    let mut v = spectral_report(&it);
                    v["trace"] = to_value(&it.trace);
                    v
                }
                SpectralChoice::Both => {
                    let closed = spectral_short_closed(&a, &s, &tol)?;
                    let it = spectral_short_iterative(&a, &s, *k_max, &tol)?;
                    let mut v = spectral_report(&closed);
                    v["method"] = json!("both");
                    v["cross_residual"] = json!(closed.value.max_abs_diff(&it.value));
                    v["trace"] = to_value(&it.trace);
                    v
                }
            };
            Ok(Outcome::ok(report))
        }
        Command::Kolmogorov { matrix, vector, method, n_max } => {
            let a = load_matrix(matrix, &tol)?;
            let xi = read_json::<SubspaceFile>(vector)?.to_vector()?;
            let log = |k: f64| if k > 0.0 { json!(k.ln()) } else { json!("-inf") };
            let report = match method {
                KolmogorovChoice::Closed | KolmogorovChoice::Power => {
                    let r = if matches!(method, KolmogorovChoice::Closed) {
                        kolmogorov_closed(&a, &xi, &tol)?
                    } else {
                        kolmogorov_power(&a, &xi, *n_max, &tol)?
                    };
                    json!({
                        "value": r.value,
                        "K": log(r.value),
                        "method": r.method,
                        "trace": r.trace,
                        "replaced_by_closed_form": r.replaced_by_closed_form,
                    })
                }
                KolmogorovChoice::Duality => {
                    let (k, inverse) = kolmogorov_duality(&a, &xi, &tol)?;
                    json!({ "value": k, "K": log(k), "method": "duality", "reciprocal_rho_pseudo_inverse": inverse })
                }
            };
            Ok(Outcome::ok(report))
        }
        Command::Order { a, b } => {
            let a = load_matrix(a, &tol)?;
            let b = load_matrix(b, &tol)?;
            let cert = spectral_leq(&a, &b, &tol)?;
            let code = if cert.holds { 0 } else { 1 };
            Ok(Outcome { report: to_value(cert), code })
        }
        Command::Verify { dims, trials, thresholds } => {
            let config = SuiteConfig {
                dims: dims.0.clone(),
                trials: *trials,
                seed: global.seed,
                tol,
                overrides: thresholds.iter().cloned().collect::<BTreeMap<_, _>>(),
            };
            let report = run_suite(&config);
            let code = if report.passed() { 0 } else { 1 };
            Ok(Outcome { report: to_value(report), code })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli.command, &cli.global).and_then(|o| write_json(&o.report, cli.global.out.as_ref()).map(|()| o.code));
    if cli.global.timing {
        eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    }
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
