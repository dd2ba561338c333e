use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gauss_malliavin::constants::{constant_table, ConstantGrid};
use gauss_malliavin::hermite::{chaos_identity_check, expand};
use gauss_malliavin::malliavin::{derivative_norm, mean_derivative, sobolev_norm, SobolevKind, SobolevNormRequest};
use gauss_malliavin::verify::{demonstrate_counterexample, exit, run_suite, write_reports, CheckId, Grids, Status, VerifyConfig};
use gauss_malliavin::{Error, PolyFunctional};

#[derive(Parser)]
#[command(name = "malliavin-verify", version, about = "Checks Gaussian Sobolev, Poincaré and chaos inequalities on polynomial functionals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite and write report.json and summary.csv.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Restrict to these checks (repeatable).
        #[arg(long = "check")]
        checks: Vec<String>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
    /// ‖D^ℓF‖_q for ℓ ≤ k plus the graph and full Sobolev norms.
    Norms {
        #[arg(long)]
        functional: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: f64,
    },
    /// Hermite expansion, chaos norms and chaos-identity residuals.
    Chaos {
        #[arg(long)]
        functional: PathBuf,
        /// Largest order for the identity residuals.
        #[arg(long, default_value_t = 4)]
        max_order: u32,
    },
    /// Table of the explicit constants.
    Constants {
        /// JSON file with any of the keys q, l, k, n.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Exhibit the failure of the L¹ interpolation inequality for f(x) = x.
    Counterexample {
        #[arg(long = "k", value_delimiter = ',')]
        k: Vec<f64>,
        #[arg(long = "rho", value_delimiter = ',')]
        rho: Vec<f64>,
    },
    /// Run one check with a parameter grid replaced by a range.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        /// a:b:step, both ends included.
        #[arg(long)]
        range: String,
        #[arg(long)]
        check: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepParam {
    Q,
    Rho,
    Eps,
    T,
    Ell,
    K,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(exit::CONFIG_ERROR as u8);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_integration_failure() { exit::INTEGRATION_FAILURE } else { exit::CONFIG_ERROR };
            ExitCode::from(code as u8)
        }
    }
}

fn run(cmd: Command) -> gauss_malliavin::Result<i32> {
    match cmd {
        Command::Verify { config, seed, checks, out } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if !checks.is_empty() {
                cfg.checks = checks.iter().map(|c| c.parse()).collect::<gauss_malliavin::Result<_>>()?;
            }
            cfg.validate()?;
            let report = run_suite(&cfg)?;
            write_reports(&report, &out)?;
            for c in &report.checks {
                let s = &c.summary;
                eprintln!(
                    "{:<20} rows {:>6}  pass {:>6}  fail {:>4}  integration {:>3}  falsified {:>3}  exploratory {:>4}",
                    c.check.as_str(),
                    s.rows,
                    s.passed,
                    s.failed,
                    s.integration_failures,
                    s.falsified,
                    s.exploratory
                );
            }
            println!("{}", out.join("report.json").display());
            Ok(report.exit_code)
        }
        Command::Norms { functional, k, q } => {
            let f = load_functional(&functional)?;
            let cfg = gauss_malliavin::QuadratureConfig::default();
            let mut orders = Vec::new();
            for l in 0..=k {
                let r = derivative_norm(&f, l, q, &cfg)?;
                orders.push(json!({ "order": l, "value": r.value, "error": r.error_estimate, "method": r.method }));
            }
            let mut out = json!({ "k": k, "q": q, "derivatives": orders });
            if k >= 1 {
                for (name, kind) in [("graph", SobolevKind::Graph), ("full", SobolevKind::Full)] {
                    let n = sobolev_norm(&f, &SobolevNormRequest { k, q, kind }, &cfg)?;
                    out[name] = json!({ "value": n.value, "error": n.error_estimate });
                }
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(exit::PASS)
        }
        Command::Chaos { functional, max_order } => {
            let f = load_functional(&functional)?;
            let comps: Vec<Value> = expand(&f)
                .iter()
                .map(|e| {
                    let norms: Vec<Value> = (0..=e.max_order()).map(|k| json!({ "order": k, "l2_sq": e.chaos_l2_sq(k).to_string() })).collect();
                    json!({ "expansion": e.to_json(), "chaos_l2_sq": norms })
                })
                .collect();
            let residuals = (0..=max_order)
                .map(|k| Ok(json!({ "k": k, "residual": chaos_identity_check(&f, k, &mean_derivative(&f, k as usize))? })))
                .collect::<gauss_malliavin::Result<Vec<_>>>()?;
            println!("{}", serde_json::to_string_pretty(&json!({ "components": comps, "identity_residuals": residuals }))?);
            Ok(exit::PASS)
        }
        Command::Constants { grid, format } => {
            let grid: ConstantGrid = match grid {
                Some(p) => serde_json::from_str(&read(&p)?).map_err(|e| Error::Config(e.to_string()))?,
                None => ConstantGrid::default(),
            };
            let table = constant_table(&grid);
            match format {
                Format::Csv => print!("{}", table.to_csv()),
                Format::Json => println!("{}", serde_json::to_string_pretty(&table)?),
            }
            Ok(exit::PASS)
        }
        Command::Counterexample { k, rho } => {
            let d = Grids::default();
            let k = if k.is_empty() { d.counterexample_k } else { k };
            let rho = if rho.is_empty() { d.counterexample_rho } else { rho };
            if k.iter().chain(&rho).any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::Config("K and ρ must be positive".into()));
            }
            let report = demonstrate_counterexample(&k, &rho, &gauss_malliavin::QuadratureConfig::default());
            for r in report.rows_with("witness") {
                println!("K = {:<8} ρ = {:<12.6} rhs = {:.6} < lhs = {:.6}  {:?}", r.params["K"], r.params["rho"], r.rhs.unwrap_or(f64::NAN), r.lhs.unwrap_or(f64::NAN), r.status);
            }
            let confirmed = report.rows_with("witness").all(|r| r.status == Status::FalsifiedAsExpected) && report.summary.failed == 0;
            println!("{}", if confirmed { "FALSIFIED-AS-EXPECTED" } else { "NOT FALSIFIED" });
            Ok(if confirmed { exit::PASS } else { exit::VIOLATION })
        }
        Command::Sweep { param, range, check, config, out } => {
            let mut cfg = load_config(config.as_deref())?;
            let id: CheckId = check.parse()?;
            let values = parse_range(&range)?;
            let g = &mut cfg.grids;
            let ints = || -> gauss_malliavin::Result<Vec<u32>> {
                values
                    .iter()
                    .map(|v| if v.fract() == 0.0 && *v >= 0.0 { Ok(*v as u32) } else { Err(Error::Config(format!("{v} is not a nonnegative integer"))) })
                    .collect()
            };
            match param {
                SweepParam::Q => {
                    g.q = values.clone();
                    g.finite_dim_q = values.clone();
                    g.ou_q = values.clone();
                }
                SweepParam::Rho => g.rho = values.clone(),
                SweepParam::Eps => g.eps = values.clone(),
                SweepParam::T => g.t = values.clone(),
                SweepParam::Ell => g.ell = ints()?,
                SweepParam::K => g.k = ints()?,
            }
            cfg.checks = vec![id];
            cfg.validate()?;
            let report = run_suite(&cfg)?;
            if let Some(dir) = out {
                write_reports(&report, &dir)?;
            }
            print!("{}", report.summary_csv());
            Ok(report.exit_code)
        }
    }
}

fn read(p: &Path) -> gauss_malliavin::Result<String> {
    fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))
}

fn load_config(p: Option<&Path>) -> gauss_malliavin::Result<VerifyConfig> {
    match p {
        Some(p) => VerifyConfig::from_json_str(&read(p)?),
        None => Ok(VerifyConfig::default()),
    }
}

fn load_functional(p: &Path) -> gauss_malliavin::Result<PolyFunctional> {
    let v: Value = serde_json::from_str(&read(p)?).map_err(|e| Error::Config(e.to_string()))?;
    PolyFunctional::from_json(&v).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
}

fn parse_range(s: &str) -> gauss_malliavin::Result<Vec<f64>> {
    let bad = || Error::Config(format!("range must look like a:b:step with step > 0 and a ≤ b, got `{s}`"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0 && a <= b && a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 10_000 {
        return Err(Error::Config(format!("range `{s}` has more than 10000 points")));
    }
    // Round to the step's precision so 0.1-steps print as 0.3, not 0.30000000000000004.
    let digits = (-step.log10().floor()).max(0.0) as i32 + 6;
    let scale = 10f64.powi(digits);
    Ok((0..=n).map(|i| ((a + i as f64 * step) * scale).round() / scale).collect())
}
