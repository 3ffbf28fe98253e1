//! Command-line front end: experiment runner plus the invariant
//! calculators.
//!
//! Exit status: 0 on success, 1 when an experiment's identity checks fail
//! (or on runtime errors), 2 on usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use quasireg::harness::{run_experiment, AggregateResult, ExperimentConfig};
use quasireg::invariants::{laplace_fit, rlct_symbolic, LaplaceConfig};
use quasireg::model::{builtin_models, check_sandwich, ModelConfig};
use quasireg::report::export_results;
use quasireg::{BlockStructure, Model};

#[derive(Parser)]
#[command(
    name = "quasireg",
    version,
    about = "Bayesian learning-curve experiments on quasi-regular models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print extra detail (diagnostics, grids, per-method uncertainty).
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Args)]
struct ConfigArg {
    /// Path to the TOML experiment config (positional).
    config_path: Option<PathBuf>,
    /// Path to the TOML experiment config (flag form).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn resolve(&self) -> Result<PathBuf, UsageError> {
        match (&self.config_path, &self.config) {
            (Some(p), None) | (None, Some(p)) => Ok(p.clone()),
            (Some(_), Some(_)) => Err(UsageError("pass the config once".into())),
            (None, None) => Err(UsageError("missing config file".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a replicated experiment and export records.csv / summary.json /
    /// plots.gp.
    Run {
        #[command(flatten)]
        config: ConfigArg,
        /// Override the master seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: QUASIREG_WORKERS or all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory override.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Symbolic real log canonical threshold of a block structure.
    Rlct {
        /// Block sizes, e.g. 1,2
        #[arg(long, value_name = "CSV-of-ints")]
        blocks: String,
    },
    /// Laplace-integral estimate of (lambda, m) for a model.
    Laplace {
        #[command(flatten)]
        config: ConfigArg,
        /// Canonical model by block sizes instead of a config file.
        #[arg(long, value_name = "CSV-of-ints")]
        blocks: Option<String>,
        #[arg(long, default_value_t = 1e2)]
        t_min: f64,
        #[arg(long, default_value_t = 1e5)]
        t_max: f64,
        #[arg(long, default_value_t = 12)]
        t_points: usize,
        /// Monte Carlo points per grid value.
        #[arg(long, default_value_t = 100_000)]
        mc_per_t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Probe the quasi-regular sandwich bound of a model.
    Sandwich {
        /// Model name, e.g. example1, canonical(1,2), regular(3).
        model: String,
        /// Force a block structure (probing models without one).
        #[arg(long, value_name = "CSV-of-ints")]
        blocks: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Half-width of the parameter box.
        #[arg(long)]
        w_max: Option<f64>,
    },
    /// List the built-in model zoo with known invariants.
    ListModels,
}

struct UsageError(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            if let Some(UsageError(msg)) = err.downcast_ref::<UsageError>() {
                eprintln!("usage error: {msg}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {err:#}");
                ExitCode::from(1)
            }
        }
    }
}

impl std::fmt::Debug for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            out,
        } => {
            let path = config.resolve()?;
            let mut cfg = ExperimentConfig::from_path(&path)
                .with_context(|| format!("loading {}", path.display()))?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if let Some(workers) = workers.or_else(workers_from_env) {
                cfg.workers = workers;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let agg = run_experiment(&cfg)?;
            print_aggregate(&agg, cli.verbose);
            let files = export_results(&agg, &cfg.output_dir)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            if agg.all_checks_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                println!("one or more checks FAILED");
                Ok(ExitCode::from(1))
            }
        }
        Command::Rlct { blocks } => {
            let sizes = parse_blocks(&blocks)?;
            let structure = BlockStructure::new(&sizes)?;
            println!("{}", rlct_symbolic(&structure));
            Ok(ExitCode::SUCCESS)
        }
        Command::Laplace {
            config,
            blocks,
            t_min,
            t_max,
            t_points,
            mc_per_t,
            seed,
        } => {
            let model = match blocks {
                Some(list) => {
                    let sizes = parse_blocks(&list)?;
                    Model::canonical(&sizes)?
                }
                None => {
                    let path = config.resolve()?;
                    let cfg = ExperimentConfig::from_path(&path)
                        .with_context(|| format!("loading {}", path.display()))?;
                    Model::from_config(&cfg.model)?
                }
            };
            let lap = LaplaceConfig {
                t_grid: quasireg::invariants::log_spaced(t_min, t_max, t_points),
                mc_per_t,
                seed,
            };
            if cli.verbose {
                println!(
                    "model {}  grid {:?}  mc_per_t {}",
                    model.name(),
                    lap.t_grid,
                    lap.mc_per_t
                );
            }
            let est = laplace_fit(&model, &lap)?;
            println!(
                "lambda_hat = {:.4} ± {:.4}",
                est.lambda,
                est.lambda_se.unwrap_or(f64::NAN)
            );
            println!(
                "m_hat      = {:.4} ± {:.4}",
                est.multiplicity.unwrap_or(f64::NAN),
                est.multiplicity_se.unwrap_or(f64::NAN)
            );
            if let Some((lambda, _, m)) = model.known_invariants() {
                println!("theory     : lambda = {lambda}, m = {m}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sandwich {
            model,
            blocks,
            trials,
            seed,
            w_max,
        } => {
            let mut model = build_named_model(&model, w_max)?;
            if let Some(list) = blocks {
                let sizes = parse_blocks(&list)?;
                model = model.with_blocks(&sizes)?;
            }
            let check = check_sandwich(&model, trials, seed)?;
            println!(
                "model {}  trials {}  skipped {}",
                model.name(),
                check.trials,
                check.skipped
            );
            println!("c1_hat = {:.6e}", check.c1);
            println!("c2_hat = {:.6e}", check.c2);
            println!("c1/c2  = {:.6e}", check.condition);
            println!(
                "sandwich {}",
                if check.holds {
                    "holds"
                } else {
                    "does NOT hold"
                }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::ListModels => {
            println!("{:<22} {:>3} {:>3}  notes", "name", "d", "g");
            for m in builtin_models() {
                let d = m.d.map_or("-".into(), |v| v.to_string());
                let g = m.g.map_or("-".into(), |v| v.to_string());
                println!("{:<22} {:>3} {:>3}  {}", m.name, d, g, m.note);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn workers_from_env() -> Option<usize> {
    std::env::var("QUASIREG_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
}

fn parse_blocks(text: &str) -> Result<Vec<usize>, UsageError> {
    let sizes: Result<Vec<usize>, _> = text
        .split(',')
        .map(|part| part.trim().parse::<usize>())
        .collect();
    match sizes {
        Ok(sizes) if !sizes.is_empty() && sizes.iter().all(|&s| s >= 1) => Ok(sizes),
        _ => Err(UsageError(format!(
            "malformed blocks `{text}`; expected comma-separated positive integers like 1,2"
        ))),
    }
}

/// Accepts `example1`, `conjugate1d`, `canonical(1,2)`, `regular(3)`, ...
fn build_named_model(name: &str, w_max: Option<f64>) -> anyhow::Result<Model> {
    let (base, arg) = match (name.find('('), name.ends_with(')')) {
        (Some(open), true) => (&name[..open], Some(&name[open + 1..name.len() - 1])),
        (None, _) => (name, None),
        _ => {
            return Err(anyhow!(UsageError(format!(
                "malformed model name `{name}`"
            ))))
        }
    };
    let mut cfg = ModelConfig {
        name: base.to_string(),
        blocks: None,
        d: None,
        w_max,
    };
    match (base, arg) {
        ("canonical", Some(list)) => cfg.blocks = Some(parse_blocks(list)?),
        ("regular", Some(dim)) => {
            cfg.d = Some(
                dim.trim()
                    .parse()
                    .map_err(|_| UsageError(format!("malformed dimension `{dim}` in `{name}`")))?,
            )
        }
        (_, None) => {}
        _ => {
            return Err(anyhow!(UsageError(format!(
                "model `{base}` takes no parenthesized argument"
            ))))
        }
    }
    Ok(Model::from_config(&cfg)?)
}

fn print_aggregate(agg: &AggregateResult, verbose: bool) {
    println!(
        "model {}  d = {}  g = {}  n = {}  replicates = {} ({} failed)",
        agg.model.name,
        agg.model.d,
        agg.model.g.map_or("-".into(), |g: usize| g.to_string()),
        agg.n,
        agg.replicates,
        agg.failures
    );
    if let Some(t) = &agg.theory {
        println!(
            "theory: lambda = nu = {}, m = {}, E[G_n] = {:.6}, E[T_n] = {:.6}",
            t.lambda, t.multiplicity, t.gen_error, t.train_error
        );
    }
    for b in &agg.per_beta {
        let se = |o: Option<f64>| o.map_or("-".into(), |v| format!("{v:.2e}"));
        println!(
            "beta {:>5}: G = {:+.6} ± {}  T = {:+.6} ± {}  V = {:.4} ± {}  EwKn = {:+.3e}",
            b.beta,
            b.g_n.mean,
            se(b.g_n.se),
            b.t_n.mean,
            se(b.t_n.se),
            b.v_n.mean,
            se(b.v_n.se),
            b.ewkn.mean,
        );
        println!(
            "           T + beta*V/n = {:+.6} ± {}   nu_from_v = {:.4}   mean mc_se = {:.2e}",
            b.gen_from_train.mean,
            se(b.gen_from_train.se),
            b.nu_from_v,
            b.mean_mc_se
        );
    }
    println!("invariant estimates:");
    for est in &agg.invariants {
        let fmt_opt = |v: Option<f64>, s: Option<f64>| match (v, s) {
            (Some(v), Some(s)) => format!("{v:.4} ± {s:.4}"),
            (Some(v), None) => format!("{v:.4}"),
            _ => "-".into(),
        };
        println!(
            "  {:<12}  lambda = {:<18}  nu = {:<18}  m = {}",
            format!("{:?}", est.method).to_lowercase(),
            fmt_opt(Some(est.lambda), est.lambda_se),
            fmt_opt(est.nu, est.nu_se),
            fmt_opt(est.multiplicity, est.multiplicity_se),
        );
    }
    println!("checks:");
    for check in &agg.checks {
        println!(
            "  [{}] {:<24} observed {:+.6e}  target {:+.6e}  tol {:.3e}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.observed,
            check.target,
            check.tolerance
        );
    }
    if verbose && !agg.records.is_empty() {
        let worst_rhat = agg
            .records
            .iter()
            .map(|r| r.max_rhat)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_ess = agg
            .records
            .iter()
            .map(|r| r.min_ess)
            .fold(f64::INFINITY, f64::min);
        println!("diagnostics: worst split-Rhat = {worst_rhat:.4}, min ESS = {min_ess:.0}");
    }
}
