//! `majdyn`: run, sweep and analyse majority dynamics on G(n, p).

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use majority_core::analysis::{analyze_instance, write_vertex_csv};
use majority_core::bounds::{self, ConstantsConfig, Side};
use majority_core::coloring::balanced_with_defectors;
use majority_core::graph::{generate_gnp, ModelParams};
use majority_core::harness::{
    parse_grid, run_records, sweep_to_csv, threshold_bisect, BisectOptions, ExperimentConfig,
    Scheme, TrajectoryRecord, TrialSummary,
};
use majority_core::rng::mix;
use majority_core::Error;

#[derive(Parser)]
#[command(name = "majdyn", version, about = "Majority dynamics on Erdős–Rényi graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    FixedAdvantage,
    RandomHalf,
    BalancedDefectors,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::FixedAdvantage => Scheme::FixedAdvantage,
            SchemeArg::RandomHalf => Scheme::RandomHalf,
            SchemeArg::BalancedDefectors => Scheme::BalancedDefectors,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run independent trials and print a summary.
    Run {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        delta: usize,
        #[arg(long, value_enum, default_value = "fixed-advantage")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_days: Option<usize>,
        #[arg(long)]
        store_colorings: bool,
        /// Write per-trial trajectories to this JSON file.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Run a JSON grid of experiment configs into a CSV file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `workers` in every config.
        #[arg(long)]
        workers: Option<usize>,
        /// Start over instead of resuming from the completion marker.
        #[arg(long)]
        fresh: bool,
    },
    /// Estimate the smallest advantage reaching a target win probability.
    Bisect {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.9)]
        target: f64,
        #[arg(long, default_value_t = 200)]
        trials_per_point: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        max_days: Option<usize>,
    },
    /// Per-vertex day-one diagnostics of one defector instance.
    Analyze {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        delta: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "D", default_value_t = 0)]
        d: i64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Evaluate one bound or exact probability.
    Bounds {
        #[arg(long, value_enum)]
        op: BoundOp,
        /// Positional operands of the operation.
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        args: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundOp {
    /// x y
    Kl,
    /// n p eps upper|lower
    Chernoff,
    /// n p t
    Window,
    /// n p t
    Poisson,
    /// n p t upper|lower
    ExactTail,
    /// n p t
    Coverage,
    /// x
    GaussianCdf,
    /// m p
    Collision,
    /// n p D sign
    AlmostRed,
    /// n p
    Thresholds,
}

impl BoundOp {
    fn arity(self) -> usize {
        match self {
            BoundOp::GaussianCdf => 1,
            BoundOp::Kl | BoundOp::Collision | BoundOp::Thresholds => 2,
            BoundOp::Window | BoundOp::Poisson | BoundOp::Coverage => 3,
            BoundOp::Chernoff | BoundOp::ExactTail | BoundOp::AlmostRed => 4,
        }
    }
}

fn arg<T: std::str::FromStr>(args: &[String], i: usize, what: &str) -> anyhow::Result<T> {
    args[i]
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse {what} from `{}`", args[i])).into())
}

impl BoundOp {
    fn operands(self) -> &'static [&'static str] {
        match self {
            BoundOp::Kl => &["x", "y"],
            BoundOp::Chernoff => &["n", "p", "eps", "side"],
            BoundOp::Window | BoundOp::Poisson | BoundOp::Coverage => &["n", "p", "t"],
            BoundOp::ExactTail => &["n", "p", "t", "side"],
            BoundOp::GaussianCdf => &["x"],
            BoundOp::Collision => &["m", "p"],
            BoundOp::AlmostRed => &["n", "p", "D", "sign"],
            BoundOp::Thresholds => &["n", "p"],
        }
    }
}

/// Evaluates `op` and returns extra column names with their values; the
/// operands themselves are echoed by the caller.
fn eval_bound(op: BoundOp, a: &[String]) -> anyhow::Result<Vec<(&'static str, String)>> {
    if a.len() != op.arity() {
        return Err(Error::Config(format!(
            "{} expects {} operands ({}), got {}",
            op.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default(),
            op.arity(),
            op.operands().join(" "),
            a.len()
        ))
        .into());
    }
    let k = ConstantsConfig::default();
    let value = |v: f64| vec![("value", v.to_string())];
    Ok(match op {
        BoundOp::Kl => value(bounds::kl_divergence(arg(a, 0, "x")?, arg(a, 1, "y")?)),
        BoundOp::Chernoff => {
            let side: Side = arg(a, 3, "side")?;
            value(bounds::chernoff_tail(arg(a, 0, "n")?, arg(a, 1, "p")?, arg(a, 2, "eps")?, side))
        }
        BoundOp::Window => value(bounds::window_bound(arg(a, 0, "n")?, arg(a, 1, "p")?, arg(a, 2, "t")?)?),
        BoundOp::Poisson => {
            value(bounds::poisson_tail_bound(arg(a, 0, "n")?, arg(a, 1, "p")?, arg(a, 2, "t")?)?)
        }
        BoundOp::ExactTail => {
            let side: Side = arg(a, 3, "side")?;
            value(bounds::exact_tail(arg(a, 0, "n")?, arg(a, 1, "p")?, arg(a, 2, "t")?, side)?)
        }
        BoundOp::Coverage => {
            value(bounds::exact_window_coverage(arg(a, 0, "n")?, arg(a, 1, "p")?, arg(a, 2, "t")?)?)
        }
        BoundOp::GaussianCdf => value(bounds::gaussian_cdf(arg(a, 0, "x")?)),
        BoundOp::Collision => {
            let c = bounds::collision_probability(arg(a, 0, "m")?, arg(a, 1, "p")?, k.exact_collision_cutoff);
            let method = serde_json::to_value(c.method)?;
            vec![
                ("value", c.value.to_string()),
                ("method", method.as_str().unwrap_or_default().to_string()),
            ]
        }
        BoundOp::AlmostRed => {
            let e = bounds::almost_red_probability_estimate(
                arg(a, 0, "n")?,
                arg(a, 1, "p")?,
                arg(a, 2, "D")?,
                arg(a, 3, "sign")?,
                &k,
            )?;
            vec![
                ("value", e.value.to_string()),
                ("argument", e.argument.to_string()),
                ("collision", e.collision.value.to_string()),
                ("error_scale", e.error_scale.to_string()),
            ]
        }
        BoundOp::Thresholds => {
            let t = bounds::theory_thresholds(arg(a, 0, "n")?, arg(a, 1, "p")?, &k)?;
            vec![
                ("delta_min", t.delta_min.to_string()),
                ("var_a_upper", t.var_a_upper.to_string()),
            ]
        }
    })
}

fn summary_json(summary: &TrialSummary) -> serde_json::Value {
    let (lo, hi) = summary.win_interval();
    json!({
        "trials": summary.trials,
        "red_wins": summary.red_wins,
        "blue_wins": summary.blue_wins,
        "stable_non_unanimous": summary.stable_non_unanimous,
        "two_cycles": summary.two_cycles,
        "day_capped": summary.day_capped,
        "win_probability": summary.win_probability(),
        "ci_low": lo,
        "ci_high": hi,
        "initial_majority_wins": summary.initial_majority_wins,
        "initial_majority_trials": summary.initial_majority_trials,
        "day_histogram": summary.day_histogram,
        "mean_days": summary.mean_days(),
        "max_days_observed": summary.max_days_observed,
        "mean_delta2": summary.mean_delta2(),
    })
}

fn print_json(value: &serde_json::Value) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn execute(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Run {
            n,
            p,
            delta,
            scheme,
            trials,
            seed,
            max_days,
            store_colorings,
            json: json_out,
            workers,
        } => {
            let cfg = ExperimentConfig {
                max_days,
                store_colorings,
                workers,
                ..ExperimentConfig::new(ModelParams { n, p, delta, seed }, scheme.into(), trials)
            };
            let records = run_records(&cfg)?;
            let summary = TrialSummary::from_records(&records);
            if let Some(path) = json_out {
                let trials: Vec<TrajectoryRecord> =
                    records.iter().map(|r| TrajectoryRecord::new(cfg.params, r)).collect();
                let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                serde_json::to_writer(
                    BufWriter::new(file),
                    &json!({ "config": cfg, "summary": summary_json(&summary), "trials": trials }),
                )?;
            }
            print_json(&summary_json(&summary))
        }
        Command::Sweep {
            config,
            out,
            workers,
            fresh,
        } => {
            let text = fs::read_to_string(&config).map_err(|e| {
                Error::Config(format!("cannot read {}: {e}", config.display()))
            })?;
            let mut grid = parse_grid(&text)?;
            if let Some(w) = workers {
                grid.iter_mut().for_each(|c| c.workers = w);
            }
            let report = sweep_to_csv(&grid, &out, !fresh)?;
            print_json(&serde_json::to_value(report)?)
        }
        Command::Bisect {
            n,
            p,
            target,
            trials_per_point,
            seed,
            workers,
            max_days,
        } => {
            let opts = BisectOptions {
                workers,
                max_days,
                ..Default::default()
            };
            let result = threshold_bisect(n, p, target, trials_per_point, seed, &opts)?;
            print_json(&serde_json::to_value(result)?)
        }
        Command::Analyze {
            n,
            p,
            delta,
            seed,
            d,
            out,
            workers,
        } => {
            let params = ModelParams { n, p, delta, seed };
            params.validate()?;
            let g = generate_gnp(n, p, mix(seed, 0))?;
            let scen = balanced_with_defectors(n, delta, mix(seed, 1))?;
            let rows = analyze_instance(&g, &scen, d, p, workers)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_vertex_csv(&rows, d, BufWriter::new(file))?;
            let count = |f: fn(&_) -> bool| rows.iter().filter(|r| f(r)).count();
            print_json(&json!({
                "n": n,
                "edges": g.edge_count(),
                "D": d,
                "almost_red": count(|r| r.almost_red),
                "vulnerable": count(|r| r.vulnerable),
                "flipping": count(|r| r.flipping),
                "regular": count(|r| r.regular),
            }))
        }
        Command::Bounds { op, args } => {
            let cols = eval_bound(op, &args)?;
            let header: Vec<&str> = op.operands().iter().copied().chain(cols.iter().map(|c| c.0)).collect();
            let row: Vec<&str> = args.iter().map(String::as_str).chain(cols.iter().map(|c| c.1.as_str())).collect();
            let mut out = io::stdout().lock();
            writeln!(out, "{}", header.join(","))?;
            writeln!(out, "{}", row.join(","))?;
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Parameter(_) | Error::Json(_)) => 2,
        Some(Error::Bracketing(_)) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
