use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bwk_core::harness::report::write_result_json;
use bwk_core::harness::{
    generate, map_repetitions, run_experiment, run_sweep, write_experiment, write_runlog,
    write_sweep, Axis, BenchmarkSpec, ExperimentConfig, FamilySpec, Generated, InstanceSpec,
    Radius, SweepConfig, SweepSpec,
};
use bwk_core::instances::{load_instance, save_instance, NecessityVariant, SpendOrSave};
use bwk_core::{
    emd_between, in_g, min_emd_to_subpacing, opt_disjoint_windows, opt_finite_family,
    opt_fixed_sliding, SpendingPattern, Strategy,
};

/// Bandits-with-knapsacks experiments: instance generation, Lagrangian
/// learners, EMD utilities and benchmark optima.
#[derive(Parser)]
#[command(name = "bwk", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Base seed (overrides the config's seed_base)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Repetitions (overrides the config)
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Output path or prefix
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON
    Gen(GenArgs),
    /// Run an experiment config
    Run(RunArgs),
    /// Run a scaling sweep
    Sweep(SweepArgs),
    /// EMD between patterns, distance to the sub-pacing set, or G(D) membership
    Emd(EmdArgs),
    /// Benchmark optimum of an instance
    Opt(OptArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Generator {
    SpendOrSave,
    Coinflip,
    RandomWalk,
    EmdNecessity,
    Zero,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    generator: Generator,
    #[arg(short = 'T', long = "horizon")]
    horizon: usize,
    #[arg(short, long)]
    w: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// worse|better (spend-or-save) or flat|boost (emd-necessity)
    #[arg(long)]
    variant: Option<String>,
    /// Budget of the zero instance
    #[arg(short = 'B', long)]
    budget: Option<f64>,
    /// Action count of the zero instance
    #[arg(long, default_value_t = 2)]
    actions: usize,
}

#[derive(Args)]
struct RunArgs {
    /// ExperimentConfig JSON file, or a manifest written by a previous run
    #[arg(long, conflicts_with = "config_json")]
    config: Option<PathBuf>,
    /// Inline ExperimentConfig JSON
    #[arg(long)]
    config_json: Option<String>,
    /// Also write each repetition's round-by-round log
    #[arg(long)]
    runlogs: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// SweepConfig JSON, or an ExperimentConfig when --axis is given
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    axis: Option<AxisArg>,
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    #[value(name = "T")]
    T,
    #[value(name = "w")]
    W,
    #[value(name = "D")]
    D,
}

#[derive(Args)]
struct EmdArgs {
    /// Spending pattern, comma separated
    #[arg(long, value_delimiter = ',')]
    c: Vec<f64>,
    /// Second pattern: report EMD(c, d)
    #[arg(long, value_delimiter = ',')]
    d: Vec<f64>,
    /// Budget: report the distance from c to the sub-pacing set
    #[arg(short = 'B', long)]
    budget: Option<f64>,
    /// Instance file for a G(D) membership test
    #[arg(long, requires_all = ["strategy", "radius"])]
    instance: Option<PathBuf>,
    /// Strategy file (T x |A| JSON matrix)
    #[arg(long)]
    strategy: Option<PathBuf>,
    #[arg(short = 'D', long)]
    radius: Option<f64>,
}

#[derive(Args)]
struct OptArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Disjoint-window benchmark with this window
    #[arg(long, group = "bench")]
    disjoint: Option<usize>,
    /// Sliding-window fixed-strategy benchmark with this window
    #[arg(long, group = "bench")]
    sliding: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,
    /// Finite-family benchmark over strategies in this JSON file
    #[arg(long, group = "bench", requires = "radius")]
    family: Option<PathBuf>,
    #[arg(short = 'D', long)]
    radius: Option<f64>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Gen(args) => gen(&cli.common, args),
        Command::Run(args) => run(&cli.common, args),
        Command::Sweep(args) => sweep(&cli.common, args),
        Command::Emd(args) => emd(&cli.common, args),
        Command::Opt(args) => opt(&cli.common, args),
    }
}

fn emit(common: &Common, value: &Value) -> Result<()> {
    match &common.out {
        Some(path) => write_result_json(path.as_ref(), value)?,
        None => {
            let mut out = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn gen(common: &Common, args: &GenArgs) -> Result<()> {
    let horizon = args.horizon;
    let spec = match args.generator {
        Generator::SpendOrSave => InstanceSpec::SpendOrSave {
            horizon,
            variant: match args.variant.as_deref() {
                None | Some("worse") => SpendOrSave::Worse,
                Some("better") => SpendOrSave::Better,
                Some(v) => bail!("unknown spend-or-save variant {v:?}"),
            },
        },
        Generator::Coinflip => InstanceSpec::Coinflip { horizon },
        Generator::RandomWalk => InstanceSpec::RandomWalk {
            horizon,
            w: args.w.context("random-walk needs --w")?,
            epsilon: args.epsilon,
        },
        Generator::EmdNecessity => InstanceSpec::EmdNecessity {
            horizon,
            variant: match args.variant.as_deref() {
                None | Some("flat") => NecessityVariant::Flat,
                Some("boost") => NecessityVariant::Boost,
                Some(v) => bail!("unknown emd-necessity variant {v:?}"),
            },
            patterns: None,
        },
        Generator::Zero => InstanceSpec::Zero {
            horizon,
            budget: args.budget.unwrap_or(horizon as f64 / 2.0),
            actions: args.actions,
        },
    };
    let generated = generate(&spec, common.seed.unwrap_or(0))?;
    match &common.out {
        Some(path) => {
            save_instance(path, &generated.instance)?;
            if let Some(family) = &generated.family {
                let fpath = format!("{path}.family.json");
                let matrices: Vec<_> = family.iter().map(Strategy::to_matrix).collect();
                write_result_json(fpath.as_ref(), &matrices)?;
            }
            emit_summary(&generated)
        }
        None => emit(common, &serde_json::to_value(&generated.instance)?),
    }
}

fn emit_summary(generated: &Generated) -> Result<()> {
    let inst = &generated.instance;
    let summary = json!({
        "T": inst.horizon(),
        "B": inst.budget(),
        "actions": inst.actions(),
        "derived": generated.derived,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn apply_common(common: &Common, cfg: &mut ExperimentConfig) {
    if let Some(seed) = common.seed {
        cfg.seed_base = seed;
    }
    if let Some(reps) = common.reps {
        cfg.repetitions = reps;
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    if let Some(workers) = common.workers {
        cfg.workers = Some(workers);
    }
}

fn read_config(args: &RunArgs) -> Result<ExperimentConfig> {
    Ok(match (&args.config, &args.config_json) {
        (Some(path), _) => ExperimentConfig::from_path(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        (None, Some(text)) => ExperimentConfig::from_json(serde_json::from_str(text)?)?,
        (None, None) => bail!("run needs --config or --config-json"),
    })
}

fn run(common: &Common, args: &RunArgs) -> Result<()> {
    let mut cfg = read_config(args)?;
    apply_common(common, &mut cfg);
    let report = run_experiment(&cfg)?;
    if let Some(prefix) = &cfg.output {
        for path in write_experiment(prefix, &report)? {
            eprintln!("wrote {}", path.display());
        }
        if args.runlogs {
            let config = serde_json::to_value(&cfg)?;
            let written = map_repetitions(&cfg, |o| {
                let rep_prefix = format!("{prefix}.rep{}", o.row.rep);
                write_runlog(&rep_prefix, &o.log, &config, o.row.seed)
            })?;
            for paths in written {
                for path in paths? {
                    eprintln!("wrote {}", path.display());
                }
            }
        }
    }
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &json!({ "aggregate": report.aggregate }))?;
    writeln!(out)?;
    Ok(())
}

fn sweep(common: &Common, args: &SweepArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let value: Value = serde_json::from_str(&text)?;
    let mut sweep = match args.axis {
        Some(axis) => SweepConfig {
            base: ExperimentConfig::from_json(value)?,
            sweep: SweepSpec {
                axis: match axis {
                    AxisArg::T => Axis::T,
                    AxisArg::W => Axis::W,
                    AxisArg::D => Axis::D,
                },
                values: args.values.clone(),
            },
        },
        None => {
            let inner = match value.get("config") {
                Some(cfg) if value.get("tool").is_some() => cfg.clone(),
                _ => value,
            };
            serde_json::from_value(inner)?
        }
    };
    apply_common(common, &mut sweep.base);
    let report = run_sweep(&sweep)?;
    if let Some(prefix) = &sweep.base.output {
        for path in write_sweep(prefix, &report)? {
            eprintln!("wrote {}", path.display());
        }
    }
    let fit = match &report.fit {
        Some(f) => serde_json::to_value(f)?,
        None => json!("undefined"),
    };
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &json!({ "table": report.table, "slope": fit }))?;
    writeln!(out)?;
    Ok(())
}

fn read_strategy(path: &PathBuf) -> Result<Strategy> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn emd(common: &Common, args: &EmdArgs) -> Result<()> {
    let value = if let Some(path) = &args.instance {
        let inst = load_instance(path)?;
        let strat = read_strategy(args.strategy.as_ref().context("--strategy required")?)?;
        let radius = args.radius.context("--radius required")?;
        json!({ "D": radius, "in_g": in_g(&strat, &inst, radius)? })
    } else {
        let c = SpendingPattern::new(args.c.clone())?;
        if !args.d.is_empty() {
            let d = SpendingPattern::new(args.d.clone())?;
            json!({ "emd": emd_between(&c, &d)? })
        } else if let Some(budget) = args.budget {
            serde_json::to_value(min_emd_to_subpacing(&c, budget, c.len())?)?
        } else {
            bail!("emd needs --d, --budget, or --instance/--strategy/--radius");
        }
    };
    emit(common, &value)
}

fn opt(common: &Common, args: &OptArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let (spec, result) = if let Some(w) = args.disjoint {
        (BenchmarkSpec::Disjoint { w }, opt_disjoint_windows(&inst, w)?)
    } else if let Some(w) = args.sliding {
        (
            BenchmarkSpec::Sliding { w, grid_step: args.grid_step },
            opt_fixed_sliding(&inst, w, args.grid_step)?,
        )
    } else if let Some(path) = &args.family {
        let radius = args.radius.context("--radius required")?;
        let text = std::fs::read_to_string(path)?;
        let family: Vec<Strategy> = serde_json::from_str(&text)?;
        (
            BenchmarkSpec::Family {
                radius: Radius::Value(radius),
                family: FamilySpec::File { path: path.display().to_string() },
            },
            opt_finite_family(&inst, &family, radius)?,
        )
    } else {
        bail!("opt needs one of --disjoint, --sliding, --family");
    };
    emit(common, &json!({ "benchmark": spec, "result": result }))
}
