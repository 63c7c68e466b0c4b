use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{
    generate, AlgorithmSpec, BenchmarkSpec, ExperimentConfig, Generated, SweepConfig,
};
use crate::benchmarks::{opt_disjoint_windows, opt_finite_family, opt_fixed_sliding, OptResult};
use crate::error::{Error, Result};
use crate::learners::{
    run_lagrangian_diw, run_lagrangian_emd, DualParams, LagrangianConfig, LagrangianMode,
};
use crate::model::{violation_process, Instance, RunLog};

/// One repetition. Column order is the per-rep CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRow {
    pub rep: usize,
    pub seed: u64,
    pub reward: f64,
    pub opt: f64,
    pub regret: f64,
    pub v_t_expected: f64,
    pub v_t_realized: f64,
    pub stop_time: usize,
}

/// Column order is the aggregate CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub axis_value: f64,
    pub mean_regret: f64,
    pub se_regret: f64,
    pub mean_reward: f64,
    pub mean_opt: f64,
    pub n: usize,
}

/// Per-repetition parameters that were derived rather than configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepDerived {
    pub rep: usize,
    pub lambda_bar: f64,
    pub eta: f64,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub instance: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<RepRow>,
    pub aggregate: AggregateRow,
    pub derived: Vec<RepDerived>,
}

/// Everything one repetition produced, for callers that want the raw log.
#[derive(Debug, Clone)]
pub struct RepOutcome {
    pub row: RepRow,
    pub derived: RepDerived,
    pub instance: Instance,
    pub log: RunLog,
    pub opt: OptResult,
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`; zero
/// for a single value).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn aggregate(axis_value: f64, rows: &[RepRow]) -> AggregateRow {
    let regrets: Vec<f64> = rows.iter().map(|r| r.regret).collect();
    let (mean_regret, se_regret) = mean_se(&regrets);
    let n = rows.len().max(1) as f64;
    AggregateRow {
        axis_value,
        mean_regret,
        se_regret,
        mean_reward: rows.iter().map(|r| r.reward).sum::<f64>() / n,
        mean_opt: rows.iter().map(|r| r.opt).sum::<f64>() / n,
        n: rows.len(),
    }
}

/// Benchmark value for one realized instance.
pub fn compute_opt(cfg: &ExperimentConfig, generated: &Generated) -> Result<OptResult> {
    let inst = &generated.instance;
    match &cfg.benchmark {
        BenchmarkSpec::Disjoint { w } => opt_disjoint_windows(inst, *w),
        BenchmarkSpec::Sliding { w, grid_step } => opt_fixed_sliding(inst, *w, *grid_step),
        BenchmarkSpec::Family { radius, family } => {
            let d = radius.resolve(inst.horizon(), generated.window)?;
            let family = family.build(generated)?;
            opt_finite_family(inst, &family, d)
        }
    }
}

fn window_hint(cfg: &ExperimentConfig, generated: &Generated) -> Option<usize> {
    cfg.benchmark.window().or(generated.window)
}

/// Runs the configured algorithm on one realized instance.
pub fn run_algorithm(
    cfg: &ExperimentConfig,
    generated: &Generated,
    seed: u64,
) -> Result<(RunLog, DualParams, Option<f64>)> {
    let inst = &generated.instance;
    match &cfg.algorithm {
        AlgorithmSpec::Diw { w, lambda_bar } => {
            let lc = LagrangianConfig {
                mode: LagrangianMode::Diw { window: *w },
                lambda_bar: *lambda_bar,
                rng_seed: seed,
            };
            let params = DualParams::resolve(inst, &lc)?;
            Ok((run_lagrangian_diw(inst, &lc)?, params, None))
        }
        AlgorithmSpec::Emd { radius, family, lambda_bar } => {
            let d = radius.resolve(inst.horizon(), window_hint(cfg, generated))?;
            let lc = LagrangianConfig {
                mode: LagrangianMode::Emd { radius: d },
                lambda_bar: *lambda_bar,
                rng_seed: seed,
            };
            let params = DualParams::resolve(inst, &lc)?;
            let experts = family.build(generated)?;
            Ok((run_lagrangian_emd(inst, Arc::clone(&experts), &lc)?, params, Some(d)))
        }
    }
}

fn run_rep(cfg: &ExperimentConfig, rep: usize, pinned: Option<&(Generated, OptResult)>) -> Result<RepOutcome> {
    let seed = cfg.seed_base.wrapping_add(rep as u64);
    let (generated, opt) = match pinned {
        Some((g, o)) => (g.clone(), o.clone()),
        None => {
            let g = generate(&cfg.instance, seed)?;
            let o = compute_opt(cfg, &g)?;
            (g, o)
        }
    };
    let (log, params, radius) = run_algorithm(cfg, &generated, seed)?;
    let inst = generated.instance;
    let budget = inst.budget();
    let played = log.played_strategy();
    let v_t_expected = violation_process(&inst, &played)?.last().copied().unwrap_or(0.0);
    let reward = log.total_reward();
    let row = RepRow {
        rep,
        seed,
        reward,
        opt: opt.value,
        regret: opt.value - reward,
        v_t_expected,
        v_t_realized: log.realized_violation(budget),
        stop_time: log.stop_time,
    };
    let derived = RepDerived {
        rep,
        lambda_bar: params.lambda_bar,
        eta: params.eta,
        radius,
        instance: generated.derived,
    };
    Ok(RepOutcome { row, derived, instance: inst, log, opt })
}

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs every repetition in parallel and maps each outcome through `keep`
/// before the next is collected; results are in repetition order.
pub fn map_repetitions<T: Send>(
    cfg: &ExperimentConfig,
    keep: impl Fn(RepOutcome) -> T + Sync,
) -> Result<Vec<T>> {
    cfg.validate()?;
    let pinned = if cfg.pinned || !cfg.instance.is_stochastic() {
        let g = generate(&cfg.instance, cfg.seed_base)?;
        let o = compute_opt(cfg, &g)?;
        Some((g, o))
    } else {
        None
    };
    with_pool(cfg.workers, || {
        (0..cfg.repetitions)
            .into_par_iter()
            .map(|rep| run_rep(cfg, rep, pinned.as_ref()).map(&keep))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Every repetition with its raw log.
pub fn run_repetitions(cfg: &ExperimentConfig) -> Result<Vec<RepOutcome>> {
    map_repetitions(cfg, |o| o)
}

/// Seeded Monte-Carlo run of one configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    report_at(cfg, 0.0)
}

fn report_at(cfg: &ExperimentConfig, axis_value: f64) -> Result<ExperimentReport> {
    let (rows, derived): (Vec<_>, Vec<_>) =
        map_repetitions(cfg, |o| (o.row, o.derived))?.into_iter().unzip();
    Ok(ExperimentReport { config: cfg.clone(), aggregate: aggregate(axis_value, &rows), rows, derived })
}

/// Least-squares slope of `ln(mean_regret)` against `ln(axis_value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    /// `None` with fewer than three points.
    pub se: Option<f64>,
    pub intercept: f64,
}

/// `None` when fewer than two points or any mean regret is not positive.
pub fn fit_log_log(rows: &[AggregateRow]) -> Option<SlopeFit> {
    if rows.len() < 2 || rows.iter().any(|r| !(r.mean_regret > 0.0) || !(r.axis_value > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.axis_value.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_regret.ln()).collect();
    log_log_ols(&xs, &ys)
}

fn log_log_ols(xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = (xs.len() > 2).then(|| {
        let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    });
    Some(SlopeFit { slope, se, intercept })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub points: Vec<ExperimentReport>,
    pub table: Vec<AggregateRow>,
    pub fit: Option<SlopeFit>,
}

/// One aggregate row per axis value plus the log-log slope of mean regret.
pub fn run_sweep(sweep: &SweepConfig) -> Result<SweepReport> {
    sweep.sweep.validate()?;
    let configs = sweep
        .sweep
        .values
        .iter()
        .map(|&v| sweep.sweep.apply(&sweep.base, v).map(|c| (v, c)))
        .collect::<Result<Vec<_>>>()?;
    let points = with_pool(sweep.base.workers, || {
        configs
            .par_iter()
            .map(|(v, cfg)| {
                let mut inner = cfg.clone();
                inner.workers = None;
                let mut report = report_at(&inner, *v)?;
                report.config = cfg.clone();
                Ok(report)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let table: Vec<AggregateRow> = points.iter().map(|p| p.aggregate.clone()).collect();
    let fit = fit_log_log(&table);
    Ok(SweepReport { config: sweep.clone(), points, table, fit })
}
