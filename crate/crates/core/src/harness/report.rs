//! CSV and JSON writers. Every file name is `<prefix>.<kind>.<ext>`.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::runner::{AggregateRow, ExperimentReport, RepRow, SweepReport};
use crate::error::Result;
use crate::model::RunLog;

pub const REP_COLUMNS: [&str; 8] =
    ["rep", "seed", "reward", "opt", "regret", "v_t_expected", "v_t_realized", "stop_time"];
pub const AGGREGATE_COLUMNS: [&str; 6] =
    ["axis_value", "mean_regret", "se_regret", "mean_reward", "mean_opt", "n"];
pub const RUNLOG_COLUMNS: [&str; 6] = ["t", "lambda", "arm", "reward", "cost", "cum_cost"];

/// Calibration caveat carried in every manifest.
pub const FOOTER: &str = "Acceptance slopes and constant caps are calibration choices; \
    the regret bounds they check are asymptotic and state no constants.";

pub fn output_path(prefix: &str, kind: &str, ext: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}.{kind}.{ext}"))
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rep_csv(path: &Path, rows: &[RepRow]) -> Result<()> {
    write_csv(path, &REP_COLUMNS, rows)
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    write_csv(path, &AGGREGATE_COLUMNS, rows)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Column documentation for every CSV this module writes.
pub fn schema() -> Value {
    json!({
        "reps": {
            "rep": "repetition index, 0-based",
            "seed": "seed_base + rep; drives instance and learner streams",
            "reward": "realized total reward of the run",
            "opt": "benchmark value on the realized instance",
            "regret": "opt - reward",
            "v_t_expected": "(expected cumulative cost of the played strategy - B)^+",
            "v_t_realized": "(realized cumulative cost - B)^+",
            "stop_time": "rounds played before the budget guard forced the null action",
        },
        "aggregate": {
            "axis_value": "swept parameter value (0 for a single experiment)",
            "mean_regret": "mean of per-rep regret",
            "se_regret": "sample standard deviation of regret / sqrt(n)",
            "mean_reward": "mean of per-rep reward",
            "mean_opt": "mean of per-rep opt",
            "n": "number of repetitions",
        },
        "runlog": {
            "t": "round, 1-based",
            "lambda": "dual multiplier used in round t",
            "arm": "sampled action index (0 is null)",
            "reward": "realized reward",
            "cost": "realized cost",
            "cum_cost": "cumulative realized cost through round t",
        },
    })
}

fn manifest(kind: &str, config: Value, derived: Value, seeds: Vec<u64>, extra: Value) -> Value {
    let mut m = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "kind": kind,
        "config": config,
        "derived": derived,
        "seeds": seeds,
        "footer": FOOTER,
    });
    if let (Value::Object(m), Value::Object(extra)) = (&mut m, extra) {
        m.extend(extra);
    }
    m
}

/// Writes `<prefix>.reps.csv`, `<prefix>.aggregate.csv`,
/// `<prefix>.manifest.json` and `<prefix>.schema.json`; returns the paths.
pub fn write_experiment(prefix: &str, report: &ExperimentReport) -> Result<Vec<PathBuf>> {
    let reps = output_path(prefix, "reps", "csv");
    let agg = output_path(prefix, "aggregate", "csv");
    let man = output_path(prefix, "manifest", "json");
    let sch = output_path(prefix, "schema", "json");
    write_rep_csv(&reps, &report.rows)?;
    write_aggregate_csv(&agg, std::slice::from_ref(&report.aggregate))?;
    let seeds = report.rows.iter().map(|r| r.seed).collect();
    write_json(
        &man,
        &manifest(
            "experiment",
            serde_json::to_value(&report.config)?,
            serde_json::to_value(&report.derived)?,
            seeds,
            json!({}),
        ),
    )?;
    write_json(&sch, &schema())?;
    Ok(vec![reps, agg, man, sch])
}

/// Writes the sweep table, one per-rep CSV per point, manifest and schema.
pub fn write_sweep(prefix: &str, report: &SweepReport) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    let agg = output_path(prefix, "aggregate", "csv");
    write_aggregate_csv(&agg, &report.table)?;
    paths.push(agg);
    let mut derived = Vec::new();
    let mut seeds = Vec::new();
    for (i, point) in report.points.iter().enumerate() {
        let reps = output_path(prefix, &format!("point{i}.reps"), "csv");
        write_rep_csv(&reps, &point.rows)?;
        paths.push(reps);
        derived.push(json!({ "axis_value": point.aggregate.axis_value, "reps": point.derived }));
        seeds.extend(point.rows.iter().map(|r| r.seed));
    }
    seeds.sort_unstable();
    seeds.dedup();
    let man = output_path(prefix, "manifest", "json");
    let fit = match &report.fit {
        Some(f) => serde_json::to_value(f)?,
        None => json!("undefined"),
    };
    write_json(
        &man,
        &manifest(
            "sweep",
            serde_json::to_value(&report.config)?,
            Value::Array(derived),
            seeds,
            json!({ "slope": fit }),
        ),
    )?;
    let sch = output_path(prefix, "schema", "json");
    write_json(&sch, &schema())?;
    paths.push(man);
    paths.push(sch);
    Ok(paths)
}

#[derive(Serialize)]
struct RunLogRow {
    t: usize,
    lambda: f64,
    arm: usize,
    reward: f64,
    cost: f64,
    cum_cost: f64,
}

/// Writes `<prefix>.runlog.csv` and a `<prefix>.runlog.json` sidecar with the
/// stop time, total reward, seed and the caller's config.
pub fn write_runlog(prefix: &str, log: &RunLog, config: &Value, seed: u64) -> Result<Vec<PathBuf>> {
    let mut cum = 0.0;
    let rows: Vec<RunLogRow> = log
        .rounds
        .iter()
        .map(|r| {
            cum += r.cost;
            RunLogRow { t: r.t, lambda: r.lambda, arm: r.arm, reward: r.reward, cost: r.cost, cum_cost: cum }
        })
        .collect();
    let csv_path = output_path(prefix, "runlog", "csv");
    write_csv(&csv_path, &RUNLOG_COLUMNS, &rows)?;
    let json_path = output_path(prefix, "runlog", "json");
    write_json(
        &json_path,
        &json!({
            "stop_time": log.stop_time,
            "total_reward": log.total_reward(),
            "total_cost": log.total_cost(),
            "seed": seed,
            "config": config,
        }),
    )?;
    Ok(vec![csv_path, json_path])
}

/// Pretty JSON with a trailing newline.
pub fn write_result_json(path: &Path, value: &impl Serialize) -> Result<()> {
    write_json(path, value)
}
