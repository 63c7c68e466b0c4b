use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::benchmarks::epsilon_cover;
use crate::emd::emd_between;
use crate::error::{Error, Result};
use crate::instances::{
    gen_coinflip, gen_emd_necessity, gen_random_walk, gen_spend_or_save, load_instance,
    spend_or_save_family, NecessityVariant, SpendOrSave, WalkParams,
};
use crate::model::{Instance, SpendingPattern, Strategy};

/// Where an experiment's instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum InstanceSpec {
    SpendOrSave {
        #[serde(rename = "T")]
        horizon: usize,
        variant: SpendOrSave,
    },
    Coinflip {
        #[serde(rename = "T")]
        horizon: usize,
    },
    RandomWalk {
        #[serde(rename = "T")]
        horizon: usize,
        w: usize,
        /// Defaults to `sqrt(w/T)`; rounded to the nearest `1/(2k)` either way.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
    EmdNecessity {
        #[serde(rename = "T")]
        horizon: usize,
        variant: NecessityVariant,
        /// Explicit `[c, c']`; defaults to full spend over the first half
        /// against flat spend of 1/2.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        patterns: Option<[Vec<f64>; 2]>,
    },
    /// All rewards and costs zero.
    Zero {
        #[serde(rename = "T")]
        horizon: usize,
        #[serde(rename = "B")]
        budget: f64,
        actions: usize,
    },
    File {
        path: String,
    },
}

impl InstanceSpec {
    pub fn is_stochastic(&self) -> bool {
        matches!(self, Self::Coinflip { .. } | Self::RandomWalk { .. })
    }

    fn set_horizon(&mut self, value: usize) -> Result<()> {
        match self {
            Self::SpendOrSave { horizon, .. }
            | Self::Coinflip { horizon }
            | Self::RandomWalk { horizon, .. }
            | Self::EmdNecessity { horizon, .. }
            | Self::Zero { horizon, .. } => {
                *horizon = value;
                Ok(())
            }
            Self::File { .. } => Err(Error::Config("cannot sweep T of a file instance".into())),
        }
    }
}

/// The front-loaded pattern (1 for the first half, then 0) and the flat
/// pattern at 1/2; their EMD is `T^2/8`.
pub fn default_necessity_patterns(horizon: usize) -> Result<(SpendingPattern, SpendingPattern)> {
    if horizon < 2 || !horizon.is_multiple_of(2) {
        return Err(Error::Precondition(format!("default patterns need even T, got {horizon}")));
    }
    let front = (0..horizon).map(|t| if t < horizon / 2 { 1.0 } else { 0.0 }).collect();
    Ok((SpendingPattern::new(front)?, SpendingPattern::new(vec![0.5; horizon])?))
}

/// A realized instance plus whatever the generator naturally provides.
#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: Instance,
    pub family: Option<Vec<Strategy>>,
    pub window: Option<usize>,
    pub derived: Value,
}

pub fn generate(spec: &InstanceSpec, seed: u64) -> Result<Generated> {
    Ok(match spec {
        InstanceSpec::SpendOrSave { horizon, variant } => Generated {
            instance: gen_spend_or_save(*horizon, *variant)?,
            family: Some(spend_or_save_family(*horizon)),
            window: None,
            derived: json!({}),
        },
        InstanceSpec::Coinflip { horizon } => Generated {
            instance: gen_coinflip(*horizon, seed)?,
            family: None,
            window: None,
            derived: json!({}),
        },
        InstanceSpec::RandomWalk { horizon, w, epsilon } => {
            let params = WalkParams::new(*horizon, *w, *epsilon, seed)?;
            let walk = gen_random_walk(&params)?;
            Generated {
                instance: walk.instance,
                family: None,
                window: Some(*w),
                derived: json!({
                    "epsilon": params.epsilon,
                    "requested_epsilon": params.requested_epsilon,
                    "stop_index": walk.stop_index,
                    "absorbed": walk.absorbed,
                }),
            }
        }
        InstanceSpec::EmdNecessity { horizon, variant, patterns } => {
            let (c, c_alt) = match patterns {
                Some([a, b]) => (SpendingPattern::new(a.clone())?, SpendingPattern::new(b.clone())?),
                None => default_necessity_patterns(*horizon)?,
            };
            let emd = emd_between(&c, &c_alt)?;
            let built = gen_emd_necessity(&c, &c_alt, *variant)?;
            Generated {
                instance: built.instance,
                family: Some(built.family),
                window: None,
                derived: json!({ "tau": built.tau, "prefix_gap": built.prefix_gap, "emd": emd }),
            }
        }
        InstanceSpec::Zero { horizon, budget, actions } => {
            let names = std::iter::once("null".to_string())
                .chain((1..*actions).map(|a| format!("arm{a}")))
                .collect();
            Generated {
                instance: Instance::new(
                    *budget,
                    names,
                    vec![vec![0.0; *actions]; *horizon],
                    vec![vec![0.0; *actions]; *horizon],
                )?,
                family: None,
                window: None,
                derived: json!({}),
            }
        }
        InstanceSpec::File { path } => Generated {
            instance: load_instance(path)?,
            family: None,
            window: None,
            derived: json!({}),
        },
    })
}

/// An explicit finite strategy family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// The family that comes with the instance generator.
    Generator,
    /// Constant strategies over a grid cover of the simplex.
    FixedGrid { epsilon: f64 },
    /// JSON array of `T x |A|` matrices.
    File { path: String },
}

impl FamilySpec {
    pub fn build(&self, generated: &Generated) -> Result<Arc<[Strategy]>> {
        let inst = &generated.instance;
        let family = match self {
            FamilySpec::Generator => generated.family.clone().ok_or_else(|| {
                Error::Config("this instance generator provides no strategy family".into())
            })?,
            FamilySpec::FixedGrid { epsilon } => epsilon_cover(inst.num_actions(), *epsilon)?
                .into_iter()
                .map(|x| Strategy::constant(x, inst.horizon()))
                .collect(),
            FamilySpec::File { path } => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str::<Vec<Strategy>>(&text)?
            }
        };
        if family.is_empty() {
            return Err(Error::Config("strategy family is empty".into()));
        }
        for s in &family {
            s.check_against(inst)?;
        }
        Ok(family.into())
    }
}

/// EMD allowance `D`: a number, or a rule evaluated per instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Radius {
    Value(f64),
    /// One of `"T"`, `"wT"` (benchmark or instance window), `"T^2/8"`.
    Rule(String),
}

impl Radius {
    pub fn resolve(&self, horizon: usize, window: Option<usize>) -> Result<f64> {
        let t = horizon as f64;
        match self {
            Radius::Value(v) => Ok(*v),
            Radius::Rule(rule) => match rule.as_str() {
                "T" => Ok(t),
                "T^2/8" => Ok(t * t / 8.0),
                "wT" => window
                    .map(|w| w as f64 * t)
                    .ok_or_else(|| Error::Config("radius rule wT needs a window".into())),
                other => Err(Error::Config(format!("unknown radius rule {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Diw {
        w: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda_bar: Option<f64>,
    },
    Emd {
        #[serde(rename = "D")]
        radius: Radius,
        family: FamilySpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda_bar: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchmarkSpec {
    Disjoint {
        w: usize,
    },
    Sliding {
        w: usize,
        #[serde(default = "default_grid_step")]
        grid_step: f64,
    },
    Family {
        #[serde(rename = "D")]
        radius: Radius,
        family: FamilySpec,
    },
}

fn default_grid_step() -> f64 {
    1e-2
}

impl BenchmarkSpec {
    pub fn window(&self) -> Option<usize> {
        match self {
            Self::Disjoint { w } | Self::Sliding { w, .. } => Some(*w),
            Self::Family { .. } => None,
        }
    }
}

/// A complete Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    /// Reuse the instance drawn from `seed_base` for every repetition.
    #[serde(default)]
    pub pinned: bool,
    pub algorithm: AlgorithmSpec,
    pub benchmark: BenchmarkSpec,
    pub repetitions: usize,
    pub seed_base: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Accepts either a bare config or a report manifest that embeds one.
    pub fn from_json(value: Value) -> Result<Self> {
        let inner = match value.get("config") {
            Some(cfg) if value.get("tool").is_some() => cfg.clone(),
            _ => value,
        };
        Ok(serde_json::from_value(inner)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        let mut paths = Vec::new();
        if let InstanceSpec::File { path } = &self.instance {
            paths.push(path);
        }
        if let AlgorithmSpec::Emd { family: FamilySpec::File { path }, .. } = &self.algorithm {
            paths.push(path);
        }
        if let BenchmarkSpec::Family { family: FamilySpec::File { path }, .. } = &self.benchmark {
            paths.push(path);
        }
        for p in paths {
            if !Path::new(p).exists() {
                return Err(Error::Config(format!("file {p} does not exist")));
            }
        }
        let horizon = match &self.instance {
            InstanceSpec::SpendOrSave { horizon, .. }
            | InstanceSpec::Coinflip { horizon }
            | InstanceSpec::RandomWalk { horizon, .. }
            | InstanceSpec::EmdNecessity { horizon, .. }
            | InstanceSpec::Zero { horizon, .. } => Some(*horizon),
            InstanceSpec::File { .. } => None,
        };
        if let Some(horizon) = horizon {
            let divides = |w: usize| w > 0 && horizon % w == 0;
            if let AlgorithmSpec::Diw { w, .. } = self.algorithm {
                if !divides(w) {
                    return Err(Error::Config(format!("DIW window {w} must divide T = {horizon}")));
                }
            }
            if let BenchmarkSpec::Disjoint { w } = self.benchmark {
                if !divides(w) {
                    return Err(Error::Config(format!("benchmark window {w} must divide T = {horizon}")));
                }
            }
            if let BenchmarkSpec::Sliding { w, .. } = self.benchmark {
                if w == 0 || w > horizon {
                    return Err(Error::Config(format!("sliding window {w} outside [1, {horizon}]")));
                }
            }
        }
        Ok(())
    }
}

/// Parameter swept by [`super::run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    T,
    #[serde(rename = "w")]
    W,
    D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// Base experiment plus the sweep applied to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    pub sweep: SweepSpec,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep has no values".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("sweep values must be strictly increasing".into()));
        }
        Ok(())
    }

    /// The base config with the axis set to `value`. Derived quantities
    /// (walk step, dual step size, rule-based radii) follow automatically.
    pub fn apply(&self, base: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        let as_count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("axis value {v} must be a positive integer")))
            }
        };
        match self.axis {
            Axis::T => cfg.instance.set_horizon(as_count(value)?)?,
            Axis::W => {
                let w = as_count(value)?;
                if let InstanceSpec::RandomWalk { w: iw, .. } = &mut cfg.instance {
                    *iw = w;
                }
                if let AlgorithmSpec::Diw { w: aw, .. } = &mut cfg.algorithm {
                    *aw = w;
                }
                match &mut cfg.benchmark {
                    BenchmarkSpec::Disjoint { w: bw } | BenchmarkSpec::Sliding { w: bw, .. } => *bw = w,
                    BenchmarkSpec::Family { .. } => {}
                }
            }
            Axis::D => {
                if let AlgorithmSpec::Emd { radius, .. } = &mut cfg.algorithm {
                    *radius = Radius::Value(value);
                }
                if let BenchmarkSpec::Family { radius, .. } = &mut cfg.benchmark {
                    *radius = Radius::Value(value);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
