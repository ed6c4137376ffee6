//! Experiment settings: command-line flags merged over an optional TOML file.

use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mlufl::instance::{Family, GenSpec};
use serde::{Deserialize, Deserializer};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    General,
    Related,
    UniformGeneral,
    Zfc,
    MetricUniform,
    MlLp1,
    MlLp2,
}

impl Algo {
    pub fn id(self) -> &'static str {
        match self {
            Algo::General => "general",
            Algo::Related => "related",
            Algo::UniformGeneral => "uniform-general",
            Algo::Zfc => "zfc",
            Algo::MetricUniform => "metric-uniform",
            Algo::MlLp1 => "ml-lp1",
            Algo::MlLp2 => "ml-lp2",
        }
    }

    pub fn is_ml(self) -> bool {
        matches!(self, Algo::MlLp1 | Algo::MlLp2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyId {
    Euclidean,
    Related,
    Uniform,
    MetricUniform,
    Zfc,
    Mgl,
    MglDisjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Md,
}

/// What the latency part of the objective is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Sum of activation times.
    #[default]
    Sum,
    /// `L_p` norm of the activation times.
    Norm,
    /// Sum of `t^p`, rounded with the growth-`p` phase schedule.
    Power,
}

fn one_or_many<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Algo>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        One(Algo),
        Many(Vec<Algo>),
    }
    Ok(match Raw::deserialize(de)? {
        Raw::One(a) => vec![a],
        Raw::Many(v) => v,
    })
}

/// Every flag is optional so that a config file can supply it instead.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// TOML file with the same keys as the long flags
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// JSON instance file; otherwise instances are generated
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Algorithm ids, comma separated
    #[arg(long, value_enum, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub algo: Vec<Algo>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyId>,
    /// Stretch factor for the related family
    #[arg(long)]
    pub factor: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of generated instances
    #[arg(long)]
    pub instances: Option<usize>,
    /// Time-grid precision; 0 selects the full integer grid
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_enum)]
    pub objective: Option<Objective>,
    /// Number of routes
    #[arg(long)]
    pub k: Option<usize>,
    /// Route length budget
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rounding runs per instance
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Inserts a fake certificate violation into every trial.
    #[arg(long, hide = true)]
    #[serde(default)]
    pub inject_violation: bool,
}

impl Settings {
    /// Flags win over file values.
    fn over(self, file: Settings) -> Settings {
        Settings {
            config: self.config,
            instance: self.instance.or(file.instance),
            algo: if self.algo.is_empty() { file.algo } else { self.algo },
            family: self.family.or(file.family),
            factor: self.factor.or(file.factor),
            n: self.n.or(file.n),
            m: self.m.or(file.m),
            instances: self.instances.or(file.instances),
            eps: self.eps.or(file.eps),
            alpha: self.alpha.or(file.alpha),
            beta: self.beta.or(file.beta),
            p: self.p.or(file.p),
            objective: self.objective.or(file.objective),
            k: self.k.or(file.k),
            budget: self.budget.or(file.budget),
            seed: self.seed.or(file.seed),
            trials: self.trials.or(file.trials),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            inject_violation: self.inject_violation || file.inject_violation,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Source {
    File(PathBuf),
    Generated { spec: GenSpec, count: usize },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub algos: Vec<Algo>,
    pub source: Source,
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub objective: Objective,
    pub k: usize,
    pub budget: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub inject_violation: bool,
}

impl ExperimentConfig {
    pub fn load(flags: Settings) -> Result<Self, Failure> {
        let merged = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                let file: Settings =
                    toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                flags.over(file)
            }
            None => flags,
        };
        Self::resolve(merged)
    }

    pub fn resolve(s: Settings) -> Result<Self, Failure> {
        let usage = |msg: String| Err(Failure::Usage(msg));
        let source = match s.instance {
            Some(path) => Source::File(path),
            None => {
                let factor = s.factor.unwrap_or(2.0);
                let family = match s.family.unwrap_or(FamilyId::Euclidean) {
                    FamilyId::Euclidean => Family::Euclidean,
                    FamilyId::Related => Family::Related(factor),
                    FamilyId::Uniform => Family::Uniform,
                    FamilyId::MetricUniform => Family::MetricUniform,
                    FamilyId::Zfc => Family::Zfc,
                    FamilyId::Mgl => Family::Mgl { disjoint: false },
                    FamilyId::MglDisjoint => Family::Mgl { disjoint: true },
                };
                let spec = GenSpec::new(family, s.n.unwrap_or(6), s.m.unwrap_or(6));
                Source::Generated {
                    spec,
                    count: s.instances.unwrap_or(1),
                }
            }
        };
        let cfg = ExperimentConfig {
            algos: if s.algo.is_empty() { vec![Algo::General] } else { s.algo },
            source,
            eps: s.eps.unwrap_or(0.5),
            alpha: s.alpha.unwrap_or(8.0 / 9.0),
            beta: s.beta.unwrap_or(0.5),
            p: s.p.unwrap_or(2.0),
            objective: s.objective.unwrap_or_default(),
            k: s.k.unwrap_or(1),
            budget: s.budget,
            seed: s.seed.unwrap_or(0),
            trials: s.trials.unwrap_or(10),
            out: s.out,
            format: s.format.unwrap_or_default(),
            inject_violation: s.inject_violation,
        };
        if !(cfg.eps >= 0.0 && cfg.eps.is_finite()) {
            return usage(format!("--eps must be a nonnegative number, got {}", cfg.eps));
        }
        if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
            return usage(format!("--alpha must lie in (0, 1), got {}", cfg.alpha));
        }
        if !(cfg.beta > 0.0 && cfg.beta < 1.0) {
            return usage(format!("--beta must lie in (0, 1), got {}", cfg.beta));
        }
        if !(cfg.p >= 1.0) {
            return usage(format!("--p must be at least 1, got {}", cfg.p));
        }
        if cfg.k == 0 {
            return usage("--k must be at least 1".into());
        }
        for &a in &cfg.algos {
            if a != Algo::General && cfg.k > 1 {
                return usage(format!("{} supports a single route only", a.id()));
            }
            if a != Algo::General && cfg.objective != Objective::Sum {
                return usage(format!("{} supports the sum objective only", a.id()));
            }
        }
        Ok(cfg)
    }

    pub fn family_label(&self) -> String {
        match &self.source {
            Source::File(path) => path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            Source::Generated { spec, .. } => match spec.family {
                Family::Euclidean => "euclidean".into(),
                Family::Related(f) => format!("related({f})"),
                Family::Uniform => "uniform".into(),
                Family::MetricUniform => "metric-uniform".into(),
                Family::Zfc => "zfc".into(),
                Family::Mgl { disjoint: false } => "mgl".into(),
                Family::Mgl { disjoint: true } => "mgl-disjoint".into(),
            },
        }
    }
}
