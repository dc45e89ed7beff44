use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use splitfix::analysis::DEFAULT_RATE_WINDOW;
use splitfix::operators::NormOrder;
use splitfix::problems::{random_instance, InstanceExtras, ProblemInstance, ProblemKind};
use splitfix::{Algorithm, AlgorithmConfig, RateCase, RelaxationSchedule, Splitting, StopRule};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub problem: ProblemSpec,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub orientation: Orientation,
    pub gamma: f64,
    #[serde(default = "default_schedule")]
    pub schedule: RelaxationSchedule,
    #[serde(default)]
    pub stop: StopRule,
    /// Subregularity modulus for the bound overlay.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub lipschitz: Option<f64>,
    /// Defaults to the natural case of `algorithm`.
    #[serde(default)]
    pub bound_case: Option<RateCase>,
    #[serde(default = "default_window")]
    pub rate_window: f64,
    #[serde(default)]
    pub start: Start,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub sweep: Option<SweepGrid>,
}

fn default_schedule() -> RelaxationSchedule {
    RelaxationSchedule::Constant(1.0)
}

fn default_window() -> f64 {
    DEFAULT_RATE_WINDOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub m: usize,
    pub n: usize,
    #[serde(default)]
    pub reg: Option<f64>,
    /// `1`, `2` or `"inf"`.
    #[serde(default)]
    pub p: Option<PValue>,
    #[serde(default)]
    pub sparsity: Option<f64>,
    #[serde(default)]
    pub noise: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub skew: Option<f64>,
    /// Instance JSON to load instead of generating one.
    #[serde(default)]
    pub instance: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PValue {
    Number(f64),
    Name(String),
}

impl PValue {
    fn value(&self) -> Result<f64, CliError> {
        match self {
            Self::Number(p) => Ok(*p),
            Self::Name(s) if s.eq_ignore_ascii_case("inf") => Ok(f64::INFINITY),
            Self::Name(s) => s.parse().map_err(|_| {
                CliError::Config(format!("problem.p: cannot read `{s}` as a norm order"))
            }),
        }
    }
}

/// Which prox operator plays `A` in DRS and DYS.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Standard,
    Swapped,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    #[default]
    Zeros,
    /// `scale · N(0, I)`; sweeps draw point `i` from child stream `i`.
    Gaussian { seed: u64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub sweep: PathBuf,
    /// Per-iteration iterate dump; off unless set.
    pub snapshots: Option<PathBuf>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
            trace: PathBuf::from("trace.csv"),
            summary: PathBuf::from("summary.json"),
            sweep: PathBuf::from("sweep.csv"),
            snapshots: None,
        }
    }
}

impl OutputSpec {
    pub fn path(&self, file: &Path) -> PathBuf {
        self.dir.join(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "config schema {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(g) = o.gamma {
            self.gamma = g;
        }
        if let Some(l) = o.lambda {
            self.schedule = RelaxationSchedule::Constant(l);
        }
        if let Some(s) = o.seed {
            self.problem.seed = s;
        }
        if let Some(k) = o.max_iter {
            self.stop.max_iter = k;
        }
        if let Some(t) = o.tol {
            self.stop.residual_tol = t;
        }
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
    }

    pub fn instance(&self) -> Result<ProblemInstance, CliError> {
        let p = &self.problem;
        if let Some(path) = &p.instance {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            return ProblemInstance::from_json(&text).map_err(CliError::from);
        }
        let defaults = InstanceExtras::default();
        let order = match &p.p {
            None => defaults.p,
            Some(v) => {
                let p = v.value()?;
                NormOrder::from_p(p).map_err(|_| {
                    CliError::Config(format!(
                        "problem.p = {p}: certificate C3 covers only p in {{1, 2, inf}}"
                    ))
                })?
            }
        };
        let extras = InstanceExtras {
            reg: p.reg.unwrap_or(defaults.reg),
            p: order,
            sparsity: p.sparsity.unwrap_or(defaults.sparsity),
            noise: p.noise.unwrap_or(defaults.noise),
            mu: p.mu.unwrap_or(defaults.mu),
            skew: p.skew.unwrap_or(defaults.skew),
        };
        random_instance(p.seed, p.kind, p.m, p.n, &extras).map_err(CliError::from)
    }

    pub fn splitting(&self, inst: &ProblemInstance) -> Result<Splitting, CliError> {
        let s = inst.splitting(self.algorithm)?;
        match self.orientation {
            Orientation::Standard => Ok(s),
            Orientation::Swapped => match self.algorithm {
                Algorithm::Drs | Algorithm::DrsAsPpa | Algorithm::Dys => {
                    Ok(Splitting::new(s.b, s.a, s.c)?)
                }
                alg => Err(CliError::Config(format!(
                    "orientation `swapped` needs two resolvent operators; {alg} has one"
                ))),
            },
        }
    }

    pub fn algorithm_config(&self) -> AlgorithmConfig {
        let cfg = AlgorithmConfig::new(self.gamma, self.schedule.clone(), self.stop);
        if self.output.snapshots.is_some() {
            cfg.with_snapshots()
        } else {
            cfg
        }
    }

    /// Rate case the bound column is computed from.
    pub fn rate_case(&self) -> RateCase {
        self.bound_case.unwrap_or(match self.algorithm {
            Algorithm::Gppa => RateCase::Gppa,
            Algorithm::Fbs => RateCase::Fbs,
            Algorithm::Drs | Algorithm::DrsAsPpa => RateCase::DrsPpa,
            Algorithm::Dys => RateCase::DysLipA,
        })
    }
}
