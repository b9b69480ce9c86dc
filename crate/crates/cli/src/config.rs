//! Experiment configuration files.
//!
//! A config is a JSON object in the same versioned dialect as scenario
//! files. Paths inside it are resolved against the config's directory;
//! command-line flags override the corresponding fields.
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "scenario": "demo.json",
//!   "predictors": [{"kind": "saa"}, {"kind": "kl", "radius": 0.1}, {"kind": "svp"}],
//!   "schedule": {"family": "power_law", "c": 1.0, "beta": 0.5},
//!   "counts": [5, 5],
//!   "t_list": [50, 100],
//!   "mode": {"prediction": {"decision": 0}},
//!   "method": "exact",
//!   "format": "csv"
//! }
//! ```

use std::path::{Path, PathBuf};

use optpred::lab::Mode;
use optpred::{
    load_scenario, Distribution, EmpiricalDistribution, Predictor, Problem, RegimeSchedule,
    DEFAULT_LATTICE_CAP,
};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Exact,
    Mc,
    Importance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenario: Option<PathBuf>,
    #[serde(default)]
    pub predictors: Vec<Predictor>,
    pub schedule: Option<RegimeSchedule>,
    /// Observed scenario counts for `predict`, `prescribe` and `convexity`.
    pub counts: Option<Vec<u64>>,
    /// Overrides the scenario's true distribution for `disappoint`.
    pub true_dist: Option<Vec<f64>>,
    #[serde(default)]
    pub t_list: Vec<u64>,
    pub mode: Option<Mode>,
    pub method: Option<MethodKind>,
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
    pub cap: Option<u64>,
    /// Sampling distribution for importance sampling; chosen automatically
    /// when absent.
    pub shift: Option<Vec<f64>>,
    /// Values of `a_T / T` swept by `convexity`.
    pub ratios: Option<Vec<f64>>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Flags that override config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub method: Option<MethodKind>,
    pub cap: Option<u64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text.trim_start_matches('\u{feff}')).map_err(|e| {
            CliError::ConfigParse {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        })?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "config schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Reads a config and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.scenario = cfg.scenario.map(|p| base.join(p));
        cfg.output = cfg.output.map(|p| base.join(p));
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        if o.scenario.is_some() {
            self.scenario = o.scenario;
        }
        if o.out.is_some() {
            self.output = o.out;
        }
        if o.format.is_some() {
            self.format = o.format;
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.method.is_some() {
            self.method = o.method;
        }
        if o.cap.is_some() {
            self.cap = o.cap;
        }
    }

    pub fn problem(&self) -> CliResult<Problem> {
        let path = self
            .scenario
            .as_ref()
            .ok_or_else(|| CliError::Usage("no scenario given (config field or --scenario)".into()))?;
        load_scenario(path).map_err(CliError::core(format!("scenario {}", path.display())))
    }

    pub fn predictors(&self) -> CliResult<&[Predictor]> {
        if self.predictors.is_empty() {
            return Err(CliError::Usage("config lists no predictors".into()));
        }
        Ok(&self.predictors)
    }

    pub fn empirical(&self, problem: &Problem) -> CliResult<EmpiricalDistribution> {
        let counts = self
            .counts
            .clone()
            .ok_or_else(|| CliError::Usage("config needs observed \"counts\"".into()))?;
        if counts.len() != problem.n_scenarios() {
            return Err(CliError::Usage(format!(
                "counts has {} entries for {} scenarios",
                counts.len(),
                problem.n_scenarios()
            )));
        }
        EmpiricalDistribution::from_counts(counts).map_err(CliError::core("counts"))
    }

    /// The distribution generating the data in `disappoint`.
    pub fn truth(&self, problem: &Problem) -> CliResult<Distribution> {
        match &self.true_dist {
            Some(w) => {
                let p = Distribution::new(w.clone()).map_err(CliError::core("true_dist"))?;
                if p.dim() != problem.n_scenarios() {
                    return Err(CliError::Usage(format!(
                        "true_dist has {} entries for {} scenarios",
                        p.dim(),
                        problem.n_scenarios()
                    )));
                }
                Ok(p)
            }
            None => problem.true_dist().cloned().ok_or_else(|| {
                CliError::Usage("no true distribution in the scenario or config".into())
            }),
        }
    }

    pub fn mode(&self, problem: &Problem) -> CliResult<Mode> {
        let mode = self
            .mode
            .ok_or_else(|| CliError::Usage("config needs a \"mode\"".into()))?;
        if let Mode::Prediction { decision } = mode {
            if decision >= problem.n_decisions() {
                return Err(CliError::Usage(format!(
                    "mode decision {decision} out of range for {} decisions",
                    problem.n_decisions()
                )));
            }
        }
        Ok(mode)
    }

    pub fn schedule(&self) -> CliResult<Option<RegimeSchedule>> {
        self.schedule
            .clone()
            .map(|s| s.validated().map_err(CliError::core("schedule")))
            .transpose()
    }

    pub fn required_schedule(&self) -> CliResult<RegimeSchedule> {
        self.schedule()?
            .ok_or_else(|| CliError::Usage("config needs a \"schedule\"".into()))
    }

    pub fn cap(&self) -> u64 {
        self.cap.unwrap_or(DEFAULT_LATTICE_CAP)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}
