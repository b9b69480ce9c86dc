//! The decision model: a finite decision set, a loss matrix over the
//! scenario set, and the moments of a decision's loss under a distribution.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{check_dim, Distribution};

/// Version written to and accepted from scenario files.
pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// `loss(x, i)` for decisions `x` (rows) and scenarios `i` (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    values: Vec<f64>,
    n_decisions: usize,
    n_scenarios: usize,
    decision_labels: Vec<String>,
    scenario_labels: Vec<String>,
    sup_norm: f64,
}

impl LossMatrix {
    /// Builds a matrix from rows, labelling decisions and scenarios by index.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let decision_labels = (0..n).map(|x| format!("x{x}")).collect();
        let scenario_labels = (0..d).map(|i| format!("s{i}")).collect();
        Self::with_labels(rows, decision_labels, scenario_labels)
    }

    pub fn with_labels(
        rows: Vec<Vec<f64>>,
        decision_labels: Vec<String>,
        scenario_labels: Vec<String>,
    ) -> Result<Self> {
        let n = rows.len();
        if n < 1 {
            return Err(Error::InvalidLoss("need at least one decision".into()));
        }
        let d = rows[0].len();
        if d < 2 {
            return Err(Error::InvalidLoss("need at least two scenarios".into()));
        }
        let mut values = Vec::with_capacity(n * d);
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidLoss(format!(
                    "row {x} has {} entries, expected {d}",
                    row.len()
                )));
            }
            if let Some(i) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidLoss(format!(
                    "loss({x}, {i}) = {} is not finite",
                    row[i]
                )));
            }
            values.extend(row);
        }
        if decision_labels.len() != n {
            return Err(Error::InvalidLoss(format!(
                "{} decision labels for {n} decisions",
                decision_labels.len()
            )));
        }
        if scenario_labels.len() != d {
            return Err(Error::InvalidLoss(format!(
                "{} scenario labels for {d} scenarios",
                scenario_labels.len()
            )));
        }
        let sup_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            values,
            n_decisions: n,
            n_scenarios: d,
            decision_labels,
            scenario_labels,
            sup_norm,
        })
    }

    pub fn n_decisions(&self) -> usize {
        self.n_decisions
    }

    pub fn n_scenarios(&self) -> usize {
        self.n_scenarios
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.values[x * self.n_scenarios..(x + 1) * self.n_scenarios]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_scenarios)
    }

    pub fn decision_labels(&self) -> &[String] {
        &self.decision_labels
    }

    pub fn scenario_labels(&self) -> &[String] {
        &self.scenario_labels
    }

    /// `max_{x,i} |loss(x, i)|`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// The constant `K = 2 sup |loss|` of the finite-sample bounds.
    pub fn range_constant(&self) -> f64 {
        2.0 * self.sup_norm
    }

    pub fn check_decision(&self, x: usize) -> Result<()> {
        if x >= self.n_decisions {
            return Err(Error::IndexOutOfRange {
                what: "decisions",
                index: x,
                len: self.n_decisions,
            });
        }
        Ok(())
    }
}

/// A loss matrix and, in experiment mode, the data-generating distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    loss: LossMatrix,
    true_dist: Option<Distribution>,
}

impl Problem {
    pub fn new(loss: LossMatrix, true_dist: Option<Distribution>) -> Result<Self> {
        if let Some(p) = &true_dist {
            check_dim(p.dim(), loss.n_scenarios())?;
        }
        Ok(Self { loss, true_dist })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(LossMatrix::from_rows(rows)?, None)
    }

    pub fn loss(&self) -> &LossMatrix {
        &self.loss
    }

    pub fn true_dist(&self) -> Option<&Distribution> {
        self.true_dist.as_ref()
    }

    pub fn n_decisions(&self) -> usize {
        self.loss.n_decisions()
    }

    pub fn n_scenarios(&self) -> usize {
        self.loss.n_scenarios()
    }

    fn row_for(&self, x: usize, p: &Distribution) -> Result<&[f64]> {
        self.loss.check_decision(x)?;
        check_dim(p.dim(), self.n_scenarios())?;
        Ok(self.loss.row(x))
    }

    /// Expected loss `E_p loss(x, .)`.
    pub fn cost(&self, x: usize, p: &Distribution) -> Result<f64> {
        Ok(dot(self.row_for(x, p)?, p.weights()))
    }

    /// `Var_p loss(x, .)`, never negative.
    pub fn variance(&self, x: usize, p: &Distribution) -> Result<f64> {
        self.covariance(x, x, p).map(|v| v.max(0.0))
    }

    pub fn covariance(&self, x1: usize, x2: usize, p: &Distribution) -> Result<f64> {
        let a = self.row_for(x1, p)?;
        let b = self.row_for(x2, p)?;
        let cov = row_covariance(a, b, p.weights());
        Ok(if x1 == x2 { cov.max(0.0) } else { cov })
    }

    /// Minimum expected loss over all decisions.
    pub fn min_cost(&self, p: &Distribution) -> Result<f64> {
        check_dim(p.dim(), self.n_scenarios())?;
        Ok(self
            .loss
            .rows()
            .map(|row| dot(row, p.weights()))
            .fold(f64::INFINITY, f64::min))
    }

    /// Among decisions whose cost is within `tol` of the minimum, the one with
    /// the smallest variance; the lowest index wins ties.
    pub fn min_variance_minimizer(&self, p: &Distribution, tol: f64) -> Result<usize> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let c_min = self.min_cost(p)?;
        let mut best: Option<(usize, f64)> = None;
        for (x, row) in self.loss.rows().enumerate() {
            if dot(row, p.weights()) > c_min + tol {
                continue;
            }
            let var = row_covariance(row, row, p.weights()).max(0.0);
            if best.is_none_or(|(_, v)| var < v) {
                best = Some((x, var));
            }
        }
        Ok(best.expect("at least one decision attains the minimum").0)
    }
}

/// Cost-tie tolerance `1e-9 (1 + |c*|)` used to select the minimal-variance
/// minimizer.
pub fn default_cost_tolerance(min_cost: f64) -> f64 {
    1e-9 * (1.0 + min_cost.abs())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Centered second moment `sum_i p_i (a_i - E a)(b_i - E b)`.
pub(crate) fn row_covariance(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let ma = dot(a, p);
    let mb = dot(b, p);
    a.iter()
        .zip(b)
        .zip(p)
        .map(|((x, y), w)| w * ((x - ma) * (y - mb)))
        .sum()
}

pub(crate) fn row_variance(a: &[f64], p: &[f64]) -> f64 {
    row_covariance(a, a, p).max(0.0)
}

/// On-disk form of a scenario file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub scenario_labels: Vec<String>,
    pub decision_labels: Vec<String>,
    pub loss: Vec<Vec<LossEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_dist: Option<Vec<f64>>,
}

/// A loss value. JSON has no literal for non-finite numbers, so the strings
/// `"nan"`, `"inf"` and `"-inf"` are accepted here and rejected during
/// validation with a message naming the entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LossEntry {
    Number(f64),
    #[serde(with = "sentinel")]
    Sentinel(f64),
}

impl LossEntry {
    pub fn value(self) -> f64 {
        match self {
            LossEntry::Number(v) | LossEntry::Sentinel(v) => v,
        }
    }
}

mod sentinel {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::format_f64(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        match s.to_ascii_lowercase().as_str() {
            "nan" => Ok(f64::NAN),
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            other => Err(D::Error::custom(format!("not a number: {other:?}"))),
        }
    }
}

impl ScenarioFile {
    pub fn from_problem(problem: &Problem) -> Self {
        let loss = problem.loss();
        Self {
            schema_version: SCENARIO_SCHEMA_VERSION,
            scenario_labels: loss.scenario_labels().to_vec(),
            decision_labels: loss.decision_labels().to_vec(),
            loss: loss
                .rows()
                .map(|r| r.iter().map(|&v| LossEntry::Number(v)).collect())
                .collect(),
            true_dist: problem.true_dist().map(|p| p.weights().to_vec()),
        }
    }

    pub fn into_problem(self) -> Result<Problem> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schema_version {}, expected {SCENARIO_SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        let rows: Vec<Vec<f64>> = self
            .loss
            .into_iter()
            .map(|r| r.into_iter().map(LossEntry::value).collect())
            .collect();
        let loss = LossMatrix::with_labels(rows, self.decision_labels, self.scenario_labels)
            .map_err(|e| Error::Validation(e.to_string()))?;
        let true_dist = self
            .true_dist
            .map(Distribution::new)
            .transpose()
            .map_err(|e| Error::Validation(format!("true_dist: {e}")))?;
        Problem::new(loss, true_dist).map_err(|e| Error::Validation(format!("true_dist: {e}")))
    }
}

/// Parses a scenario document.
pub fn parse_scenario(text: &str) -> Result<Problem> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_problem()
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Problem> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}
