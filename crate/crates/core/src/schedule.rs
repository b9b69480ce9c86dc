//! Guarantee-speed sequences `a_T`.
//!
//! A predictor is feasible at speed `a_T` when its disappointment probability
//! decays like `exp(-a_T + o(a_T))`. Three regimes matter:
//!
//! ```text
//! exponential      a_T = r T
//! subexponential   a_T = c T^beta (0 < beta < 1)  or  a_T = c ln(1 + T)
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RegimeSchedule {
    /// `a_T = r T`.
    ExponentialRate { r: f64 },
    /// `a_T = c T^beta`.
    PowerLaw { c: f64, beta: f64 },
    /// `a_T = c ln(1 + T)`.
    Logarithmic { c: f64 },
    /// Explicit values; querying a missing `T` is an error.
    Table {
        #[serde(with = "table_keys")]
        values: BTreeMap<u64, f64>,
    },
}

/// JSON object keys are strings; inside an internally tagged enum they are
/// not coerced to integers, so parse them here.
mod table_keys {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &BTreeMap<u64, f64>, s: S) -> Result<S::Ok, S::Error> {
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, f64>, D::Error> {
        BTreeMap::<String, f64>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.trim()
                    .parse::<u64>()
                    .map(|t| (t, v))
                    .map_err(|_| D::Error::custom(format!("table key {k:?} is not a sample size")))
            })
            .collect()
    }
}

impl RegimeSchedule {
    pub fn exponential(r: f64) -> Result<Self> {
        Self::ExponentialRate { r }.validated()
    }

    pub fn power_law(c: f64, beta: f64) -> Result<Self> {
        Self::PowerLaw { c, beta }.validated()
    }

    pub fn logarithmic(c: f64) -> Result<Self> {
        Self::Logarithmic { c }.validated()
    }

    pub fn table(values: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        Self::Table {
            values: values.into_iter().collect(),
        }
        .validated()
    }

    /// Schedule with `a_T / T = ratio` at the single sample size `t`.
    pub fn at_ratio(t: u64, ratio: f64) -> Result<Self> {
        Self::table([(t, ratio * t as f64)])
    }

    /// Checks parameter ranges and, for tables, positivity and monotonicity.
    pub fn validated(self) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match &self {
            Self::ExponentialRate { r } if !(*r > 0.0 && r.is_finite()) => {
                return bad(format!("exponential rate must be positive, got {r}"))
            }
            Self::PowerLaw { c, beta } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return bad(format!("power-law scale must be positive, got {c}"));
                }
                if !(*beta > 0.0 && *beta < 1.0) {
                    return bad(format!("power-law exponent must lie in (0, 1), got {beta}"));
                }
            }
            Self::Logarithmic { c } if !(*c > 0.0 && c.is_finite()) => {
                return bad(format!("logarithmic scale must be positive, got {c}"))
            }
            Self::Table { values } => {
                if values.is_empty() {
                    return bad("schedule table is empty".into());
                }
                let mut prev = 0.0f64;
                for (&t, &a) in values {
                    if t == 0 {
                        return bad("schedule table has an entry for T = 0".into());
                    }
                    if !(a > 0.0 && a.is_finite()) {
                        return bad(format!("a_T must be positive, got {a} at T = {t}"));
                    }
                    if a < prev {
                        return bad(format!("a_T decreases at T = {t}"));
                    }
                    prev = a;
                }
            }
            _ => {}
        }
        Ok(self)
    }

    /// `a_T`.
    pub fn a_t(&self, t: u64) -> Result<f64> {
        if t == 0 {
            return Err(Error::ScheduleUndefined(0));
        }
        let tf = t as f64;
        Ok(match self {
            Self::ExponentialRate { r } => r * tf,
            Self::PowerLaw { c, beta } => c * tf.powf(*beta),
            Self::Logarithmic { c } => c * (1.0 + tf).ln(),
            Self::Table { values } => *values.get(&t).ok_or(Error::ScheduleUndefined(t))?,
        })
    }

    /// `a_T / T`, the radius of the SVP and KL ambiguity sets at `T`.
    pub fn ratio(&self, t: u64) -> Result<f64> {
        Ok(self.a_t(t)? / t as f64)
    }
}
