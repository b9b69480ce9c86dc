//! The four subcommands, each producing one [`Table`].

use optpred::lab::{
    disappointment_exact, disappointment_importance, disappointment_mc, mirrored_shift,
    DisappointmentReport, Method, Mode,
};
use optpred::predictors::predict;
use optpred::prescriptors::{convexity_certificate_at, prescribe};
use optpred::{Distribution, Predictor, Problem, RegimeSchedule};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, MethodKind};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};

pub const PREDICT_COLUMNS: &[&str] = &[
    "t",
    "a_t",
    "decision",
    "decision_label",
    "predictor",
    "radius",
    "value",
    "worst_case",
    "condition_ok",
    "dual_alpha",
];

pub const PRESCRIBE_COLUMNS: &[&str] = &[
    "t",
    "a_t",
    "predictor",
    "radius",
    "decision",
    "decision_label",
    "value",
    "gap_lower",
    "gap_upper",
];

pub const DISAPPOINT_COLUMNS: &[&str] = &[
    "t",
    "a_t",
    "predictor",
    "radius",
    "mode",
    "decision",
    "method",
    "probability",
    "log_probability",
    "rate",
    "std_err",
    "n_samples",
    "effective_sample_size",
];

pub const CONVEXITY_COLUMNS: &[&str] = &["t", "a_t", "ratio", "threshold_ok", "midpoint_violations"];

fn a_t_cell(schedule: Option<&RegimeSchedule>, t: u64) -> CliResult<Cell> {
    match schedule {
        Some(s) => Ok(Cell::Float(s.a_t(t).map_err(CliError::core("schedule"))?)),
        None => Ok(Cell::Empty),
    }
}

fn radius_cell(predictor: &Predictor, t: u64, schedule: Option<&RegimeSchedule>) -> CliResult<Cell> {
    let r = predictor
        .radius(t, schedule)
        .map_err(CliError::core(format!("predictor {}", predictor.name())))?;
    Ok(Cell::opt_float(r))
}

/// One row per (decision, predictor), decision-major.
pub fn cmd_predict(cfg: &ExperimentConfig) -> CliResult<Table> {
    let problem = cfg.problem()?;
    let predictors = cfg.predictors()?;
    let schedule = cfg.schedule()?;
    let emp = cfg.empirical(&problem)?;
    let t = emp.sample_size();
    let p = emp.to_distribution();
    let a_t = a_t_cell(schedule.as_ref(), t)?;
    let mut table = Table::new(PREDICT_COLUMNS);
    for x in 0..problem.n_decisions() {
        for pred in predictors {
            let res = predict(&problem, *pred, x, &p, t, schedule.as_ref())
                .map_err(CliError::core(format!("predict {} at decision {x}", pred.name())))?;
            table.push(vec![
                Cell::Int(t),
                a_t.clone(),
                Cell::Int(x as u64),
                Cell::Text(problem.loss().decision_labels()[x].clone()),
                Cell::Text(pred.name().into()),
                radius_cell(pred, t, schedule.as_ref())?,
                Cell::Float(res.value),
                res.worst_case
                    .map_or(Cell::Empty, |q| Cell::Floats(q.weights().to_vec())),
                res.condition_ok.map_or(Cell::Empty, Cell::Bool),
                Cell::opt_float(res.dual_alpha),
            ]);
        }
    }
    Ok(table)
}

/// One row per predictor.
pub fn cmd_prescribe(cfg: &ExperimentConfig) -> CliResult<Table> {
    let problem = cfg.problem()?;
    let predictors = cfg.predictors()?;
    let schedule = cfg.schedule()?;
    let emp = cfg.empirical(&problem)?;
    let t = emp.sample_size();
    let a_t = a_t_cell(schedule.as_ref(), t)?;
    let mut table = Table::new(PRESCRIBE_COLUMNS);
    for pred in predictors {
        let res = prescribe(&problem, *pred, &emp, schedule.as_ref())
            .map_err(CliError::core(format!("prescribe {}", pred.name())))?;
        table.push(vec![
            Cell::Int(t),
            a_t.clone(),
            Cell::Text(pred.name().into()),
            radius_cell(pred, t, schedule.as_ref())?,
            Cell::Int(res.decision as u64),
            Cell::Text(problem.loss().decision_labels()[res.decision].clone()),
            Cell::Float(res.value),
            Cell::opt_float(res.gap_lower),
            Cell::opt_float(res.gap_upper),
        ]);
    }
    Ok(table)
}

struct DisappointPlan<'a> {
    problem: &'a Problem,
    truth: Distribution,
    schedule: RegimeSchedule,
    mode: Mode,
    method: MethodKind,
    n_samples: u64,
    seed: u64,
    cap: u64,
    shift: Option<Distribution>,
}

impl DisappointPlan<'_> {
    fn run(&self, pred: Predictor, t: u64) -> CliResult<DisappointmentReport> {
        let (problem, p, s, mode) = (self.problem, &self.truth, &self.schedule, self.mode);
        let context = || format!("disappoint {} at T = {t}", pred.name());
        match self.method {
            MethodKind::Exact => disappointment_exact(problem, pred, mode, p, t, s, self.cap),
            MethodKind::Mc => disappointment_mc(problem, pred, mode, p, t, s, self.n_samples, self.seed),
            MethodKind::Importance => {
                let q = match &self.shift {
                    Some(q) => q.clone(),
                    None => mirrored_shift(problem, pred, mode, p, t, s)
                        .map_err(CliError::core(context()))?,
                };
                disappointment_importance(problem, pred, mode, p, t, s, &q, self.n_samples, self.seed)
            }
        }
        .map_err(CliError::core(context()))
    }
}

/// One row per (T, predictor), in `t_list` order then predictor order.
pub fn cmd_disappoint(cfg: &ExperimentConfig) -> CliResult<Table> {
    let problem = cfg.problem()?;
    let predictors = cfg.predictors()?;
    if cfg.t_list.is_empty() {
        return Err(CliError::Usage("config needs a non-empty \"t_list\"".into()));
    }
    let method = cfg.method.unwrap_or(MethodKind::Exact);
    let (n_samples, seed) = match method {
        MethodKind::Exact => (0, 0),
        _ => (
            cfg.n_samples
                .ok_or_else(|| CliError::Usage("sampling methods need \"n_samples\"".into()))?,
            cfg.seed
                .ok_or_else(|| CliError::Usage("sampling methods need a seed (\"seed\" or --seed)".into()))?,
        ),
    };
    let shift = cfg
        .shift
        .clone()
        .map(|w| Distribution::new(w).map_err(CliError::core("shift")))
        .transpose()?;
    let plan = DisappointPlan {
        problem: &problem,
        truth: cfg.truth(&problem)?,
        schedule: cfg.required_schedule()?,
        mode: cfg.mode(&problem)?,
        method,
        n_samples,
        seed,
        cap: cfg.cap(),
        shift,
    };
    let cells: Vec<(u64, Predictor)> = cfg
        .t_list
        .iter()
        .flat_map(|&t| predictors.iter().map(move |&p| (t, p)))
        .collect();
    let reports = cells
        .par_iter()
        .map(|&(t, pred)| plan.run(pred, t))
        .collect::<CliResult<Vec<_>>>()?;

    let mut table = Table::new(DISAPPOINT_COLUMNS);
    for r in reports {
        let (mode, decision) = match r.mode {
            Mode::Prediction { decision } => ("prediction", Cell::Int(decision as u64)),
            Mode::Prescription => ("prescription", Cell::Empty),
        };
        let (n, ess) = match &r.method {
            Method::Exact => (Cell::Empty, Cell::Empty),
            Method::MonteCarlo { n, .. } => (Cell::Int(*n), Cell::Empty),
            Method::Importance {
                n,
                effective_sample_size,
                ..
            } => (Cell::Int(*n), Cell::Float(*effective_sample_size)),
        };
        table.push(vec![
            Cell::Int(r.t),
            Cell::Float(r.a_t),
            Cell::Text(r.predictor.name().into()),
            radius_cell(&r.predictor, r.t, Some(&plan.schedule))?,
            Cell::Text(mode.into()),
            decision,
            Cell::Text(r.method.name().into()),
            Cell::Float(r.probability),
            Cell::Float(r.log_probability),
            Cell::Float(r.rate),
            Cell::opt_float(r.method.std_err()),
            n,
            ess,
        ]);
    }
    Ok(table)
}

/// One row per ratio `a_T / T`; the scenario's decisions are the grid.
pub fn cmd_convexity(cfg: &ExperimentConfig) -> CliResult<Table> {
    let problem = cfg.problem()?;
    let emp = cfg.empirical(&problem)?;
    let t = emp.sample_size();
    let ratios = match &cfg.ratios {
        Some(r) if r.is_empty() => {
            return Err(CliError::Usage("\"ratios\" must not be empty".into()))
        }
        Some(r) => r.clone(),
        None => {
            let s = cfg.schedule()?.ok_or_else(|| {
                CliError::Usage("convexity needs \"ratios\" or a \"schedule\"".into())
            })?;
            vec![s.ratio(t).map_err(CliError::core("schedule"))?]
        }
    };
    let p = emp.to_distribution();
    let mut table = Table::new(CONVEXITY_COLUMNS);
    for ratio in ratios {
        let cert = convexity_certificate_at(problem.loss(), &p, ratio)
            .map_err(CliError::core(format!("convexity at ratio {ratio}")))?;
        table.push(vec![
            Cell::Int(t),
            Cell::Float(ratio * t as f64),
            Cell::Float(ratio),
            Cell::Bool(cert.threshold_ok),
            Cell::Int(cert.midpoint_violations as u64),
        ]);
    }
    Ok(table)
}
