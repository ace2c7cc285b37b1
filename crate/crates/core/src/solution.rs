//! Named view of a solved planning model.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{self, SolveError, SolveOptions, Status};
use crate::model::ModelArtifacts;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("solver finished with status {0:?}")]
    NotOptimal(Status),
}

/// Hourly results of one technology. Families that do not apply are empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TechSeries {
    pub dispatch: Vec<f64>,
    pub charge: Vec<f64>,
    pub soc: Vec<f64>,
    pub commit: Vec<f64>,
    pub startup: Vec<f64>,
    pub reserve_op: Vec<f64>,
    pub reserve_reg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearSolution {
    /// Index into the system's years.
    pub year: usize,
    pub label: String,
    pub weight: f64,
    pub techs: Vec<TechSeries>,
    pub ens: Vec<f64>,
    pub unmet_op: Vec<f64>,
    pub unmet_reg: Vec<f64>,
    /// Weekly reservoir levels, including the final level.
    pub reservoir_level: Vec<f64>,
    /// Dual of the hourly energy balance (marginal cost of demand, per MWh of
    /// modeled hour), when available.
    pub price: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSolution {
    pub status: Status,
    pub objective: f64,
    pub iterations: usize,
    pub hour_weight: f64,
    pub invested: Vec<f64>,
    pub retired: Vec<f64>,
    pub net_capacity: Vec<f64>,
    pub years: Vec<YearSolution>,
}

fn pick(x: &[f64], cols: &[usize]) -> Vec<f64> {
    cols.iter().map(|&j| x[j]).collect()
}

impl PlanSolution {
    /// Maps a primal vector (and optional row duals) back onto the model's
    /// named quantities.
    pub fn extract(model: &ModelArtifacts, sol: &lp::Solution) -> Self {
        let x = &sol.x;
        let v = &model.vars;
        let years = v
            .years
            .iter()
            .enumerate()
            .map(|(k, yv)| {
                let techs = yv
                    .techs
                    .iter()
                    .map(|tv| TechSeries {
                        dispatch: pick(x, &tv.dispatch),
                        charge: pick(x, &tv.charge),
                        soc: pick(x, &tv.soc),
                        commit: pick(x, &tv.commit),
                        startup: pick(x, &tv.startup),
                        reserve_op: pick(x, &tv.reserve_op),
                        reserve_reg: pick(x, &tv.reserve_reg),
                    })
                    .collect();
                let price = sol.duals.as_ref().map(|y| {
                    (0..model.hours)
                        .map(|t| y[model.balance_row(k, t)])
                        .collect()
                });
                YearSolution {
                    year: yv.year,
                    label: yv.label.clone(),
                    weight: yv.weight,
                    techs,
                    ens: pick(x, &yv.ens),
                    unmet_op: pick(x, &yv.unmet_op),
                    unmet_reg: pick(x, &yv.unmet_reg),
                    reservoir_level: yv
                        .reservoir
                        .as_ref()
                        .map_or_else(Vec::new, |r| pick(x, &r.level)),
                    price,
                }
            })
            .collect();
        PlanSolution {
            status: sol.status,
            objective: sol.objective,
            iterations: sol.iterations,
            hour_weight: model.hour_weight,
            invested: v.invest.iter().map(|a| a.value(x)).collect(),
            retired: v.retire.iter().map(|a| a.value(x)).collect(),
            net_capacity: v.net.iter().map(|e| e.eval(x)).collect(),
            years,
        }
    }
}

/// Solves `model` and extracts the plan; anything but an optimal status is
/// an error.
pub fn solve_plan(model: &ModelArtifacts, opts: &SolveOptions) -> Result<PlanSolution, PlanError> {
    let sol = lp::solve(&model.lp, opts)?;
    if sol.status != Status::Optimal {
        return Err(PlanError::NotOptimal(sol.status));
    }
    Ok(PlanSolution::extract(model, &sol))
}
