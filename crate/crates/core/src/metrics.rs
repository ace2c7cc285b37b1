//! Post-solution accounting. Annual quantities weight every modeled hour by
//! the hour weight and every year by its model weight.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{SystemSpec, TechClass};
use crate::finance::{annuity_factor, FinanceError};
use crate::lp::Status;
use crate::solution::PlanSolution;

/// Relative tolerance of the cost self-check.
pub const COST_CHECK_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Finance(#[from] FinanceError),
    #[error("energy capacity must be > 0")]
    ZeroCapacity,
    #[error("solution is not optimal ({0:?})")]
    Unsolved(Status),
    #[error("cost breakdown total {total} does not match the LP objective {objective}")]
    Inconsistent { total: f64, objective: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub investment: f64,
    pub fixed_om: f64,
    pub variable_om: f64,
    pub fuel: f64,
    pub startup: f64,
    pub ens_cost: f64,
    pub unmet_reserve_cost: f64,
    pub total: f64,
    /// Total cost per MWh of demand.
    pub average_energy_cost: f64,
}

impl CostBreakdown {
    /// Everything except investment and fixed O&M.
    pub fn operating(&self) -> f64 {
        self.variable_om + self.fuel + self.startup + self.ens_cost + self.unmet_reserve_cost
    }

    pub fn parts_sum(&self) -> f64 {
        self.investment + self.fixed_om + self.operating()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EmissionsReport {
    /// Tonnes CO2 per year.
    pub total: f64,
    /// Grams CO2 per kWh of demand.
    pub intensity: f64,
}

fn year_factor(sol: &PlanSolution, k: usize) -> f64 {
    sol.years[k].weight * sol.hour_weight
}

/// Weighted annual demand in MWh.
pub fn annual_demand(sol: &PlanSolution, spec: &SystemSpec) -> f64 {
    (0..sol.years.len())
        .map(|k| {
            let y = &spec.years[sol.years[k].year];
            year_factor(sol, k) * y.demand.values.iter().sum::<f64>()
        })
        .sum()
}

/// Weighted annual output of technology `tech` in MWh (discharge for storage).
pub fn annual_generation(sol: &PlanSolution, tech: usize) -> f64 {
    (0..sol.years.len())
        .map(|k| year_factor(sol, k) * sol.years[k].techs[tech].dispatch.iter().sum::<f64>())
        .sum()
}

/// Weighted annual energy not served in MWh.
pub fn annual_ens(sol: &PlanSolution) -> f64 {
    (0..sol.years.len())
        .map(|k| year_factor(sol, k) * sol.years[k].ens.iter().sum::<f64>())
        .sum()
}

/// Weighted annual reserve shortfall in MW-h.
pub fn annual_unmet_reserve(sol: &PlanSolution) -> f64 {
    (0..sol.years.len())
        .map(|k| {
            let y = &sol.years[k];
            year_factor(sol, k)
                * (y.unmet_op.iter().sum::<f64>() + y.unmet_reg.iter().sum::<f64>())
        })
        .sum()
}

/// Share of each non-storage technology in total non-storage generation.
/// Storage entries are zero. All zero when nothing is generated.
pub fn energy_shares(sol: &PlanSolution, spec: &SystemSpec) -> Vec<f64> {
    let gen: Vec<f64> = spec
        .technologies
        .iter()
        .enumerate()
        .map(|(g, t)| {
            if t.class == TechClass::Storage {
                0.0
            } else {
                annual_generation(sol, g)
            }
        })
        .collect();
    let total: f64 = gen.iter().sum();
    gen.iter()
        .map(|&v| if total > 0.0 { v / total } else { 0.0 })
        .collect()
}

/// Dispatched over available energy of a VRE technology in model year `k`.
/// `None` when no energy was available.
pub fn utilization(sol: &PlanSolution, spec: &SystemSpec, tech: usize, k: usize) -> Option<f64> {
    let ys = &sol.years[k];
    let cap = sol.net_capacity[tech];
    let available: f64 = (0..ys.techs[tech].dispatch.len())
        .map(|t| spec.availability(tech, ys.year, t) * cap)
        .sum();
    if available <= 0.0 {
        return None;
    }
    let used: f64 = ys.techs[tech].dispatch.iter().sum();
    Some((used / available).clamp(0.0, 1.0))
}

/// Fraction of available VRE energy left unused, `1 - utilization`.
pub fn curtailment(sol: &PlanSolution, spec: &SystemSpec, tech: usize, k: usize) -> Option<f64> {
    utilization(sol, spec, tech, k).map(|u| 1.0 - u)
}

/// Weight-averaged curtailment over all model years.
pub fn mean_curtailment(sol: &PlanSolution, spec: &SystemSpec, tech: usize) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..sol.years.len() {
        if let Some(c) = curtailment(sol, spec, tech, k) {
            num += sol.years[k].weight * c;
            den += sol.years[k].weight;
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Storage investment cost per kWh at which the annual savings
/// `cost_no_ess - cost_with_ess` repay the investment over `lifetime` years.
pub fn breakeven_cost(
    cost_no_ess: f64,
    cost_with_ess: f64,
    r: f64,
    lifetime: u32,
    energy_capacity_kwh: f64,
) -> Result<f64, MetricsError> {
    if !(energy_capacity_kwh > 0.0) {
        return Err(MetricsError::ZeroCapacity);
    }
    let savings = (cost_no_ess - cost_with_ess).abs();
    Ok(savings / annuity_factor(r, lifetime)? / energy_capacity_kwh)
}

/// Evaluates every objective term from the solution and checks that they add
/// up to the LP objective.
pub fn cost_breakdown(sol: &PlanSolution, spec: &SystemSpec) -> Result<CostBreakdown, MetricsError> {
    if sol.status != Status::Optimal {
        return Err(MetricsError::Unsolved(sol.status));
    }
    let mut c = CostBreakdown::default();
    for (g, tech) in spec.technologies.iter().enumerate() {
        let exogenous = tech
            .storage
            .as_ref()
            .is_some_and(|s| s.fixed_energy_capacity.is_some());
        if !exogenous {
            c.investment += tech.inv_cost
                * 1000.0
                * annuity_factor(spec.discount_rate, tech.lifetime)?
                * sol.invested[g];
            c.fixed_om += tech.fixed_om * 1000.0 * sol.net_capacity[g];
        }
        let fuel = tech.fuel_cost(&spec.fuels);
        for (k, ys) in sol.years.iter().enumerate() {
            let f = year_factor(sol, k);
            let s = &ys.techs[g];
            let out: f64 = s.dispatch.iter().sum();
            let inflow: f64 = s.charge.iter().sum();
            c.variable_om += f * tech.var_om * (out + inflow);
            c.fuel += f * fuel * out;
            c.startup += f * tech.startup_cost * s.startup.iter().sum::<f64>();
        }
    }
    for (k, ys) in sol.years.iter().enumerate() {
        let f = year_factor(sol, k);
        c.ens_cost += f * spec.voll * ys.ens.iter().sum::<f64>();
        c.unmet_reserve_cost += f
            * spec.unmet_reserve_penalty
            * (ys.unmet_op.iter().sum::<f64>() + ys.unmet_reg.iter().sum::<f64>());
    }
    c.total = c.parts_sum();
    let demand = annual_demand(sol, spec);
    c.average_energy_cost = if demand > 0.0 { c.total / demand } else { 0.0 };
    let scale = sol.objective.abs().max(1.0);
    if (c.total - sol.objective).abs() > COST_CHECK_TOLERANCE * scale {
        return Err(MetricsError::Inconsistent {
            total: c.total,
            objective: sol.objective,
        });
    }
    Ok(c)
}

pub fn emissions_report(sol: &PlanSolution, spec: &SystemSpec) -> EmissionsReport {
    let total: f64 = (0..spec.technologies.len())
        .map(|g| {
            let rate = spec.emissions_rate(g);
            if rate > 0.0 {
                rate * annual_generation(sol, g)
            } else {
                0.0
            }
        })
        .sum();
    let demand = annual_demand(sol, spec);
    EmissionsReport {
        total,
        // t/MWh to g/kWh is a factor 1e6 / 1e3.
        intensity: if demand > 0.0 { total * 1e3 / demand } else { 0.0 },
    }
}

/// Largest absolute hourly energy-balance residual in MWh over all years.
pub fn max_balance_residual(sol: &PlanSolution, spec: &SystemSpec) -> f64 {
    let mut worst: f64 = 0.0;
    for ys in &sol.years {
        let demand = &spec.years[ys.year].demand.values;
        for (t, &d) in demand.iter().enumerate() {
            let mut supply = ys.ens[t];
            for s in &ys.techs {
                supply += s.dispatch[t];
                if let Some(c) = s.charge.get(t) {
                    supply -= c;
                }
            }
            worst = worst.max((supply - d).abs());
        }
    }
    worst
}
