//! Planning LP assembly.
//!
//! A model covers one or more weather/load years that share a single set of
//! capacity decisions. Every hourly quantity is in MW (equivalently MWh per
//! hour); hourly costs are multiplied by the year weight and by
//! [`SystemSpec::hour_weight`] so that the objective is an annual cost.

mod builder;
mod storage;

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Co2Policy, DataError, SystemSpec, TechClass};
use crate::finance::FinanceError;
use crate::lp::{LinearProgram, RowSense};

pub use builder::{build, build_multi_year, build_operation, build_single_year};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Finance(#[from] FinanceError),
    #[error("unknown year `{0}`")]
    UnknownYear(String),
    #[error("no years selected")]
    NoYears,
    #[error("year weights of the selected years sum to {0}, expected 1")]
    WeightMismatch(f64),
    #[error("storage `{0}` has a fixed energy capacity but allows investment")]
    FixedEnergyInvestable(String),
    #[error("fixed capacity plan has {got} entries for {expected} technologies")]
    PlanLength { expected: usize, got: usize },
    #[error("fixed capacity for `{0}` must be finite and >= 0")]
    PlanValue(String),
    #[error("a CO2 policy has already been applied to this model")]
    Co2AlreadyApplied,
}

/// A capacity decision: an LP column or a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Amount {
    Var(usize),
    Fixed(f64),
}

impl Amount {
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Amount::Var(j) => x[j],
            Amount::Fixed(v) => v,
        }
    }

    pub fn var(&self) -> Option<usize> {
        match *self {
            Amount::Var(j) => Some(j),
            Amount::Fixed(_) => None,
        }
    }
}

/// `constant + sum(coef * x[col])`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinExpr {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl LinExpr {
    pub fn constant(v: f64) -> Self {
        LinExpr {
            constant: v,
            terms: Vec::new(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, c)| c * x[j]).sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Hourly columns of one technology in one year. Families that do not apply
/// to the technology are empty. For storage, `dispatch` is the discharge.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TechVars {
    pub dispatch: Vec<usize>,
    pub charge: Vec<usize>,
    pub soc: Vec<usize>,
    pub commit: Vec<usize>,
    pub startup: Vec<usize>,
    pub reserve_op: Vec<usize>,
    pub reserve_reg: Vec<usize>,
}

/// Weekly reservoir accounting: `level[k]` is the level at the start of
/// chunk `k` (the last entry is the end of the horizon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirVars {
    pub tech: usize,
    pub level: Vec<usize>,
    pub spill: Vec<usize>,
    pub chunks: Vec<Range<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearVars {
    /// Index into [`SystemSpec::years`].
    pub year: usize,
    pub label: String,
    pub weight: f64,
    pub techs: Vec<TechVars>,
    pub reservoir: Option<ReservoirVars>,
    pub ens: Vec<usize>,
    pub unmet_op: Vec<usize>,
    pub unmet_reg: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableMap {
    pub invest: Vec<Amount>,
    pub retire: Vec<Amount>,
    /// Net capacity per technology in MW.
    pub net: Vec<LinExpr>,
    pub years: Vec<YearVars>,
    /// One name per LP column.
    pub names: Vec<String>,
}

/// Constraint families, in the order their rows appear in the LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    NetCapacity,
    Availability,
    Commitment,
    MinOutput,
    Startup,
    Headroom,
    StorageBalance,
    StorageLimit,
    StorageReserve,
    Reservoir,
    AnnualEnergy,
    Balance,
    OperatingReserve,
    RegulationReserve,
    Co2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifacts {
    pub lp: LinearProgram,
    pub vars: VariableMap,
    /// Contiguous row ranges; together they cover every row exactly once.
    pub families: Vec<(Family, Range<usize>)>,
    pub row_names: Vec<String>,
    pub hours: usize,
    pub hour_weight: f64,
    pub co2_applied: bool,
}

impl ModelArtifacts {
    pub fn family(&self, f: Family) -> Option<Range<usize>> {
        self.families
            .iter()
            .find(|(g, _)| *g == f)
            .map(|(_, r)| r.clone())
    }

    /// Energy-balance row of model year `k` at hour `t`.
    pub fn balance_row(&self, k: usize, t: usize) -> usize {
        let r = self.family(Family::Balance).expect("balance rows");
        r.start + k * self.hours + t
    }

    /// Appends a family of rows at the end of the LP.
    fn push_family(&mut self, family: Family, rows: Vec<builder::PendingRow>) {
        let start = self.lp.num_rows();
        for row in rows {
            self.lp.add_row(&row.terms, row.sense, row.rhs);
            self.row_names.push(row.name);
        }
        let end = self.lp.num_rows();
        if end > start {
            self.families.push((family, start..end));
        }
    }
}

/// Options for [`build`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BuildOptions {
    /// Net capacity per technology (MW). When set, no capacity decisions are
    /// made and the capacity costs of this plan enter as a constant.
    pub fixed_capacity: Option<Vec<f64>>,
}

/// Net capacity `existing + invest - retire`.
pub fn net_capacity(existing: f64, invest: f64, retire: f64) -> f64 {
    existing + invest - retire
}

/// Net capacity of technology `tech` as an expression over the model columns.
pub fn net_capacity_expr(model: &ModelArtifacts, tech: usize) -> LinExpr {
    model.vars.net[tech].clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReserveRequirement {
    pub operating: f64,
    pub regulation: f64,
}

/// Reserve requirements at hour `t` of year `year` given net capacities.
pub fn reserve_requirements(
    spec: &SystemSpec,
    year: usize,
    t: usize,
    net_capacity: &[f64],
) -> ReserveRequirement {
    let vre: f64 = spec
        .technologies
        .iter()
        .enumerate()
        .filter(|(_, g)| g.class == TechClass::Vre)
        .map(|(g, _)| spec.availability(g, year, t) * net_capacity[g])
        .sum();
    reserve_requirement(spec, spec.years[year].demand.values[t], vre)
}

/// Reserve requirements for load `demand` and available VRE output `vre`.
pub fn reserve_requirement(spec: &SystemSpec, demand: f64, vre: f64) -> ReserveRequirement {
    let r = &spec.reserve_rules;
    ReserveRequirement {
        operating: r.op_load_frac * demand + r.op_vre_frac * vre,
        regulation: r.reg_load_frac * demand,
    }
}

/// Adds the emissions constraint of `policy` to every modeled year.
///
/// A zero cap also fixes the dispatch of every emitting technology to zero so
/// that computed emissions are exactly zero.
pub fn apply_co2_policy(
    mut model: ModelArtifacts,
    spec: &SystemSpec,
    policy: Co2Policy,
) -> Result<ModelArtifacts, ModelError> {
    if model.co2_applied {
        return Err(ModelError::Co2AlreadyApplied);
    }
    let cap_for = |y: usize| -> Option<f64> {
        match policy {
            Co2Policy::None => None,
            Co2Policy::TotalCap(c) => Some(c),
            Co2Policy::IntensityCap(c) => {
                let demand: f64 = spec.years[y].demand.values.iter().sum::<f64>();
                Some(c * 1e-3 * demand * model.hour_weight)
            }
        }
    };
    if policy == Co2Policy::None {
        return Ok(model);
    }
    let rates: Vec<f64> = (0..spec.technologies.len())
        .map(|g| spec.emissions_rate(g))
        .collect();
    let mut rows = Vec::new();
    for yv in &model.vars.years {
        let Some(cap) = cap_for(yv.year) else { continue };
        let mut terms = Vec::new();
        for (g, tv) in yv.techs.iter().enumerate() {
            if rates[g] <= 0.0 {
                continue;
            }
            for &p in &tv.dispatch {
                terms.push((p, rates[g] * model.hour_weight));
                if cap == 0.0 {
                    model.lp.upper[p] = 0.0;
                }
            }
        }
        if cap.is_finite() {
            rows.push(builder::PendingRow {
                name: alloc::format!("co2[{}]", builder::sanitize(&yv.label)),
                terms,
                sense: RowSense::Le,
                rhs: cap,
            });
        }
    }
    model.push_family(Family::Co2, rows);
    model.co2_applied = true;
    Ok(model)
}
