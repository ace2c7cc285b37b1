use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::storage::storage_dynamics;
use super::{
    apply_co2_policy, Amount, BuildOptions, Family, LinExpr, ModelArtifacts, ModelError,
    ReservoirVars, TechVars, VariableMap, YearVars,
};
use crate::data::{Co2Policy, SystemSpec, TechClass, HOURS_PER_WEEK};
use crate::finance::annuity_factor;
use crate::lp::{LinearProgram, RowSense};

const INF: f64 = f64::INFINITY;
const WEIGHT_TOLERANCE: f64 = 1e-9;

pub(crate) struct PendingRow {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

/// Names usable in MPS files: whitespace replaced by underscores.
pub(crate) fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect()
}

/// Column and row collection. Rows are buffered per family and emitted in
/// family order so every family occupies a contiguous range.
pub(crate) struct Assembly {
    pub lp: LinearProgram,
    pub names: Vec<String>,
    rows: BTreeMap<Family, Vec<PendingRow>>,
}

impl Assembly {
    fn new() -> Self {
        Assembly {
            lp: LinearProgram::new(),
            names: Vec::new(),
            rows: BTreeMap::new(),
        }
    }

    pub fn var(&mut self, name: String, cost: f64, lo: f64, hi: f64) -> usize {
        self.names.push(name);
        self.lp.add_var(cost, lo, hi)
    }

    pub fn row(
        &mut self,
        family: Family,
        name: String,
        terms: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) {
        self.rows.entry(family).or_default().push(PendingRow {
            name,
            terms,
            sense,
            rhs,
        });
    }

    /// `sum(lhs) <= factor * net`. Becomes a column bound when the net
    /// capacity is constant and the left side is a single unit column.
    pub fn cap(
        &mut self,
        family: Family,
        name: String,
        lhs: &[(usize, f64)],
        factor: f64,
        net: &LinExpr,
    ) {
        if net.is_constant() && lhs.len() == 1 && lhs[0].1 == 1.0 {
            let j = lhs[0].0;
            let ub = (factor * net.constant).max(0.0);
            self.lp.upper[j] = self.lp.upper[j].min(ub);
            return;
        }
        let mut terms: Vec<(usize, f64)> = lhs.to_vec();
        terms.extend(net.terms.iter().map(|&(j, c)| (j, -factor * c)));
        self.row(family, name, terms, RowSense::Le, factor * net.constant);
    }

    fn finish(self, vars: VariableMap, hours: usize, hour_weight: f64) -> ModelArtifacts {
        let mut model = ModelArtifacts {
            lp: self.lp,
            vars,
            families: Vec::new(),
            row_names: Vec::new(),
            hours,
            hour_weight,
            co2_applied: false,
        };
        for (family, rows) in self.rows {
            model.push_family(family, rows);
        }
        model
    }
}

/// Single-year expansion model for the year labelled `year`.
pub fn build_single_year(spec: &SystemSpec, year: &str) -> Result<ModelArtifacts, ModelError> {
    let y = spec
        .year_index(year)
        .ok_or_else(|| ModelError::UnknownYear(year.into()))?;
    build(spec, &[(y, 1.0)], &BuildOptions::default())
}

/// Multi-year expansion model over the labelled years, weighted by their
/// weights in `spec`, which must sum to one over the selection.
pub fn build_multi_year(spec: &SystemSpec, years: &[&str]) -> Result<ModelArtifacts, ModelError> {
    let mut sel = Vec::with_capacity(years.len());
    for label in years {
        let y = spec
            .year_index(label)
            .ok_or_else(|| ModelError::UnknownYear((*label).into()))?;
        sel.push((y, spec.years[y].weight));
    }
    let sum: f64 = sel.iter().map(|&(_, w)| w).sum();
    if sel.is_empty() {
        return Err(ModelError::NoYears);
    }
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(ModelError::WeightMismatch(sum));
    }
    build(spec, &sel, &BuildOptions::default())
}

/// Operation-only model of year `year` with net capacities fixed to `plan`.
pub fn build_operation(
    spec: &SystemSpec,
    year: &str,
    plan: &[f64],
) -> Result<ModelArtifacts, ModelError> {
    let y = spec
        .year_index(year)
        .ok_or_else(|| ModelError::UnknownYear(year.into()))?;
    build(
        spec,
        &[(y, 1.0)],
        &BuildOptions {
            fixed_capacity: Some(plan.to_vec()),
        },
    )
}

/// Builds the model over `years` given as `(index into spec.years, weight)`
/// and applies the CO2 policy of `spec`.
pub fn build(
    spec: &SystemSpec,
    years: &[(usize, f64)],
    opts: &BuildOptions,
) -> Result<ModelArtifacts, ModelError> {
    if years.is_empty() {
        return Err(ModelError::NoYears);
    }
    for &(y, _) in years {
        if y >= spec.years.len() {
            return Err(ModelError::UnknownYear(format!("#{y}")));
        }
    }
    let ntech = spec.technologies.len();
    if let Some(plan) = &opts.fixed_capacity {
        if plan.len() != ntech {
            return Err(ModelError::PlanLength {
                expected: ntech,
                got: plan.len(),
            });
        }
        for (g, &v) in plan.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::PlanValue(spec.technologies[g].name.clone()));
            }
        }
    }

    let mut a = Assembly::new();
    let mut invest = Vec::with_capacity(ntech);
    let mut retire = Vec::with_capacity(ntech);
    let mut net = Vec::with_capacity(ntech);

    for (g, tech) in spec.technologies.iter().enumerate() {
        let name = sanitize(&tech.name);
        let fixed_energy = tech
            .storage
            .as_ref()
            .and_then(|s| s.fixed_energy_capacity.map(|e| e / s.duration));
        if let (Some(_), Some(cap)) = (fixed_energy, tech.max_capacity) {
            if cap > tech.existing_capacity {
                return Err(ModelError::FixedEnergyInvestable(tech.name.clone()));
            }
        }
        let capital = tech.inv_cost * 1000.0 * annuity_factor(spec.discount_rate, tech.lifetime)?;
        // Exogenous storage carries neither investment nor fixed O&M.
        let fom = if fixed_energy.is_some() {
            0.0
        } else {
            tech.fixed_om * 1000.0
        };

        if let Some(power) = fixed_energy {
            invest.push(Amount::Fixed(0.0));
            retire.push(Amount::Fixed(0.0));
            net.push(LinExpr::constant(power));
            continue;
        }
        if let Some(plan) = &opts.fixed_capacity {
            let delta = plan[g];
            let x = (delta - tech.existing_capacity).max(0.0);
            let r = (tech.existing_capacity - delta).max(0.0);
            a.lp.objective_offset += capital * x + fom * delta;
            invest.push(Amount::Fixed(x));
            retire.push(Amount::Fixed(r));
            net.push(LinExpr::constant(delta));
            continue;
        }

        a.lp.objective_offset += fom * tech.existing_capacity;
        let mut expr = LinExpr::constant(tech.existing_capacity);
        let inv = if tech.investable() {
            let ub = match tech.max_capacity {
                Some(cap) if !tech.retirable => cap - tech.existing_capacity,
                _ => INF,
            };
            let j = a.var(format!("inv[{name}]"), capital + fom, 0.0, ub);
            expr.terms.push((j, 1.0));
            Amount::Var(j)
        } else {
            Amount::Fixed(0.0)
        };
        let ret = if tech.retirable && tech.existing_capacity > 0.0 {
            let j = a.var(format!("ret[{name}]"), -fom, 0.0, tech.existing_capacity);
            expr.terms.push((j, -1.0));
            Amount::Var(j)
        } else {
            Amount::Fixed(0.0)
        };
        if let (Amount::Var(i), Amount::Var(r), Some(cap)) = (inv, ret, tech.max_capacity) {
            a.row(
                Family::NetCapacity,
                format!("netcap[{name}]"),
                vec![(i, 1.0), (r, -1.0)],
                RowSense::Le,
                cap - tech.existing_capacity,
            );
        }
        invest.push(inv);
        retire.push(ret);
        net.push(expr);
    }

    let hours = spec.hours();
    let mut year_vars = Vec::with_capacity(years.len());
    for &(y, weight) in years {
        year_vars.push(build_year(&mut a, spec, y, weight, &net, hours));
    }

    let vars = VariableMap {
        invest,
        retire,
        net,
        years: year_vars,
        names: a.names.clone(),
    };
    let model = a.finish(vars, hours, spec.hour_weight);
    if spec.co2_policy == Co2Policy::None {
        Ok(model)
    } else {
        apply_co2_policy(model, spec, spec.co2_policy)
    }
}

fn build_year(
    a: &mut Assembly,
    spec: &SystemSpec,
    y: usize,
    weight: f64,
    net: &[LinExpr],
    hours: usize,
) -> YearVars {
    let year = &spec.years[y];
    let yl = sanitize(&year.label);
    let hw = spec.hour_weight;
    let scale = weight * hw;
    let demand = &year.demand.values;
    let mut techs = Vec::with_capacity(spec.technologies.len());
    let mut reservoir = None;

    for (g, tech) in spec.technologies.iter().enumerate() {
        let tn = sanitize(&tech.name);
        let mut tv = TechVars::default();
        if tech.class == TechClass::Storage {
            storage_dynamics(a, tech, &tn, &yl, &net[g], hours, scale, &mut tv);
            techs.push(tv);
            continue;
        }
        let energy_cost = tech.var_om + tech.fuel_cost(&spec.fuels);
        let with_commit = tech.uc && (tech.min_output_frac > 0.0 || tech.startup_cost > 0.0);
        for t in 0..hours {
            tv.dispatch
                .push(a.var(format!("p[{tn}][{yl}][{t}]"), scale * energy_cost, 0.0, INF));
        }
        if tech.reserve {
            for t in 0..hours {
                tv.reserve_op
                    .push(a.var(format!("rop[{tn}][{yl}][{t}]"), 0.0, 0.0, INF));
                tv.reserve_reg
                    .push(a.var(format!("rreg[{tn}][{yl}][{t}]"), 0.0, 0.0, INF));
            }
        }
        // Output plus reserves must fit under the committed capacity, or
        // under the available capacity when there is no commitment.
        let upper_terms = |t: usize, tv: &TechVars| -> Vec<(usize, f64)> {
            let mut v = vec![(tv.dispatch[t], 1.0)];
            if let (Some(&o), Some(&r)) = (tv.reserve_op.get(t), tv.reserve_reg.get(t)) {
                v.push((o, 1.0));
                v.push((r, 1.0));
            }
            v
        };
        if with_commit {
            for t in 0..hours {
                let u = a.var(format!("u[{tn}][{yl}][{t}]"), 0.0, 0.0, INF);
                tv.commit.push(u);
                let af = spec.availability(g, y, t);
                a.cap(
                    Family::Commitment,
                    format!("commit[{tn}][{yl}][{t}]"),
                    &[(u, 1.0)],
                    af,
                    &net[g],
                );
                let mut terms = upper_terms(t, &tv);
                terms.push((u, -1.0));
                a.row(
                    Family::Headroom,
                    format!("head[{tn}][{yl}][{t}]"),
                    terms,
                    RowSense::Le,
                    0.0,
                );
                if tech.min_output_frac > 0.0 {
                    a.row(
                        Family::MinOutput,
                        format!("minout[{tn}][{yl}][{t}]"),
                        vec![(tv.dispatch[t], 1.0), (u, -tech.min_output_frac)],
                        RowSense::Ge,
                        0.0,
                    );
                }
            }
            if tech.startup_cost > 0.0 && hours > 1 {
                for t in 0..hours {
                    let s = a.var(
                        format!("su[{tn}][{yl}][{t}]"),
                        scale * tech.startup_cost,
                        0.0,
                        INF,
                    );
                    tv.startup.push(s);
                    let prev = tv.commit[(t + hours - 1) % hours];
                    a.row(
                        Family::Startup,
                        format!("start[{tn}][{yl}][{t}]"),
                        vec![(s, 1.0), (tv.commit[t], -1.0), (prev, 1.0)],
                        RowSense::Ge,
                        0.0,
                    );
                }
            }
        } else {
            for t in 0..hours {
                let af = spec.availability(g, y, t);
                let terms = upper_terms(t, &tv);
                a.cap(
                    Family::Availability,
                    format!("avail[{tn}][{yl}][{t}]"),
                    &terms,
                    af,
                    &net[g],
                );
            }
        }
        if let Some(cap) = tech.max_annual_energy {
            a.row(
                Family::AnnualEnergy,
                format!("energy[{tn}][{yl}]"),
                tv.dispatch.iter().map(|&p| (p, hw)).collect(),
                RowSense::Le,
                cap,
            );
        }
        if tech.class == TechClass::HydroReservoir {
            if let Some(hd) = spec.hydro.as_ref().filter(|h| h.technology == tech.name) {
                let inflows = &year.inflows.as_ref().expect("validated inflows").values;
                let chunks: Vec<core::ops::Range<usize>> = (0..hours)
                    .step_by(HOURS_PER_WEEK)
                    .map(|s| s..(s + HOURS_PER_WEEK).min(hours))
                    .collect();
                let mut level = Vec::with_capacity(chunks.len() + 1);
                let mut spill = Vec::with_capacity(chunks.len());
                let last = chunks.len();
                for k in 0..=last {
                    let (lo, hi) = if k == 0 {
                        (hd.initial_level, hd.initial_level)
                    } else if k == last {
                        (
                            ((1.0 - hd.end_tolerance) * hd.initial_level).max(0.0),
                            ((1.0 + hd.end_tolerance) * hd.initial_level)
                                .min(hd.reservoir_capacity),
                        )
                    } else {
                        (0.0, hd.reservoir_capacity)
                    };
                    level.push(a.var(format!("lvl[{tn}][{yl}][{k}]"), 0.0, lo, hi));
                }
                for (k, chunk) in chunks.iter().enumerate() {
                    let s = a.var(format!("spill[{tn}][{yl}][{k}]"), 0.0, 0.0, INF);
                    spill.push(s);
                    let week = inflows[k.min(inflows.len() - 1)];
                    let inflow = week * chunk.len() as f64 / HOURS_PER_WEEK as f64;
                    let mut terms = vec![(level[k + 1], 1.0), (level[k], -1.0), (s, 1.0)];
                    terms.extend(chunk.clone().map(|t| (tv.dispatch[t], 1.0)));
                    a.row(
                        Family::Reservoir,
                        format!("res[{tn}][{yl}][{k}]"),
                        terms,
                        RowSense::Eq,
                        inflow,
                    );
                }
                reservoir = Some(ReservoirVars {
                    tech: g,
                    level,
                    spill,
                    chunks,
                });
            }
        }
        techs.push(tv);
    }

    let mut ens = Vec::with_capacity(hours);
    let mut unmet_op = Vec::with_capacity(hours);
    let mut unmet_reg = Vec::with_capacity(hours);
    for (t, &d) in demand.iter().enumerate().take(hours) {
        ens.push(a.var(format!("ens[{yl}][{t}]"), scale * spec.voll, 0.0, d));
        let penalty = scale * spec.unmet_reserve_penalty;
        unmet_op.push(a.var(format!("urop[{yl}][{t}]"), penalty, 0.0, INF));
        unmet_reg.push(a.var(format!("urreg[{yl}][{t}]"), penalty, 0.0, INF));
    }

    let rules = &spec.reserve_rules;
    for t in 0..hours {
        let mut balance = vec![(ens[t], 1.0)];
        let mut op = vec![(unmet_op[t], 1.0)];
        let mut reg = vec![(unmet_reg[t], 1.0)];
        let mut op_rhs = rules.op_load_frac * demand[t];
        for (g, tv) in techs.iter().enumerate() {
            balance.push((tv.dispatch[t], 1.0));
            if let Some(&c) = tv.charge.get(t) {
                balance.push((c, -1.0));
            }
            if let Some(&r) = tv.reserve_op.get(t) {
                op.push((r, 1.0));
            }
            if let Some(&r) = tv.reserve_reg.get(t) {
                reg.push((r, 1.0));
            }
            if spec.technologies[g].class == TechClass::Vre {
                let k = rules.op_vre_frac * spec.availability(g, y, t);
                op_rhs += k * net[g].constant;
                op.extend(net[g].terms.iter().map(|&(j, c)| (j, -k * c)));
            }
        }
        a.row(
            Family::Balance,
            format!("bal[{yl}][{t}]"),
            balance,
            RowSense::Eq,
            demand[t],
        );
        a.row(
            Family::OperatingReserve,
            format!("opres[{yl}][{t}]"),
            op,
            RowSense::Ge,
            op_rhs,
        );
        a.row(
            Family::RegulationReserve,
            format!("regres[{yl}][{t}]"),
            reg,
            RowSense::Ge,
            rules.reg_load_frac * demand[t],
        );
    }

    YearVars {
        year: y,
        label: year.label.clone(),
        weight,
        techs,
        reservoir,
        ens,
        unmet_op,
        unmet_reg,
    }
}
