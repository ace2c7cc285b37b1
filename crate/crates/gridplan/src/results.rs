//! Per-case result records and the tables written from them.

use std::collections::BTreeMap;
use std::path::Path;

use gridplan_core::data::{SystemSpec, TechClass};
use gridplan_core::lp::Status;
use gridplan_core::metrics::{
    annual_ens, annual_generation, annual_unmet_reserve, cost_breakdown, emissions_report,
    energy_shares, max_balance_residual, mean_curtailment, CostBreakdown, EmissionsReport,
    MetricsError,
};
use gridplan_core::solution::PlanSolution;
use serde::{Deserialize, Serialize};

use crate::io::write_atomic;

/// Everything reported for one solved case. Maps are keyed by technology
/// name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub study: String,
    pub case_id: String,
    pub status: Status,
    pub objective: f64,
    pub iterations: usize,
    /// Labels of the modeled years.
    pub years: Vec<String>,
    pub invested: BTreeMap<String, f64>,
    pub net_capacity: BTreeMap<String, f64>,
    /// Weighted annual output in MWh.
    pub generation: BTreeMap<String, f64>,
    pub energy_shares: BTreeMap<String, f64>,
    /// VRE technologies only; `None` when nothing was available.
    pub curtailment: BTreeMap<String, Option<f64>>,
    pub cost: CostBreakdown,
    pub emissions: EmissionsReport,
    pub ens_mwh: f64,
    pub unmet_reserve: f64,
    pub max_balance_residual: f64,
    /// Case parameters and derived values specific to a study.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub labels: BTreeMap<String, String>,
}

impl ScenarioResult {
    /// Evaluates every metric of `sol`. Fails when the cost breakdown does not
    /// reproduce the LP objective.
    pub fn from_solution(
        study: &str,
        case_id: &str,
        spec: &SystemSpec,
        sol: &PlanSolution,
    ) -> Result<Self, MetricsError> {
        let cost = cost_breakdown(sol, spec)?;
        let names = || spec.technologies.iter().map(|t| t.name.clone());
        let shares = energy_shares(sol, spec);
        let curtailment = spec
            .technologies
            .iter()
            .enumerate()
            .filter(|(_, t)| t.class == TechClass::Vre)
            .map(|(g, t)| (t.name.clone(), mean_curtailment(sol, spec, g)))
            .collect();
        Ok(ScenarioResult {
            study: study.to_string(),
            case_id: case_id.to_string(),
            status: sol.status,
            objective: sol.objective,
            iterations: sol.iterations,
            years: sol.years.iter().map(|y| y.label.clone()).collect(),
            invested: names().zip(sol.invested.iter().copied()).collect(),
            net_capacity: names().zip(sol.net_capacity.iter().copied()).collect(),
            generation: names()
                .enumerate()
                .map(|(g, n)| (n, annual_generation(sol, g)))
                .collect(),
            energy_shares: names().zip(shares).collect(),
            curtailment,
            cost,
            emissions: emissions_report(sol, spec),
            ens_mwh: annual_ens(sol),
            unmet_reserve: annual_unmet_reserve(sol),
            max_balance_residual: max_balance_residual(sol, spec),
            params: BTreeMap::new(),
            labels: BTreeMap::new(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        write_atomic(&dir.join("result.json"), self.to_json().as_bytes())
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

/// One row per case. Technology columns follow the order of `spec`.
pub fn summary_csv(results: &[ScenarioResult], spec: &SystemSpec) -> Vec<u8> {
    let mut params: Vec<&String> = results.iter().flat_map(|r| r.params.keys()).collect();
    params.sort();
    params.dedup();
    let techs: Vec<&str> = spec.technologies.iter().map(|t| t.name.as_str()).collect();
    let vre: Vec<&str> = spec
        .technologies
        .iter()
        .filter(|t| t.class == TechClass::Vre)
        .map(|t| t.name.as_str())
        .collect();

    let mut header: Vec<String> = [
        "case",
        "status",
        "objective",
        "total_cost",
        "investment",
        "fixed_om",
        "operating_cost",
        "avg_energy_cost",
        "emissions_t",
        "intensity_g_per_kwh",
        "ens_mwh",
        "unmet_reserve_mwh",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(params.iter().map(|p| p.to_string()));
    header.extend(techs.iter().map(|t| format!("capacity_mw:{t}")));
    header.extend(techs.iter().map(|t| format!("share:{t}")));
    header.extend(vre.iter().map(|t| format!("curtailment:{t}")));

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in results {
        let status = serde_json::to_value(r.status).expect("status serializes");
        let mut row = vec![
            r.case_id.clone(),
            status.as_str().unwrap_or_default().to_string(),
            num(r.objective),
            num(r.cost.total),
            num(r.cost.investment),
            num(r.cost.fixed_om),
            num(r.cost.operating()),
            num(r.cost.average_energy_cost),
            num(r.emissions.total),
            num(r.emissions.intensity),
            num(r.ens_mwh),
            num(r.unmet_reserve),
        ];
        row.extend(params.iter().map(|p| opt(r.param(p))));
        row.extend(techs.iter().map(|t| opt(r.net_capacity.get(*t).copied())));
        row.extend(techs.iter().map(|t| opt(r.energy_shares.get(*t).copied())));
        row.extend(vre.iter().map(|t| opt(r.curtailment.get(*t).copied().flatten())));
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

/// Long-format `case,metric,value` table for plotting.
pub fn plot_csv(results: &[ScenarioResult]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["case", "metric", "value"]).expect("in-memory write");
    for r in results {
        let mut put = |metric: String, value: f64| {
            w.write_record([r.case_id.as_str(), metric.as_str(), num(value).as_str()])
                .expect("in-memory write");
        };
        for (t, v) in &r.net_capacity {
            put(format!("capacity_mw:{t}"), *v);
        }
        for (t, v) in &r.generation {
            put(format!("generation_mwh:{t}"), *v);
        }
        for (t, v) in &r.curtailment {
            if let Some(v) = v {
                put(format!("curtailment:{t}"), *v);
            }
        }
        let c = &r.cost;
        for (name, v) in [
            ("investment", c.investment),
            ("fixed_om", c.fixed_om),
            ("variable_om", c.variable_om),
            ("fuel", c.fuel),
            ("startup", c.startup),
            ("ens", c.ens_cost),
            ("unmet_reserve", c.unmet_reserve_cost),
            ("total", c.total),
        ] {
            put(format!("cost:{name}"), v);
        }
        put("avg_energy_cost".into(), c.average_energy_cost);
        put("emissions_t".into(), r.emissions.total);
        put("intensity_g_per_kwh".into(), r.emissions.intensity);
        put("ens_mwh".into(), r.ens_mwh);
        put("unmet_reserve_mwh".into(), r.unmet_reserve);
        for (k, v) in &r.params {
            put(k.clone(), *v);
        }
    }
    w.into_inner().expect("in-memory write")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ScenarioResult {
        ScenarioResult {
            study: "co2".into(),
            case_id: "A_battery_cap0.5".into(),
            status: Status::Optimal,
            objective: 1.0 / 3.0,
            iterations: 7,
            years: vec!["A".into()],
            invested: [("gas".to_string(), 0.1 + 0.2)].into(),
            net_capacity: [("gas".to_string(), 12.5)].into(),
            generation: [("gas".to_string(), 1e9 / 7.0)].into(),
            energy_shares: [("gas".to_string(), 1.0)].into(),
            curtailment: [("wind".to_string(), None), ("pv".to_string(), Some(0.25))].into(),
            cost: CostBreakdown::default(),
            emissions: EmissionsReport::default(),
            ens_mwh: 0.0,
            unmet_reserve: 2.0e-17,
            max_balance_residual: 0.0,
            params: [("cap_fraction".to_string(), 0.5)].into(),
            labels: BTreeMap::new(),
        }
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let r = sample();
        assert_eq!(ScenarioResult::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn summary_has_one_row_per_case() {
        let spec = SystemSpec::new(
            vec![gridplan_core::data::TechnologySpec::new("gas", TechClass::Thermal)],
            vec![],
            vec![],
        );
        let text = String::from_utf8(summary_csv(&[sample(), sample()], &spec)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].contains("cap_fraction"));
        assert!(lines[1].starts_with("A_battery_cap0.5,optimal,"));
    }
}
