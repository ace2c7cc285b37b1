//! Batch studies: CO2 cap sweep, storage duration sweep and the single- vs
//! multi-year planning study.
//!
//! Cases are independent LPs solved on a rayon pool of `jobs` threads.
//! Results are collected in case order and tables are sorted by case id, so
//! output files do not depend on the number of threads.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use gridplan_core::data::{
    Co2Policy, StorageParams, SystemSpec, TechClass, TechnologySpec, DEFAULT_LIFETIME,
};
use gridplan_core::lp::SolveOptions;
use gridplan_core::metrics::breakeven_cost;
use gridplan_core::model::{build, BuildOptions};
use gridplan_core::solution::solve_plan;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::write_atomic;
use crate::manifest::RunManifest;
use crate::results::{plot_csv, summary_csv, ScenarioResult};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid study: {0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Co2,
    Duration,
    Years,
}

impl StudyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyKind::Co2 => "co2",
            StudyKind::Duration => "duration",
            StudyKind::Years => "years",
        }
    }
}

/// Storage added with a fixed energy capacity in the duration sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssTemplate {
    pub roundtrip_efficiency: f64,
    pub var_om: f64,
    pub lifetime: u32,
}

impl Default for EssTemplate {
    fn default() -> Self {
        EssTemplate {
            roundtrip_efficiency: 0.85,
            var_om: 0.64,
            lifetime: DEFAULT_LIFETIME,
        }
    }
}

pub const DEFAULT_CAP_FRACTIONS: [f64; 5] = [1.0, 0.5, 0.1, 0.05, 0.0];
pub const DEFAULT_CAPACITIES_GWH: [f64; 3] = [1.0, 10.0, 100.0];
pub const DEFAULT_DURATIONS_H: [f64; 7] = [1.0, 3.0, 8.0, 15.0, 24.0, 48.0, 100.0];

/// Failure message of cases not run because an earlier case failed.
pub const SKIPPED: &str = "skipped after an earlier failure";

/// Name of the storage technology added by the duration sweep.
pub const ESS_NAME: &str = "ESS";

#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub kind: StudyKind,
    /// Year labels to study; empty means every year of the system.
    pub years: Vec<String>,
    pub cap_fractions: Vec<f64>,
    pub capacities_gwh: Vec<f64>,
    pub durations_h: Vec<f64>,
    pub ess: EssTemplate,
    pub jobs: usize,
    pub out: PathBuf,
    pub solve: SolveOptions,
    /// Recorded in the manifest.
    pub command: String,
}

impl StudyPlan {
    pub fn new(kind: StudyKind, out: impl Into<PathBuf>) -> Self {
        StudyPlan {
            kind,
            years: Vec::new(),
            cap_fractions: DEFAULT_CAP_FRACTIONS.to_vec(),
            capacities_gwh: DEFAULT_CAPACITIES_GWH.to_vec(),
            durations_h: DEFAULT_DURATIONS_H.to_vec(),
            ess: EssTemplate::default(),
            jobs: 1,
            out: out.into(),
            solve: SolveOptions::default(),
            command: String::new(),
        }
    }

    fn validate(&self, spec: &SystemSpec) -> Result<Vec<usize>, StudyError> {
        let bad = |m: String| Err(StudyError::Invalid(m));
        if self.jobs == 0 {
            return bad("jobs must be >= 1".into());
        }
        let years: Vec<usize> = if self.years.is_empty() {
            (0..spec.years.len()).collect()
        } else {
            self.years
                .iter()
                .map(|l| {
                    spec.year_index(l)
                        .ok_or_else(|| StudyError::Invalid(format!("unknown year `{l}`")))
                })
                .collect::<Result<_, _>>()?
        };
        if years.is_empty() {
            return bad("no years".into());
        }
        match self.kind {
            StudyKind::Co2 => {
                if self.cap_fractions.is_empty() {
                    return bad("no cap fractions".into());
                }
                if let Some(f) = self.cap_fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
                    return bad(format!("cap fraction {f} outside [0, 1]"));
                }
            }
            StudyKind::Duration => {
                if self.capacities_gwh.is_empty() || self.durations_h.is_empty() {
                    return bad("no storage capacities or durations".into());
                }
                if self
                    .capacities_gwh
                    .iter()
                    .chain(&self.durations_h)
                    .any(|v| !(*v > 0.0 && v.is_finite()))
                {
                    return bad("capacities and durations must be > 0".into());
                }
                if spec.tech_index(ESS_NAME).is_some() {
                    return bad(format!("technology name `{ESS_NAME}` is reserved"));
                }
            }
            StudyKind::Years => {
                if years.len() < 2 {
                    return bad("the year study needs at least two years".into());
                }
            }
        }
        Ok(years)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseFailure {
    pub case_id: String,
    pub message: String,
}

/// Operating cost of each plan (rows) re-dispatched on each year (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    pub plans: Vec<String>,
    pub eval_years: Vec<String>,
    pub weights: Vec<f64>,
    /// `None` where the evaluation failed.
    pub operating: Vec<Vec<Option<f64>>>,
    /// Annualized investment plus fixed O&M of each plan.
    pub fixed: Vec<Option<f64>>,
}

impl CostMatrix {
    /// Weighted operating plus fixed cost of plan `i`.
    pub fn expected_total(&self, i: usize) -> Option<f64> {
        let mut sum = self.fixed[i]?;
        for (w, c) in self.weights.iter().zip(&self.operating[i]) {
            sum += w * (*c)?;
        }
        Some(sum)
    }

    pub fn worst_operating(&self, i: usize) -> Option<f64> {
        self.operating[i]
            .iter()
            .try_fold(f64::NEG_INFINITY, |m, c| c.map(|c| m.max(c)))
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let fmt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["plan".to_string()];
        header.extend(self.eval_years.iter().map(|y| format!("operating:{y}")));
        header.extend(["fixed_cost", "expected_total", "worst_operating"].map(String::from));
        w.write_record(&header).expect("in-memory write");
        for (i, plan) in self.plans.iter().enumerate() {
            let mut row = vec![plan.clone()];
            row.extend(self.operating[i].iter().map(|c| fmt(*c)));
            row.push(fmt(self.fixed[i]));
            row.push(fmt(self.expected_total(i)));
            row.push(fmt(self.worst_operating(i)));
            w.write_record(&row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory write")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub dir: PathBuf,
    /// Sorted by case id.
    pub results: Vec<ScenarioResult>,
    pub failures: Vec<CaseFailure>,
    pub cost_matrix: Option<CostMatrix>,
}

impl StudyOutput {
    pub fn get(&self, case_id: &str) -> Option<&ScenarioResult> {
        self.results.iter().find(|r| r.case_id == case_id)
    }
}

/// One LP to build, solve and summarize.
#[derive(Debug, Clone)]
struct Case {
    id: String,
    spec: SystemSpec,
    years: Vec<(usize, f64)>,
    fixed_capacity: Option<Vec<f64>>,
    params: BTreeMap<String, f64>,
    labels: BTreeMap<String, String>,
}

impl Case {
    fn new(id: String, spec: SystemSpec, years: Vec<(usize, f64)>) -> Self {
        Case {
            id,
            spec,
            years,
            fixed_capacity: None,
            params: BTreeMap::new(),
            labels: BTreeMap::new(),
        }
    }
}

struct Runner<'a> {
    study: &'static str,
    dir: PathBuf,
    solve: &'a SolveOptions,
    pool: rayon::ThreadPool,
    aborted: AtomicBool,
}

impl Runner<'_> {
    /// Solves every case, persisting each result as it completes. After the
    /// first failure, cases that have not started yet are skipped.
    fn run(&self, cases: Vec<Case>) -> Vec<Result<ScenarioResult, CaseFailure>> {
        self.pool.install(|| {
            cases
                .into_par_iter()
                .map(|case| {
                    let fail = |message: String| {
                        self.aborted.store(true, Ordering::SeqCst);
                        CaseFailure {
                            case_id: case.id.clone(),
                            message,
                        }
                    };
                    if self.aborted.load(Ordering::SeqCst) {
                        return Err(CaseFailure {
                            case_id: case.id.clone(),
                            message: SKIPPED.into(),
                        });
                    }
                    let opts = BuildOptions {
                        fixed_capacity: case.fixed_capacity.clone(),
                    };
                    let model = build(&case.spec, &case.years, &opts).map_err(|e| fail(e.to_string()))?;
                    let sol = solve_plan(&model, self.solve).map_err(|e| fail(e.to_string()))?;
                    let mut r = ScenarioResult::from_solution(self.study, &case.id, &case.spec, &sol)
                        .map_err(|e| fail(e.to_string()))?;
                    r.params = case.params;
                    r.labels = case.labels;
                    r.write(&self.dir.join(&case.id))
                        .map_err(|e| fail(format!("writing result: {e}")))?;
                    log::info!("{}: objective {}", case.id, r.objective);
                    Ok(r)
                })
                .collect()
        })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StudyError + '_ {
    move |source| StudyError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Storage technologies whose capacity the model may expand.
fn expandable_storage(spec: &SystemSpec) -> Vec<usize> {
    spec.technologies
        .iter()
        .enumerate()
        .filter(|(_, t)| t.class == TechClass::Storage && t.investable())
        .map(|(g, _)| g)
        .collect()
}

fn without_storage_expansion(spec: &SystemSpec) -> SystemSpec {
    let mut s = spec.clone();
    for g in expandable_storage(spec) {
        let t = &mut s.technologies[g];
        t.max_capacity = Some(t.existing_capacity);
    }
    s
}

fn num_id(v: f64) -> String {
    v.to_string()
}

fn split(
    results: Vec<Result<ScenarioResult, CaseFailure>>,
    failures: &mut Vec<CaseFailure>,
) -> Vec<Option<ScenarioResult>> {
    results
        .into_iter()
        .map(|r| match r {
            Ok(r) => Some(r),
            Err(f) => {
                log::error!("{}: {}", f.case_id, f.message);
                failures.push(f);
                None
            }
        })
        .collect()
}

/// Runs `plan` on `spec` and writes `<out>/<study>/` with a manifest, one
/// `result.json` per case, `summary.csv` and `plot.csv`. The first failing
/// case stops the study; completed cases are kept and failures are returned
/// in the output, not as an error.
pub fn run_study(spec: &SystemSpec, plan: &StudyPlan) -> Result<StudyOutput, StudyError> {
    let years = plan.validate(spec)?;
    let study = plan.kind.as_str();
    let dir = plan.out.join(study);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs)
        .build()
        .map_err(|e| StudyError::Invalid(e.to_string()))?;
    let runner = Runner {
        study,
        dir: dir.clone(),
        solve: &plan.solve,
        pool,
        aborted: AtomicBool::new(false),
    };
    let label = |y: usize| spec.years[y].label.clone();
    let mut failures = Vec::new();
    let mut results = Vec::new();
    let mut cost_matrix = None;
    let mut columns = spec.clone();

    match plan.kind {
        StudyKind::Co2 => {
            let modes = [
                ("battery", spec.clone()),
                ("no_battery", without_storage_expansion(spec)),
            ];
            let mut ids = Vec::new();
            for &y in &years {
                for (mode, _) in &modes {
                    for &f in &plan.cap_fractions {
                        ids.push(format!("{}_{mode}_cap{}", label(y), num_id(f)));
                    }
                }
            }
            write_manifest(spec, plan, &dir, ids)?;

            let mut baselines = Vec::new();
            for &y in &years {
                for (mode, s) in &modes {
                    let mut s = s.clone();
                    s.co2_policy = Co2Policy::None;
                    baselines.push(Case::new(
                        format!("{}_{mode}_uncapped", label(y)),
                        s,
                        vec![(y, 1.0)],
                    ));
                }
            }
            let base = split(runner.run(baselines), &mut failures);
            let mut cases = Vec::new();
            let mut k = 0;
            for &y in &years {
                for (mode, s) in &modes {
                    let baseline = &base[k];
                    k += 1;
                    for &f in &plan.cap_fractions {
                        let id = format!("{}_{mode}_cap{}", label(y), num_id(f));
                        let Some(b) = baseline else {
                            failures.push(CaseFailure {
                                case_id: id,
                                message: SKIPPED.into(),
                            });
                            continue;
                        };
                        let e0 = b.emissions.total;
                        let mut s = s.clone();
                        s.co2_policy = Co2Policy::TotalCap(f * e0);
                        let mut c = Case::new(id, s, vec![(y, 1.0)]);
                        c.params.insert("cap_fraction".into(), f);
                        c.params.insert("co2_cap_t".into(), f * e0);
                        c.params.insert("baseline_emissions_t".into(), e0);
                        c.params.insert("baseline_objective".into(), b.objective);
                        c.params
                            .insert("battery".into(), if *mode == "battery" { 1.0 } else { 0.0 });
                        c.labels.insert("year".into(), label(y));
                        cases.push(c);
                    }
                }
            }
            results.extend(split(runner.run(cases), &mut failures).into_iter().flatten());
        }

        StudyKind::Duration => {
            let mut base_spec = without_storage_expansion(spec);
            base_spec.co2_policy = Co2Policy::TotalCap(0.0);
            let mut grid = Vec::new();
            for &e in &plan.capacities_gwh {
                for &d in &plan.durations_h {
                    grid.push((e, d));
                }
            }
            let case_id = |y: usize, e: f64, d: f64| {
                format!("{}_e{}gwh_d{}h", label(y), num_id(e), num_id(d))
            };
            let mut ids = Vec::new();
            for &y in &years {
                ids.push(format!("{}_baseline", label(y)));
                ids.extend(grid.iter().map(|&(e, d)| case_id(y, e, d)));
            }
            write_manifest(spec, plan, &dir, ids)?;

            let mut cases = Vec::new();
            for &y in &years {
                let mut c = Case::new(format!("{}_baseline", label(y)), base_spec.clone(), vec![(y, 1.0)]);
                c.params.insert("ess_energy_gwh".into(), 0.0);
                c.labels.insert("year".into(), label(y));
                cases.push(c);
                for &(e, d) in &grid {
                    let s = with_ess(&base_spec, e * 1000.0, d, &plan.ess);
                    let mut c = Case::new(case_id(y, e, d), s, vec![(y, 1.0)]);
                    c.params.insert("ess_energy_gwh".into(), e);
                    c.params.insert("duration_h".into(), d);
                    c.params.insert("ess_power_mw".into(), e * 1000.0 / d);
                    c.labels.insert("year".into(), label(y));
                    cases.push(c);
                }
            }
            columns = with_ess(&base_spec, 1.0, 1.0, &plan.ess);
            let solved = split(runner.run(cases), &mut failures);
            let per_year = grid.len() + 1;
            for chunk in solved.chunks(per_year) {
                let baseline = chunk[0].clone();
                if let Some(b) = &baseline {
                    results.push(b.clone());
                }
                for r in chunk[1..].iter().flatten() {
                    let mut r = r.clone();
                    if let Some(b) = &baseline {
                        let e_kwh = r.params["ess_energy_gwh"] * 1e6;
                        let savings = b.cost.total - r.cost.total;
                        r.params.insert("savings".into(), savings);
                        if let Ok(be) = breakeven_cost(
                            b.cost.total,
                            r.cost.total,
                            spec.discount_rate,
                            plan.ess.lifetime,
                            e_kwh,
                        ) {
                            r.params.insert("breakeven_per_kwh".into(), be);
                        }
                        r.write(&dir.join(&r.case_id)).map_err(io_err(&dir))?;
                    }
                    results.push(r);
                }
            }
        }

        StudyKind::Years => {
            let total_w: f64 = years.iter().map(|&y| spec.years[y].weight).sum();
            let weights: Vec<f64> = if total_w > 0.0 {
                years.iter().map(|&y| spec.years[y].weight / total_w).collect()
            } else {
                vec![1.0 / years.len() as f64; years.len()]
            };
            let mut plans: Vec<(String, Vec<(usize, f64)>)> = years
                .iter()
                .map(|&y| (format!("plan-{}", label(y)), vec![(y, 1.0)]))
                .collect();
            plans.push((
                "multi".into(),
                years.iter().copied().zip(weights.iter().copied()).collect(),
            ));
            let mut ids: Vec<String> = plans.iter().map(|(p, _)| p.clone()).collect();
            for (p, _) in &plans {
                ids.extend(years.iter().map(|&e| format!("{p}_eval-{}", label(e))));
            }
            write_manifest(spec, plan, &dir, ids)?;

            let expansion: Vec<Case> = plans
                .iter()
                .map(|(p, ys)| {
                    let mut c = Case::new(p.clone(), spec.clone(), ys.clone());
                    c.labels.insert("plan".into(), p.clone());
                    c
                })
                .collect();
            let solved = split(runner.run(expansion), &mut failures);
            let mut evals = Vec::new();
            for ((p, _), r) in plans.iter().zip(&solved) {
                for &e in &years {
                    let id = format!("{p}_eval-{}", label(e));
                    let Some(r) = r else {
                        failures.push(CaseFailure {
                            case_id: id,
                            message: SKIPPED.into(),
                        });
                        continue;
                    };
                    let net: Vec<f64> = spec
                        .technologies
                        .iter()
                        .map(|t| r.net_capacity[&t.name].max(0.0))
                        .collect();
                    let mut c = Case::new(id, spec.clone(), vec![(e, 1.0)]);
                    c.fixed_capacity = Some(net);
                    c.labels.insert("plan".into(), p.clone());
                    c.labels.insert("eval".into(), label(e));
                    evals.push(c);
                }
            }
            let evaluated: Vec<ScenarioResult> =
                split(runner.run(evals), &mut failures).into_iter().flatten().collect();

            let mut m = CostMatrix {
                plans: plans.iter().map(|(p, _)| p.clone()).collect(),
                eval_years: years.iter().map(|&y| label(y)).collect(),
                weights,
                operating: vec![vec![None; years.len()]; plans.len()],
                fixed: solved
                    .iter()
                    .map(|r| r.as_ref().map(|r| r.cost.investment + r.cost.fixed_om))
                    .collect(),
            };
            for r in &evaluated {
                let i = m.plans.iter().position(|p| p == &r.labels["plan"]).expect("known plan");
                let j = m
                    .eval_years
                    .iter()
                    .position(|y| y == &r.labels["eval"])
                    .expect("known year");
                m.operating[i][j] = Some(r.cost.operating());
            }
            write_atomic(&dir.join("cost_matrix.csv"), &m.to_csv()).map_err(io_err(&dir))?;
            cost_matrix = Some(m);
            results.extend(solved.into_iter().flatten());
            results.extend(evaluated);
        }
    }

    results.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    failures.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    let summary = dir.join("summary.csv");
    write_atomic(&summary, &summary_csv(&results, &columns)).map_err(io_err(&summary))?;
    let plot = dir.join("plot.csv");
    write_atomic(&plot, &plot_csv(&results)).map_err(io_err(&plot))?;
    let failed = dir.join("failures.json");
    if failures.is_empty() {
        if failed.exists() {
            fs::remove_file(&failed).map_err(io_err(&failed))?;
        }
    } else {
        let text = serde_json::to_string_pretty(&failures).expect("failures serialize");
        write_atomic(&failed, text.as_bytes()).map_err(io_err(&failed))?;
    }
    Ok(StudyOutput {
        dir,
        results,
        failures,
        cost_matrix,
    })
}

fn write_manifest(
    spec: &SystemSpec,
    plan: &StudyPlan,
    dir: &Path,
    mut cases: Vec<String>,
) -> Result<(), StudyError> {
    cases.sort();
    RunManifest::new(spec, plan.command.clone(), cases, &plan.solve, plan.jobs)
        .write(dir)
        .map_err(io_err(dir))
}

/// `spec` plus a storage unit of fixed energy `energy_mwh` and duration
/// `duration_h`, carrying no investment or fixed cost.
pub fn with_ess(spec: &SystemSpec, energy_mwh: f64, duration_h: f64, ess: &EssTemplate) -> SystemSpec {
    let mut s = spec.clone();
    let power = energy_mwh / duration_h;
    s.technologies.push(TechnologySpec {
        existing_capacity: power,
        max_capacity: Some(power),
        var_om: ess.var_om,
        reserve: true,
        lifetime: ess.lifetime,
        storage: Some(StorageParams {
            duration: duration_h,
            roundtrip_efficiency: ess.roundtrip_efficiency,
            fixed_energy_capacity: Some(energy_mwh),
        }),
        ..TechnologySpec::new(ESS_NAME, TechClass::Storage)
    });
    s
}
