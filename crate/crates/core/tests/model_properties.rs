use gridplan_core::data::{
    Availability, Co2Policy, FuelSpec, Profile, StorageParams, SystemSpec, TechClass,
    TechnologySpec, YearData,
};
use gridplan_core::lp::mps::{parse_mps, write_mps};
use gridplan_core::lp::{solve, SolveOptions, Status};
use gridplan_core::metrics::{cost_breakdown, emissions_report, max_balance_residual};
use gridplan_core::model::{
    apply_co2_policy, build, build_multi_year, build_operation, build_single_year, BuildOptions,
};
use gridplan_core::solution::{solve_plan, PlanSolution};
use proptest::prelude::*;

fn fuels() -> Vec<FuelSpec> {
    vec![
        FuelSpec { name: "gas".into(), price: 5.0, co2_content: 0.053, biofuel: false },
        FuelSpec { name: "coal".into(), price: 2.0, co2_content: 0.095, biofuel: false },
        FuelSpec { name: "bio".into(), price: 8.0, co2_content: 0.0, biofuel: true },
    ]
}

fn thermal(name: &str, fuel: &str, inv: f64, eff: f64) -> TechnologySpec {
    TechnologySpec {
        inv_cost: inv,
        fixed_om: 0.02 * inv,
        var_om: 2.0,
        efficiency: eff,
        fuel: Some(fuel.into()),
        reserve: true,
        ..TechnologySpec::new(name, TechClass::Thermal)
    }
}

fn wind(inv: f64) -> TechnologySpec {
    TechnologySpec {
        inv_cost: inv,
        availability: Availability::Hourly,
        ..TechnologySpec::new("wind", TechClass::Vre)
    }
}

fn battery(inv: f64) -> TechnologySpec {
    TechnologySpec {
        inv_cost: inv,
        var_om: 0.5,
        reserve: true,
        lifetime: 15,
        storage: Some(StorageParams {
            duration: 4.0,
            roundtrip_efficiency: 0.85,
            fixed_energy_capacity: None,
        }),
        ..TechnologySpec::new("battery", TechClass::Storage)
    }
}

#[derive(Debug, Clone)]
struct Toy {
    demand: Vec<Vec<f64>>,
    wind: Vec<Vec<f64>>,
    costs: [f64; 4],
}

fn toy() -> impl Strategy<Value = Toy> {
    (2usize..4, 3usize..7).prop_flat_map(|(years, hours)| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..100.0, hours), years),
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, hours), years),
            (5.0f64..40.0, 5.0f64..40.0, 5.0f64..60.0, 1.0f64..40.0),
        )
            .prop_map(|(demand, wind, (a, b, c, d))| Toy {
                demand,
                wind,
                costs: [a, b, c, d],
            })
    })
}

impl Toy {
    fn spec(&self, with_battery: bool) -> SystemSpec {
        let mut techs = vec![
            thermal("ccgt", "gas", self.costs[0], 0.52),
            thermal("coal", "coal", self.costs[1], 0.40),
            thermal("biomass", "bio", self.costs[2], 0.35),
            wind(self.costs[3]),
        ];
        if with_battery {
            techs.push(battery(self.costs[3]));
        }
        let w = 1.0 / self.demand.len() as f64;
        let years = self
            .demand
            .iter()
            .zip(&self.wind)
            .enumerate()
            .map(|(k, (d, a))| {
                let label = format!("Y{k}");
                let mut y = YearData::new(label.clone(), w, d.clone());
                y.availability.insert("wind".into(), Profile::hourly(label, a.clone()));
                y
            })
            .collect();
        let mut spec = SystemSpec::new(techs, fuels(), years);
        spec.set_equal_weights();
        spec
    }

    fn labels(&self) -> Vec<String> {
        (0..self.demand.len()).map(|k| format!("Y{k}")).collect()
    }
}

fn plan(spec: &SystemSpec, years: &[&str]) -> PlanSolution {
    let w = 1.0 / years.len() as f64;
    let idx: Vec<(usize, f64)> = years.iter().map(|y| (spec.year_index(y).unwrap(), w)).collect();
    let model = build(spec, &idx, &BuildOptions::default()).unwrap();
    solve_plan(&model, &SolveOptions::default()).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plans_balance_and_account_for_every_cost(t in toy(), storage in any::<bool>()) {
        let spec = t.spec(storage);
        let labels = t.labels();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let sol = solve_plan(&build_multi_year(&spec, &refs).unwrap(), &SolveOptions::default()).unwrap();
        prop_assert!(max_balance_residual(&sol, &spec) <= 1e-6);
        let c = cost_breakdown(&sol, &spec).unwrap();
        prop_assert!(rel_close(c.total, sol.objective, 1e-6));
    }

    #[test]
    fn tightening_the_cap_never_lowers_cost(t in toy(), f in 0.05f64..0.95) {
        let spec = t.spec(false);
        let base = plan(&spec, &["Y0"]);
        let e0 = emissions_report(&base, &spec).total;
        let mut prev = base.objective;
        for frac in [1.0, f, f * f, 0.0] {
            let model = build_single_year(&spec, "Y0").unwrap();
            let model = apply_co2_policy(model, &spec, Co2Policy::TotalCap(frac * e0)).unwrap();
            let sol = solve_plan(&model, &SolveOptions::default()).unwrap();
            prop_assert!(sol.objective >= prev - 1e-6 * prev.abs().max(1.0));
            prop_assert!(emissions_report(&sol, &spec).total <= frac * e0 + 1e-6 * e0.max(1.0));
            prev = sol.objective;
        }
    }

    #[test]
    fn zero_cap_emits_nothing(t in toy()) {
        let mut spec = t.spec(true);
        spec.co2_policy = Co2Policy::TotalCap(0.0);
        let sol = plan(&spec, &["Y0"]);
        prop_assert_eq!(emissions_report(&sol, &spec).total, 0.0);
    }

    #[test]
    fn more_options_never_cost_more(t in toy()) {
        let without = plan(&t.spec(false), &["Y0", "Y1"]);
        let with = plan(&t.spec(true), &["Y0", "Y1"]);
        prop_assert!(with.objective <= without.objective + 1e-6 * without.objective.max(1.0));
    }

    #[test]
    fn storage_returns_round_trip_share_of_charge(t in toy()) {
        let spec = t.spec(true);
        let sol = plan(&spec, &["Y0"]);
        let s = &sol.years[0].techs[4];
        let out: f64 = s.dispatch.iter().sum();
        let inflow: f64 = s.charge.iter().sum();
        prop_assert!((out - 0.85 * inflow).abs() <= 1e-6 * inflow.max(1.0));
    }

    #[test]
    fn multi_year_plan_is_cheapest_in_expectation(t in toy()) {
        let spec = t.spec(false);
        let labels = t.labels();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let multi = plan(&spec, &refs);
        let w = 1.0 / refs.len() as f64;
        for y in &refs {
            let single = plan(&spec, &[y]);
            let expected: f64 = refs
                .iter()
                .map(|e| {
                    let m = build_operation(&spec, e, &single.net_capacity).unwrap();
                    w * solve_plan(&m, &SolveOptions::default()).unwrap().objective
                })
                .sum();
            prop_assert!(multi.objective <= expected + 1e-6 * expected.max(1.0));
        }
    }

    #[test]
    fn mps_round_trip_preserves_the_optimum(t in toy()) {
        let spec = t.spec(true);
        let model = build_single_year(&spec, "Y0").unwrap();
        let mut text = String::new();
        write_mps(&mut text, "toy", &model.lp, &model.vars.names, &model.row_names).unwrap();
        let back = parse_mps(&text).unwrap();
        prop_assert_eq!(&back.var_names, &model.vars.names);
        let a = solve(&model.lp, &SolveOptions::default()).unwrap();
        let b = solve(&back.lp, &SolveOptions::default()).unwrap();
        prop_assert_eq!(a.status, Status::Optimal);
        prop_assert_eq!(b.status, Status::Optimal);
        prop_assert!(rel_close(a.objective, b.objective, 1e-9));
    }
}
