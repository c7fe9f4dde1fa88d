//! Property-based checks of the model's structural invariants: analytic
//! derivatives against finite differences, solver feasibility on random
//! scenarios, and the identities that relate the objectives to each
//! other.

use hetalloc::{
    accel_fn, accel_fn_deriv, datacenter_objective, energy_objective, marginals, objective_value,
    solve_datacenter, solve_delay, solve_energy, solve_two_unit, ObjectiveKind, ObjectiveSpec,
    Scenario, SolverSettings, SystemPowerSpec, UnitModel, Workload,
};
use proptest::prelude::*;

const FD_REL_TOL: f64 = 1e-5;

fn unit_strategy() -> impl Strategy<Value = UnitModel> {
    (-1.5f64..-0.2, 0.5f64..1.5, 0.5f64..3000.0)
        .prop_map(|(alpha, beta, efficiency)| UnitModel::new("u", alpha, beta, efficiency))
}

fn scenario_strategy(n: usize) -> impl Strategy<Value = Scenario> {
    (
        proptest::collection::vec(unit_strategy(), n),
        proptest::collection::vec(0.1f64..2.0, n),
    )
        .prop_map(|(mut units, times)| {
            for (i, u) in units.iter_mut().enumerate() {
                u.name = format!("u{i}");
            }
            Scenario {
                area_budget: 1.0,
                units,
                workload: Workload::new(times),
                system_power: SystemPowerSpec::Absolute(0.0),
                dynamic_weight: 1.0,
                objective: ObjectiveKind::Energy,
            }
        })
}

/// Central finite difference of a scalar function.
fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6 * x.max(1e-3);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accel_fn_deriv_matches_finite_difference(
        unit in unit_strategy(),
        a in 0.01f64..1.0,
    ) {
        let analytic = accel_fn_deriv(&unit, a).unwrap();
        let numeric = central_diff(|x| accel_fn(&unit, x).unwrap(), a);
        let scale = analytic.abs().max(numeric.abs()).max(1e-12);
        prop_assert!(
            (analytic - numeric).abs() / scale < 1e-6,
            "analytic {analytic} vs numeric {numeric}"
        );
    }

    #[test]
    fn marginals_match_finite_differences(
        scenario in scenario_strategy(3),
        areas in proptest::collection::vec(0.05f64..0.5, 3),
        p_sys in 0.01f64..100.0,
    ) {
        for spec in [
            ObjectiveSpec::Delay,
            ObjectiveSpec::Energy { p_sys },
            ObjectiveSpec::Datacenter { p_const: p_sys },
        ] {
            let m = marginals(&scenario, &areas, &spec).unwrap();
            for i in 0..3 {
                let numeric = central_diff(
                    |x| {
                        let mut probe = areas.clone();
                        probe[i] = x;
                        objective_value(&scenario, &probe, &spec).unwrap()
                    },
                    areas[i],
                );
                let scale = m.values[i].abs().max(numeric.abs()).max(1e-9);
                prop_assert!(
                    (m.values[i] - numeric).abs() / scale < FD_REL_TOL,
                    "unit {i}, {spec:?}: analytic {} vs numeric {numeric}",
                    m.values[i]
                );
            }
        }
    }

    #[test]
    fn delay_solution_is_feasible_and_stationary(scenario in scenario_strategy(4)) {
        let settings = SolverSettings::default();
        let r = solve_delay(&scenario, &settings).unwrap();
        prop_assert!(r.feasibility_gap <= settings.feasibility_tol);
        prop_assert!(r.areas.iter().all(|&a| a >= settings.area_floor * 0.999999));
        let m = marginals(&scenario, &r.areas, &ObjectiveSpec::Delay).unwrap();
        let mean = m.values.iter().map(|v| v.abs()).sum::<f64>() / 4.0;
        prop_assert!(r.max_marginal_residual <= 1e-6 * mean, "residual {}", r.max_marginal_residual);
    }

    #[test]
    fn energy_solution_is_feasible(
        scenario in scenario_strategy(4),
        p_sys in 0.01f64..100.0,
    ) {
        let settings = SolverSettings::default();
        let r = solve_energy(&scenario, p_sys, &settings).unwrap();
        prop_assert!(r.feasibility_gap <= settings.feasibility_tol);
        prop_assert!(r.areas.iter().all(|&a| a >= settings.area_floor * 0.999999));
    }

    #[test]
    fn delay_optimum_is_invariant_to_workload_scaling(
        scenario in scenario_strategy(3),
        c in 0.2f64..50.0,
    ) {
        let settings = SolverSettings::default();
        let base = solve_delay(&scenario, &settings).unwrap();
        let mut scaled = scenario.clone();
        for t in &mut scaled.workload.times {
            *t *= c;
        }
        let r = solve_delay(&scaled, &settings).unwrap();
        for (a, b) in base.areas.iter().zip(&r.areas) {
            prop_assert!((a - b).abs() < 1e-7, "{a} vs {b} at c={c}");
        }
    }

    #[test]
    fn energy_objective_is_monotone_in_constant_power(
        scenario in scenario_strategy(3),
        areas in proptest::collection::vec(0.05f64..0.5, 3),
        p in 0.01f64..10.0,
    ) {
        let lo = energy_objective(&scenario, &areas, p).unwrap();
        let hi = energy_objective(&scenario, &areas, p * 1.5).unwrap();
        prop_assert!(hi > lo, "more constant power must cost more energy");
    }

    #[test]
    fn datacenter_objective_scales_out_of_the_weight(
        mut scenario in scenario_strategy(3),
        areas in proptest::collection::vec(0.05f64..0.5, 3),
        w in 1.0f64..5.0,
        p in 0.01f64..10.0,
    ) {
        // (w * p_dyn + P) * f * t = w * ((p_dyn + P/w) * f * t).
        scenario.dynamic_weight = w;
        let dc = datacenter_objective(&scenario, &areas, p).unwrap();
        let en = energy_objective(&scenario, &areas, p / w).unwrap();
        let scale = dc.abs().max(1.0);
        prop_assert!((dc - w * en).abs() / scale < 1e-12, "dc {dc} vs w*en {}", w * en);
    }

    #[test]
    fn datacenter_optimum_matches_rescaled_energy_optimum(
        mut scenario in scenario_strategy(2),
        w in 1.0f64..5.0,
        p in 0.05f64..10.0,
    ) {
        // Same identity at the argmin: the weighted problem at constant
        // power p has the same optimum as the plain one at p / w.
        let settings = SolverSettings::default();
        scenario.dynamic_weight = w;
        let dc = solve_datacenter(&scenario, p, &settings).unwrap();
        let mut plain = scenario.clone();
        plain.dynamic_weight = 1.0;
        let en = solve_energy(&plain, p / w, &settings).unwrap();
        for (a, b) in dc.areas.iter().zip(&en.areas) {
            prop_assert!((a - b).abs() < 1e-6, "{a} vs {b} at w={w}, p={p}");
        }
    }

    #[test]
    fn dual_and_direct_two_unit_solvers_agree(
        scenario in scenario_strategy(2),
        p_sys in 0.01f64..50.0,
    ) {
        let settings = SolverSettings::default();
        let dual = solve_energy(&scenario, p_sys, &settings).unwrap();
        let direct = solve_two_unit(&scenario, p_sys, &settings).unwrap();
        let scale = dual.objective_value.abs().max(1e-12);
        prop_assert!(
            (dual.objective_value - direct.objective_value).abs() / scale < 1e-9,
            "dual {} vs direct {}",
            dual.objective_value,
            direct.objective_value
        );
    }
}
