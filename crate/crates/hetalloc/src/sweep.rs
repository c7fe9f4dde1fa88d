//! Design-space sweeps built on the solvers: how the optimal allocation
//! shifts as the constant (non-compute) power grows, energy-versus-area
//! profiles for two-unit systems, the large-power limit check, and the
//! facility-level sweep over constant power draw.
//!
//! Constant power is parameterized by the fraction
//! `s = p_sys / (p_sys + P_ref)` of total power it represents at the
//! reference point `P_ref` (the scenario's area budget, where the
//! aggregate dynamic power of a unity-exponent chip equals its area).
//! Inverting gives `p_sys = s / (1 - s) * P_ref`, so `s` spans the whole
//! axis from compute-dominated (`s -> 0`) to overhead-dominated
//! (`s -> 1`) on a bounded scale.

use crate::model::Scenario;
use crate::objectives::ObjectiveSpec;
use crate::solver::{solve_delay, solve_row, SolverError, SolverSettings};

/// One solved operating point in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Constant-power fraction at the reference point; infinite on the
    /// delay-reference row.
    pub s: f64,
    /// Constant power term handed to the solver (`p_sys` or `p_const`);
    /// infinite on the delay-reference row.
    pub p_sys: f64,
    /// Optimal areas, aligned with the scenario's unit list.
    pub areas: Vec<f64>,
    /// Objective value at the optimum (total delay on the
    /// delay-reference row).
    pub objective_value: f64,
    /// Largest pairwise marginal mismatch at the optimum.
    pub kkt_residual: f64,
    /// Marks the final row: the delay-optimal allocation, the limit the
    /// energy optima approach as constant power grows.
    pub is_delay_reference: bool,
}

/// A sweep point that failed to solve; sweeps report these instead of
/// aborting so one pathological point cannot sink a whole table.
#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub s: f64,
    pub p_sys: f64,
    pub message: String,
}

/// A completed sweep: rows in ascending `s`, the delay reference last.
#[derive(Debug, Clone)]
pub struct SweepTable {
    /// Unit names joined with `+`, identifying the system.
    pub scenario_label: String,
    /// Which objective the rows minimize (`energy`, `datacenter w=...`).
    pub objective_label: String,
    pub unit_names: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

/// One sampled point on an energy-versus-allocation profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Area given to the first unit (the second gets the remainder).
    pub area: f64,
    /// Energy relative to the curve's minimum (so the minimum is 1).
    pub normalized_energy: f64,
}

/// Energy profile over the two-unit simplex at one constant-power level.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub s: f64,
    pub p_sys: f64,
    /// Samples in ascending area, including the exact optimizer (so the
    /// normalized curve touches 1 exactly).
    pub points: Vec<CurvePoint>,
    /// Index of the minimum (normalized energy 1) in `points`.
    pub argmin_index: usize,
    /// First unit's area at the exact energy optimum.
    pub argmin_area: f64,
    /// Unnormalized energy at the optimum.
    pub min_energy: f64,
}

/// Energy-versus-allocation curves for a set of constant-power levels.
#[derive(Debug, Clone)]
pub struct CurveTable {
    pub scenario_label: String,
    /// Name of the unit whose area is the x axis (the first unit).
    pub x_name: String,
    pub area_budget: f64,
    pub curves: Vec<Curve>,
}

/// One rung of the large-power ladder in a [`LimitReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct LimitRung {
    pub p_sys: f64,
    /// `max_i |a_energy_i - a_delay_i|` at this power level.
    pub gap: f64,
    pub areas: Vec<f64>,
}

/// Outcome of [`limit_check`]: does the energy-optimal allocation
/// converge to the delay-optimal one as constant power grows?
#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub rungs: Vec<LimitRung>,
    pub delay_areas: Vec<f64>,
    /// Gaps never increase along the ladder (up to float noise).
    pub nonincreasing: bool,
    pub final_gap: f64,
    /// `nonincreasing` and the final gap below 1% of the budget.
    pub pass: bool,
}

/// The default grid of constant-power fractions: 33 log-spaced values
/// from 0.005 to 0.99, merged with the landmark fractions
/// {0.02, 0.1, 0.4, 0.95}.
pub fn default_s_grid() -> Vec<f64> {
    let lo = 0.005f64.ln();
    let hi = 0.99f64.ln();
    let mut grid: Vec<f64> = (0..33)
        .map(|k| (lo + (hi - lo) * k as f64 / 32.0).exp())
        .collect();
    grid.extend_from_slice(&[0.02, 0.1, 0.4, 0.95]);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    grid
}

fn check_fraction_grid(s_values: &[f64]) -> Result<(), SolverError> {
    if s_values.is_empty() {
        return Err(SolverError::InvalidInput(
            "at least one constant-power fraction is required".into(),
        ));
    }
    for (i, &s) in s_values.iter().enumerate() {
        if !(0.0..1.0).contains(&s) {
            return Err(SolverError::InvalidInput(format!(
                "fraction {s} at position {i} is outside [0, 1)"
            )));
        }
        if i > 0 && s <= s_values[i - 1] {
            return Err(SolverError::InvalidInput(
                "fractions must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

fn label_of(scenario: &Scenario) -> String {
    scenario
        .units
        .iter()
        .map(|u| u.name.as_str())
        .collect::<Vec<_>>()
        .join("+")
}

fn solved_row(
    scenario: &Scenario,
    u: f64,
    v: f64,
    s: f64,
    spec: ObjectiveSpec,
    settings: &SolverSettings,
) -> Result<SweepRow, SweepFailure> {
    match solve_row(scenario, u, v, spec, settings) {
        Ok(r) => Ok(SweepRow {
            s,
            p_sys: v,
            areas: r.areas,
            objective_value: r.objective_value,
            kkt_residual: r.max_marginal_residual,
            is_delay_reference: false,
        }),
        Err(e) => Err(SweepFailure {
            s,
            p_sys: v,
            message: e.to_string(),
        }),
    }
}

fn delay_reference_row(
    scenario: &Scenario,
    settings: &SolverSettings,
) -> Result<SweepRow, SweepFailure> {
    match solve_delay(scenario, settings) {
        Ok(r) => Ok(SweepRow {
            s: f64::INFINITY,
            p_sys: f64::INFINITY,
            areas: r.areas,
            objective_value: r.objective_value,
            kkt_residual: r.max_marginal_residual,
            is_delay_reference: true,
        }),
        Err(e) => Err(SweepFailure {
            s: f64::INFINITY,
            p_sys: f64::INFINITY,
            message: e.to_string(),
        }),
    }
}

/// Sweep the energy-optimal allocation over constant-power fractions.
///
/// For each `s` (sorted, in `[0, 1)`) the constant power is
/// `p_sys = s / (1 - s) * P_ref` and the energy objective is solved; a
/// final delay-reference row records the limit allocation. Failed points
/// land in `failures` without aborting the sweep.
///
/// # Errors
///
/// [`SolverError::InvalidInput`] for an unusable fraction grid;
/// scenario validation errors propagate from the first solve.
pub fn sweep_psys(
    scenario: &Scenario,
    s_values: &[f64],
    settings: &SolverSettings,
) -> Result<SweepTable, SolverError> {
    check_fraction_grid(s_values)?;
    let p_ref = scenario.reference_power();
    let mut rows = Vec::with_capacity(s_values.len() + 1);
    let mut failures = Vec::new();
    for &s in s_values {
        let p = s / (1.0 - s) * p_ref;
        match solved_row(
            scenario,
            1.0,
            p,
            s,
            ObjectiveSpec::Energy { p_sys: p },
            settings,
        ) {
            Ok(row) => rows.push(row),
            Err(failure) => failures.push(failure),
        }
    }
    match delay_reference_row(scenario, settings) {
        Ok(row) => rows.push(row),
        Err(failure) => failures.push(failure),
    }
    Ok(SweepTable {
        scenario_label: label_of(scenario),
        objective_label: "energy".into(),
        unit_names: scenario.units.iter().map(|u| u.name.clone()).collect(),
        rows,
        failures,
    })
}

/// Sweep the facility-level optimum over constant power draws `p_const`
/// (sorted ascending, nonnegative) at dynamic-power weight `w >= 1`.
///
/// Rows carry `s = p_const / (p_const + P_ref)` so the table matches the
/// schema of [`sweep_psys`]; at `w = 1` each row's computation is
/// identical to the energy sweep's at the same constant power.
///
/// # Errors
///
/// [`SolverError::InvalidInput`] for `w < 1` or an unusable power grid.
pub fn datacenter_sweep(
    scenario: &Scenario,
    w: f64,
    p_const_values: &[f64],
    settings: &SolverSettings,
) -> Result<SweepTable, SolverError> {
    if w < 1.0 || w.is_nan() {
        return Err(SolverError::InvalidInput(format!(
            "dynamic-power weight {w} must be at least 1"
        )));
    }
    if p_const_values.is_empty() {
        return Err(SolverError::InvalidInput(
            "at least one constant power value is required".into(),
        ));
    }
    for (i, &p) in p_const_values.iter().enumerate() {
        if p < 0.0 || p.is_nan() {
            return Err(SolverError::InvalidInput(format!(
                "constant power {p} at position {i} must be nonnegative"
            )));
        }
        if i > 0 && p <= p_const_values[i - 1] {
            return Err(SolverError::InvalidInput(
                "constant power values must be strictly increasing".into(),
            ));
        }
    }
    let mut weighted = scenario.clone();
    weighted.dynamic_weight = w;
    let p_ref = weighted.reference_power();
    let mut rows = Vec::with_capacity(p_const_values.len() + 1);
    let mut failures = Vec::new();
    for &p in p_const_values {
        let s = p / (p + p_ref);
        match solved_row(
            &weighted,
            w,
            p,
            s,
            ObjectiveSpec::Datacenter { p_const: p },
            settings,
        ) {
            Ok(row) => rows.push(row),
            Err(failure) => failures.push(failure),
        }
    }
    match delay_reference_row(&weighted, settings) {
        Ok(row) => rows.push(row),
        Err(failure) => failures.push(failure),
    }
    Ok(SweepTable {
        scenario_label: label_of(scenario),
        objective_label: format!("datacenter w={w}"),
        unit_names: scenario.units.iter().map(|u| u.name.clone()).collect(),
        rows,
        failures,
    })
}

/// Sample the two-unit energy objective across the whole allocation axis
/// at each constant-power fraction, normalized so each curve's minimum
/// is exactly 1.
///
/// `n_points` uniform samples span `[floor, A - floor]`; the exact
/// optimizer (from the direct two-unit solver) is inserted as an extra
/// sample, so `argmin_area` is not quantized to the grid.
///
/// # Errors
///
/// [`SolverError::WrongUnitCount`] unless the scenario has exactly two
/// units; [`SolverError::InvalidInput`] for fewer than 16 points or an
/// unusable fraction grid.
pub fn curve_energy_vs_allocation(
    scenario: &Scenario,
    s_values: &[f64],
    n_points: usize,
    settings: &SolverSettings,
) -> Result<CurveTable, SolverError> {
    if scenario.unit_count() != 2 {
        return Err(SolverError::WrongUnitCount {
            expected: 2,
            got: scenario.unit_count(),
        });
    }
    if n_points < 16 {
        return Err(SolverError::InvalidInput(format!(
            "n_points = {n_points}, need at least 16 for a usable curve"
        )));
    }
    check_fraction_grid(s_values)?;
    let p_ref = scenario.reference_power();
    let a = scenario.area_budget;
    let lo = settings.area_floor;
    let hi = a - settings.area_floor;
    let mut curves = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let p = s / (1.0 - s) * p_ref;
        let spec = ObjectiveSpec::Energy { p_sys: p };
        let best = crate::solver::solve_two_unit_general(scenario, 1.0, p, spec, settings)?;
        let argmin_area = best.areas[0];
        let min_energy = best.objective_value;
        let mut samples: Vec<(f64, f64)> = (0..n_points)
            .map(|k| {
                let x = lo + (hi - lo) * k as f64 / (n_points - 1) as f64;
                let e = crate::objectives::energy_objective(scenario, &[x, a - x], p)
                    .expect("sampled areas are within (0, A)");
                (x, e)
            })
            .collect();
        samples.push((argmin_area, min_energy));
        samples.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        // Merge samples that collide with the inserted optimum, keeping
        // the lower energy so the curve still touches its true minimum.
        samples.dedup_by(|next, kept| {
            if (next.0 - kept.0).abs() < 1e-12 * a {
                if next.1 < kept.1 {
                    kept.1 = next.1;
                }
                true
            } else {
                false
            }
        });
        let points: Vec<CurvePoint> = samples
            .iter()
            .map(|&(x, e)| CurvePoint {
                area: x,
                normalized_energy: e / min_energy,
            })
            .collect();
        let argmin_index = points
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.normalized_energy
                    .partial_cmp(&b.normalized_energy)
                    .unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        curves.push(Curve {
            s,
            p_sys: p,
            points,
            argmin_index,
            argmin_area,
            min_energy,
        });
    }
    Ok(CurveTable {
        scenario_label: label_of(scenario),
        x_name: scenario.units[0].name.clone(),
        area_budget: a,
        curves,
    })
}

/// Check the limiting behavior: as constant power grows along `ladder`,
/// the energy-optimal allocation must approach the delay-optimal one.
///
/// `ladder` is a strictly increasing sequence of at least three constant
/// power values. The report passes when the allocation gap never
/// increases along the ladder (up to float noise) and the final gap is
/// below 1% of the area budget.
///
/// # Errors
///
/// [`SolverError::InvalidInput`] for an unusable ladder; solver errors
/// propagate (this check aborts on failure — a missing rung would make
/// the monotonicity claim vacuous).
pub fn limit_check(
    scenario: &Scenario,
    ladder: &[f64],
    settings: &SolverSettings,
) -> Result<LimitReport, SolverError> {
    if ladder.len() < 3 {
        return Err(SolverError::InvalidInput(format!(
            "power ladder has {} rungs, need at least 3",
            ladder.len()
        )));
    }
    for (i, &p) in ladder.iter().enumerate() {
        if p < 0.0 || p.is_nan() {
            return Err(SolverError::InvalidInput(format!(
                "ladder value {p} at position {i} must be nonnegative"
            )));
        }
        if i > 0 && p <= ladder[i - 1] {
            return Err(SolverError::InvalidInput(
                "ladder values must be strictly increasing".into(),
            ));
        }
    }
    let delay = solve_delay(scenario, settings)?;
    let mut rungs = Vec::with_capacity(ladder.len());
    for &p in ladder {
        let spec = ObjectiveSpec::Energy { p_sys: p };
        let r = solve_row(scenario, 1.0, p, spec, settings)?;
        let gap = r
            .areas
            .iter()
            .zip(&delay.areas)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        rungs.push(LimitRung {
            p_sys: p,
            gap,
            areas: r.areas,
        });
    }
    let slop = 1e-12 * scenario.area_budget;
    let nonincreasing = rungs.windows(2).all(|w| w[1].gap <= w[0].gap + slop);
    let final_gap = rungs.last().unwrap().gap;
    let pass = nonincreasing && final_gap < 0.01 * scenario.area_budget;
    Ok(LimitReport {
        rungs,
        delay_areas: delay.areas,
        nonincreasing,
        final_gap,
        pass,
    })
}
