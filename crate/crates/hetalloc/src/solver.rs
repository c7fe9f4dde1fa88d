//! Allocation solvers and their independent correctness checks.
//!
//! The minimized objectives are separable sums of per-unit power-law
//! terms, so the workhorse is Lagrangian duality: at an interior optimum
//! every unit sees the same marginal `m_i(a_i) = lambda`, and the total
//! area is a continuous, increasing function of `lambda`. The solvers
//! invert each unit's marginal and bisect `lambda` until the allocations
//! fill the budget.
//!
//! Where the dual approach is unsound — the per-unit energy terms are not
//! convex for every parameter choice, and the per-unit minima may not fill
//! the chip — the solvers fall back to direct search (seeded golden
//! section in one dimension, oracle-seeded coordinate descent plus an
//! equal-marginal polish otherwise).
//!
//! Every result can be cross-checked with [`brute_force_oracle`], an
//! exhaustive simplex-grid search, via [`verify`].

use crate::model::{validate, Scenario, UnitModel};
use crate::objectives::{
    delay_marginal_raw, energy_marginal_deriv_raw, energy_marginal_raw, energy_term_raw, marginals,
    objective_value, ObjectiveError, ObjectiveSpec,
};
use thiserror::Error;

/// `(sqrt(5) - 1) / 2`, the golden-section step ratio.
const INV_PHI: f64 = 0.618_033_988_749_895;
/// Evaluation budget for the grid seed of the direct-search fallback.
const SEED_EVAL_BUDGET: u128 = 300_000;
/// Evaluation budget for [`verify`]'s automatic oracle grid.
const VERIFY_EVAL_BUDGET: u128 = 2_000_000;
/// Cap on automatic grid divisions, so two-unit grids stay tractable.
const VERIFY_MAX_DIVISIONS: u64 = 10_000;

/// Tolerances and limits shared by all solvers.
///
/// Absolute quantities scale with the area budget; build settings with
/// [`SolverSettings::for_budget`] to keep them proportionate.
#[derive(Debug, Clone)]
pub struct SolverSettings {
    /// Allowed `|sum(a_i) - A|` in returned results.
    pub feasibility_tol: f64,
    /// Allowed pairwise marginal mismatch, relative to the mean marginal
    /// magnitude, at interior optima.
    pub marginal_tol: f64,
    /// Bisection iteration cap (outer dual loop).
    pub max_iterations: u32,
    /// Default grid step for oracle runs that do not specify one.
    pub oracle_grid_step: f64,
    /// Smallest allocation a unit may receive; evaluations below it are
    /// rejected because the power laws diverge at zero.
    pub area_floor: f64,
    /// Cap on oracle grid evaluations; larger grids are refused.
    pub max_oracle_evals: u64,
}

impl SolverSettings {
    /// Defaults proportionate to an area budget `a`: feasibility within
    /// `1e-9 * a`, marginals within `1e-6` relative, grid step `a / 200`,
    /// area floor `1e-9 * a`.
    pub fn for_budget(a: f64) -> Self {
        Self {
            feasibility_tol: 1e-9 * a,
            marginal_tol: 1e-6,
            max_iterations: 200,
            oracle_grid_step: a / 200.0,
            area_floor: 1e-9 * a,
            max_oracle_evals: 200_000_000,
        }
    }
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self::for_budget(1.0)
    }
}

/// A solver's answer: the allocation and how well it satisfies the
/// optimality conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Allocated area per unit, aligned with the scenario's unit list.
    pub areas: Vec<f64>,
    /// Dual value: the marginal objective change per unit of extra area,
    /// shared by all interior units at the optimum. For direct-search
    /// results this is the mean marginal over the interior units; for the
    /// grid oracle it is likewise informational, not a true dual.
    pub lambda: f64,
    /// Objective value at `areas`.
    pub objective_value: f64,
    /// Largest pairwise marginal mismatch over units that carry workload
    /// and are not pinned at the area floor.
    pub max_marginal_residual: f64,
    /// `|sum(areas) - A|`.
    pub feasibility_gap: f64,
}

/// Errors from the solvers and the oracle.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("workload has no positive segment time")]
    AllZeroWorkload,
    #[error("area floor is infeasible: {units} units x floor {floor} exceeds budget {budget}")]
    FloorInfeasible {
        units: usize,
        floor: f64,
        budget: f64,
    },
    #[error("expected exactly {expected} units, got {got}")]
    WrongUnitCount { expected: usize, got: usize },
    #[error("no convergence within {iterations} iterations while {phase}")]
    NoConvergence {
        iterations: u32,
        phase: &'static str,
    },
    #[error("grid step {step} must be positive and at most the budget {budget}")]
    BadGridStep { step: f64, budget: f64 },
    #[error(
        "grid step leaves fewer than one step per unit ({divisions} divisions for {units} units)"
    )]
    GridTooCoarse { divisions: u64, units: usize },
    #[error("oracle grid needs about {points} evaluations, above the cap of {cap}")]
    GridTooLarge { points: u128, cap: u64 },
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

fn validate_for_solve(scenario: &Scenario) -> Result<(), SolverError> {
    if !scenario.workload.times.is_empty() && scenario.workload.times.iter().all(|&t| t == 0.0) {
        return Err(SolverError::AllZeroWorkload);
    }
    let violations = validate(scenario);
    if violations.is_empty() {
        Ok(())
    } else {
        let text = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        Err(SolverError::InvalidScenario(text))
    }
}

/// The interior subproblem once zero-workload units are pinned at the
/// floor: indices of the units that carry workload and the budget left
/// for them.
struct Active<'a> {
    scenario: &'a Scenario,
    idx: Vec<usize>,
    budget: f64,
    floor: f64,
}

impl<'a> Active<'a> {
    fn build(scenario: &'a Scenario, settings: &SolverSettings) -> Result<Self, SolverError> {
        let n = scenario.unit_count();
        let floor = settings.area_floor;
        if n as f64 * floor > scenario.area_budget {
            return Err(SolverError::FloorInfeasible {
                units: n,
                floor,
                budget: scenario.area_budget,
            });
        }
        let idx: Vec<usize> = (0..n)
            .filter(|&i| scenario.workload.times[i] > 0.0)
            .collect();
        let budget = scenario.area_budget - floor * (n - idx.len()) as f64;
        Ok(Self {
            scenario,
            idx,
            budget,
            floor,
        })
    }

    fn unit(&self, j: usize) -> &UnitModel {
        &self.scenario.units[self.idx[j]]
    }

    fn time(&self, j: usize) -> f64 {
        self.scenario.workload.times[self.idx[j]]
    }

    fn len(&self) -> usize {
        self.idx.len()
    }

    /// Scatter active-unit areas into a full allocation, pinned units at
    /// the floor.
    fn assemble(&self, active_areas: &[f64]) -> Vec<f64> {
        let mut full = vec![self.floor; self.scenario.unit_count()];
        for (j, &i) in self.idx.iter().enumerate() {
            full[i] = active_areas[j];
        }
        full
    }
}

/// Build the final result: assemble, rescale the active areas to land on
/// the budget exactly, and measure the optimality conditions.
fn finish(
    active: &Active<'_>,
    mut active_areas: Vec<f64>,
    lambda: Option<f64>,
    spec: &ObjectiveSpec,
) -> Result<AllocationResult, SolverError> {
    let sum: f64 = active_areas.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        let scale = active.budget / sum;
        for a in &mut active_areas {
            *a *= scale;
        }
    }
    let areas = active.assemble(&active_areas);
    let scenario = active.scenario;
    let objective = objective_value(scenario, &areas, spec)?;
    let m = marginals(scenario, &areas, spec)?;
    let pin_limit = active.floor * (1.0 + 1e-6);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut mean = 0.0;
    let mut count = 0usize;
    for &i in &active.idx {
        if areas[i] > pin_limit {
            lo = lo.min(m.values[i]);
            hi = hi.max(m.values[i]);
            mean += m.values[i];
            count += 1;
        }
    }
    let residual = if count >= 2 { hi - lo } else { 0.0 };
    let lambda = lambda.unwrap_or(if count > 0 { mean / count as f64 } else { 0.0 });
    let total: f64 = areas.iter().sum();
    Ok(AllocationResult {
        areas,
        lambda,
        objective_value: objective,
        max_marginal_residual: residual,
        feasibility_gap: (total - scenario.area_budget).abs(),
    })
}

// ---------------------------------------------------------------------
// Dual bisection
// ---------------------------------------------------------------------

/// Bisect `lambda < 0` until `phi(lambda)`, a continuous increasing
/// function of `lambda`, meets `budget`. `phi` is the total area the
/// units claim when each equates its marginal to `lambda`.
fn bisect_dual(
    budget: f64,
    settings: &SolverSettings,
    phi: &mut dyn FnMut(f64) -> f64,
) -> Result<f64, SolverError> {
    let mut hi = -1e-12; // close to zero: generous areas
    let mut lo = -1e9; // very negative: starved areas
    let mut expand = 0;
    while phi(hi) < budget {
        hi *= 1e-3;
        expand += 1;
        if expand > 90 || hi == 0.0 {
            return Err(SolverError::NoConvergence {
                iterations: expand,
                phase: "bracketing the dual value near zero",
            });
        }
    }
    expand = 0;
    while phi(lo) > budget {
        lo *= 1e3;
        expand += 1;
        if expand > 90 || !lo.is_finite() {
            return Err(SolverError::NoConvergence {
                iterations: expand,
                phase: "bracketing the dual value from below",
            });
        }
    }
    let mut mid = -(lo * hi).sqrt();
    for _ in 0..settings.max_iterations {
        mid = -(lo * hi).sqrt();
        let total = phi(mid);
        if total < budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if (total - budget).abs() <= 1e-3 * settings.feasibility_tol
            || (lo - hi).abs() <= 1e-15 * hi.abs()
        {
            break;
        }
    }
    Ok(mid)
}

// ---------------------------------------------------------------------
// Delay solver
// ---------------------------------------------------------------------

/// Area claimed by one unit when its delay marginal equals `lambda`:
/// inverting `t * alpha * a^(alpha-1) / e = lambda` gives
/// `a = (lambda * e / (alpha * t))^(1 / (alpha - 1))`.
fn delay_area_for_lambda(unit: &UnitModel, t: f64, lambda: f64) -> f64 {
    (lambda * unit.efficiency / (unit.alpha * t)).powf(1.0 / (unit.alpha - 1.0))
}

/// Minimize total delay `sum(t_i * f_i(a_i))` under `sum(a_i) = A`.
///
/// When all scaling exponents agree the optimum is closed-form:
/// `a_i = A * w_i / sum(w_j)` with `w_i = (t_i / e_i)^(1 / (1 - alpha))`.
/// Otherwise the shared marginal `lambda < 0` is bisected, with each
/// unit's allocation inverted in closed form. Units with `t_i = 0` are
/// pinned at the area floor.
///
/// # Errors
///
/// [`SolverError::AllZeroWorkload`] when no segment has positive time;
/// [`SolverError::InvalidScenario`] on validation failures;
/// [`SolverError::NoConvergence`] if the dual bracket cannot be closed.
pub fn solve_delay(
    scenario: &Scenario,
    settings: &SolverSettings,
) -> Result<AllocationResult, SolverError> {
    validate_for_solve(scenario)?;
    let active = Active::build(scenario, settings)?;
    let n = active.len();

    let (areas, lambda) = if n == 1 {
        let a = active.budget;
        let lam = delay_marginal_raw(active.unit(0), active.time(0), a);
        (vec![a], lam)
    } else {
        let alpha0 = active.unit(0).alpha;
        if (0..n).all(|j| active.unit(j).alpha == alpha0) {
            // Closed form: equal exponents make the weights explicit.
            let weights: Vec<f64> = (0..n)
                .map(|j| (active.time(j) / active.unit(j).efficiency).powf(1.0 / (1.0 - alpha0)))
                .collect();
            let total: f64 = weights.iter().sum();
            let areas: Vec<f64> = weights.iter().map(|w| active.budget * w / total).collect();
            let lam = delay_marginal_raw(active.unit(0), active.time(0), areas[0]);
            (areas, lam)
        } else {
            let lambda = bisect_dual(active.budget, settings, &mut |lam| {
                (0..n)
                    .map(|j| delay_area_for_lambda(active.unit(j), active.time(j), lam))
                    .sum()
            })?;
            let areas = (0..n)
                .map(|j| delay_area_for_lambda(active.unit(j), active.time(j), lambda))
                .collect();
            (areas, lambda)
        }
    };
    finish(&active, areas, Some(lambda), &ObjectiveSpec::Delay)
}

// ---------------------------------------------------------------------
// Energy-family solver (generalized to `(u * a^beta + v) * a^alpha` terms)
// ---------------------------------------------------------------------

/// The area at which one unit's generalized energy term is minimized:
/// the zero of its marginal, `a* = (v * (-alpha) / (u * gamma))^(1/beta)`,
/// which exists only when `gamma = alpha + beta > 0`. `None` means the
/// term decreases forever (the unit absorbs any area gladly).
fn unconstrained_minimum(unit: &UnitModel, u: f64, v: f64) -> Option<f64> {
    let gamma = unit.gamma();
    if gamma > 0.0 {
        Some((v * (-unit.alpha) / (u * gamma)).powf(1.0 / unit.beta))
    } else {
        None
    }
}

/// Invert one unit's generalized energy marginal: find `a` with
/// `m(a) = lambda` on the increasing branch `(0, a*]`. Requires
/// `lambda < 0` and `v > 0` (so `m` falls to `-inf` at zero area).
fn invert_energy_marginal(
    unit: &UnitModel,
    t: f64,
    u: f64,
    v: f64,
    lambda: f64,
    a_star: Option<f64>,
) -> f64 {
    let gamma = unit.gamma();
    // Solution of the constant-power part alone: m ~ t/e * v*alpha*a^(alpha-1).
    let asymptotic =
        (lambda * unit.efficiency / (t * v * unit.alpha)).powf(1.0 / (unit.alpha - 1.0));
    if gamma == 0.0 {
        // The dynamic part of the marginal vanishes; the asymptotic form
        // is exact.
        return asymptotic;
    }
    let m = |a: f64| energy_marginal_raw(unit, t, a, u, v);
    // Upper end: the marginal's zero, or an expanded bound where the
    // marginal has risen above lambda.
    let mut hi = match a_star {
        Some(s) => s,
        None => {
            let mut h = 1.0f64;
            let mut k = 0;
            while m(h) < lambda {
                h *= 4.0;
                k += 1;
                if k > 500 {
                    return h; // absurdly negative marginal everywhere: claim a lot
                }
            }
            h
        }
    };
    // Lower end: walk down until the marginal is below lambda.
    let mut lo = asymptotic.min(hi) * 0.5;
    let mut k = 0;
    while m(lo) > lambda {
        lo *= 0.25;
        k += 1;
        if k > 500 || lo <= 0.0 {
            return lo.max(f64::MIN_POSITIVE);
        }
    }
    // Log-space bisection on the increasing branch.
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if m(mid) < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    (lo * hi).sqrt()
}

/// Golden-section minimization on `[lo, hi]` to bracket width `tol`,
/// seeded by scanning `seeds` equal intervals so an early local basin
/// does not capture a multi-modal profile.
fn seeded_golden(
    lo: f64,
    hi: f64,
    seeds: usize,
    tol: f64,
    f: &mut dyn FnMut(f64) -> f64,
) -> (f64, f64) {
    let mut best_k = 0usize;
    let mut best_v = f64::INFINITY;
    for k in 0..=seeds {
        let x = lo + (hi - lo) * k as f64 / seeds as f64;
        let v = f(x);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let span = (hi - lo) / seeds as f64;
    let mut a = lo + span * best_k.saturating_sub(1) as f64;
    let mut b = (lo + span * (best_k + 1) as f64).min(hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// Direct 1-D minimization over the two-unit simplex: substitute
/// `a_2 = budget - a_1`, scan 64 seed intervals, golden-section to the
/// feasibility tolerance, then polish `a_1` to the root of the marginal
/// difference when the optimum is interior.
///
/// Along the constraint the objective is a sum of two U-shaped terms, so
/// besides the broad basin the uniform scan finds there can be one more
/// local minimum pressed against either unit's own unconstrained minimum
/// — arbitrarily narrow when the constant power term is small. Each such
/// anchor gets its own windowed search so the global basin is chosen by
/// comparison, not by scan resolution.
fn minimize_two_active(active: &Active<'_>, u: f64, v: f64, settings: &SolverSettings) -> Vec<f64> {
    let (u0, t0) = (active.unit(0), active.time(0));
    let (u1, t1) = (active.unit(1), active.time(1));
    let budget = active.budget;
    let lo = active.floor;
    let hi = budget - active.floor;
    let mut total =
        |a: f64| energy_term_raw(u0, t0, a, u, v) + energy_term_raw(u1, t1, budget - a, u, v);
    let span = (hi - lo) / 64.0;
    let (mut x, mut best) = seeded_golden(lo, hi, 64, settings.feasibility_tol, &mut total);

    let mut anchors = Vec::new();
    if let Some(a0) = unconstrained_minimum(u0, u, v) {
        anchors.push(a0.clamp(lo, hi));
    }
    if let Some(a1) = unconstrained_minimum(u1, u, v) {
        anchors.push((budget - a1).clamp(lo, hi));
    }
    for anchor in anchors {
        let (xa, va) = seeded_golden(
            (anchor - span).max(lo),
            (anchor + span).min(hi),
            8,
            settings.feasibility_tol,
            &mut total,
        );
        if va < best {
            best = va;
            x = xa;
        }
    }

    // Polish: at an interior optimum the marginal difference
    // h(a) = m_0(a) - m_1(budget - a) crosses zero.
    let h = |a: f64| {
        energy_marginal_raw(u0, t0, a, u, v) - energy_marginal_raw(u1, t1, budget - a, u, v)
    };
    let mut delta = (16.0 * settings.feasibility_tol).max(1e-12 * budget);
    let mut bracket = None;
    while delta < (hi - lo) * 0.25 {
        let a = (x - delta).max(lo);
        let b = (x + delta).min(hi);
        if h(a) <= 0.0 && h(b) >= 0.0 {
            bracket = Some((a, b));
            break;
        }
        delta *= 8.0;
    }
    if let Some((mut a, mut b)) = bracket {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if h(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        x = 0.5 * (a + b);
    }
    vec![x, budget - x]
}

/// Solve the dense square system `J x = b` by Gaussian elimination with
/// partial pivoting. `None` when the pivot collapses (singular system).
fn gauss_solve(mut j: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if j[row][col].abs() > j[piv][col].abs() {
                piv = row;
            }
        }
        if j[piv][col].abs() < 1e-300 {
            return None;
        }
        j.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let (top, bottom) = j.split_at_mut(row);
            let pivot_row = &top[col];
            let current = &mut bottom[0];
            let factor = current[col] / pivot_row[col];
            if factor == 0.0 {
                continue;
            }
            for (x, p) in current[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= factor * p;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= j[row][k] * x[k];
        }
        x[row] = s / j[row][row];
    }
    Some(x)
}

/// Newton iteration on the equal-marginal system
/// `m_i(a_i) = m_n(a_n), sum(a_i) = budget`. Returns the refined areas
/// when the iteration converges inside the feasible region.
fn equal_marginal_newton(active: &Active<'_>, u: f64, v: f64, start: &[f64]) -> Option<Vec<f64>> {
    let n = active.len();
    let mut a = start.to_vec();
    // Near-zero common marginals arise from heavy cancellation, so the
    // mismatch cannot be driven arbitrarily far below the constituent
    // terms' rounding noise: accept promptly at 1e-9 relative, and keep
    // the best iterate in case the iteration only stagnates there.
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..100 {
        let m: Vec<f64> = (0..n)
            .map(|j| energy_marginal_raw(active.unit(j), active.time(j), a[j], u, v))
            .collect();
        let md: Vec<f64> = (0..n)
            .map(|j| energy_marginal_deriv_raw(active.unit(j), active.time(j), a[j], u, v))
            .collect();
        let mean_mag = (m.iter().map(|x| x.abs()).sum::<f64>() / n as f64).max(f64::MIN_POSITIVE);
        let mut f = vec![0.0; n];
        for i in 0..n - 1 {
            f[i] = m[i] - m[n - 1];
        }
        f[n - 1] = a.iter().sum::<f64>() - active.budget;
        let hi = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = m.iter().cloned().fold(f64::INFINITY, f64::min);
        let relative = (hi - lo) / mean_mag;
        let feasible = f[n - 1].abs() <= 1e-12 * active.budget;
        if feasible {
            if relative <= 1e-9 {
                return Some(a);
            }
            if best.as_ref().is_none_or(|(r, _)| relative < *r) {
                best = Some((relative, a.clone()));
            }
        }
        let mut jac = vec![vec![0.0; n]; n];
        for i in 0..n - 1 {
            jac[i][i] = md[i];
            jac[i][n - 1] = -md[n - 1];
        }
        jac[n - 1].fill(1.0);
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let d = gauss_solve(jac, rhs)?;
        let mut step = 1.0f64;
        for j in 0..n {
            if d[j] < 0.0 {
                let limit = 0.95 * (a[j] - active.floor) / (-d[j]);
                step = step.min(limit);
            }
        }
        if step.is_nan() || step <= 1e-14 {
            break;
        }
        let step = step.min(1.0);
        for j in 0..n {
            a[j] += step * d[j];
        }
    }
    // Stagnated: hand back the best feasible iterate if it is still an
    // order of magnitude inside the solver's stationarity tolerance.
    match best {
        Some((relative, areas)) if relative <= 1e-7 => Some(areas),
        _ => None,
    }
}

/// Coordinate descent over pairwise area transfers (which preserve the
/// budget exactly): repeatedly move area between unit pairs by 1-D
/// golden-section until no transfer improves the objective.
fn coordinate_descent(
    active: &Active<'_>,
    u: f64,
    v: f64,
    start: Vec<f64>,
    settings: &SolverSettings,
) -> Vec<f64> {
    let n = active.len();
    let mut a = start;
    let term = |j: usize, x: f64| energy_term_raw(active.unit(j), active.time(j), x, u, v);
    let mut total: f64 = (0..n).map(|j| term(j, a[j])).sum();
    for _ in 0..200 {
        let mut gained = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let lo = -(a[i] - active.floor);
                let hi = a[j] - active.floor;
                if hi - lo <= settings.feasibility_tol {
                    continue;
                }
                let base = term(i, a[i]) + term(j, a[j]);
                let (d, best) = seeded_golden(lo, hi, 16, settings.feasibility_tol, &mut |d| {
                    term(i, a[i] + d) + term(j, a[j] - d)
                });
                if best < base {
                    a[i] += d;
                    a[j] -= d;
                    gained += base - best;
                }
            }
        }
        if gained <= 1e-13 * total.abs() {
            break;
        }
        total = (0..n).map(|j| term(j, a[j])).sum();
    }
    a
}

/// Largest grid division count `m` with `C(m-1, k-1)` within `budget`
/// evaluations, at least `k` so every unit gets one step.
fn divisions_within_budget(k: usize, eval_budget: u128, cap: u64) -> u64 {
    let mut m = k as u64;
    while m < cap && binomial(m, k as u64 - 1) <= eval_budget {
        m += 1;
    }
    m.min(cap).max(k as u64)
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if r == u128::MAX {
            return r;
        }
    }
    r
}

/// Enumerate the whole simplex grid `{a_i = k_i * step, k_i >= 1,
/// sum(k_i) = m}` for the active units, returning the best point. Ties go
/// to the first point in lexicographic order, which makes the scan
/// deterministic regardless of evaluation strategy.
fn grid_scan(active: &Active<'_>, weights: Option<(f64, f64)>, divisions: u64) -> (Vec<f64>, f64) {
    let n = active.len();
    let m = divisions as usize;
    let step = active.budget / divisions as f64;
    // Per-unit term tables: index k holds the unit's objective term at
    // area k * step.
    let max_k = m - (n - 1);
    let mut terms = vec![vec![f64::INFINITY; max_k + 1]; n];
    for (j, table) in terms.iter_mut().enumerate() {
        let unit = active.unit(j);
        let t = active.time(j);
        for (k, slot) in table.iter_mut().enumerate().skip(1) {
            let a = k as f64 * step;
            *slot = match weights {
                None => t * crate::objectives::accel_raw(unit, a),
                Some((u, v)) => energy_term_raw(unit, t, a, u, v),
            };
        }
    }

    struct Scan<'a> {
        terms: &'a [Vec<f64>],
        k: Vec<usize>,
        best_val: f64,
        best_k: Vec<usize>,
    }
    impl Scan<'_> {
        fn descend(&mut self, i: usize, rem: usize, partial: f64) {
            let n = self.terms.len();
            if i == n - 1 {
                let total = partial + self.terms[i][rem];
                if total < self.best_val {
                    self.best_val = total;
                    self.k[i] = rem;
                    self.best_k.copy_from_slice(&self.k);
                }
                return;
            }
            let max_here = rem - (n - 1 - i);
            for ki in 1..=max_here {
                self.k[i] = ki;
                self.descend(i + 1, rem - ki, partial + self.terms[i][ki]);
            }
        }
    }
    let mut scan = Scan {
        terms: &terms,
        k: vec![1usize; n],
        best_val: f64::INFINITY,
        best_k: vec![1usize; n],
    };
    scan.descend(0, m, 0.0);
    let areas: Vec<f64> = scan.best_k.iter().map(|&ki| ki as f64 * step).collect();
    (areas, scan.best_val)
}

/// Direct minimization of the generalized energy objective on the
/// simplex, used where the dual approach does not apply.
fn direct_minimize(active: &Active<'_>, u: f64, v: f64, settings: &SolverSettings) -> Vec<f64> {
    match active.len() {
        1 => vec![active.budget],
        2 => minimize_two_active(active, u, v, settings),
        n => {
            let divisions = divisions_within_budget(n, SEED_EVAL_BUDGET, VERIFY_MAX_DIVISIONS);
            let (seed, seed_val) = grid_scan(active, Some((u, v)), divisions);
            if let Some(refined) = equal_marginal_newton(active, u, v, &seed) {
                return refined;
            }
            let descended = coordinate_descent(active, u, v, seed.clone(), settings);
            if let Some(refined) = equal_marginal_newton(active, u, v, &descended) {
                let value: f64 = (0..n)
                    .map(|j| energy_term_raw(active.unit(j), active.time(j), refined[j], u, v))
                    .sum();
                let desc_value: f64 = (0..n)
                    .map(|j| energy_term_raw(active.unit(j), active.time(j), descended[j], u, v))
                    .sum();
                if value <= desc_value {
                    return refined;
                }
            }
            let desc_value: f64 = (0..n)
                .map(|j| energy_term_raw(active.unit(j), active.time(j), descended[j], u, v))
                .sum();
            if desc_value <= seed_val {
                descended
            } else {
                seed
            }
        }
    }
}

/// Core of the energy-family solvers: minimize
/// `sum(t_i / e_i * (u * a^beta_i + v) * a^alpha_i)` under the budget.
///
/// With `v > 0` each unit's marginal rises from `-inf` on its increasing
/// branch, so the dual value can be bisected — unless the units'
/// unconstrained minima do not fill the chip, in which case the equality
/// constraint binds from the other side and direct search takes over.
/// With `v = 0` and all `gamma = 0` the objective is allocation-invariant
/// and the equal split is returned.
fn solve_generalized(
    scenario: &Scenario,
    u: f64,
    v: f64,
    spec: ObjectiveSpec,
    settings: &SolverSettings,
) -> Result<AllocationResult, SolverError> {
    validate_for_solve(scenario)?;
    let active = Active::build(scenario, settings)?;
    let n = active.len();
    if n == 1 {
        return finish(&active, vec![active.budget], None, &spec);
    }
    if v == 0.0 {
        if (0..n).all(|j| active.unit(j).gamma() == 0.0) {
            // Dynamic energy is area-invariant for every unit: all
            // feasible allocations cost the same; return the equal split.
            let share = active.budget / n as f64;
            return finish(&active, vec![share; n], Some(0.0), &spec);
        }
        let areas = direct_minimize(&active, u, v, settings);
        return finish(&active, areas, None, &spec);
    }
    let minima: Vec<Option<f64>> = (0..n)
        .map(|j| unconstrained_minimum(active.unit(j), u, v))
        .collect();
    let total_minima: f64 = minima.iter().map(|m| m.unwrap_or(f64::INFINITY)).sum();
    if total_minima < active.budget {
        // Under-fill: every unit is already past its sweet spot when the
        // chip is full. The equality constraint still holds; search
        // directly.
        let areas = direct_minimize(&active, u, v, settings);
        return finish(&active, areas, None, &spec);
    }
    let lambda = bisect_dual(active.budget, settings, &mut |lam| {
        (0..n)
            .map(|j| invert_energy_marginal(active.unit(j), active.time(j), u, v, lam, minima[j]))
            .sum()
    })?;
    let areas: Vec<f64> = (0..n)
        .map(|j| invert_energy_marginal(active.unit(j), active.time(j), u, v, lambda, minima[j]))
        .collect();
    finish(&active, areas, Some(lambda), &spec)
}

/// Minimize total energy `sum((p_i(a_i) + p_sys) * f_i(a_i) * t_i)` under
/// the budget. See [`solve_generalized`]'s strategy notes in the module
/// docs: dual bisection first, direct search when the per-unit minima
/// under-fill the chip.
///
/// # Errors
///
/// As [`solve_delay`], plus a negative `p_sys`.
pub fn solve_energy(
    scenario: &Scenario,
    p_sys: f64,
    settings: &SolverSettings,
) -> Result<AllocationResult, SolverError> {
    if p_sys < 0.0 {
        return Err(ObjectiveError::NegativeConstantPower(p_sys).into());
    }
    solve_generalized(
        scenario,
        1.0,
        p_sys,
        ObjectiveSpec::Energy { p_sys },
        settings,
    )
}

/// Minimize the facility energy
/// `sum((w * p_i(a_i) + p_const) * f_i(a_i) * t_i)` with
/// `w = scenario.dynamic_weight`. At `w = 1` this follows exactly the
/// same computation as [`solve_energy`] at `p_sys = p_const`, so the two
/// agree bit-for-bit.
///
/// # Errors
///
/// As [`solve_energy`] (`w < 1` is caught by scenario validation).
pub fn solve_datacenter(
    scenario: &Scenario,
    p_const: f64,
    settings: &SolverSettings,
) -> Result<AllocationResult, SolverError> {
    if p_const < 0.0 {
        return Err(ObjectiveError::NegativeConstantPower(p_const).into());
    }
    solve_generalized(
        scenario,
        scenario.dynamic_weight,
        p_const,
        ObjectiveSpec::Datacenter { p_const },
        settings,
    )
}

/// Solve whichever objective `spec` selects.
///
/// # Errors
///
/// As the selected solver.
pub fn solve(
    scenario: &Scenario,
    spec: &ObjectiveSpec,
    settings: &SolverSettings,
) -> Result<AllocationResult, SolverError> {
    match *spec {
        ObjectiveSpec::Delay => solve_delay(scenario, settings),
        ObjectiveSpec::Energy { p_sys } => solve_energy(scenario, p_sys, settings),
        ObjectiveSpec::Datacenter { p_const } => solve_datacenter(scenario, p_const, settings),
    }
}

/// Two-unit energy solver by direct 1-D search: substitute
/// `a_2 = A - a_1`, scan 64 seed intervals (robust to non-convex
/// profiles), golden-section to the feasibility tolerance, and polish on
/// the marginal difference. Zero-workload units are pinned at the floor
/// first.
///
/// # Errors
///
/// [`SolverError::WrongUnitCount`] unless the scenario has exactly two
/// units; otherwise as [`solve_energy`].
pub fn solve_two_unit(
    scenario: &Scenario,
    p_sys: f64,
    settings: &SolverSettings,
) -> Result<AllocationResult, SolverError> {
    solve_two_unit_general(
        scenario,
        1.0,
        p_sys,
        ObjectiveSpec::Energy { p_sys },
        settings,
    )
}

pub(crate) fn solve_two_unit_general(
    scenario: &Scenario,
    u: f64,
    v: f64,
    spec: ObjectiveSpec,
    settings: &SolverSettings,
) -> Result<AllocationResult, SolverError> {
    if scenario.unit_count() != 2 {
        return Err(SolverError::WrongUnitCount {
            expected: 2,
            got: scenario.unit_count(),
        });
    }
    if v < 0.0 {
        return Err(ObjectiveError::NegativeConstantPower(v).into());
    }
    validate_for_solve(scenario)?;
    let active = Active::build(scenario, settings)?;
    let areas = match active.len() {
        1 => vec![active.budget],
        _ => minimize_two_active(&active, u, v, settings),
    };
    finish(&active, areas, None, &spec)
}

/// Row engine shared by the sweep functions: direct 1-D search for
/// two-unit scenarios, the generalized solver otherwise. Keeping one
/// entry point guarantees that sweeps with equivalent parameters take
/// identical code paths.
pub(crate) fn solve_row(
    scenario: &Scenario,
    u: f64,
    v: f64,
    spec: ObjectiveSpec,
    settings: &SolverSettings,
) -> Result<AllocationResult, SolverError> {
    if scenario.unit_count() == 2 {
        solve_two_unit_general(scenario, u, v, spec, settings)
    } else {
        solve_generalized(scenario, u, v, spec, settings)
    }
}

// ---------------------------------------------------------------------
// Brute-force oracle and verification
// ---------------------------------------------------------------------

/// Exhaustively evaluate the chosen objective on the simplex grid
/// `{a : sum(a_i) = A, a_i = k_i * (A / m), k_i >= 1}` where
/// `m = round(A / grid_step)`, and return the best grid point.
///
/// Complexity is `C(m-1, n-1)` evaluations — exponential in the unit
/// count; intended as an independent check at moderate resolution, not a
/// production solver. Deterministic: among equal values the first point
/// in lexicographic order wins.
///
/// # Errors
///
/// [`SolverError::BadGridStep`] / [`SolverError::GridTooCoarse`] for
/// unusable steps, [`SolverError::GridTooLarge`] when the grid exceeds
/// `settings.max_oracle_evals` evaluations.
pub fn brute_force_oracle(
    scenario: &Scenario,
    spec: &ObjectiveSpec,
    grid_step: f64,
    settings: &SolverSettings,
) -> Result<AllocationResult, SolverError> {
    validate_for_solve(scenario)?;
    let a = scenario.area_budget;
    if !(grid_step > 0.0 && grid_step <= a) {
        return Err(SolverError::BadGridStep {
            step: grid_step,
            budget: a,
        });
    }
    let divisions = (a / grid_step).round().max(1.0) as u64;
    let n = scenario.unit_count();
    if divisions < n as u64 {
        return Err(SolverError::GridTooCoarse {
            divisions,
            units: n,
        });
    }
    let points = binomial(divisions - 1, n as u64 - 1);
    if points > settings.max_oracle_evals as u128 {
        return Err(SolverError::GridTooLarge {
            points,
            cap: settings.max_oracle_evals,
        });
    }
    // The oracle grid spans all units, including zero-workload ones (each
    // grid point gives every unit at least one step).
    let active = Active {
        scenario,
        idx: (0..n).collect(),
        budget: a,
        floor: settings.area_floor,
    };
    let (areas, _) = grid_scan(&active, spec.power_weights(scenario), divisions);
    let objective = objective_value(scenario, &areas, spec)?;
    let m = marginals(scenario, &areas, spec)?;
    let carried: Vec<f64> = m
        .values
        .iter()
        .zip(&scenario.workload.times)
        .filter(|(_, &t)| t > 0.0)
        .map(|(&v, _)| v)
        .collect();
    let residual = if carried.len() >= 2 {
        carried.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - carried.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    } else {
        0.0
    };
    let lambda = if carried.is_empty() {
        0.0
    } else {
        carried.iter().sum::<f64>() / carried.len() as f64
    };
    let total: f64 = areas.iter().sum();
    Ok(AllocationResult {
        feasibility_gap: (total - a).abs(),
        areas,
        lambda,
        objective_value: objective,
        max_marginal_residual: residual,
    })
}

/// How [`verify`] should run its oracle cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleMode {
    /// Pick the finest grid whose evaluation count stays within an
    /// internal budget (about 2 million points, at most 10000 divisions).
    Auto,
    /// Use exactly this grid step.
    Step(f64),
    /// Skip the oracle comparison (feasibility and stationarity only).
    Skip,
}

/// Outcome of the oracle cross-check inside a [`VerificationReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub grid_step: f64,
    pub best_value: f64,
    pub best_areas: Vec<f64>,
    /// `result.objective_value - best_value`; at a true optimum this is
    /// at most zero plus grid-resolution effects.
    pub gap: f64,
    /// Measured local variation of the objective around the best grid
    /// point (largest single-step pair-transfer change): the resolution
    /// slack the gap is allowed.
    pub slack: f64,
    /// Largest per-coordinate distance between the checked allocation and
    /// the best grid point.
    pub max_coordinate_gap: f64,
    /// Whether every coordinate is within one grid step of the oracle's.
    pub within_one_step: bool,
    pub gap_ok: bool,
}

/// Independent check of an [`AllocationResult`]: feasibility,
/// equal-marginal stationarity (with boundary-pinned and zero-workload
/// units excluded and flagged), the under-fill diagnostic, and optionally
/// an oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub feasibility_gap: f64,
    pub feasibility_ok: bool,
    /// Largest pairwise marginal mismatch over checked units.
    pub kkt_residual: f64,
    /// The same, relative to the mean marginal magnitude.
    pub kkt_relative: f64,
    pub kkt_ok: bool,
    /// Units sitting at the area floor, where the equal-marginal
    /// condition legitimately fails and is not enforced.
    pub boundary_pinned: Vec<usize>,
    /// Units with zero workload time (marginal identically zero).
    pub zero_workload: Vec<usize>,
    /// Sum of the units' unconstrained energy minima, when the objective
    /// has them: if this is below the budget, the equality constraint is
    /// binding from below (the chip is "too big" for the energy optimum)
    /// and the solution sits where marginals are equal and positive.
    /// Infinite when some unit's energy decreases forever; absent for the
    /// delay objective.
    pub unconstrained_minima_total: Option<f64>,
    pub oracle: Option<OracleReport>,
    /// Conjunction of feasibility, stationarity, and (when run) the
    /// oracle gap check. The coordinate proximity is reported but not
    /// folded in: far from degeneracies it holds, but a long flat valley
    /// can put the best grid point slightly more than a step away without
    /// invalidating the solution.
    pub ok: bool,
}

/// Largest grid division count usable for [`OracleMode::Auto`].
fn auto_divisions(n_units: usize) -> u64 {
    divisions_within_budget(n_units, VERIFY_EVAL_BUDGET, VERIFY_MAX_DIVISIONS)
}

/// Re-check a solver result from scratch. See [`VerificationReport`].
///
/// # Errors
///
/// Oracle errors propagate; evaluation errors (dimension mismatch,
/// nonpositive areas) propagate as [`SolverError::Objective`].
pub fn verify(
    scenario: &Scenario,
    result: &AllocationResult,
    spec: &ObjectiveSpec,
    oracle_mode: OracleMode,
    settings: &SolverSettings,
) -> Result<VerificationReport, SolverError> {
    validate_for_solve(scenario)?;
    let a_total: f64 = result.areas.iter().sum();
    let feasibility_gap = (a_total - scenario.area_budget).abs();
    let feasibility_ok = feasibility_gap <= settings.feasibility_tol;

    let pin_limit = settings.area_floor * (1.0 + 1e-6);
    let mut boundary_pinned = Vec::new();
    let mut zero_workload = Vec::new();
    for (i, (&a, &t)) in result
        .areas
        .iter()
        .zip(&scenario.workload.times)
        .enumerate()
    {
        if t == 0.0 {
            zero_workload.push(i);
        }
        if a <= pin_limit {
            boundary_pinned.push(i);
        }
    }
    let m = marginals(scenario, &result.areas, spec)?;
    let mut checked: Vec<f64> = Vec::new();
    for (i, &v) in m.values.iter().enumerate() {
        if scenario.workload.times[i] > 0.0 && result.areas[i] > pin_limit {
            checked.push(v);
        }
    }
    let (kkt_residual, kkt_relative) = if checked.len() >= 2 {
        let hi = checked.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lo = checked.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let mean = checked.iter().map(|x| x.abs()).sum::<f64>() / checked.len() as f64;
        let resid = hi - lo;
        let rel = if mean > 0.0 {
            resid / mean
        } else if resid == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        (resid, rel)
    } else {
        (0.0, 0.0)
    };
    let kkt_ok = kkt_relative <= settings.marginal_tol;

    let unconstrained_minima_total = spec.power_weights(scenario).map(|(u, v)| {
        scenario
            .units
            .iter()
            .zip(&scenario.workload.times)
            .filter(|(_, &t)| t > 0.0)
            .map(|(unit, _)| unconstrained_minimum(unit, u, v).unwrap_or(f64::INFINITY))
            .sum()
    });

    let oracle = match oracle_mode {
        OracleMode::Skip => None,
        mode => {
            let step = match mode {
                OracleMode::Step(s) => s,
                _ => scenario.area_budget / auto_divisions(scenario.unit_count()) as f64,
            };
            let best = brute_force_oracle(scenario, spec, step, settings)?;
            let divisions = (scenario.area_budget / step).round() as u64;
            let step_eff = scenario.area_budget / divisions as f64;
            let slack = local_variation(scenario, spec, &best.areas, step_eff)?;
            let gap = result.objective_value - best.objective_value;
            let max_coordinate_gap = result
                .areas
                .iter()
                .zip(&best.areas)
                .map(|(&x, &y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            let tolerance_pad = 1e-12 * best.objective_value.abs().max(1.0);
            Some(OracleReport {
                grid_step: step_eff,
                best_value: best.objective_value,
                gap,
                slack,
                max_coordinate_gap,
                within_one_step: max_coordinate_gap <= step_eff * (1.0 + 1e-9) + 1e-12,
                gap_ok: gap <= slack + tolerance_pad,
                best_areas: best.areas,
            })
        }
    };
    let ok = feasibility_ok && kkt_ok && oracle.as_ref().is_none_or(|o| o.gap_ok);
    Ok(VerificationReport {
        feasibility_gap,
        feasibility_ok,
        kkt_residual,
        kkt_relative,
        kkt_ok,
        boundary_pinned,
        zero_workload,
        unconstrained_minima_total,
        oracle,
        ok,
    })
}

/// Measured local variation of the objective at a grid point: the largest
/// objective change over all single-step pair transfers. This is the
/// grid's honest resolution limit — a solution can beat the best grid
/// point by at most about this much.
fn local_variation(
    scenario: &Scenario,
    spec: &ObjectiveSpec,
    grid_areas: &[f64],
    step: f64,
) -> Result<f64, SolverError> {
    let base = objective_value(scenario, grid_areas, spec)?;
    let n = grid_areas.len();
    let mut worst = 0.0f64;
    let mut probe = grid_areas.to_vec();
    for i in 0..n {
        for j in 0..n {
            if i == j || grid_areas[j] < 1.5 * step {
                continue; // transfer would empty unit j's single step
            }
            probe.copy_from_slice(grid_areas);
            probe[i] += step;
            probe[j] -= step;
            let v = objective_value(scenario, &probe, spec)?;
            worst = worst.max((v - base).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        preset_hpc, preset_multi_accelerator, ObjectiveKind, Scenario, SystemPowerSpec, UnitModel,
        Workload,
    };
    use crate::objectives::kkt_residual;

    fn settings() -> SolverSettings {
        SolverSettings::default()
    }

    fn two_unit_scenario(t: [f64; 2], alpha: f64) -> Scenario {
        Scenario {
            area_budget: 1.0,
            units: vec![
                UnitModel::new("x", alpha, 1.0, 1.0),
                UnitModel::new("y", alpha, 1.0, 1.0),
            ],
            workload: Workload::new(t.to_vec()),
            system_power: SystemPowerSpec::Absolute(0.0),
            dynamic_weight: 1.0,
            objective: ObjectiveKind::Delay,
        }
    }

    /// Relative stationarity of a result under a given objective.
    fn relative_residual(s: &Scenario, r: &AllocationResult, spec: &ObjectiveSpec) -> f64 {
        let m = marginals(s, &r.areas, spec).unwrap();
        let active: Vec<f64> = m
            .values
            .iter()
            .zip(&s.workload.times)
            .filter(|(_, &t)| t > 0.0)
            .map(|(&v, _)| v)
            .collect();
        let hi = active.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = active.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = active.iter().map(|v| v.abs()).sum::<f64>() / active.len() as f64;
        (hi - lo) / mean
    }

    #[test]
    fn delay_symmetric_units_split_equally() {
        let s = two_unit_scenario([1.0, 1.0], -1.0);
        let r = solve_delay(&s, &settings()).unwrap();
        assert!((r.areas[0] - 0.5).abs() < 1e-12);
        assert!((r.areas[1] - 0.5).abs() < 1e-12);
        assert!(r.lambda < 0.0, "delay dual value must be negative");
    }

    #[test]
    fn delay_closed_form_matches_known_ratio() {
        // With alpha = -1 the optimality condition is t_i / a_i^2 equal,
        // so areas are proportional to sqrt(t): t = (1, 4) gives (1/3, 2/3).
        let s = two_unit_scenario([1.0, 4.0], -1.0);
        let r = solve_delay(&s, &settings()).unwrap();
        assert!((r.areas[0] - 1.0 / 3.0).abs() < 1e-9, "got {}", r.areas[0]);
        assert!((r.areas[1] - 2.0 / 3.0).abs() < 1e-9);
        assert!(r.feasibility_gap <= settings().feasibility_tol);
    }

    #[test]
    fn delay_mixed_exponents_solved_by_dual_bisection() {
        let s = preset_hpc(0.5).unwrap();
        let r = solve_delay(&s, &settings()).unwrap();
        // Cross-checked against an independent implementation.
        assert!(
            (r.areas[0] - 0.352722901376).abs() < 1e-8,
            "a_cpu = {}",
            r.areas[0]
        );
        assert!((r.objective_value - 1.61435247555).abs() < 1e-8);
        assert!(relative_residual(&s, &r, &ObjectiveSpec::Delay) < 1e-6);
    }

    #[test]
    fn delay_five_unit_catalog() {
        let s = preset_multi_accelerator();
        let r = solve_delay(&s, &settings()).unwrap();
        let expected = [
            0.196700389407,
            0.0466965156409,
            0.0231978918052,
            0.250744780979,
            0.482660422168,
        ];
        for (i, (&got, &want)) in r.areas.iter().zip(&expected).enumerate() {
            assert!((got - want).abs() < 1e-8, "unit {i}: {got} vs {want}");
        }
        assert!((r.objective_value - 0.884319410597).abs() < 1e-9);
        assert!(relative_residual(&s, &r, &ObjectiveSpec::Delay) < 1e-6);
    }

    #[test]
    fn delay_scale_covariance() {
        // Scaling all segment times by c reshapes the dual value but not
        // the allocation.
        let s = preset_multi_accelerator();
        let mut scaled = s.clone();
        for t in &mut scaled.workload.times {
            *t *= 3.7;
        }
        let r1 = solve_delay(&s, &settings()).unwrap();
        let r2 = solve_delay(&scaled, &settings()).unwrap();
        for (a, b) in r1.areas.iter().zip(&r2.areas) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn delay_pins_zero_workload_units() {
        let mut s = preset_multi_accelerator();
        s.workload.times[1] = 0.0; // fft1024 gets no work
        let r = solve_delay(&s, &settings()).unwrap();
        assert!(r.areas[1] <= settings().area_floor * 1.000001);
        assert!(r.feasibility_gap <= settings().feasibility_tol);
        assert!(relative_residual(&s, &r, &ObjectiveSpec::Delay) < 1e-6);
    }

    #[test]
    fn delay_rejects_all_zero_workload() {
        let mut s = preset_hpc(0.5).unwrap();
        s.workload.times = vec![0.0, 0.0];
        assert!(matches!(
            solve_delay(&s, &settings()),
            Err(SolverError::AllZeroWorkload)
        ));
    }

    #[test]
    fn energy_symmetric_units_with_constant_power_split_equally() {
        let mut s = two_unit_scenario([1.0, 1.0], -1.0);
        s.objective = ObjectiveKind::Energy;
        let r = solve_energy(&s, 0.5, &settings()).unwrap();
        assert!((r.areas[0] - 0.5).abs() < 1e-9, "got {}", r.areas[0]);
    }

    #[test]
    fn energy_two_unit_dual_matches_reference_values() {
        let s = preset_hpc(0.5).unwrap();
        // Reference optima computed independently (Newton on the
        // stationarity system at machine precision).
        let cases = [
            (0.02, 0.0161815039181),
            (0.1, 0.102362775266),
            (0.4, 0.289926926537),
            (0.95, 0.350559638441),
        ];
        for &(frac, want) in &cases {
            let p = frac / (1.0 - frac);
            let r = solve_energy(&s, p, &settings()).unwrap();
            assert!(
                (r.areas[0] - want).abs() < 1e-7,
                "s={frac}: a_cpu={} want {want}",
                r.areas[0]
            );
            let rel = relative_residual(&s, &r, &ObjectiveSpec::Energy { p_sys: p });
            assert!(rel < 1e-6, "s={frac}: residual {rel}");
        }
    }

    #[test]
    fn energy_dual_and_direct_search_agree() {
        let s = preset_hpc(0.5).unwrap();
        for p in [0.02, 0.111, 0.667, 19.0] {
            let dual = solve_energy(&s, p, &settings()).unwrap();
            let direct = solve_two_unit(&s, p, &settings()).unwrap();
            assert!(
                (dual.areas[0] - direct.areas[0]).abs() < 1e-7,
                "p={p}: {} vs {}",
                dual.areas[0],
                direct.areas[0]
            );
            assert!(
                (dual.objective_value - direct.objective_value).abs()
                    <= 1e-10 * dual.objective_value
            );
        }
    }

    #[test]
    fn energy_five_unit_dual_matches_reference_values() {
        let s = preset_multi_accelerator();
        let p = 0.4 / 0.6;
        let r = solve_energy(&s, p, &settings()).unwrap();
        let expected = [
            0.232032718334,
            0.0557563385152,
            0.027745394065,
            0.294408706477,
            0.390056842609,
        ];
        for (i, (&got, &want)) in r.areas.iter().zip(&expected).enumerate() {
            assert!((got - want).abs() < 1e-7, "unit {i}: {got} vs {want}");
        }
    }

    #[test]
    fn energy_five_unit_underfill_falls_back_to_direct_search() {
        let s = preset_multi_accelerator();
        let p = 0.02 / 0.98;
        let r = solve_energy(&s, p, &settings()).unwrap();
        // At this constant power the per-unit minima sum to less than the
        // budget, so the equality constraint binds from below and the
        // common marginal is positive.
        let expected = [
            0.23616150044,
            0.242504397568,
            0.269050147746,
            0.236023299552,
            0.0162606546939,
        ];
        for (i, (&got, &want)) in r.areas.iter().zip(&expected).enumerate() {
            assert!((got - want).abs() < 1e-6, "unit {i}: {got} vs {want}");
        }
        assert!((r.objective_value - 0.208588171053).abs() < 1e-8);
        let rel = relative_residual(&s, &r, &ObjectiveSpec::Energy { p_sys: p });
        assert!(rel < 1e-6, "residual {rel}");
        assert!(r.lambda > 0.0, "under-fill optimum has positive marginals");
    }

    #[test]
    fn energy_approaches_delay_optimum_at_huge_constant_power() {
        let s = preset_hpc(0.5).unwrap();
        let delay = solve_delay(&s, &settings()).unwrap();
        let energy = solve_energy(&s, 1e4, &settings()).unwrap();
        let gap = delay
            .areas
            .iter()
            .zip(&energy.areas)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(gap < 0.01, "limit gap {gap}");
    }

    #[test]
    fn two_unit_solver_requires_two_units() {
        let s = preset_multi_accelerator();
        assert!(matches!(
            solve_two_unit(&s, 0.1, &settings()),
            Err(SolverError::WrongUnitCount {
                expected: 2,
                got: 5
            })
        ));
    }

    #[test]
    fn datacenter_unit_weight_is_bitwise_energy() {
        let s = preset_multi_accelerator();
        for p in [0.02, 0.667, 19.0] {
            let dc = solve_datacenter(&s, p, &settings()).unwrap();
            let en = solve_energy(&s, p, &settings()).unwrap();
            assert_eq!(dc.areas.len(), en.areas.len());
            for (a, b) in dc.areas.iter().zip(&en.areas) {
                assert_eq!(a.to_bits(), b.to_bits(), "w = 1 must be identical");
            }
            assert_eq!(dc.objective_value.to_bits(), en.objective_value.to_bits());
        }
    }

    #[test]
    fn datacenter_weight_rescales_constant_power() {
        // (w, P) and (1, P/w) share the same argmin.
        let mut s = preset_hpc(0.5).unwrap();
        s.dynamic_weight = 3.0;
        let dc = solve_datacenter(&s, 0.9, &settings()).unwrap();
        let mut plain = s.clone();
        plain.dynamic_weight = 1.0;
        let en = solve_energy(&plain, 0.3, &settings()).unwrap();
        for (a, b) in dc.areas.iter().zip(&en.areas) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn oracle_symmetric_delay_prefers_equal_split() {
        let s = two_unit_scenario([1.0, 1.0], -1.0);
        let r = brute_force_oracle(&s, &ObjectiveSpec::Delay, 0.1, &settings()).unwrap();
        assert!((r.areas[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_closed_form_within_one_step() {
        let s = two_unit_scenario([1.0, 4.0], -1.0);
        let step = 0.01;
        let r = brute_force_oracle(&s, &ObjectiveSpec::Delay, step, &settings()).unwrap();
        assert!((r.areas[0] - 1.0 / 3.0).abs() <= step);
        assert!((r.areas[1] - 2.0 / 3.0).abs() <= step);
    }

    #[test]
    fn oracle_never_beats_solver_beyond_slack() {
        let s = preset_multi_accelerator();
        let spec = ObjectiveSpec::Energy { p_sys: 0.02 / 0.98 };
        let solved = solve_energy(&s, 0.02 / 0.98, &settings()).unwrap();
        let oracle = brute_force_oracle(&s, &spec, 0.01, &settings()).unwrap();
        assert!(
            solved.objective_value <= oracle.objective_value + 1e-12,
            "solver {} vs oracle {}",
            solved.objective_value,
            oracle.objective_value
        );
    }

    #[test]
    fn oracle_is_deterministic() {
        let s = preset_multi_accelerator();
        let spec = ObjectiveSpec::Energy { p_sys: 1.0 };
        let a = brute_force_oracle(&s, &spec, 0.02, &settings()).unwrap();
        let b = brute_force_oracle(&s, &spec, 0.02, &settings()).unwrap();
        for (x, y) in a.areas.iter().zip(&b.areas) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn oracle_rejects_oversized_grids() {
        let s = preset_multi_accelerator();
        let err = brute_force_oracle(&s, &ObjectiveSpec::Delay, 1e-6, &settings());
        assert!(matches!(err, Err(SolverError::GridTooLarge { .. })));
        let err = brute_force_oracle(&s, &ObjectiveSpec::Delay, 0.5, &settings());
        assert!(matches!(err, Err(SolverError::GridTooCoarse { .. })));
        let err = brute_force_oracle(&s, &ObjectiveSpec::Delay, -0.1, &settings());
        assert!(matches!(err, Err(SolverError::BadGridStep { .. })));
    }

    #[test]
    fn verify_passes_solver_output() {
        let s = preset_multi_accelerator();
        let r = solve_delay(&s, &settings()).unwrap();
        let report = verify(&s, &r, &ObjectiveSpec::Delay, OracleMode::Auto, &settings()).unwrap();
        assert!(report.feasibility_ok, "feasibility: {report:?}");
        assert!(report.kkt_ok, "stationarity: {report:?}");
        let oracle = report.oracle.as_ref().unwrap();
        assert!(oracle.gap_ok, "oracle gap: {oracle:?}");
        assert!(report.ok);
    }

    #[test]
    fn verify_flags_perturbed_allocations() {
        let s = preset_multi_accelerator();
        let mut r = solve_delay(&s, &settings()).unwrap();
        r.areas[0] += 0.01;
        r.areas[4] -= 0.01;
        let report = verify(&s, &r, &ObjectiveSpec::Delay, OracleMode::Skip, &settings()).unwrap();
        assert!(!report.kkt_ok, "perturbation must break stationarity");
        assert!(!report.ok);
        // The stationarity measure comes from the same place the solver
        // reports it; a hand-built equal split is also not stationary.
        let spec = ObjectiveSpec::Delay;
        assert!(kkt_residual(&s, &r.areas, &spec).unwrap() > 0.0);
    }

    #[test]
    fn verify_flags_pinned_units_and_excludes_them() {
        let mut s = preset_multi_accelerator();
        s.workload.times[2] = 0.0; // fft16 idle
        let r = solve_energy(&s, 1.0, &settings()).unwrap();
        let report = verify(
            &s,
            &r,
            &ObjectiveSpec::Energy { p_sys: 1.0 },
            OracleMode::Skip,
            &settings(),
        )
        .unwrap();
        assert_eq!(report.zero_workload, vec![2]);
        assert!(report.boundary_pinned.contains(&2));
        assert!(report.kkt_ok, "pinned unit must not pollute stationarity");
    }

    #[test]
    fn verify_reports_underfill_tension() {
        let s = preset_multi_accelerator();
        let p = 0.02 / 0.98;
        let r = solve_energy(&s, p, &settings()).unwrap();
        let report = verify(
            &s,
            &r,
            &ObjectiveSpec::Energy { p_sys: p },
            OracleMode::Skip,
            &settings(),
        )
        .unwrap();
        let total = report.unconstrained_minima_total.unwrap();
        assert!(
            total < s.area_budget,
            "under-fill case must be visible: {total}"
        );
    }

    #[test]
    fn single_unit_takes_whole_budget() {
        let s = Scenario {
            area_budget: 2.0,
            units: vec![UnitModel::new("only", -0.5, 1.0, 1.0)],
            workload: Workload::new(vec![1.0]),
            system_power: SystemPowerSpec::Absolute(0.5),
            dynamic_weight: 1.0,
            objective: ObjectiveKind::Energy,
        };
        let settings = SolverSettings::for_budget(2.0);
        let r = solve_energy(&s, 0.5, &settings).unwrap();
        assert!((r.areas[0] - 2.0).abs() < 1e-9);
        let r = solve_delay(&s, &settings).unwrap();
        assert!((r.areas[0] - 2.0).abs() < 1e-9);
        assert_eq!(r.max_marginal_residual, 0.0);
    }

    #[test]
    fn zero_constant_power_with_invariant_units_splits_equally() {
        // alpha = -1, beta = 1 makes energy allocation-invariant; the
        // equal split is the canonical representative.
        let mut s = two_unit_scenario([1.0, 1.0], -1.0);
        s.objective = ObjectiveKind::Energy;
        let r = solve_energy(&s, 0.0, &settings()).unwrap();
        assert!((r.areas[0] - 0.5).abs() < 1e-12);
        assert_eq!(r.lambda, 0.0);
    }

    #[test]
    fn budget_scaling_is_honored_by_both_dual_paths() {
        // Equal exponents: the closed form scales proportionally.
        let mut s = two_unit_scenario([1.0, 4.0], -1.0);
        s.area_budget = 10.0;
        let tens = SolverSettings::for_budget(10.0);
        let r = solve_delay(&s, &tens).unwrap();
        assert!((r.areas[0] - 10.0 / 3.0).abs() < 1e-8);
        // Mixed exponents shift the balance with chip size (the marginals
        // decay at different rates), so only check the optimality
        // conditions, not proportionality.
        let mut hpc = preset_hpc(0.5).unwrap();
        hpc.area_budget = 10.0;
        let r = solve_delay(&hpc, &tens).unwrap();
        assert!(r.feasibility_gap <= tens.feasibility_tol);
        assert!(relative_residual(&hpc, &r, &ObjectiveSpec::Delay) < 1e-6);
    }
}
