//! Pure evaluation of unit performance/power functions, the delay, energy,
//! and datacenter objectives, their per-unit marginals, and the
//! equal-marginal (KKT) residual.
//!
//! All functions here are side-effect free. Marginals are implemented
//! analytically; finite differences appear only in tests, as independent
//! oracles.

use crate::model::{ObjectiveKind, Scenario, UnitModel};
use thiserror::Error;

/// Errors from objective and marginal evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("area must be positive, got {area} at index {index}")]
    NonpositiveArea { index: usize, area: f64 },
    #[error("expected {expected} areas, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("constant power must be nonnegative, got {0}")]
    NegativeConstantPower(f64),
    #[error("dynamic-power weight must be at least 1, got {0}")]
    WeightBelowOne(f64),
}

/// A fully parameterized objective: which quantity to minimize and the
/// constant-power value it needs.
///
/// [`ObjectiveKind`] names the objective; this enum also carries the
/// resolved constants so evaluation needs nothing beyond the scenario's
/// units and workload (the datacenter weight `w` still comes from
/// [`Scenario::dynamic_weight`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveSpec {
    Delay,
    Energy { p_sys: f64 },
    Datacenter { p_const: f64 },
}

impl ObjectiveSpec {
    /// Resolve a scenario's declared objective and system-power spec into
    /// a concrete objective.
    pub fn from_scenario(scenario: &Scenario) -> Self {
        match scenario.objective {
            ObjectiveKind::Delay => ObjectiveSpec::Delay,
            ObjectiveKind::Energy => ObjectiveSpec::Energy {
                p_sys: scenario.p_sys(),
            },
            ObjectiveKind::Datacenter => ObjectiveSpec::Datacenter {
                p_const: scenario.p_sys(),
            },
        }
    }

    pub fn kind(&self) -> ObjectiveKind {
        match self {
            ObjectiveSpec::Delay => ObjectiveKind::Delay,
            ObjectiveSpec::Energy { .. } => ObjectiveKind::Energy,
            ObjectiveSpec::Datacenter { .. } => ObjectiveKind::Datacenter,
        }
    }

    /// The `(u, v)` pair of the generalized energy form
    /// `sum(t_i / e_i * (u * a^beta + v) * a^alpha)`: `u` scales dynamic
    /// power, `v` is the constant power. `None` for the delay objective.
    pub(crate) fn power_weights(&self, scenario: &Scenario) -> Option<(f64, f64)> {
        match *self {
            ObjectiveSpec::Delay => None,
            ObjectiveSpec::Energy { p_sys } => Some((1.0, p_sys)),
            ObjectiveSpec::Datacenter { p_const } => Some((scenario.dynamic_weight, p_const)),
        }
    }

    fn check(&self, scenario: &Scenario) -> Result<(), ObjectiveError> {
        match *self {
            ObjectiveSpec::Delay => Ok(()),
            ObjectiveSpec::Energy { p_sys } => {
                if p_sys >= 0.0 {
                    Ok(())
                } else {
                    Err(ObjectiveError::NegativeConstantPower(p_sys))
                }
            }
            ObjectiveSpec::Datacenter { p_const } => {
                if p_const < 0.0 {
                    Err(ObjectiveError::NegativeConstantPower(p_const))
                } else if scenario.dynamic_weight < 1.0 {
                    Err(ObjectiveError::WeightBelowOne(scenario.dynamic_weight))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Per-unit derivatives of the objective with respect to each unit's area.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalVector {
    pub values: Vec<f64>,
}

fn check_area(index: usize, area: f64) -> Result<(), ObjectiveError> {
    if area > 0.0 && area.is_finite() {
        Ok(())
    } else {
        Err(ObjectiveError::NonpositiveArea { index, area })
    }
}

fn check_areas(scenario: &Scenario, areas: &[f64]) -> Result<(), ObjectiveError> {
    if areas.len() != scenario.units.len() {
        return Err(ObjectiveError::DimensionMismatch {
            expected: scenario.units.len(),
            got: areas.len(),
        });
    }
    for (i, &a) in areas.iter().enumerate() {
        check_area(i, a)?;
    }
    Ok(())
}

/// Inverted speedup `f(a) = a^alpha / e`: the factor by which the unit's
/// segment time is multiplied when the unit gets area `a`. Strictly
/// decreasing in `a` since `alpha < 0`.
///
/// # Errors
///
/// [`ObjectiveError::NonpositiveArea`] when `a <= 0` (the power law
/// diverges at zero and is meaningless for negative area).
pub fn accel_fn(unit: &UnitModel, area: f64) -> Result<f64, ObjectiveError> {
    check_area(0, area)?;
    Ok(accel_raw(unit, area))
}

/// Derivative `f'(a) = alpha * a^(alpha-1) / e`; always negative.
///
/// # Errors
///
/// As [`accel_fn`].
pub fn accel_fn_deriv(unit: &UnitModel, area: f64) -> Result<f64, ObjectiveError> {
    check_area(0, area)?;
    Ok(accel_deriv_raw(unit, area))
}

/// Dynamic power `p(a) = a^beta`; strictly increasing in `a`.
///
/// # Errors
///
/// As [`accel_fn`].
pub fn power_fn(unit: &UnitModel, area: f64) -> Result<f64, ObjectiveError> {
    check_area(0, area)?;
    Ok(area.powf(unit.beta))
}

#[inline]
pub(crate) fn accel_raw(unit: &UnitModel, a: f64) -> f64 {
    a.powf(unit.alpha) / unit.efficiency
}

#[inline]
pub(crate) fn accel_deriv_raw(unit: &UnitModel, a: f64) -> f64 {
    unit.alpha * a.powf(unit.alpha - 1.0) / unit.efficiency
}

/// Marginal of the delay objective for one unit: `t * f'(a)`.
#[inline]
pub(crate) fn delay_marginal_raw(unit: &UnitModel, t: f64, a: f64) -> f64 {
    t * accel_deriv_raw(unit, a)
}

/// One unit's term of the generalized energy form:
/// `t / e * (u * a^beta + v) * a^alpha`.
#[inline]
pub(crate) fn energy_term_raw(unit: &UnitModel, t: f64, a: f64, u: f64, v: f64) -> f64 {
    t * (u * a.powf(unit.beta) + v) * a.powf(unit.alpha) / unit.efficiency
}

/// Marginal of the generalized energy form for one unit:
/// `t / e * (u * gamma * a^(gamma-1) + v * alpha * a^(alpha-1))` with
/// `gamma = alpha + beta`.
#[inline]
pub(crate) fn energy_marginal_raw(unit: &UnitModel, t: f64, a: f64, u: f64, v: f64) -> f64 {
    let gamma = unit.gamma();
    t * (u * gamma * a.powf(gamma - 1.0) + v * unit.alpha * a.powf(unit.alpha - 1.0))
        / unit.efficiency
}

/// Second derivative of the generalized energy term for one unit; used by
/// the equal-marginal polishing step in the solver.
#[inline]
pub(crate) fn energy_marginal_deriv_raw(unit: &UnitModel, t: f64, a: f64, u: f64, v: f64) -> f64 {
    let gamma = unit.gamma();
    t * (u * gamma * (gamma - 1.0) * a.powf(gamma - 2.0)
        + v * unit.alpha * (unit.alpha - 1.0) * a.powf(unit.alpha - 2.0))
        / unit.efficiency
}

/// Total execution time `sum(t_i * f_i(a_i))`.
///
/// # Errors
///
/// Dimension mismatch between `areas` and the unit list, or a nonpositive
/// area.
pub fn delay_objective(scenario: &Scenario, areas: &[f64]) -> Result<f64, ObjectiveError> {
    check_areas(scenario, areas)?;
    Ok(scenario
        .units
        .iter()
        .zip(&scenario.workload.times)
        .zip(areas)
        .map(|((unit, &t), &a)| t * accel_raw(unit, a))
        .sum())
}

/// Total energy `sum((p_i(a_i) + p_sys) * f_i(a_i) * t_i)`: each segment's
/// execution time weighted by the power drawn while it runs, including the
/// constant, area-independent system power.
///
/// # Errors
///
/// As [`delay_objective`], plus a negative `p_sys`.
pub fn energy_objective(
    scenario: &Scenario,
    areas: &[f64],
    p_sys: f64,
) -> Result<f64, ObjectiveError> {
    ObjectiveSpec::Energy { p_sys }.check(scenario)?;
    check_areas(scenario, areas)?;
    Ok(generalized_energy(scenario, areas, 1.0, p_sys))
}

/// Facility energy `sum((w * p_i(a_i) + p_const) * f_i(a_i) * t_i)` where
/// `w = scenario.dynamic_weight` covers power-delivery and cooling
/// overhead per watt of chip power and `p_const` is the facility's
/// constant power. With `w = 1` this is exactly
/// [`energy_objective`] at `p_sys = p_const`.
///
/// # Errors
///
/// As [`energy_objective`], plus `w < 1`.
pub fn datacenter_objective(
    scenario: &Scenario,
    areas: &[f64],
    p_const: f64,
) -> Result<f64, ObjectiveError> {
    ObjectiveSpec::Datacenter { p_const }.check(scenario)?;
    check_areas(scenario, areas)?;
    Ok(generalized_energy(
        scenario,
        areas,
        scenario.dynamic_weight,
        p_const,
    ))
}

fn generalized_energy(scenario: &Scenario, areas: &[f64], u: f64, v: f64) -> f64 {
    scenario
        .units
        .iter()
        .zip(&scenario.workload.times)
        .zip(areas)
        .map(|((unit, &t), &a)| energy_term_raw(unit, t, a, u, v))
        .sum()
}

/// Evaluate whichever objective `spec` selects.
///
/// # Errors
///
/// As the selected objective's dedicated function.
pub fn objective_value(
    scenario: &Scenario,
    areas: &[f64],
    spec: &ObjectiveSpec,
) -> Result<f64, ObjectiveError> {
    match *spec {
        ObjectiveSpec::Delay => delay_objective(scenario, areas),
        ObjectiveSpec::Energy { p_sys } => energy_objective(scenario, areas, p_sys),
        ObjectiveSpec::Datacenter { p_const } => datacenter_objective(scenario, areas, p_const),
    }
}

/// Analytic per-unit marginals `d(objective)/d(a_i)` at the given
/// allocation.
///
/// Delay: `t_i * f'_i(a_i)`. Energy: `t_i / e_i * (gamma * a^(gamma-1) +
/// p_sys * alpha * a^(alpha-1))` with `gamma = alpha + beta` (the product
/// rule applied to `(a^beta + p_sys) * a^alpha`). Datacenter: same with
/// the dynamic term weighted by `w`.
///
/// # Errors
///
/// As [`objective_value`].
pub fn marginals(
    scenario: &Scenario,
    areas: &[f64],
    spec: &ObjectiveSpec,
) -> Result<MarginalVector, ObjectiveError> {
    spec.check(scenario)?;
    check_areas(scenario, areas)?;
    let values = match spec.power_weights(scenario) {
        None => scenario
            .units
            .iter()
            .zip(&scenario.workload.times)
            .zip(areas)
            .map(|((unit, &t), &a)| delay_marginal_raw(unit, t, a))
            .collect(),
        Some((u, v)) => scenario
            .units
            .iter()
            .zip(&scenario.workload.times)
            .zip(areas)
            .map(|((unit, &t), &a)| energy_marginal_raw(unit, t, a, u, v))
            .collect(),
    };
    Ok(MarginalVector { values })
}

/// Largest pairwise marginal mismatch `max |m_i - m_j|` over units that
/// carry workload (`t_i > 0`); zero-time units have identically zero
/// marginals and would only pollute the stationarity measure.
///
/// Zero at an exact interior stationary point. Callers comparing against a
/// tolerance should normalize by the mean marginal magnitude; the solver
/// does this when it reports its residual.
///
/// # Errors
///
/// As [`marginals`].
pub fn kkt_residual(
    scenario: &Scenario,
    areas: &[f64],
    spec: &ObjectiveSpec,
) -> Result<f64, ObjectiveError> {
    let m = marginals(scenario, areas, spec)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&v, &t) in m.values.iter().zip(&scenario.workload.times) {
        if t > 0.0 {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        return Ok(0.0);
    }
    Ok(hi - lo)
}
