//! Domain types: computational units, workloads, power specifications,
//! scenario validation, and two ready-made example scenarios.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Scaling exponent of a full-blown CPU core: performance grows with the
/// square root of area, so inverted speedup falls as `a^-0.5`.
pub const CPU_ALPHA: f64 = -0.5;
/// Dynamic-power exponent of a CPU core.
pub const CPU_BETA: f64 = 0.875;
/// Supported range for a vector/ASIC unit's scaling exponent.
pub const ACCEL_ALPHA_RANGE: (f64, f64) = (-1.0, -0.75);
/// Supported range for a vector/ASIC unit's dynamic-power exponent.
pub const ACCEL_BETA_RANGE: (f64, f64) = (1.0, 1.25);

/// One computational unit competing for chip area.
///
/// The unit's inverted speedup is `a^alpha / efficiency` (time multiplier
/// relative to the reference CPU) and its dynamic power is `a^beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitModel {
    /// Identifier used in tables, CSV headers, and plots.
    pub name: String,
    /// Scaling exponent; must be negative (more area is never slower).
    pub alpha: f64,
    /// Dynamic-power exponent; must be positive.
    pub beta: f64,
    /// Area-efficiency factor `e`: how much faster this unit is than the
    /// reference CPU at equal area. Divides the inverted speedup.
    pub efficiency: f64,
}

impl UnitModel {
    pub fn new(name: impl Into<String>, alpha: f64, beta: f64, efficiency: f64) -> Self {
        Self {
            name: name.into(),
            alpha,
            beta,
            efficiency,
        }
    }

    /// Combined exponent `alpha + beta` governing the area-dependent part
    /// of the unit's energy term `(a^beta + P) * a^alpha`.
    pub fn gamma(&self) -> f64 {
        self.alpha + self.beta
    }
}

/// Reference-CPU execution time per workload segment, aligned with the
/// scenario's unit list (segment `i` runs on unit `i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Workload {
    pub times: Vec<f64>,
}

impl Workload {
    pub fn new(times: Vec<f64>) -> Self {
        Self { times }
    }
}

/// Constant system power, either as an absolute value in the same unit as
/// the dynamic power `a^beta`, or as a fraction `s` of the total power
/// budget.
///
/// The fractional form is resolved against a reference power equal to the
/// area budget (the chip's nominal dynamic budget), *including* the system
/// power itself in the total: `P_sys = s / (1 - s) * P_ref`, so that
/// `P_sys / (P_sys + P_ref) = s`. A 95% share therefore maps to
/// `P_sys = 19 * P_ref` rather than a meaningless `0.95 * P_ref`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum SystemPowerSpec {
    /// Absolute power value, `>= 0`.
    Absolute(f64),
    /// Fraction of the total power budget, in `[0, 1)`.
    Fraction(f64),
}

impl SystemPowerSpec {
    /// Resolve to an absolute power given the reference power.
    pub fn absolute(&self, reference_power: f64) -> f64 {
        match *self {
            SystemPowerSpec::Absolute(p) => p,
            SystemPowerSpec::Fraction(s) => s / (1.0 - s) * reference_power,
        }
    }
}

/// Which objective a scenario asks to minimize.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// Total execution time `sum(t_i * f_i(a_i))`.
    Delay,
    /// Total energy `sum((p_i(a_i) + P_sys) * f_i(a_i) * t_i)`.
    #[default]
    Energy,
    /// Facility energy `sum((w * p_i(a_i) + P_const) * f_i(a_i) * t_i)`.
    Datacenter,
}

fn default_dynamic_weight() -> f64 {
    1.0
}

/// A complete allocation problem: the area budget, the competing units,
/// the workload split, and the power parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Total chip area budget `A > 0`. Allocations must sum to it exactly.
    pub area_budget: f64,
    pub units: Vec<UnitModel>,
    pub workload: Workload,
    pub system_power: SystemPowerSpec,
    /// Dynamic-power multiplier `w >= 1` used by the datacenter objective
    /// (power delivery and cooling overhead per watt of chip power).
    #[serde(rename = "w", default = "default_dynamic_weight")]
    pub dynamic_weight: f64,
    /// Objective selected when a caller does not specify one explicitly.
    #[serde(default)]
    pub objective: ObjectiveKind,
}

impl Scenario {
    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    /// Reference power used to resolve fractional system-power values:
    /// the nominal dynamic budget of a chip of area `A` (units with
    /// `beta = 1` draw exactly `A` at full allocation).
    pub fn reference_power(&self) -> f64 {
        self.area_budget
    }

    /// The scenario's constant system power as an absolute value.
    pub fn p_sys(&self) -> f64 {
        self.system_power.absolute(self.reference_power())
    }
}

/// A single validation failure: which field broke which rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

fn violation(field: impl Into<String>, rule: impl Into<String>) -> Violation {
    Violation {
        field: field.into(),
        rule: rule.into(),
    }
}

/// Check every scenario invariant and return the list of violations
/// (empty when the scenario is well-formed). Never fails: broken inputs
/// are reported, not rejected here, so callers can show all problems at
/// once.
pub fn validate(scenario: &Scenario) -> Vec<Violation> {
    let mut v = Vec::new();
    if !(scenario.area_budget > 0.0 && scenario.area_budget.is_finite()) {
        v.push(violation(
            "area_budget",
            format!("must be positive and finite, got {}", scenario.area_budget),
        ));
    }
    if scenario.units.is_empty() {
        v.push(violation("units", "must contain at least one unit"));
    }
    for (i, u) in scenario.units.iter().enumerate() {
        let field = |part: &str| format!("units[{i}].{part}");
        if u.name.is_empty() {
            v.push(violation(field("name"), "must not be empty"));
        } else if u.name.contains(',') {
            v.push(violation(
                field("name"),
                "must not contain ',' (names become CSV column headers)",
            ));
        }
        if !(u.alpha < 0.0 && u.alpha.is_finite()) {
            v.push(violation(
                field("alpha"),
                format!(
                    "must be negative (speedup grows with area), got {}",
                    u.alpha
                ),
            ));
        }
        if !(u.beta > 0.0 && u.beta.is_finite()) {
            v.push(violation(
                field("beta"),
                format!("must be positive, got {}", u.beta),
            ));
        }
        if !(u.efficiency > 0.0 && u.efficiency.is_finite()) {
            v.push(violation(
                field("efficiency"),
                format!("must be positive, got {}", u.efficiency),
            ));
        }
    }
    if scenario.workload.times.len() != scenario.units.len() {
        v.push(violation(
            "workload",
            format!(
                "length {} does not match unit count {}",
                scenario.workload.times.len(),
                scenario.units.len()
            ),
        ));
    }
    let mut any_positive = false;
    for (i, &t) in scenario.workload.times.iter().enumerate() {
        if !(t >= 0.0 && t.is_finite()) {
            v.push(violation(
                format!("workload[{i}]"),
                format!("must be nonnegative and finite, got {t}"),
            ));
        }
        if t > 0.0 {
            any_positive = true;
        }
    }
    if !scenario.workload.times.is_empty() && !any_positive {
        v.push(violation(
            "workload",
            "at least one segment time must be positive",
        ));
    }
    match scenario.system_power {
        SystemPowerSpec::Absolute(p) => {
            if !(p >= 0.0 && p.is_finite()) {
                v.push(violation(
                    "system_power",
                    format!("absolute value must be nonnegative and finite, got {p}"),
                ));
            }
        }
        SystemPowerSpec::Fraction(s) => {
            if !(0.0..1.0).contains(&s) {
                v.push(violation(
                    "system_power",
                    format!("fraction must lie in [0, 1), got {s}"),
                ));
            }
        }
    }
    if !(scenario.dynamic_weight >= 1.0 && scenario.dynamic_weight.is_finite()) {
        v.push(violation(
            "w",
            format!(
                "dynamic-power weight must be at least 1, got {}",
                scenario.dynamic_weight
            ),
        ));
    }
    v
}

/// Errors from preset constructors.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("parallel fraction must lie strictly between 0 and 1, got {0}")]
    FractionOutOfRange(f64),
    #[error("{name} = {value} is outside the supported range [{min}, {max}]")]
    ExponentOutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
}

fn check_range(name: &'static str, value: f64, range: (f64, f64)) -> Result<(), ModelError> {
    if value >= range.0 && value <= range.1 {
        Ok(())
    } else {
        Err(ModelError::ExponentOutOfRange {
            name,
            value,
            min: range.0,
            max: range.1,
        })
    }
}

/// Two-unit scenario: one CPU core plus one vector unit (VPU) sharing a
/// unit area budget. `parallel_fraction` is the share of the workload that
/// runs on the vector unit; the rest stays on the CPU.
///
/// The CPU uses `alpha = -0.5` (performance follows the square root of
/// area) and `beta = 0.875`; the vector unit defaults to the perfectly
/// parallel corner `alpha = -1`, `beta = 1`. Use [`preset_hpc_with`] to
/// pick other vector-unit exponents within the supported ranges.
///
/// # Errors
///
/// [`ModelError::FractionOutOfRange`] unless `0 < parallel_fraction < 1`.
pub fn preset_hpc(parallel_fraction: f64) -> Result<Scenario, ModelError> {
    preset_hpc_with(parallel_fraction, -1.0, 1.0)
}

/// [`preset_hpc`] with explicit vector-unit exponents.
///
/// # Errors
///
/// [`ModelError::FractionOutOfRange`] for a bad fraction, and
/// [`ModelError::ExponentOutOfRange`] when `alpha_vpu` leaves
/// [`ACCEL_ALPHA_RANGE`] or `beta_vpu` leaves [`ACCEL_BETA_RANGE`].
pub fn preset_hpc_with(
    parallel_fraction: f64,
    alpha_vpu: f64,
    beta_vpu: f64,
) -> Result<Scenario, ModelError> {
    if !(parallel_fraction > 0.0 && parallel_fraction < 1.0) {
        return Err(ModelError::FractionOutOfRange(parallel_fraction));
    }
    check_range("alpha_vpu", alpha_vpu, ACCEL_ALPHA_RANGE)?;
    check_range("beta_vpu", beta_vpu, ACCEL_BETA_RANGE)?;
    Ok(Scenario {
        area_budget: 1.0,
        units: vec![
            UnitModel::new("cpu", CPU_ALPHA, CPU_BETA, 1.0),
            UnitModel::new("vpu", alpha_vpu, beta_vpu, 1.0),
        ],
        workload: Workload::new(vec![1.0 - parallel_fraction, parallel_fraction]),
        system_power: SystemPowerSpec::Fraction(0.0),
        dynamic_weight: 1.0,
        objective: ObjectiveKind::Energy,
    })
}

/// Default dynamic-power exponent for the ASIC accelerators in
/// [`preset_multi_accelerator`].
///
/// Any value in [`ACCEL_BETA_RANGE`] is admissible; the default sits in
/// the interior rather than at the `beta = 1` end because at `beta = 1`
/// an accelerator with `alpha = -1` has an area-invariant dynamic energy
/// term, which collapses the low-system-power regime into a degenerate
/// tie: the allocation ordering among the accelerators then no longer
/// follows their area efficiencies. Any `beta > 1` in the range restores
/// the expected structure; `1.1` keeps the energy landscape
/// well-conditioned across the whole sweep range.
pub const MULTI_ACCEL_BETA: f64 = 1.1;

/// Five-unit scenario: four fixed-function accelerators (dense matrix
/// multiply, two FFT variants, an option-pricing kernel) plus the CPU,
/// sharing a unit area budget.
///
/// Efficiencies: DMM 39, FFT1024 692, FFT16 2804, BlackScholes 24, CPU 1.
/// The workload runs four equal-time routines and 10% of each routine
/// stays on the CPU, so with the total normalized to 4 the segment times
/// are 0.9 per accelerator and 0.4 for the CPU. Accelerators default to
/// `alpha = -1`, `beta = `[`MULTI_ACCEL_BETA`]; use
/// [`preset_multi_accelerator_with`] for other exponents.
pub fn preset_multi_accelerator() -> Scenario {
    preset_multi_accelerator_with(-1.0, MULTI_ACCEL_BETA)
        .expect("default accelerator exponents are in range")
}

/// [`preset_multi_accelerator`] with explicit accelerator exponents
/// (the CPU keeps `alpha = -0.5`, `beta = 0.875`).
///
/// # Errors
///
/// [`ModelError::ExponentOutOfRange`] when an exponent leaves
/// [`ACCEL_ALPHA_RANGE`] or [`ACCEL_BETA_RANGE`].
pub fn preset_multi_accelerator_with(
    alpha_accel: f64,
    beta_accel: f64,
) -> Result<Scenario, ModelError> {
    check_range("alpha_accel", alpha_accel, ACCEL_ALPHA_RANGE)?;
    check_range("beta_accel", beta_accel, ACCEL_BETA_RANGE)?;
    Ok(Scenario {
        area_budget: 1.0,
        units: vec![
            UnitModel::new("dmm", alpha_accel, beta_accel, 39.0),
            UnitModel::new("fft1024", alpha_accel, beta_accel, 692.0),
            UnitModel::new("fft16", alpha_accel, beta_accel, 2804.0),
            UnitModel::new("black_scholes", alpha_accel, beta_accel, 24.0),
            UnitModel::new("cpu", CPU_ALPHA, CPU_BETA, 1.0),
        ],
        workload: Workload::new(vec![0.9, 0.9, 0.9, 0.9, 0.4]),
        system_power: SystemPowerSpec::Fraction(0.0),
        dynamic_weight: 1.0,
        objective: ObjectiveKind::Energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_model_gamma() {
        let u = UnitModel::new("cpu", -0.5, 0.875, 1.0);
        assert_eq!(u.gamma(), 0.375);
    }

    #[test]
    fn fraction_resolves_against_total_budget() {
        // s / (1 - s): a 50% share doubles nothing (P = P_ref), a 95%
        // share means the system power is 19x the reference.
        let half = SystemPowerSpec::Fraction(0.5);
        assert_eq!(half.absolute(1.0), 1.0);
        let p95 = SystemPowerSpec::Fraction(0.95);
        assert!((p95.absolute(1.0) - 19.0).abs() < 1e-12);
        let abs = SystemPowerSpec::Absolute(7.25);
        assert_eq!(abs.absolute(123.0), 7.25);
        // The resolved value satisfies P / (P + P_ref) = s.
        let s = 0.4;
        let p = SystemPowerSpec::Fraction(s).absolute(2.0);
        assert!((p / (p + 2.0) - s).abs() < 1e-12);
    }

    #[test]
    fn presets_validate_clean() {
        assert!(validate(&preset_hpc(0.5).unwrap()).is_empty());
        assert!(validate(&preset_multi_accelerator()).is_empty());
    }

    #[test]
    fn hpc_preset_splits_workload() {
        let s = preset_hpc(0.5).unwrap();
        assert_eq!(s.workload.times, vec![0.5, 0.5]);
        let s = preset_hpc(0.9).unwrap();
        assert!((s.workload.times[0] - 0.1).abs() < 1e-15);
        assert_eq!(s.workload.times[1], 0.9);
        // The two segment times always sum to one.
        for f in [0.01, 0.3, 0.77, 0.999] {
            let s = preset_hpc(f).unwrap();
            assert!((s.workload.times.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hpc_preset_exponents() {
        let s = preset_hpc(0.5).unwrap();
        assert_eq!((s.units[0].alpha, s.units[0].beta), (-0.5, 0.875));
        assert_eq!((s.units[1].alpha, s.units[1].beta), (-1.0, 1.0));
        assert_eq!(s.area_budget, 1.0);
    }

    #[test]
    fn hpc_preset_rejects_bad_inputs() {
        assert_eq!(preset_hpc(0.0), Err(ModelError::FractionOutOfRange(0.0)));
        assert_eq!(preset_hpc(1.0), Err(ModelError::FractionOutOfRange(1.0)));
        assert!(preset_hpc(-0.25).is_err());
        assert!(matches!(
            preset_hpc_with(0.5, -0.5, 1.0),
            Err(ModelError::ExponentOutOfRange {
                name: "alpha_vpu",
                ..
            })
        ));
        assert!(matches!(
            preset_hpc_with(0.5, -1.0, 1.3),
            Err(ModelError::ExponentOutOfRange {
                name: "beta_vpu",
                ..
            })
        ));
        // All four corners of the supported ranges are accepted.
        for a in [-1.0, -0.75] {
            for b in [1.0, 1.25] {
                assert!(preset_hpc_with(0.5, a, b).is_ok());
            }
        }
    }

    #[test]
    fn multi_accelerator_preset_matches_catalog() {
        let s = preset_multi_accelerator();
        assert_eq!(s.unit_count(), 5);
        let eff: Vec<f64> = s.units.iter().map(|u| u.efficiency).collect();
        assert_eq!(eff, vec![39.0, 692.0, 2804.0, 24.0, 1.0]);
        assert_eq!(s.units[2].name, "fft16");
        assert_eq!(s.units[4].name, "cpu");
        assert_eq!((s.units[4].alpha, s.units[4].beta), (-0.5, 0.875));
        // Four routines, 10% of each on the CPU, total normalized to 4.
        assert_eq!(s.workload.times, vec![0.9, 0.9, 0.9, 0.9, 0.4]);
        let total: f64 = s.workload.times.iter().sum();
        assert!((total - 4.0).abs() < 1e-15);
    }

    #[test]
    fn validate_reports_each_violation() {
        let mut s = preset_hpc(0.5).unwrap();
        s.units[0].alpha = 0.5;
        let v = validate(&s);
        assert_eq!(v.len(), 1, "expected exactly one violation, got {v:?}");
        assert!(v[0].field.contains("alpha"));
        assert!(v[0].rule.contains("negative"));

        let mut s = preset_multi_accelerator();
        s.workload.times.pop();
        let v = validate(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "workload");
        assert!(v[0].rule.contains("does not match unit count"));

        let mut s = preset_hpc(0.5).unwrap();
        s.workload.times = vec![0.0, 0.0];
        let v = validate(&s);
        assert!(v.iter().any(|x| x.rule.contains("at least one segment")));

        let mut s = preset_hpc(0.5).unwrap();
        s.dynamic_weight = 0.5;
        assert!(validate(&s).iter().any(|x| x.field == "w"));

        let mut s = preset_hpc(0.5).unwrap();
        s.system_power = SystemPowerSpec::Fraction(1.0);
        assert!(validate(&s).iter().any(|x| x.field == "system_power"));

        let mut s = preset_hpc(0.5).unwrap();
        s.area_budget = -1.0;
        s.units[1].efficiency = 0.0;
        assert_eq!(validate(&s).len(), 2);
    }

    #[test]
    fn scenario_round_trips_through_json_exactly() {
        let original = preset_multi_accelerator();
        let text = serde_json::to_string_pretty(&original).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(back, original);
        // Efficiency factors survive bit-exactly.
        for (a, b) in back.units.iter().zip(original.units.iter()) {
            assert_eq!(a.efficiency.to_bits(), b.efficiency.to_bits());
        }
    }

    #[test]
    fn scenario_json_shape() {
        let s = preset_hpc(0.5).unwrap();
        let value: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert!(value.get("area_budget").is_some());
        assert_eq!(value["units"][0]["name"], "cpu");
        assert_eq!(value["workload"], serde_json::json!([0.5, 0.5]));
        assert_eq!(value["system_power"]["mode"], "fraction");
        assert_eq!(value["system_power"]["value"], 0.0);
        assert_eq!(value["w"], 1.0);
        assert_eq!(value["objective"], "energy");
    }

    #[test]
    fn scenario_json_defaults_are_optional() {
        let text = r#"{
            "area_budget": 1.0,
            "units": [
                {"name": "cpu", "alpha": -0.5, "beta": 0.875, "efficiency": 1.0}
            ],
            "workload": [1.0],
            "system_power": {"mode": "absolute", "value": 0.25}
        }"#;
        let s: Scenario = serde_json::from_str(text).unwrap();
        assert_eq!(s.dynamic_weight, 1.0);
        assert_eq!(s.objective, ObjectiveKind::Energy);
        assert_eq!(s.p_sys(), 0.25);
    }
}
