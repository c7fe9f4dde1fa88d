//! Optimal allocation of a shared chip-area budget among heterogeneous
//! computational units.
//!
//! Each unit runs one workload segment. Giving a unit more area makes its
//! segment faster (inverted speedup `f(a) = a^alpha / e` with `alpha < 0`)
//! but also more power-hungry (dynamic power `p(a) = a^beta` with
//! `beta > 0`). Under a hard total-area constraint `sum(a_i) = A`, this
//! crate computes the allocations that minimize
//!
//! * total delay: `sum(t_i * f_i(a_i))`,
//! * total energy: `sum((p_i(a_i) + P_sys) * f_i(a_i) * t_i)` where
//!   `P_sys` is a constant, area-independent system power, or
//! * a weighted facility variant: `sum((w * p_i(a_i) + P_const) * f_i(a_i) * t_i)`.
//!
//! The optimizers exploit the separable structure: at an interior optimum
//! every unit has the same marginal objective change per unit of area, so
//! the solvers invert per-unit marginals and bisect the shared multiplier.
//! Non-convex corner cases fall back to direct search, and every result
//! can be cross-checked against an exhaustive simplex-grid oracle
//! ([`solver::brute_force_oracle`]) plus a verification report
//! ([`solver::verify`]).
//!
//! The [`sweep`] module reproduces whole design-space studies: how the
//! energy-optimal split shifts as the constant system power grows, and how
//! it approaches the delay-optimal split in the limit.
//!
//! # Example
//!
//! ```
//! use hetalloc::model::preset_hpc;
//! use hetalloc::solver::{solve_energy, SolverSettings};
//!
//! // Two units (CPU + vector unit) splitting a unit area budget.
//! let scenario = preset_hpc(0.5).unwrap();
//! let settings = SolverSettings::for_budget(scenario.area_budget);
//!
//! // Energy-optimal split when constant system power is 19x the budget-
//! // normalized reference power (a 95% system-power share).
//! let result = solve_energy(&scenario, 19.0, &settings).unwrap();
//! let total: f64 = result.areas.iter().sum();
//! assert!((total - scenario.area_budget).abs() < 1e-9);
//! ```

pub mod model;
pub mod objectives;
pub mod solver;
pub mod sweep;

pub use model::{
    preset_hpc, preset_hpc_with, preset_multi_accelerator, preset_multi_accelerator_with, validate,
    ModelError, ObjectiveKind, Scenario, SystemPowerSpec, UnitModel, Violation, Workload,
};
pub use objectives::{
    accel_fn, accel_fn_deriv, datacenter_objective, delay_objective, energy_objective,
    kkt_residual, marginals, objective_value, power_fn, MarginalVector, ObjectiveError,
    ObjectiveSpec,
};
pub use solver::{
    brute_force_oracle, solve, solve_datacenter, solve_delay, solve_energy, solve_two_unit, verify,
    AllocationResult, OracleMode, OracleReport, SolverError, SolverSettings, VerificationReport,
};
pub use sweep::{
    curve_energy_vs_allocation, datacenter_sweep, default_s_grid, limit_check, sweep_psys, Curve,
    CurvePoint, CurveTable, LimitReport, LimitRung, SweepFailure, SweepRow, SweepTable,
};
