//! CSV emission. All tables share the column prefix
//! `s,p_sys,<one column per unit>` and numbers are rendered with 12
//! significant digits in a fixed, locale-independent format, so repeated
//! runs produce byte-identical files.

use hetalloc::{CurveTable, LimitReport, SweepTable};

/// Render with 12 significant digits, shortest-form: trailing zeros
/// dropped, scientific notation only when the decimal exponent is below
/// -5 or at least 12 (mirroring printf's `%g` thresholds at precision 12).
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // 11 fractional digits in scientific form = 12 significant digits.
    let sci = format!("{:.11e}", x);
    let (mantissa, exp_text) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp_text.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 12);
    let trimmed = digits.trim_end_matches('0');
    let trimmed = if trimmed.is_empty() { "1" } else { trimmed };
    let sign = if negative { "-" } else { "" };

    if !(-4..12).contains(&exp) {
        let (head, tail) = trimmed.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    } else if exp >= 0 {
        let int_len = (exp + 1) as usize;
        if trimmed.len() <= int_len {
            let mut body = String::from(trimmed);
            body.push_str(&"0".repeat(int_len - trimmed.len()));
            format!("{sign}{body}")
        } else {
            let (int_part, frac) = trimmed.split_at(int_len);
            format!("{sign}{int_part}.{frac}")
        }
    } else {
        let zeros = (-exp - 1) as usize;
        format!("{sign}0.{}{}", "0".repeat(zeros), trimmed)
    }
}

fn standard_header(unit_names: &[String]) -> String {
    let mut line = String::from("s,p_sys");
    for name in unit_names {
        line.push(',');
        line.push_str(name);
    }
    line.push_str(",objective,residual");
    line
}

fn standard_fields(s: f64, p_sys: f64, areas: &[f64], objective: f64, residual: f64) -> String {
    let mut line = String::new();
    line.push_str(&fmt12(s));
    line.push(',');
    line.push_str(&fmt12(p_sys));
    for &a in areas {
        line.push(',');
        line.push_str(&fmt12(a));
    }
    line.push(',');
    line.push_str(&fmt12(objective));
    line.push(',');
    line.push_str(&fmt12(residual));
    line
}

/// One-row table for a single solve, in the sweep schema.
pub fn solve_csv(
    unit_names: &[String],
    s: f64,
    p_sys: f64,
    areas: &[f64],
    objective: f64,
    residual: f64,
) -> String {
    let mut out = standard_header(unit_names);
    out.push('\n');
    out.push_str(&standard_fields(s, p_sys, areas, objective, residual));
    out.push('\n');
    out
}

/// Sweep table: one row per operating point, the delay reference last.
pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = standard_header(&table.unit_names);
    out.push('\n');
    for row in &table.rows {
        out.push_str(&standard_fields(
            row.s,
            row.p_sys,
            &row.areas,
            row.objective_value,
            row.kkt_residual,
        ));
        out.push('\n');
    }
    out
}

/// Curve table in long form: one row per sampled point, grouped by curve.
pub fn curve_csv(table: &CurveTable) -> String {
    let mut out = format!("s,p_sys,{}_area,normalized_energy\n", table.x_name);
    for curve in &table.curves {
        for point in &curve.points {
            out.push_str(&fmt12(curve.s));
            out.push(',');
            out.push_str(&fmt12(curve.p_sys));
            out.push(',');
            out.push_str(&fmt12(point.area));
            out.push(',');
            out.push_str(&fmt12(point.normalized_energy));
            out.push('\n');
        }
    }
    out
}

/// Limit-check ladder in the sweep schema plus a trailing `gap` column
/// (the sup-norm distance to the delay-optimal allocation).
pub fn limit_csv(
    unit_names: &[String],
    report: &LimitReport,
    p_ref: f64,
    objectives: &[(f64, f64)],
    delay_row: (f64, f64),
) -> String {
    let mut out = standard_header(unit_names);
    out.push_str(",gap\n");
    for (rung, &(objective, residual)) in report.rungs.iter().zip(objectives) {
        let s = rung.p_sys / (rung.p_sys + p_ref);
        out.push_str(&standard_fields(
            s,
            rung.p_sys,
            &rung.areas,
            objective,
            residual,
        ));
        out.push(',');
        out.push_str(&fmt12(rung.gap));
        out.push('\n');
    }
    let (objective, residual) = delay_row;
    out.push_str(&standard_fields(
        f64::INFINITY,
        f64::INFINITY,
        &report.delay_areas,
        objective,
        residual,
    ));
    out.push_str(",0\n");
    out
}

/// Oracle cross-check: the solver's row and the oracle's best grid row,
/// tagged by a trailing `source` column.
pub fn oracle_csv(
    unit_names: &[String],
    s: f64,
    p_sys: f64,
    solver: (&[f64], f64, f64),
    oracle: (&[f64], f64, f64),
) -> String {
    let mut out = standard_header(unit_names);
    out.push_str(",source\n");
    let (areas, objective, residual) = solver;
    out.push_str(&standard_fields(s, p_sys, areas, objective, residual));
    out.push_str(",solver\n");
    let (areas, objective, residual) = oracle;
    out.push_str(&standard_fields(s, p_sys, areas, objective, residual));
    out.push_str(",oracle\n");
    out
}
