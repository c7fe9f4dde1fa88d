//! Self-contained SVG figures (inline attributes only, no external
//! assets): an energy-versus-allocation line chart, an area-share line
//! chart over the constant-power fraction, and a stacked-area chart of
//! the full allocation.

use hetalloc::{CurveTable, SweepTable};
use std::fmt::Write as _;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const FONT: &str = "font-family=\"Helvetica, Arial, sans-serif\" fill=\"#333333\"";

/// Plot region in pixel coordinates (y grows downward in SVG).
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        self.left + t * self.width
    }
    fn y(&self, t: f64) -> f64 {
        self.top + (1.0 - t) * self.height
    }
}

fn open_svg(title: &str, subtitle: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n\
         <text x=\"{:.4}\" y=\"22\" {FONT} font-size=\"15\" font-weight=\"bold\" \
         text-anchor=\"middle\">{title}</text>\n\
         <text x=\"{:.4}\" y=\"38\" {FONT} font-size=\"11\" text-anchor=\"middle\">{subtitle}</text>",
        WIDTH / 2.0,
        WIDTH / 2.0,
    );
    s
}

fn axis_line(s: &mut String, x1: f64, y1: f64, x2: f64, y2: f64) {
    let _ = writeln!(
        s,
        "<line x1=\"{x1:.4}\" y1=\"{y1:.4}\" x2=\"{x2:.4}\" y2=\"{y2:.4}\" \
         stroke=\"#444444\" stroke-width=\"1\"/>"
    );
}

fn tick_label(s: &mut String, x: f64, y: f64, anchor: &str, text: &str) {
    let _ = writeln!(
        s,
        "<text x=\"{x:.4}\" y=\"{y:.4}\" {FONT} font-size=\"10\" \
         text-anchor=\"{anchor}\">{text}</text>"
    );
}

fn axis_title(s: &mut String, x: f64, y: f64, rotate: bool, text: &str) {
    let transform = if rotate {
        format!(" transform=\"rotate(-90 {x:.4} {y:.4})\"")
    } else {
        String::new()
    };
    let _ = writeln!(
        s,
        "<text x=\"{x:.4}\" y=\"{y:.4}\" {FONT} font-size=\"12\" \
         text-anchor=\"middle\"{transform}>{text}</text>"
    );
}

fn polyline(s: &mut String, points: &[(f64, f64)], color: &str, dashed: bool) {
    if points.is_empty() {
        return;
    }
    let mut coords = String::new();
    for &(x, y) in points {
        let _ = write!(coords, "{x:.4},{y:.4} ");
    }
    let dash = if dashed {
        " stroke-dasharray=\"6 4\""
    } else {
        ""
    };
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
        coords.trim_end()
    );
}

fn legend_entry(s: &mut String, x: f64, y: f64, color: &str, dashed: bool, label: &str) {
    let dash = if dashed {
        " stroke-dasharray=\"6 4\""
    } else {
        ""
    };
    let _ = writeln!(
        s,
        "<line x1=\"{x:.4}\" y1=\"{:.4}\" x2=\"{:.4}\" y2=\"{:.4}\" stroke=\"{color}\" \
         stroke-width=\"2\"{dash}/>",
        y - 4.0,
        x + 22.0,
        y - 4.0
    );
    tick_label(s, x + 28.0, y, "start", label);
}

fn short(v: f64) -> String {
    if v.is_infinite() {
        return "delay".into();
    }
    if v == 0.0 {
        return "0".into();
    }
    if v.abs() >= 0.001 && v.abs() < 10000.0 {
        let text = format!("{v:.3}");
        let text = text.trim_end_matches('0').trim_end_matches('.');
        text.to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Normalized energy versus first-unit area, one line per constant-power
/// fraction, log-scaled energy axis, markers at each optimum.
pub fn fig3_curves(table: &CurveTable) -> String {
    let frame = Frame {
        left: 70.0,
        top: 52.0,
        width: WIDTH - 70.0 - 150.0,
        height: HEIGHT - 52.0 - 60.0,
    };
    let a = table.area_budget;
    let y_max = table
        .curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.normalized_energy))
        .fold(1.0f64, f64::max)
        .max(1.5);
    let log_max = y_max.log10();
    let map = |area: f64, e: f64| {
        (
            frame.x(area / a),
            frame.y((e.max(1.0).log10() / log_max).min(1.0)),
        )
    };
    let mut s = open_svg(
        "Energy vs allocation",
        &format!("system: {}", table.scenario_label),
    );
    // Gridless axes with decade ticks on y and quarter ticks on x.
    axis_line(
        &mut s,
        frame.left,
        frame.top,
        frame.left,
        frame.top + frame.height,
    );
    axis_line(
        &mut s,
        frame.left,
        frame.top + frame.height,
        frame.left + frame.width,
        frame.top + frame.height,
    );
    let mut tick = 1.0f64;
    while tick <= y_max * 1.0000001 {
        let (_, y) = map(0.0, tick);
        axis_line(&mut s, frame.left - 4.0, y, frame.left, y);
        tick_label(&mut s, frame.left - 7.0, y + 3.5, "end", &short(tick));
        tick *= 10.0;
    }
    for k in 0..=4 {
        let x = frame.x(k as f64 / 4.0);
        let base = frame.top + frame.height;
        axis_line(&mut s, x, base, x, base + 4.0);
        tick_label(&mut s, x, base + 16.0, "middle", &short(a * k as f64 / 4.0));
    }
    axis_title(
        &mut s,
        frame.left + frame.width / 2.0,
        HEIGHT - 14.0,
        false,
        &format!("area of {}", table.x_name),
    );
    axis_title(
        &mut s,
        22.0,
        frame.top + frame.height / 2.0,
        true,
        "normalized energy (log scale)",
    );
    for (i, curve) in table.curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = curve
            .points
            .iter()
            .map(|p| map(p.area, p.normalized_energy))
            .collect();
        polyline(&mut s, &pts, color, false);
        let (mx, my) = map(curve.argmin_area, 1.0);
        let _ = writeln!(
            s,
            "<circle cx=\"{mx:.4}\" cy=\"{my:.4}\" r=\"4\" fill=\"{color}\" \
             stroke=\"#ffffff\" stroke-width=\"1\"/>"
        );
        legend_entry(
            &mut s,
            frame.left + frame.width + 16.0,
            frame.top + 14.0 + 18.0 * i as f64,
            color,
            false,
            &format!("s = {}", short(curve.s)),
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Area shares versus the constant-power fraction (log x), one line per
/// unit, with the delay-optimal shares as dashed reference lines.
pub fn fig4_lines(table: &SweepTable) -> String {
    let frame = Frame {
        left: 70.0,
        top: 52.0,
        width: WIDTH - 70.0 - 150.0,
        height: HEIGHT - 52.0 - 60.0,
    };
    let finite: Vec<_> = table
        .rows
        .iter()
        .filter(|r| !r.is_delay_reference)
        .collect();
    let reference = table.rows.iter().find(|r| r.is_delay_reference);
    let a_max = table
        .rows
        .iter()
        .flat_map(|r| r.areas.iter().copied())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let (lx_min, lx_max) = match (finite.first(), finite.last()) {
        (Some(first), Some(last)) if last.s > first.s => (first.s.log10(), last.s.log10()),
        (Some(first), _) => (first.s.log10() - 0.5, first.s.log10() + 0.5),
        _ => (-2.0, 0.0),
    };
    let map = |s_val: f64, area: f64| {
        (
            frame.x((s_val.log10() - lx_min) / (lx_max - lx_min)),
            frame.y(area / a_max),
        )
    };
    let mut s = open_svg(
        "Optimal area shares vs constant-power fraction",
        &format!(
            "system: {} | objective: {}",
            table.scenario_label, table.objective_label
        ),
    );
    axis_line(
        &mut s,
        frame.left,
        frame.top,
        frame.left,
        frame.top + frame.height,
    );
    axis_line(
        &mut s,
        frame.left,
        frame.top + frame.height,
        frame.left + frame.width,
        frame.top + frame.height,
    );
    for k in 0..=4 {
        let frac = k as f64 / 4.0;
        let y = frame.y(frac);
        axis_line(&mut s, frame.left - 4.0, y, frame.left, y);
        tick_label(
            &mut s,
            frame.left - 7.0,
            y + 3.5,
            "end",
            &short(a_max * frac),
        );
    }
    for decade in -3..=0 {
        let lx = decade as f64;
        if lx < lx_min - 1e-9 || lx > lx_max + 1e-9 {
            continue;
        }
        let x = frame.x((lx - lx_min) / (lx_max - lx_min));
        let base = frame.top + frame.height;
        axis_line(&mut s, x, base, x, base + 4.0);
        tick_label(&mut s, x, base + 16.0, "middle", &short(10f64.powi(decade)));
    }
    axis_title(
        &mut s,
        frame.left + frame.width / 2.0,
        HEIGHT - 14.0,
        false,
        "constant-power fraction s (log scale)",
    );
    axis_title(
        &mut s,
        22.0,
        frame.top + frame.height / 2.0,
        true,
        "area share",
    );
    for (i, name) in table.unit_names.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = finite.iter().map(|r| map(r.s, r.areas[i])).collect();
        polyline(&mut s, &pts, color, false);
        if let Some(r) = reference {
            let y = frame.y(r.areas[i] / a_max);
            polyline(
                &mut s,
                &[(frame.left, y), (frame.left + frame.width, y)],
                color,
                true,
            );
        }
        legend_entry(
            &mut s,
            frame.left + frame.width + 16.0,
            frame.top + 14.0 + 18.0 * i as f64,
            color,
            false,
            name,
        );
    }
    legend_entry(
        &mut s,
        frame.left + frame.width + 16.0,
        frame.top + 14.0 + 18.0 * table.unit_names.len() as f64,
        "#777777",
        true,
        "delay-optimal",
    );
    s.push_str("</svg>\n");
    s
}

/// Stacked allocation bands across the sweep's operating points, the
/// delay-optimal reference as the final column.
pub fn fig6_stacked(table: &SweepTable) -> String {
    let frame = Frame {
        left: 70.0,
        top: 52.0,
        width: WIDTH - 70.0 - 150.0,
        height: HEIGHT - 52.0 - 70.0,
    };
    let rows = &table.rows;
    let n_cols = rows.len().max(2);
    let budget_max = rows
        .iter()
        .map(|r| r.areas.iter().sum::<f64>())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let x_at = |i: usize| frame.x(i as f64 / (n_cols - 1) as f64);
    let mut s = open_svg(
        "Allocation structure across constant-power fractions",
        &format!(
            "system: {} | objective: {}",
            table.scenario_label, table.objective_label
        ),
    );
    // Cumulative stacks per column.
    let n_units = table.unit_names.len();
    let mut lower = vec![0.0f64; rows.len()];
    for j in 0..n_units {
        let color = PALETTE[j % PALETTE.len()];
        let upper: Vec<f64> = lower
            .iter()
            .zip(rows.iter())
            .map(|(lo, r)| lo + r.areas[j])
            .collect();
        let mut path = String::new();
        for (i, up) in upper.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(path, "{cmd}{:.4} {:.4} ", x_at(i), frame.y(up / budget_max));
        }
        for (i, lo) in lower.iter().enumerate().rev() {
            let _ = write!(path, "L{:.4} {:.4} ", x_at(i), frame.y(lo / budget_max));
        }
        let _ = writeln!(
            s,
            "<path d=\"{}Z\" fill=\"{color}\" fill-opacity=\"0.85\" stroke=\"#ffffff\" \
             stroke-width=\"0.6\"/>",
            path
        );
        legend_entry(
            &mut s,
            frame.left + frame.width + 16.0,
            frame.top + 14.0 + 18.0 * j as f64,
            color,
            false,
            &table.unit_names[j],
        );
        lower = upper;
    }
    // Separate the delay-reference column from the sweep proper.
    if rows.last().is_some_and(|r| r.is_delay_reference) && rows.len() >= 2 {
        let x = 0.5 * (x_at(rows.len() - 2) + x_at(rows.len() - 1));
        let _ = writeln!(
            s,
            "<line x1=\"{x:.4}\" y1=\"{:.4}\" x2=\"{x:.4}\" y2=\"{:.4}\" stroke=\"#333333\" \
             stroke-width=\"1\" stroke-dasharray=\"4 3\"/>",
            frame.top,
            frame.top + frame.height
        );
    }
    axis_line(
        &mut s,
        frame.left,
        frame.top,
        frame.left,
        frame.top + frame.height,
    );
    axis_line(
        &mut s,
        frame.left,
        frame.top + frame.height,
        frame.left + frame.width,
        frame.top + frame.height,
    );
    for k in 0..=4 {
        let frac = k as f64 / 4.0;
        let y = frame.y(frac);
        axis_line(&mut s, frame.left - 4.0, y, frame.left, y);
        tick_label(
            &mut s,
            frame.left - 7.0,
            y + 3.5,
            "end",
            &short(budget_max * frac),
        );
    }
    // Label a handful of columns, always including the last (delay) one.
    let label_step = (rows.len() / 8).max(1);
    for (i, row) in rows.iter().enumerate() {
        if i % label_step != 0 && i != rows.len() - 1 {
            continue;
        }
        let x = x_at(i);
        let base = frame.top + frame.height;
        axis_line(&mut s, x, base, x, base + 4.0);
        let _ = writeln!(
            s,
            "<text x=\"{x:.4}\" y=\"{:.4}\" {FONT} font-size=\"9\" text-anchor=\"end\" \
             transform=\"rotate(-45 {x:.4} {:.4})\">{}</text>",
            base + 16.0,
            base + 16.0,
            short(row.s)
        );
    }
    axis_title(
        &mut s,
        frame.left + frame.width / 2.0,
        HEIGHT - 10.0,
        false,
        "constant-power fraction s",
    );
    axis_title(
        &mut s,
        22.0,
        frame.top + frame.height / 2.0,
        true,
        "stacked area",
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use hetalloc::{
        curve_energy_vs_allocation, preset_hpc, preset_multi_accelerator, sweep_psys,
        SolverSettings,
    };

    #[test]
    fn figures_are_self_contained_svg() {
        let settings = SolverSettings::default();
        let hpc = preset_hpc(0.5).unwrap();
        let multi = preset_multi_accelerator();
        let sweep2 = sweep_psys(&hpc, &[0.02, 0.1, 0.4, 0.95], &settings).unwrap();
        let sweep5 = sweep_psys(&multi, &[0.02, 0.1, 0.4, 0.95], &settings).unwrap();
        let curves = curve_energy_vs_allocation(&hpc, &[0.02, 0.95], 32, &settings).unwrap();
        for svg in [
            fig3_curves(&curves),
            fig4_lines(&sweep2),
            fig6_stacked(&sweep5),
        ] {
            assert!(svg.starts_with("<svg"), "must open with an svg tag");
            assert!(svg.trim_end().ends_with("</svg>"));
            assert!(
                !svg.contains("http://") || svg.contains("xmlns"),
                "no external refs"
            );
            assert!(!svg.contains("href"), "no external assets");
            assert!(svg.contains("polyline") || svg.contains("path"));
        }
    }

    #[test]
    fn short_labels_are_compact() {
        assert_eq!(short(0.02), "0.02");
        assert_eq!(short(0.005), "0.005");
        assert_eq!(short(f64::INFINITY), "delay");
        assert_eq!(short(10.0), "10");
        assert_eq!(short(1e-6), "1.0e-6");
    }
}
