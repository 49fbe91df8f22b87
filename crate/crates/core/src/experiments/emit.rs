//! CSV tables and SVG line plots for sweep results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{ExperimentResult, TrialRow};
use crate::error::{Error, Result};

pub const AGGREGATES_HEADER: &str = "method,sweep_var,value,mean_nmse_db,trials,failures";
pub const TRIALS_HEADER: &str = "method,sweep_var,value,trial,snr_db,delta,nmse_linear,failure";

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn trial_line(out: &mut String, sweep_var: &str, t: &TrialRow) {
    let delta = t.delta.map(|d| d.to_string()).unwrap_or_default();
    let (nmse, failure) = match &t.outcome {
        Ok(v) => (v.to_string(), String::new()),
        Err(e) => (String::new(), field(e)),
    };
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        field(&t.method),
        sweep_var,
        t.value,
        t.trial,
        t.snr_db,
        delta,
        nmse,
        failure
    );
}

/// One row per (method, sweep value, trial). Floats use shortest
/// round-trip formatting, so the table reproduces the aggregates exactly.
pub fn trials_csv(result: &ExperimentResult) -> String {
    let mut out = format!("{TRIALS_HEADER}\n");
    for t in &result.trials {
        trial_line(&mut out, &result.sweep_var, t);
    }
    out
}

pub fn aggregates_csv(result: &ExperimentResult) -> String {
    let mut out = format!("{AGGREGATES_HEADER}\n");
    for a in &result.aggregates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            field(&a.method),
            result.sweep_var,
            a.value,
            a.mean_nmse_db,
            a.trials,
            a.failures
        );
    }
    out
}

fn x_label(sweep_var: &str) -> &str {
    match sweep_var {
        "snr_db" => "SNR (dB)",
        "delta" => "Δ (cycles/sample)",
        other => other,
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..=5).map(|i| lo + (hi - lo) * i as f64 / 5.0).collect()
}

fn padded_range(values: impl Iterator<Item = f64>, pad: f64) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-12 {
        return Some((lo - 1.0, hi + 1.0));
    }
    let p = (hi - lo) * pad;
    Some((lo - p, hi + p))
}

/// Mean NMSE (dB) against the sweep variable, one line per method.
/// `None` when there is nothing finite to draw.
pub fn plot_svg(result: &ExperimentResult) -> Option<String> {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 170.0, 30.0, 60.0);
    let finite = || result.aggregates.iter().filter(|a| a.mean_nmse_db.is_finite());
    let (x0, x1) = padded_range(finite().map(|a| a.value), 0.0)?;
    let (y0, y1) = padded_range(finite().map(|a| a.mean_nmse_db), 0.05)?;
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| top + (y1 - y) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<title>{}</title>"#, result.name);
    let (bx, by, bw, bh) = (left, top, w - left - right, h - top - bottom);
    let _ = writeln!(s, r#"<rect x="{bx}" y="{by}" width="{bw}" height="{bh}" fill="none" stroke="black"/>"#);
    for t in ticks(x0, x1) {
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            by + bh,
            by + bh + 5.0,
            by + bh + 18.0,
            tick_label(t)
        );
    }
    for t in ticks(y0, y1) {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{bx:.2}" y2="{y:.2}" stroke="black"/><line x1="{bx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{:.1}</text>"##,
            bx - 5.0,
            bx + bw,
            bx - 8.0,
            y + 4.0,
            t
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        bx + bw / 2.0,
        h - 15.0,
        x_label(&result.sweep_var)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">NMSE (dB)</text>"#,
        by + bh / 2.0,
        by + bh / 2.0
    );

    let mut methods: Vec<&str> = Vec::new();
    for a in &result.aggregates {
        if !methods.contains(&a.method.as_str()) {
            methods.push(&a.method);
        }
    }
    for (i, method) in methods.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = finite()
            .filter(|a| a.method == *method)
            .map(|a| (px(a.value), py(a.mean_nmse_db)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, path.join(" "));
        for (x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = w - right + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(method)
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 1.0 || v == 0.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.4}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Write `trials.csv`, `aggregates.csv` and, if there is data,
/// `<name>.svg` into `out_dir`. Returns the written paths.
pub fn emit(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = vec![
        (out_dir.join("trials.csv"), trials_csv(result)),
        (out_dir.join("aggregates.csv"), aggregates_csv(result)),
    ];
    if let Some(svg) = plot_svg(result) {
        files.push((out_dir.join(format!("{}.svg", result.name)), svg));
    }
    for (path, body) in &files {
        std::fs::write(path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
