#![allow(dead_code)]

use std::io::Write;

use freqpred::neural::PredictorParams;

/// One result line per criterion. Written straight to the process stderr
/// so it shows up even when the harness captures test output.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "acceptance {id:>2} {verdict} {name}: {detail}");
}

/// Central finite differences of the summed squared error.
pub fn fd_gradient(params: &PredictorParams, batch: &[(&[f64], &[f64])], h: f64) -> Vec<f64> {
    let theta = params.flat();
    let mut probe = params.clone();
    let mut out = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let mut t = theta.clone();
        t[i] = theta[i] + h;
        probe.set_flat(&t);
        let up = probe.loss(batch).unwrap();
        t[i] = theta[i] - h;
        probe.set_flat(&t);
        let down = probe.loss(batch).unwrap();
        out.push((up - down) / (2.0 * h));
    }
    out
}

pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
