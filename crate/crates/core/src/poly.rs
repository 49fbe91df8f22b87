//! Monic polynomial helpers: companion-matrix rooting and expansion from
//! roots. Coefficients are stored highest power first without the leading 1,
//! i.e. `[a1, .., ap]` for `z^p + a1 z^(p-1) + .. + ap`.

use nalgebra::{Complex, DMatrix};

pub(crate) fn roots(monic_tail: &[f64]) -> Vec<Complex<f64>> {
    let p = monic_tail.len();
    if p == 0 {
        return Vec::new();
    }
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for (j, a) in monic_tail.iter().enumerate() {
        companion[(0, j)] = -a;
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Real parts of the coefficients of `prod (z - r)`, leading 1 dropped.
pub(crate) fn from_roots(roots: &[Complex<f64>]) -> Vec<f64> {
    let mut coeffs = vec![Complex::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs[1..].iter().map(|c| c.re).collect()
}
