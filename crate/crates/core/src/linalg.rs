//! Small dense linear algebra used by the finite-dimensional problems.

use nalgebra::DMatrix;

use crate::spectral::C64;

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let norm = a
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    // scale so that ‖A / 2^s‖ ≤ 1/2
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a / 2f64.powi(s);
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    // (1/2)^20 / 20! is far below machine precision
    for k in 1..=20 {
        term = &term * &scaled / k as f64;
        result += &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// `y = A x` for a real matrix acting on a complex vector.
pub fn apply_real(a: &DMatrix<f64>, x: &[C64]) -> Vec<C64> {
    debug_assert_eq!(a.ncols(), x.len());
    (0..a.nrows())
        .map(|i| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                acc += a[(i, j)] * xj;
            }
            acc
        })
        .collect()
}

/// Canonical symplectic matrix `[[0, I], [-I, 0]]` of size `2d`.
pub fn canonical_j(d: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        j[(i, d + i)] = 1.0;
        j[(d + i, i)] = -1.0;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(expm(&z), DMatrix::identity(3, 3));
    }

    #[test]
    fn expm_rotation_closed_form() {
        let j = canonical_j(1);
        for &t in &[0.3, PI / 2.0, 2.0 * PI, 17.0] {
            let e = expm(&(&j * t));
            let want = DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
            assert!((e - want).amax() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn expm_agrees_with_nalgebra() {
        let a = DMatrix::from_row_slice(3, 3, &[0.1, -2.0, 0.3, 1.5, 0.0, 0.7, -0.4, 0.2, -0.3]);
        let ours = expm(&a);
        let theirs = a.clone().exp();
        assert!((ours - theirs).amax() < 1e-12);
    }
}
