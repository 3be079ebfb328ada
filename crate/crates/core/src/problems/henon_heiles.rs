use nalgebra::{DMatrix, DVector};

use super::DenseProblem;
use crate::linalg::canonical_j;
use crate::spectral::C64;

/// Default initial value `(q₁, q₂, p₁, p₂) = (0.12, 0.12, 0.12, 0.12)`.
pub const HENON_HEILES_U0: [f64; 4] = [0.12, 0.12, 0.12, 0.12];

/// Hénon–Heiles with `M = diag(1, 0, 1, 0)` and
/// `H₁ = q₂²/2 + p₂²/2 + q₁²q₂ − q₂³/3`, state `(q₁, q₂, p₁, p₂)`.
pub fn make_henon_heiles() -> DenseProblem {
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]));
    DenseProblem::new(
        "henon_heiles",
        canonical_j(2),
        m,
        |u| {
            let (q1, q2, p2) = (u[0], u[1], u[3]);
            Ok(vec![
                2.0 * q1 * q2,
                q2 + q1 * q1 - q2 * q2,
                C64::new(0.0, 0.0),
                p2,
            ])
        },
        |u| {
            let (q1, q2, p2) = (u[0], u[1], u[3]);
            Ok(0.5 * q2 * q2 + 0.5 * p2 * p2 + q1 * q1 * q2 - q2 * q2 * q2 / 3.0)
        },
    )
    .expect("valid shapes")
    // rotation in the (q₁, p₁) plane, identity on (q₂, p₂)
    .with_propagator(|tau| {
        let (s, c) = tau.sin_cos();
        let mut e = DMatrix::identity(4, 4);
        e[(0, 0)] = c;
        e[(0, 2)] = s;
        e[(2, 0)] = -s;
        e[(2, 2)] = c;
        e
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm;
    use crate::problems::{f_tau, invariants, Problem};
    use std::f64::consts::PI;

    fn u0() -> Vec<C64> {
        HENON_HEILES_U0.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn h1_at_default_data() {
        let p = make_henon_heiles();
        assert!((p.h1(&u0()).unwrap() - 0.015552).abs() < 1e-15);
    }

    #[test]
    fn m_projects_oscillator_coordinates() {
        let p = make_henon_heiles();
        let u: Vec<C64> = [1.0, 2.0, 3.0, 4.0].iter().map(|&x| C64::new(x, 0.0)).collect();
        let mu = p.apply_m(&u);
        let want = [1.0, 0.0, 3.0, 0.0];
        for (a, b) in mu.iter().zip(want) {
            assert_eq!(a.re, b);
        }
    }

    #[test]
    fn f_tau_at_zero() {
        let p = make_henon_heiles();
        let f = f_tau(&p, 0.0, &u0()).unwrap();
        let want = [0.0, 0.12, -0.0288, -0.12];
        for (a, b) in f.iter().zip(want) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn closed_form_matches_expm() {
        let p = make_henon_heiles();
        for &t in &[0.1, PI / 2.0, 3.0, 2.0 * PI, -1.3] {
            let oracle = expm(&(p.jm() * t));
            assert!((p.propagator_matrix(t) - oracle).amax() < 1e-13, "t={t}");
        }
        let e = p.propagator_matrix(PI / 2.0);
        // (1,0,0,0) rotates into -p₁ within the oscillator plane
        assert!((e[(0, 0)]).abs() < 1e-15 && (e[(2, 0)] + 1.0).abs() < 1e-15);
        assert!((p.propagator_matrix(2.0 * PI) - DMatrix::identity(4, 4)).amax() < 1e-12);
    }

    #[test]
    fn invariants_at_default_data() {
        let p = make_henon_heiles();
        let inv = invariants(&p, &u0(), 1.0).unwrap();
        assert!((inv.i - 0.0144).abs() < 1e-15);
        assert!((inv.m - 0.0576).abs() < 1e-15);
        assert!((inv.h - 0.029952).abs() < 1e-15);
    }
}
