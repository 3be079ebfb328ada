//! Two-dimensional charged-particle dynamics in a strong uniform magnetic field,
//!
//! ```text
//! ẋ = v,   v̇ = Bv/ε − ∇U(x),   U(x) = 1/|x|,   B = [[0, 1], [-1, 0]],
//! ```
//!
//! rewritten canonically through `q = x`, `p = 2εv − Bx`. The slow part
//! `H₁ = 2εU(q)` depends on `ε`, so the problem is built per `ε`.

use nalgebra::DMatrix;

use super::DenseProblem;
use crate::error::{Error, Result};
use crate::linalg::canonical_j;
use crate::spectral::C64;

/// Below this radius the potential is treated as singular.
const MIN_RADIUS: f64 = 1e-8;

/// Physical state `(x, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpdState {
    pub x: [f64; 2],
    pub v: [f64; 2],
}

impl CpdState {
    /// Default initial value `x = (0.8, 0.9)`, `v = (0.5, 0.6)`.
    pub const DEFAULT: CpdState = CpdState {
        x: [0.8, 0.9],
        v: [0.5, 0.6],
    };
}

/// `B x` with `B = [[0, 1], [-1, 0]]`.
fn apply_b(x: [f64; 2]) -> [f64; 2] {
    [x[1], -x[0]]
}

/// `(q, p) = (x, 2εv − Bx)`.
pub fn cpd_to_canonical(s: &CpdState, eps: f64) -> ([f64; 2], [f64; 2]) {
    let bx = apply_b(s.x);
    (s.x, [2.0 * eps * s.v[0] - bx[0], 2.0 * eps * s.v[1] - bx[1]])
}

/// `x = q`, `v = (p + Bq)/(2ε)`.
pub fn cpd_from_canonical(q: [f64; 2], p: [f64; 2], eps: f64) -> CpdState {
    let bq = apply_b(q);
    CpdState {
        x: q,
        v: [(p[0] + bq[0]) / (2.0 * eps), (p[1] + bq[1]) / (2.0 * eps)],
    }
}

/// `E(x, v) = |v|²/2 + U(x)`.
pub fn cpd_energy(s: &CpdState) -> Result<f64> {
    let r = s.x[0].hypot(s.x[1]);
    check_radius(r)?;
    Ok(0.5 * (s.v[0] * s.v[0] + s.v[1] * s.v[1]) + 1.0 / r)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r >= MIN_RADIUS) {
        return Err(Error::Domain(format!(
            "|q| = {r:e} is at the singularity of U(q) = 1/|q|"
        )));
    }
    Ok(())
}

/// Canonical CPD problem with `J` standard and `M = ½[[I, −B], [B, I]]`.
pub fn make_cpd(eps: f64) -> Result<DenseProblem> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 1], got {eps}")));
    }
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        0.5,  0.0,  0.0, -0.5,
        0.0,  0.5,  0.5,  0.0,
        0.0,  0.5,  0.5,  0.0,
       -0.5,  0.0,  0.0,  0.5,
    ]);
    let two_eps = 2.0 * eps;
    DenseProblem::new(
        "cpd",
        canonical_j(2),
        m,
        move |u| {
            let (q1, q2) = (u[0], u[1]);
            check_radius(q1.re.hypot(q2.re))?;
            // ∇U(q) = −q / |q|³, continued analytically off the real axis
            let r2 = q1 * q1 + q2 * q2;
            let r3 = r2 * r2.sqrt();
            let zero = C64::new(0.0, 0.0);
            Ok(vec![-two_eps * q1 / r3, -two_eps * q2 / r3, zero, zero])
        },
        move |u| {
            let r = u[0].hypot(u[1]);
            check_radius(r)?;
            Ok(two_eps / r)
        },
    )
}
