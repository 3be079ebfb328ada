//! Concrete instances of `u̇ = J[(1/ε)Mu + ∇H₁(u)]`.
//!
//! A [`Problem`] exposes the linear structure (`J`, `M`, the propagator
//! `e^{τJM}`) and the nonlinear part (`H₁`, `∇H₁`). Everything the two-scale
//! integrators need is derived from these through [`f_tau`].

mod cpd;
mod dense;
mod henon_heiles;
mod nls;

use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::Fft;

pub use cpd::{cpd_energy, cpd_from_canonical, cpd_to_canonical, make_cpd, CpdState};
pub use dense::DenseProblem;
pub use henon_heiles::{make_henon_heiles, HENON_HEILES_U0};
pub use nls::{make_nls, nls_initial_data, NlsProblem};

use crate::error::Result;
use crate::linalg::apply_real;
use crate::spectral::C64;

/// The linear map `e^{τJM}` at a fixed `τ`.
#[derive(Clone)]
pub enum Propagator {
    /// Real dense matrix acting on complex coordinates.
    Dense(DMatrix<f64>),
    /// Diagonal multiplier in a discrete Fourier basis (standard FFT ordering).
    Fourier {
        multiplier: Vec<C64>,
        fft: Arc<dyn Fft<f64>>,
        ifft: Arc<dyn Fft<f64>>,
    },
}

impl Propagator {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            Propagator::Dense(m) => apply_real(m, v),
            Propagator::Fourier {
                multiplier,
                fft,
                ifft,
            } => {
                let n = v.len();
                let mut buf = v.to_vec();
                fft.process(&mut buf);
                let scale = 1.0 / n as f64;
                for (b, m) in buf.iter_mut().zip(multiplier) {
                    *b *= m * scale;
                }
                ifft.process(&mut buf);
                buf
            }
        }
    }
}

/// A highly oscillatory Hamiltonian problem.
///
/// Vectors are complex; real problems keep their iterates real up to
/// rounding and evaluate `H₁` on real parts.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    /// State dimension `D_X`.
    fn dim(&self) -> usize;

    fn is_real(&self) -> bool;

    fn apply_j(&self, u: &[C64]) -> Vec<C64>;

    fn apply_m(&self, u: &[C64]) -> Vec<C64>;

    fn grad_h1(&self, u: &[C64]) -> Result<Vec<C64>>;

    fn h1(&self, u: &[C64]) -> Result<f64>;

    /// `e^{τJM}`.
    fn propagator(&self, tau: f64) -> Propagator;

    /// Real inner product `⟨a, b⟩` on the state space.
    fn inner(&self, a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
    }
}

/// `f_τ(v) = e^{-τJM} J ∇H₁(e^{τJM} v)`.
pub fn f_tau(problem: &dyn Problem, tau: f64, v: &[C64]) -> Result<Vec<C64>> {
    let forward = problem.propagator(tau);
    let backward = problem.propagator(-tau);
    f_tau_with(problem, &forward, &backward, v)
}

/// `f_τ` with the two propagators already built.
pub fn f_tau_with(
    problem: &dyn Problem,
    forward: &Propagator,
    backward: &Propagator,
    v: &[C64],
) -> Result<Vec<C64>> {
    let w = forward.apply(v);
    let g = problem.grad_h1(&w)?;
    Ok(backward.apply(&problem.apply_j(&g)))
}

/// Right-hand side `J[(1/ε)Mu + ∇H₁(u)]` of the original system.
pub fn vector_field(problem: &dyn Problem, u: &[C64], eps: f64) -> Result<Vec<C64>> {
    let mu = problem.apply_m(u);
    let g = problem.grad_h1(u)?;
    let s: Vec<C64> = mu.iter().zip(&g).map(|(m, g)| m / eps + g).collect();
    Ok(problem.apply_j(&s))
}

/// Energy `H`, oscillatory energy `I` and mass `m` of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants {
    pub h: f64,
    pub i: f64,
    pub m: f64,
}

/// `I = ⟨Mu,u⟩/(2ε)`, `H = I + H₁(u)`, `m = ⟨u,u⟩`.
pub fn invariants(problem: &dyn Problem, u: &[C64], eps: f64) -> Result<Invariants> {
    let i = problem.inner(&problem.apply_m(u), u) / (2.0 * eps);
    let h = i + problem.h1(u)?;
    let m = problem.inner(u, u);
    Ok(Invariants { h, i, m })
}

/// Shared handle to a problem.
pub type ProblemRef = Arc<dyn Problem>;

fn real_parts(u: &[C64]) -> Vec<f64> {
    u.iter().map(|z| z.re).collect()
}
