//! Cubic Schrödinger equation `i∂ₜu = −(1/ε)∂ₓ²u + |u|²u` on the torus
//! `[0, 2π)`, discretized on `n_x` equispaced points.
//!
//! In the generic form `J = −i`, `M = −∂ₓ²` (multiplier `k²`),
//! `H₁ = ¼∫|u|⁴`, `∇H₁ = |u|²u`, with the inner product
//! `⟨a, b⟩ = Δx · Re Σ conj(a) b`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::{Problem, Propagator};
use crate::error::{Error, Result};
use crate::spectral::C64;

pub struct NlsProblem {
    n_x: usize,
    dx: f64,
    /// `k²` in standard FFT ordering.
    k2: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for NlsProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NlsProblem").field("n_x", &self.n_x).finish()
    }
}

/// Cubic NLS on an `n_x`-point grid.
pub fn make_nls(n_x: usize) -> Result<NlsProblem> {
    if n_x < 4 || n_x % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "n_x must be even and >= 4, got {n_x}"
        )));
    }
    let mut planner = FftPlanner::new();
    let k2 = (0..n_x)
        .map(|i| {
            let k = if i < n_x / 2 { i as f64 } else { i as f64 - n_x as f64 };
            k * k
        })
        .collect();
    Ok(NlsProblem {
        n_x,
        dx: 2.0 * PI / n_x as f64,
        k2,
        fft: planner.plan_fft_forward(n_x),
        ifft: planner.plan_fft_inverse(n_x),
    })
}

/// `u₀(x) = (cos x + i sin x)/(1 + sin²x)` on the grid.
pub fn nls_initial_data(n_x: usize) -> Vec<C64> {
    (0..n_x)
        .map(|j| {
            let x = 2.0 * PI * j as f64 / n_x as f64;
            C64::new(x.cos(), x.sin()) / (1.0 + x.sin().powi(2))
        })
        .collect()
}

impl NlsProblem {
    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// `k²` per FFT index.
    pub fn wavenumbers_squared(&self) -> &[f64] {
        &self.k2
    }

    /// Multiply x-mode `k` by `mult(k²)`.
    pub fn fourier_multiplier(&self, mult: impl Fn(f64) -> C64) -> Propagator {
        Propagator::Fourier {
            multiplier: self.k2.iter().map(|&k2| mult(k2)).collect(),
            fft: Arc::clone(&self.fft),
            ifft: Arc::clone(&self.ifft),
        }
    }

    pub(crate) fn fft(&self) -> &Arc<dyn Fft<f64>> {
        &self.fft
    }

    pub(crate) fn ifft(&self) -> &Arc<dyn Fft<f64>> {
        &self.ifft
    }
}

impl Problem for NlsProblem {
    fn name(&self) -> &str {
        "nls"
    }

    fn dim(&self) -> usize {
        self.n_x
    }

    fn is_real(&self) -> bool {
        false
    }

    fn apply_j(&self, u: &[C64]) -> Vec<C64> {
        u.iter().map(|z| C64::new(z.im, -z.re)).collect()
    }

    fn apply_m(&self, u: &[C64]) -> Vec<C64> {
        self.fourier_multiplier(|k2| C64::new(k2, 0.0)).apply(u)
    }

    fn grad_h1(&self, u: &[C64]) -> Result<Vec<C64>> {
        Ok(u.iter().map(|z| z.norm_sqr() * z).collect())
    }

    fn h1(&self, u: &[C64]) -> Result<f64> {
        Ok(0.25 * self.dx * u.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>())
    }

    /// `e^{τJM}`: x-mode `k` times `e^{−iτk²}`.
    fn propagator(&self, tau: f64) -> Propagator {
        // k² is an integer, so reducing τ first keeps the phase accurate
        let tau = tau.rem_euclid(2.0 * PI);
        self.fourier_multiplier(|k2| C64::from_polar(1.0, -tau * k2))
    }

    fn inner(&self, a: &[C64], b: &[C64]) -> f64 {
        self.dx * a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{f_tau, invariants};

    #[test]
    fn rejects_bad_grid() {
        assert!(make_nls(3).is_err());
        assert!(make_nls(5).is_err());
    }

    #[test]
    fn zero_field() {
        let p = make_nls(8).unwrap();
        let z = vec![C64::new(0.0, 0.0); 8];
        assert!(f_tau(&p, 0.7, &z).unwrap().iter().all(|w| w.norm() == 0.0));
    }

    #[test]
    fn constant_field() {
        let p = make_nls(8).unwrap();
        let c = C64::new(0.6, -0.3);
        let v = vec![c; 8];
        let want = C64::new(0.0, -1.0) * c.norm_sqr() * c;
        for &t in &[0.0, 0.4, 3.0] {
            for z in f_tau(&p, t, &v).unwrap() {
                assert!((z - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn plane_wave_is_periodic_in_tau() {
        let p = make_nls(16).unwrap();
        let v: Vec<C64> = (0..16).map(|j| C64::from_polar(1.0, p.dx() * j as f64)).collect();
        let f0 = f_tau(&p, 0.0, &v).unwrap();
        let f2pi = f_tau(&p, 2.0 * PI, &v).unwrap();
        for j in 0..16 {
            let want = C64::new(0.0, -1.0) * v[j];
            assert!((f0[j] - want).norm() < 1e-14);
            assert!((f2pi[j] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn mass_invariant_under_linear_flow() {
        let p = make_nls(16).unwrap();
        let u = nls_initial_data(16);
        let m0 = invariants(&p, &u, 0.1).unwrap().m;
        for &t in &[0.3, 1.7, 5.0] {
            let w = p.propagator(t).apply(&u);
            let m = invariants(&p, &w, 0.1).unwrap().m;
            assert!((m - m0).abs() < 1e-12 * m0);
        }
    }
}
