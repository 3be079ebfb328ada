//! Fourier algebra in the fast variable `τ ∈ [0, 2π)`.
//!
//! Grid values are stored node-major (`values[j * dim + c]`). Spectral
//! coefficients are stored for every mode `ℓ = -N/2 ..= N/2`, i.e. `N + 1`
//! modes, with the two endpoint modes `±N/2` carrying the full Nyquist
//! amplitude and entering every sum with weight `1/2`. All operators
//! (`e^{-s∂τ/ε}`, `φ_k`, `Π`, `𝒜`) are diagonal in this representation, and
//! the two endpoint halves are only merged again when evaluating on the grid.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::phase::Angle;

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Uniform collocation grid on the fast torus.
#[derive(Clone)]
pub struct TauGrid {
    n_tau: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TauGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TauGrid").field("n_tau", &self.n_tau).finish()
    }
}

impl PartialEq for TauGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n_tau == other.n_tau
    }
}

impl TauGrid {
    pub fn new(n_tau: usize) -> Result<Self> {
        if n_tau < 4 || n_tau % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "n_tau must be even and >= 4, got {n_tau}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n_tau,
            fft: planner.plan_fft_forward(n_tau),
            ifft: planner.plan_fft_inverse(n_tau),
        })
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n_tau as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_tau).map(|j| self.node(j)).collect()
    }

    /// Highest mode `N/2`.
    pub fn max_mode(&self) -> i64 {
        (self.n_tau / 2) as i64
    }

    /// Integer frequencies `-N/2 ..= N/2`.
    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let m = self.max_mode();
        -m..=m
    }

    /// Coefficients of the trigonometric interpolant of `values`.
    pub fn dft(&self, values: &GridValues) -> Result<SpectralCoeffs> {
        if values.n_tau != self.n_tau {
            return Err(Error::InvalidInput(format!(
                "expected {} grid values, got {}",
                self.n_tau, values.n_tau
            )));
        }
        let n = self.n_tau;
        let dim = values.dim;
        let half = n / 2;
        let scale = 1.0 / n as f64;
        let mut out = SpectralCoeffs::zeros(n, dim);
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for c in 0..dim {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = values.data[j * dim + c];
            }
            self.fft.process(&mut buf);
            for k in 0..n {
                let amp = buf[k] * scale;
                if k == half {
                    out.data[c] = amp; // ℓ = -N/2
                    out.data[n * dim + c] = amp; // ℓ = +N/2
                } else {
                    let ell = if k < half { k as i64 } else { k as i64 - n as i64 };
                    out.data[(ell + half as i64) as usize * dim + c] = amp;
                }
            }
        }
        Ok(out)
    }

    /// Values of the interpolant at the grid nodes.
    pub fn idft(&self, coeffs: &SpectralCoeffs) -> GridValues {
        assert_eq!(coeffs.n_tau, self.n_tau, "coefficient grid mismatch");
        let n = self.n_tau;
        let dim = coeffs.dim;
        let half = n / 2;
        let mut out = GridValues::zeros(n, dim);
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for c in 0..dim {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = if k == half {
                    0.5 * (coeffs.data[c] + coeffs.data[n * dim + c])
                } else {
                    let ell = if k < half { k as i64 } else { k as i64 - n as i64 };
                    coeffs.data[(ell + half as i64) as usize * dim + c]
                };
            }
            self.ifft.process(&mut buf);
            for (j, b) in buf.iter().enumerate() {
                out.data[j * dim + c] = *b;
            }
        }
        out
    }

    /// Constant field `v` at every node.
    pub fn constant(&self, v: &[C64]) -> GridValues {
        GridValues::from_fn(self.n_tau, v.len(), |_, c| v[c])
    }
}

/// Values of a vector-valued function at the `N_τ` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridValues {
    n_tau: usize,
    dim: usize,
    data: Vec<C64>,
}

impl GridValues {
    pub fn zeros(n_tau: usize, dim: usize) -> Self {
        Self {
            n_tau,
            dim,
            data: vec![C64::new(0.0, 0.0); n_tau * dim],
        }
    }

    pub fn from_fn(n_tau: usize, dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n_tau * dim);
        for j in 0..n_tau {
            for c in 0..dim {
                data.push(f(j, c));
            }
        }
        Self { n_tau, dim, data }
    }

    /// Build from one state vector per node.
    pub fn from_nodes(nodes: &[Vec<C64>]) -> Result<Self> {
        let dim = nodes.first().map_or(0, Vec::len);
        if nodes.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidInput("ragged grid values".into()));
        }
        Ok(Self {
            n_tau: nodes.len(),
            dim,
            data: nodes.concat(),
        })
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, j: usize) -> &[C64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn node_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: C64, other: &GridValues) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    /// `a * x + b * y`.
    pub fn lincomb(a: f64, x: &GridValues, b: f64, y: &GridValues) -> GridValues {
        debug_assert_eq!(x.data.len(), y.data.len());
        GridValues {
            n_tau: x.n_tau,
            dim: x.dim,
            data: x
                .data
                .iter()
                .zip(&y.data)
                .map(|(u, v)| a * u + b * v)
                .collect(),
        }
    }

    /// Sup over nodes of the Euclidean distance between node vectors.
    pub fn sup_distance(&self, other: &GridValues) -> f64 {
        (0..self.n_tau)
            .map(|j| {
                self.node(j)
                    .iter()
                    .zip(other.node(j))
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Sup over nodes of the Euclidean norm.
    pub fn sup_norm(&self) -> f64 {
        (0..self.n_tau)
            .map(|j| self.node(j).iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest imaginary part over all entries.
    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// Order of a φ-function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhiOrder {
    One,
    Two,
}

impl TryFrom<u8> for PhiOrder {
    type Error = Error;

    fn try_from(k: u8) -> Result<Self> {
        match k {
            1 => Ok(PhiOrder::One),
            2 => Ok(PhiOrder::Two),
            _ => Err(Error::InvalidInput(format!("phi order must be 1 or 2, got {k}"))),
        }
    }
}

/// `φ_k(iθ)` for real `θ`.
pub fn phi(k: PhiOrder, theta: f64) -> C64 {
    phi_at(k, Angle::new(theta))
}

/// `φ_k(iθ)` where `θ` is given with its reduced representative.
pub(crate) fn phi_at(k: PhiOrder, theta: Angle) -> C64 {
    match k {
        PhiOrder::One => phi1_at(theta),
        PhiOrder::Two => {
            let x = theta.full;
            if x.abs() < 1e-3 {
                // Σ_{j<6} (ix)^j / (j+2)!
                let z = I * x;
                let mut term = C64::new(0.5, 0.0);
                let mut sum = term;
                for j in 1..6 {
                    term = term * z / (j as f64 + 2.0);
                    sum += term;
                }
                sum
            } else {
                (phi1_at(theta) - 1.0) / (I * x)
            }
        }
    }
}

/// `φ₁(iθ) = e^{iθ/2} sinc(θ/2)`.
fn phi1_at(theta: Angle) -> C64 {
    let half = 0.5 * theta.full;
    if half == 0.0 {
        return C64::new(1.0, 0.0);
    }
    let half_wrapped = 0.5 * theta.wrapped;
    let sinc = if half.abs() < 1e-4 {
        1.0 - half * half / 6.0
    } else {
        half_wrapped.sin() / half
    };
    C64::from_polar(1.0, half_wrapped) * sinc
}

/// Fourier coefficients `Û_ℓ`, `ℓ = -N/2 ..= N/2`, each a state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    n_tau: usize,
    dim: usize,
    data: Vec<C64>,
}

impl SpectralCoeffs {
    pub fn zeros(n_tau: usize, dim: usize) -> Self {
        Self {
            n_tau,
            dim,
            data: vec![C64::new(0.0, 0.0); (n_tau + 1) * dim],
        }
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn max_mode(&self) -> i64 {
        (self.n_tau / 2) as i64
    }

    fn index(&self, ell: i64) -> usize {
        let m = self.max_mode();
        assert!((-m..=m).contains(&ell), "mode {ell} out of range");
        (ell + m) as usize * self.dim
    }

    pub fn mode(&self, ell: i64) -> &[C64] {
        let i = self.index(ell);
        &self.data[i..i + self.dim]
    }

    pub fn mode_mut(&mut self, ell: i64) -> &mut [C64] {
        let i = self.index(ell);
        let d = self.dim;
        &mut self.data[i..i + d]
    }

    /// Weight of mode `ℓ` in the interpolant (1/2 at the endpoints).
    pub fn weight(&self, ell: i64) -> f64 {
        if ell.abs() == self.max_mode() {
            0.5
        } else {
            1.0
        }
    }

    /// Multiply each mode by `mult(ℓ)`.
    ///
    /// The endpoint amplitude is one coefficient of the underlying `N`-point
    /// transform, so both stored halves get the standard-ordering symbol
    /// `mult(−N/2)`. This keeps them equal and every unimodular multiplier
    /// exactly invertible.
    pub fn apply_multiplier(&mut self, mut mult: impl FnMut(i64) -> C64) {
        let m = self.max_mode();
        let d = self.dim;
        let mut endpoint = C64::new(0.0, 0.0);
        for (i, ell) in (-m..=m).enumerate() {
            let s = if ell == m { endpoint } else { mult(ell) };
            if ell == -m {
                endpoint = s;
            }
            for z in &mut self.data[i * d..(i + 1) * d] {
                *z *= s;
            }
        }
    }

    /// `e^{-s∂τ/ε}`: mode `ℓ` times `e^{-iℓ s/ε}`.
    pub fn apply_exp_shift(&mut self, s_over_eps: f64) {
        self.apply_exp_shift_angle(Angle::new(s_over_eps));
    }

    pub(crate) fn apply_exp_shift_angle(&mut self, theta: Angle) {
        self.apply_multiplier(|ell| C64::from_polar(1.0, -(ell as f64) * theta.wrapped));
    }

    /// `φ_k(-s∂τ/ε)`: mode `ℓ` times `φ_k(-iℓ s/ε)`.
    pub fn apply_phi(&mut self, k: PhiOrder, s_over_eps: f64) {
        self.apply_phi_angle(k, Angle::new(s_over_eps));
    }

    pub(crate) fn apply_phi_angle(&mut self, k: PhiOrder, theta: Angle) {
        self.apply_multiplier(|ell| phi_at(k, theta.scaled(-ell)));
    }

    /// `Π`: the τ-mean, i.e. `Û₀`.
    pub fn average_pi(&self) -> Vec<C64> {
        self.mode(0).to_vec()
    }

    /// `𝒜 = L⁻¹(I − Π)`: the zero-mean antiderivative.
    pub fn antiderivative(&self) -> SpectralCoeffs {
        let mut out = self.clone();
        out.apply_multiplier(|ell| {
            if ell == 0 {
                C64::new(0.0, 0.0)
            } else {
                1.0 / (I * ell as f64)
            }
        });
        out
    }

    /// `L = ∂τ`: mode `ℓ` times `iℓ`.
    pub fn derivative(&self) -> SpectralCoeffs {
        let mut out = self.clone();
        out.apply_multiplier(|ell| I * ell as f64);
        out
    }

    /// The interpolant at an arbitrary `τ`.
    pub fn eval_at_tau(&self, tau: f64) -> Vec<C64> {
        let tau = tau.rem_euclid(2.0 * PI);
        let m = self.max_mode();
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for ell in -m..=m {
            let w = self.weight(ell) * C64::from_polar(1.0, ell as f64 * tau);
            for (o, z) in out.iter_mut().zip(self.mode(ell)) {
                *o += w * z;
            }
        }
        out
    }

    /// Weighted `ℓ²` norm of the coefficient array.
    pub fn norm(&self) -> f64 {
        let m = self.max_mode();
        (-m..=m)
            .map(|ell| self.weight(ell) * self.mode(ell).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, a: C64) {
        for z in &mut self.data {
            *z *= a;
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: C64, other: &SpectralCoeffs) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(TauGrid::new(7).is_err());
        assert!(TauGrid::new(2).is_err());
        let g = TauGrid::new(8).unwrap();
        let nodes = g.nodes();
        assert_eq!(nodes[0], 0.0);
        for w in nodes.windows(2) {
            assert!((w[1] - w[0] - g.spacing()).abs() < 1e-15);
        }
    }

    #[test]
    fn dft_length_mismatch() {
        let g = TauGrid::new(8).unwrap();
        let v = GridValues::zeros(6, 2);
        assert!(matches!(g.dft(&v), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn dft_of_constant() {
        let g = TauGrid::new(8).unwrap();
        let v = g.constant(&[c(1.5, 0.0), c(-2.0, 0.5)]);
        let co = g.dft(&v).unwrap();
        assert!((co.mode(0)[0] - c(1.5, 0.0)).norm() < 1e-15);
        assert!((co.mode(0)[1] - c(-2.0, 0.5)).norm() < 1e-15);
        for ell in g.modes().filter(|&l| l != 0) {
            assert!(co.mode(ell).iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn dft_of_pure_mode() {
        let g = TauGrid::new(16).unwrap();
        let v = GridValues::from_fn(16, 1, |j, _| C64::from_polar(1.0, g.node(j)));
        let co = g.dft(&v).unwrap();
        for ell in g.modes() {
            let want = if ell == 1 { 1.0 } else { 0.0 };
            assert!((co.mode(ell)[0] - want).norm() < 1e-14, "ell={ell}");
        }
    }

    #[test]
    fn idft_of_pure_mode() {
        let g = TauGrid::new(8).unwrap();
        let mut co = SpectralCoeffs::zeros(8, 1);
        co.mode_mut(1)[0] = c(1.0, 0.0);
        let v = g.idft(&co);
        for j in 0..8 {
            assert!((v.node(j)[0] - C64::from_polar(1.0, g.node(j))).norm() < 1e-15);
        }
    }

    #[test]
    fn phi_closed_forms() {
        assert_eq!(phi(PhiOrder::One, 0.0), c(1.0, 0.0));
        assert!((phi(PhiOrder::Two, 0.0) - c(0.5, 0.0)).norm() < 1e-16);
        let p = phi(PhiOrder::One, PI);
        assert!((p - c(0.0, 2.0 / PI)).norm() < 1e-15);
        assert!((2.0 / PI - 0.63662).abs() < 1e-5);
    }

    #[test]
    fn phi_matches_definition_away_from_zero() {
        for &t in &[1e-3, 0.1, 1.0, -2.5, 40.0, 1e4] {
            let z = I * t;
            let p1 = (z.exp() - 1.0) / z;
            let p2 = (z.exp() - 1.0 - z) / (z * z);
            assert!((phi(PhiOrder::One, t) - p1).norm() < 1e-12, "t={t}");
            assert!((phi(PhiOrder::Two, t) - p2).norm() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn phi_two_taylor_branch_is_continuous() {
        let a = phi(PhiOrder::Two, 0.999_999e-3);
        let b = phi(PhiOrder::Two, 1.000_001e-3);
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn phi_order_from_int() {
        assert_eq!(PhiOrder::try_from(1).unwrap(), PhiOrder::One);
        assert!(PhiOrder::try_from(3).is_err());
    }

    #[test]
    fn shift_examples() {
        let mut co = SpectralCoeffs::zeros(8, 1);
        co.mode_mut(1)[0] = c(1.0, 0.0);
        co.mode_mut(-3)[0] = c(0.3, -0.2);
        let orig = co.clone();
        co.apply_exp_shift(0.0);
        assert_eq!(co, orig);
        co.apply_exp_shift(2.0 * PI);
        for ell in -4..=4 {
            assert!((co.mode(ell)[0] - orig.mode(ell)[0]).norm() < 1e-14);
        }
        let mut co = orig.clone();
        co.apply_exp_shift(PI / 2.0);
        assert!((co.mode(1)[0] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn phi_multiplier_examples() {
        let mut co = SpectralCoeffs::zeros(8, 1);
        co.mode_mut(2)[0] = c(1.0, 0.0);
        co.mode_mut(0)[0] = c(3.0, 0.0);
        let mut a = co.clone();
        a.apply_phi(PhiOrder::One, PI / 2.0);
        assert!((a.mode(2)[0] - c(0.0, -2.0 / PI)).norm() < 1e-15);
        assert!((a.mode(0)[0] - c(3.0, 0.0)).norm() < 1e-15);
        let mut b = co.clone();
        b.apply_phi(PhiOrder::Two, 0.0);
        assert!((b.mode(2)[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((b.mode(0)[0] - c(1.5, 0.0)).norm() < 1e-15);
        let mut d = co.clone();
        d.apply_phi(PhiOrder::Two, 17.3);
        assert!((d.mode(0)[0] - c(1.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn average_examples() {
        let g = TauGrid::new(8).unwrap();
        let v = GridValues::from_fn(8, 1, |j, _| 1.0 + 3.0 * C64::from_polar(1.0, 2.0 * g.node(j)));
        let co = g.dft(&v).unwrap();
        assert!((co.average_pi()[0] - 1.0).norm() < 1e-15);
        let v = GridValues::from_fn(8, 1, |j, _| C64::from_polar(1.0, g.node(j)));
        assert!(g.dft(&v).unwrap().average_pi()[0].norm() < 1e-15);
    }

    #[test]
    fn antiderivative_examples() {
        let g = TauGrid::new(16).unwrap();
        // constant -> 0
        let co = g.dft(&g.constant(&[c(2.0, 1.0)])).unwrap();
        assert!(co.antiderivative().norm() < 1e-15);
        // e^{iτ} -> -i e^{iτ}
        let mut co = SpectralCoeffs::zeros(16, 1);
        co.mode_mut(1)[0] = c(1.0, 0.0);
        assert!((co.antiderivative().mode(1)[0] - c(0.0, -1.0)).norm() < 1e-15);
        // sin 2τ -> -cos(2τ)/2
        let v = GridValues::from_fn(16, 1, |j, _| c((2.0 * g.node(j)).sin(), 0.0));
        let a = g.idft(&g.dft(&v).unwrap().antiderivative());
        for j in 0..16 {
            let want = -(2.0 * g.node(j)).cos() / 2.0;
            assert!((a.node(j)[0] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn eval_examples() {
        let g = TauGrid::new(8).unwrap();
        let mut co = SpectralCoeffs::zeros(8, 1);
        co.mode_mut(3)[0] = c(1.0, 0.0);
        assert!((co.eval_at_tau(PI / 6.0)[0] - c(0.0, 1.0)).norm() < 1e-15);
        let co = g.dft(&g.constant(&[c(0.7, 0.0)])).unwrap();
        for &t in &[0.0, 1.234, -5.0, 100.0] {
            assert!((co.eval_at_tau(t)[0] - 0.7).norm() < 1e-15);
        }
        let mut co = SpectralCoeffs::zeros(8, 1);
        for (i, ell) in (-4..=4).enumerate() {
            co.mode_mut(ell)[0] = c(i as f64, 0.0);
        }
        // at τ = 0 the sum of all coefficients, endpoints half-weighted
        let want = 0.5 * 0.0 + 1.0 + 2.0 + 3.0 + 4.0 + 5.0 + 6.0 + 7.0 + 0.5 * 8.0;
        assert!((co.eval_at_tau(0.0)[0] - want).norm() < 1e-13);
    }

    #[test]
    fn nyquist_shift_is_invertible() {
        let g = TauGrid::new(8).unwrap();
        let v = GridValues::from_fn(8, 1, |j, _| c(if j % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
        let mut co = g.dft(&v).unwrap();
        co.apply_exp_shift(0.3);
        assert_eq!(co.mode(4), co.mode(-4));
        co.apply_exp_shift(-0.3);
        assert!(g.idft(&co).sup_distance(&v) < 1e-15);
    }
}
