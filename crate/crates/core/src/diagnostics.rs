//! Error and conservation measurements.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problems::{invariants, Problem};
use crate::spectral::C64;

/// `‖u_num − u_ref‖ / ‖u_ref‖` in the Euclidean norm.
///
/// For grid fields the discrete L² weight cancels, so this is also the
/// relative L² error.
pub fn relative_solution_error(u_num: &[C64], u_ref: &[C64]) -> Result<f64> {
    if u_num.len() != u_ref.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            u_num.len(),
            u_ref.len()
        )));
    }
    let den: f64 = u_ref.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::InvalidInput("reference solution is zero".into()));
    }
    let num: f64 = u_num
        .iter()
        .zip(u_ref)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(num / den)
}

/// Invariants at one sample and their drift from the first sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationRecord {
    pub t: f64,
    pub h: f64,
    pub i: f64,
    pub m: f64,
    pub err_h: f64,
    pub err_i: f64,
    pub err_m: f64,
    /// The corresponding `err_*` is an absolute drift because `Q(u⁰) = 0`.
    pub abs_h: bool,
    pub abs_i: bool,
    pub abs_m: bool,
}

fn drift(q: f64, q0: f64) -> (f64, bool) {
    if q0 == 0.0 {
        ((q - q0).abs(), true)
    } else {
        ((q - q0).abs() / q0.abs(), false)
    }
}

/// Records built from `(t, H, I, m)` samples.
pub fn conservation_from_values(samples: &[(f64, f64, f64, f64)]) -> Result<Vec<ConservationRecord>> {
    let &(_, h0, i0, m0) = samples
        .first()
        .ok_or_else(|| Error::InvalidInput("empty trajectory".into()))?;
    let mut out = Vec::with_capacity(samples.len());
    let mut last_t = f64::NEG_INFINITY;
    for &(t, h, i, m) in samples {
        if t < last_t {
            return Err(Error::InvalidInput("sample times must not decrease".into()));
        }
        last_t = t;
        let (err_h, abs_h) = drift(h, h0);
        let (err_i, abs_i) = drift(i, i0);
        let (err_m, abs_m) = drift(m, m0);
        out.push(ConservationRecord {
            t,
            h,
            i,
            m,
            err_h,
            err_i,
            err_m,
            abs_h,
            abs_i,
            abs_m,
        });
    }
    Ok(out)
}

/// Conservation records of a sampled trajectory of `problem`.
pub fn conservation_series(
    trajectory: &[(f64, Vec<C64>)],
    problem: &dyn Problem,
    eps: f64,
) -> Result<Vec<ConservationRecord>> {
    let samples = trajectory
        .iter()
        .map(|(t, u)| invariants(problem, u, eps).map(|q| (*t, q.h, q.i, q.m)))
        .collect::<Result<Vec<_>>>()?;
    conservation_from_values(&samples)
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn slope_fit(h_values: &[f64], errors: &[f64]) -> Result<f64> {
    if h_values.len() != errors.len() {
        return Err(Error::InvalidInput("h and error lists differ in length".into()));
    }
    if h_values.len() < 3 {
        return Err(Error::InvalidInput("slope fit needs at least 3 points".into()));
    }
    if h_values.iter().chain(errors).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("slope fit needs positive finite values".into()));
    }
    let x: Vec<f64> = h_values.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("h values are all equal".into()));
    }
    Ok(sxy / sxx)
}

/// Steps between recorded samples of a long run: `⌈steps/2000⌉`.
pub fn sample_stride(steps: usize) -> usize {
    steps.div_ceil(2000).max(1)
}

/// Whether step `n` of `steps` is recorded (always the first and the last).
pub fn is_sampled(n: usize, steps: usize) -> bool {
    n == 0 || n == steps || n % sample_stride(steps) == 0
}
