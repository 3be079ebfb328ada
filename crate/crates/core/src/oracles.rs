//! Reference solutions computed directly on the original equations.
//!
//! These never touch the two-scale machinery: the finite-dimensional problems
//! are integrated with an adaptive Dormand–Prince 5(4) pair, the Schrödinger
//! equation with Strang splitting.

use crate::error::{Error, Result};
use crate::problems::{vector_field, CpdState, NlsProblem, Problem};
use crate::spectral::C64;

/// Tolerances for [`rk_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 50_000_000,
        }
    }
}

impl OdeTolerance {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidInput("rtol and atol must be positive".into()));
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(y: &[C64], h: f64, terms: &[(f64, &[C64])]) -> Vec<C64> {
    let mut out = y.to_vec();
    for &(a, k) in terms {
        if a != 0.0 {
            for (o, ki) in out.iter_mut().zip(k) {
                *o += h * a * ki;
            }
        }
    }
    out
}

/// Integrate `ẏ = rhs(t, y)` from `t0` to `t_end` with Dormand–Prince 5(4)
/// and a PI step-size controller.
pub fn dopri5(
    mut rhs: impl FnMut(f64, &[C64]) -> Result<Vec<C64>>,
    y0: &[C64],
    t0: f64,
    t_end: f64,
    tol: &OdeTolerance,
) -> Result<Vec<C64>> {
    tol.validate()?;
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(y0.to_vec());
    }
    let dir = span.signum();
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = rhs(t, &y)?;

    let err_norm = |e: &[C64], y: &[C64], ynew: &[C64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            let scale_re = tol.atol + tol.rtol * y[i].re.abs().max(ynew[i].re.abs());
            let scale_im = tol.atol + tol.rtol * y[i].im.abs().max(ynew[i].im.abs());
            s += (e[i].re / scale_re).powi(2) + (e[i].im / scale_im).powi(2);
        }
        (s / (2 * n).max(1) as f64).sqrt()
    };

    // initial step from the local scale of y and y'
    let d0 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let d1 = k1.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span.abs()) * dir;

    let mut err_old: f64 = 1e-4;
    let mut steps = 0usize;
    let mut rejected_last = false;
    while (t_end - t) * dir > 0.0 {
        if steps >= tol.max_steps {
            return Err(Error::Resource(format!(
                "dopri5 exceeded {} steps at t = {t}",
                tol.max_steps
            )));
        }
        steps += 1;
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        let k2 = rhs(t + C2 * h, &combine(&y, h, &[(A21, &k1)]))?;
        let k3 = rhs(t + C3 * h, &combine(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = rhs(t + C4 * h, &combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = rhs(
            t + C5 * h,
            &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = rhs(
            t + h,
            &combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let ynew = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t + h, &ynew)?;
        let e: Vec<C64> = (0..n)
            .map(|i| {
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            })
            .collect();
        let err = err_norm(&e, &y, &ynew);
        if !err.is_finite() {
            return Err(Error::Divergence {
                step: Some(steps as u64),
                iterations: 0,
            });
        }
        if err <= 1.0 {
            t += h;
            y = ynew;
            k1 = k7;
            let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_old.powf(0.4 / 5.0);
            let fac = if rejected_last { fac.min(1.0) } else { fac };
            h *= fac.clamp(0.2, 10.0);
            err_old = err.max(1e-4);
            rejected_last = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected_last = true;
        }
    }
    Ok(y)
}

/// `u(t_end)` for `u̇ = J[(1/ε)Mu + ∇H₁(u)]`, `u(0) = u0`.
pub fn rk_adaptive(
    problem: &dyn Problem,
    u0: &[C64],
    eps: f64,
    t_end: f64,
    tol: &OdeTolerance,
) -> Result<Vec<C64>> {
    if !(t_end >= 0.0) {
        return Err(Error::InvalidInput(format!("t_end must be >= 0, got {t_end}")));
    }
    dopri5(|_, u| vector_field(problem, u, eps), u0, 0.0, t_end, tol)
}

/// [`rk_adaptive`] sampled at increasing `times` (starting from `t = 0`).
pub fn rk_adaptive_samples(
    problem: &dyn Problem,
    u0: &[C64],
    eps: f64,
    times: &[f64],
    tol: &OdeTolerance,
) -> Result<Vec<(f64, Vec<C64>)>> {
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut u = u0.to_vec();
    for &next in times {
        if next < t {
            return Err(Error::InvalidInput("sample times must increase".into()));
        }
        u = dopri5(|_, v| vector_field(problem, v, eps), &u, t, next, tol)?;
        t = next;
        out.push((t, u.clone()));
    }
    Ok(out)
}

/// `(x, v)(t_end)` for the charged particle `ẍ = Bẋ/ε − ∇U(x)`,
/// `B = [[0, 1], [−1, 0]]`, `U(x) = 1/|x|`, integrated in the physical
/// variables (independent of the canonical formulation).
pub fn rk_cpd_physical(
    initial: &CpdState,
    eps: f64,
    t_end: f64,
    tol: &OdeTolerance,
) -> Result<CpdState> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    let y0: Vec<C64> = [initial.x[0], initial.x[1], initial.v[0], initial.v[1]]
        .iter()
        .map(|&a| C64::new(a, 0.0))
        .collect();
    let rhs = |_: f64, y: &[C64]| -> Result<Vec<C64>> {
        let (x1, x2, v1, v2) = (y[0].re, y[1].re, y[2].re, y[3].re);
        let r = x1.hypot(x2);
        if !(r >= 1e-8) {
            return Err(Error::Domain(format!("|x| = {r:e} at the singularity")));
        }
        let r3 = r * r * r;
        // −∇U = x/|x|³
        Ok(vec![
            C64::new(v1, 0.0),
            C64::new(v2, 0.0),
            C64::new(v2 / eps + x1 / r3, 0.0),
            C64::new(-v1 / eps + x2 / r3, 0.0),
        ])
    };
    let y = dopri5(rhs, &y0, 0.0, t_end, tol)?;
    Ok(CpdState {
        x: [y[0].re, y[1].re],
        v: [y[2].re, y[3].re],
    })
}

/// Strang splitting for `i∂ₜu = −(1/ε)∂ₓ²u + |u|²u` with exact sub-flows.
pub struct StrangNls<'a> {
    problem: &'a NlsProblem,
    eps: f64,
    dt: f64,
    half_linear: Vec<C64>,
    full_linear: Vec<C64>,
}

impl<'a> StrangNls<'a> {
    pub fn new(problem: &'a NlsProblem, eps: f64, dt: f64) -> Self {
        let phase = |s: f64| -> Vec<C64> {
            problem
                .wavenumbers_squared()
                .iter()
                .map(|&k2| C64::from_polar(1.0, -s * k2 / eps))
                .collect()
        };
        Self {
            problem,
            eps,
            dt,
            half_linear: phase(0.5 * dt),
            full_linear: phase(dt),
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn linear(&self, u: &mut [C64], mult: &[C64]) {
        let n = u.len();
        self.problem.fft().process(u);
        let scale = 1.0 / n as f64;
        for (z, m) in u.iter_mut().zip(mult) {
            *z *= m * scale;
        }
        self.problem.ifft().process(u);
    }

    fn cubic(&self, u: &mut [C64]) {
        for z in u.iter_mut() {
            *z *= C64::from_polar(1.0, -self.dt * z.norm_sqr());
        }
    }

    /// `steps` Strang steps, merging adjacent linear half-steps.
    pub fn advance(&self, u: &mut [C64], steps: usize) {
        if steps == 0 {
            return;
        }
        self.linear(u, &self.half_linear);
        for s in 0..steps {
            self.cubic(u);
            if s + 1 < steps {
                self.linear(u, &self.full_linear);
            }
        }
        self.linear(u, &self.half_linear);
    }
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidInput("need dt > 0 and t_end >= 0".into()));
    }
    let ratio = t_end / dt;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "t_end / dt = {ratio} is not an integer"
        )));
    }
    Ok(n as usize)
}

/// `u(t_end)` for the cubic NLS by Strang splitting with step `dt`.
pub fn strang_splitting_nls(
    problem: &NlsProblem,
    u0: &[C64],
    eps: f64,
    dt: f64,
    t_end: f64,
) -> Result<Vec<C64>> {
    if u0.len() != problem.n_x() {
        return Err(Error::InvalidInput("initial field does not match n_x".into()));
    }
    let steps = step_count(t_end, dt)?;
    let mut u = u0.to_vec();
    StrangNls::new(problem, eps, dt).advance(&mut u, steps);
    Ok(u)
}

/// Strang trajectory sampled every `every` steps (plus the endpoints).
pub fn strang_trajectory(
    problem: &NlsProblem,
    u0: &[C64],
    eps: f64,
    dt: f64,
    t_end: f64,
    every: usize,
) -> Result<Vec<(f64, Vec<C64>)>> {
    let steps = step_count(t_end, dt)?;
    let every = every.max(1);
    let solver = StrangNls::new(problem, eps, dt);
    let mut u = u0.to_vec();
    let mut out = vec![(0.0, u.clone())];
    let mut done = 0;
    while done < steps {
        let chunk = every.min(steps - done);
        solver.advance(&mut u, chunk);
        done += chunk;
        out.push((done as f64 * dt, u.clone()));
    }
    Ok(out)
}
