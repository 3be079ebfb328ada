use super::{fixed_point_solve, gauss_legendre, StepResult, TwoScaleField, TwoScaleState};
use crate::error::{Error, Result};
use crate::integrators::SchemeConfig;
use crate::phase::Angle;
use crate::spectral::{GridValues, PhiOrder, SpectralCoeffs, TauGrid, C64};

/// `e^{-s∂τ/ε} c`.
fn shifted(coeffs: &SpectralCoeffs, angle: Angle) -> SpectralCoeffs {
    let mut out = coeffs.clone();
    out.apply_exp_shift_angle(angle);
    out
}

/// `scale · φ_k(-s∂τ/ε) F` in spectral form.
fn phi_term(
    grid: &TauGrid,
    f: &GridValues,
    k: PhiOrder,
    angle: Angle,
    scale: f64,
) -> Result<SpectralCoeffs> {
    let mut c = grid.dft(f)?;
    c.apply_phi_angle(k, angle);
    c.scale(C64::new(scale, 0.0));
    Ok(c)
}

fn sum(a: &SpectralCoeffs, b: &SpectralCoeffs) -> SpectralCoeffs {
    let mut out = a.clone();
    out.axpy(C64::new(1.0, 0.0), b);
    out
}

/// Symmetric one-stage exponential two-scale step:
///
/// ```text
/// U^{n+½} = e^{-h∂τ/2ε} Uⁿ + (h/2) φ₁(-h∂τ/2ε) f_τ(U^{n+½})
/// U^{n+1} = e^{-h∂τ/ε} Uⁿ + h φ₁(-h∂τ/ε) f_τ(U^{n+½})
/// ```
pub fn step_se1(
    state: &TwoScaleState,
    field: &TwoScaleField,
    cfg: &SchemeConfig,
) -> Result<StepResult> {
    let grid = field.grid();
    let h = cfg.h;
    let eps = state.eps;
    let half = Angle::from_ratio(0.5 * h, eps);
    let full = Angle::from_ratio(h, eps);

    let cn = grid.dft(&state.values)?;
    let base_half = shifted(&cn, half);
    // exponential-Euler predictor for the half stage
    let fn_ = field.eval(&state.values)?;
    let guess = grid.idft(&sum(&base_half, &phi_term(grid, &fn_, PhiOrder::One, half, 0.5 * h)?));

    let stage = fixed_point_solve(
        |x| {
            let fx = field.eval(x)?;
            Ok(grid.idft(&sum(&base_half, &phi_term(grid, &fx, PhiOrder::One, half, 0.5 * h)?)))
        },
        guess,
        cfg.fp_tol,
        cfg.fp_max_iter,
    )?;

    let f_half = field.eval(&stage.solution)?;
    let next = sum(&shifted(&cn, full), &phi_term(grid, &f_half, PhiOrder::One, full, h)?);
    Ok(StepResult {
        state: state.advanced(grid.idft(&next), h),
        fp_iterations: stage.iterations,
        residual: stage.residual,
    })
}

/// Symmetric average-vector-field exponential two-scale step:
///
/// ```text
/// U^{n+1} = e^{-h∂τ/ε} Uⁿ + h φ₁(-h∂τ/ε) ∫₀¹ f_τ((1−ρ)Uⁿ + ρU^{n+1}) dρ
/// ```
///
/// The chord average uses `cfg.avf_quad_nodes` Gauss–Legendre nodes.
pub fn step_se2(
    state: &TwoScaleState,
    field: &TwoScaleField,
    cfg: &SchemeConfig,
) -> Result<StepResult> {
    let grid = field.grid();
    let h = cfg.h;
    let full = Angle::from_ratio(h, state.eps);
    let (nodes, weights) = gauss_legendre(cfg.avf_quad_nodes);

    let un = &state.values;
    let cn = grid.dft(un)?;
    let base = shifted(&cn, full);
    let fn_ = field.eval(un)?;
    let guess = grid.idft(&sum(&base, &phi_term(grid, &fn_, PhiOrder::One, full, h)?));

    let solve = fixed_point_solve(
        |x| {
            let mut avg = GridValues::zeros(un.n_tau(), un.dim());
            for (&rho, &w) in nodes.iter().zip(&weights) {
                let chord = GridValues::lincomb(1.0 - rho, un, rho, x);
                avg.axpy(C64::new(w, 0.0), &field.eval(&chord)?);
            }
            Ok(grid.idft(&sum(&base, &phi_term(grid, &avg, PhiOrder::One, full, h)?)))
        },
        guess,
        cfg.fp_tol,
        cfg.fp_max_iter,
    )?;

    Ok(StepResult {
        state: state.advanced(solve.solution, h),
        fp_iterations: solve.iterations,
        residual: solve.residual,
    })
}

/// Finite-difference two-scale step (explicit in the nonlinearity):
///
/// ```text
/// (I + h/(2ε) ∂τ) U^{n+½} = Uⁿ + (h/2) f_τ(Uⁿ)
/// (I + h/(2ε) ∂τ) U^{n+1} = (I − h/(2ε) ∂τ) Uⁿ + h f_τ(U^{n+½})
/// ```
pub fn step_fd(
    state: &TwoScaleState,
    field: &TwoScaleField,
    cfg: &SchemeConfig,
) -> Result<StepResult> {
    let grid = field.grid();
    let h = cfg.h;
    let a = 0.5 * h / state.eps;
    let implicit = |ell: i64| 1.0 / C64::new(1.0, ell as f64 * a);

    let cn = grid.dft(&state.values)?;
    let mut half = grid.dft(&field.eval(&state.values)?)?;
    half.scale(C64::new(0.5 * h, 0.0));
    half.axpy(C64::new(1.0, 0.0), &cn);
    half.apply_multiplier(implicit);
    let u_half = grid.idft(&half);

    let mut next = grid.dft(&field.eval(&u_half)?)?;
    next.scale(C64::new(h, 0.0));
    let mut explicit = cn;
    explicit.apply_multiplier(|ell| C64::new(1.0, -(ell as f64) * a));
    next.axpy(C64::new(1.0, 0.0), &explicit);
    next.apply_multiplier(implicit);

    Ok(StepResult {
        state: state.advanced(grid.idft(&next), h),
        fp_iterations: 0,
        residual: 0.0,
    })
}

/// Two-step exponential two-scale step.
///
/// `history` is `f_τ(U^{n−1})` from the previous call; it must be present
/// for every step after the first. Returns the step and `f_τ(Uⁿ)`, which is
/// the history for the next call.
pub fn step_me(
    state: &TwoScaleState,
    history: Option<&GridValues>,
    field: &TwoScaleField,
    cfg: &SchemeConfig,
) -> Result<(StepResult, GridValues)> {
    let grid = field.grid();
    let h = cfg.h;
    let full = Angle::from_ratio(h, state.eps);

    let cn = grid.dft(&state.values)?;
    let fn_ = field.eval(&state.values)?;
    let euler = sum(&shifted(&cn, full), &phi_term(grid, &fn_, PhiOrder::One, full, h)?);

    let diff = match (history, state.step_index) {
        (Some(prev), n) if n >= 1 => GridValues::lincomb(1.0, &fn_, -1.0, prev),
        (None, 0) => {
            let predictor = grid.idft(&euler);
            GridValues::lincomb(1.0, &field.eval(&predictor)?, -1.0, &fn_)
        }
        (None, n) => {
            return Err(Error::InvalidState(format!(
                "ME step {n} needs the previous nonlinearity"
            )))
        }
        (Some(_), _) => {
            return Err(Error::InvalidState(
                "ME history supplied for the starting step".into(),
            ))
        }
    };
    let next = sum(&euler, &phi_term(grid, &diff, PhiOrder::Two, full, h)?);
    Ok((
        StepResult {
            state: state.advanced(grid.idft(&next), h),
            fp_iterations: 0,
            residual: 0.0,
        },
        fn_,
    ))
}
