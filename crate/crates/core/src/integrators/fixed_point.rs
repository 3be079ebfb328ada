use crate::error::{Error, Result};
use crate::spectral::GridValues;

const TRACE_LEN: usize = 16;

/// Outcome of a converged fixed-point iteration.
#[derive(Debug, Clone)]
pub struct FixedPointOutcome {
    pub solution: GridValues,
    pub iterations: usize,
    /// Sup-norm of the last update `‖map(x) − x‖`.
    pub residual: f64,
}

/// Iterate `x ← map(x)` from `guess` until the update drops to `tol`.
///
/// Non-finite iterates abort with [`Error::Divergence`]; running out of
/// iterations returns [`Error::Convergence`] with the recent residuals.
pub fn fixed_point_solve(
    mut map: impl FnMut(&GridValues) -> Result<GridValues>,
    guess: GridValues,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointOutcome> {
    let mut x = guess;
    let mut trace = Vec::with_capacity(TRACE_LEN);
    let mut residual = f64::INFINITY;
    for k in 1..=max_iter {
        let next = map(&x)?;
        if !next.is_finite() {
            return Err(Error::Divergence {
                step: None,
                iterations: k,
            });
        }
        residual = next.sup_distance(&x);
        x = next;
        if trace.len() == TRACE_LEN {
            trace.remove(0);
        }
        trace.push(residual);
        if residual <= tol {
            return Ok(FixedPointOutcome {
                solution: x,
                iterations: k,
                residual,
            });
        }
    }
    Err(Error::Convergence {
        step: None,
        iterations: max_iter,
        residual,
        trace,
    })
}
