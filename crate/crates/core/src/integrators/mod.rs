//! Time stepping on the two-scale equation `∂ₜU + (1/ε)∂τU = f_τ(U)`.
//!
//! The unknown `U(t, ·)` lives on a [`TauGrid`]; all linear operators in `τ`
//! are applied spectrally. Four schemes are provided:
//!
//! * [`Scheme::Se1`] – symmetric one-stage exponential scheme (implicit half stage),
//! * [`Scheme::Se2`] – symmetric average-vector-field exponential scheme,
//! * [`Scheme::Fd`] – Crank–Nicolson-type finite difference baseline,
//! * [`Scheme::Me`] – two-step exponential baseline.
//!
//! The original solution is recovered on the diagonal `τ = t/ε` by
//! [`extract_solution`].

mod fixed_point;
mod quadrature;
mod schemes;

use std::fmt;
use std::str::FromStr;

pub use fixed_point::{fixed_point_solve, FixedPointOutcome};
pub use quadrature::gauss_legendre;
pub use schemes::{step_fd, step_me, step_se1, step_se2};

use crate::error::{Error, Result};
use crate::phase::Phase;
use crate::problems::{f_tau_with, Problem, ProblemRef, Propagator};
use crate::spectral::{GridValues, TauGrid, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Se1,
    Se2,
    Fd,
    Me,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Se1, Scheme::Se2, Scheme::Fd, Scheme::Me];

    pub fn is_symmetric(self) -> bool {
        matches!(self, Scheme::Se1 | Scheme::Se2)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Se1 => "SE1",
            Scheme::Se2 => "SE2",
            Scheme::Fd => "FD",
            Scheme::Me => "ME",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().trim_end_matches("-TSI") {
            "SE1" => Ok(Scheme::Se1),
            "SE2" => Ok(Scheme::Se2),
            "FD" => Ok(Scheme::Fd),
            "ME" => Ok(Scheme::Me),
            _ => Err(Error::InvalidInput(format!("unknown scheme `{s}`"))),
        }
    }
}

/// Step size, scheme and nonlinear solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub h: f64,
    pub scheme: Scheme,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    /// Gauss–Legendre nodes for the SE2 chord average.
    pub avf_quad_nodes: usize,
}

impl SchemeConfig {
    pub const DEFAULT_FP_TOL: f64 = 1e-10;
    pub const DEFAULT_FP_MAX_ITER: usize = 200;
    pub const DEFAULT_AVF_NODES: usize = 4;

    pub fn new(scheme: Scheme, h: f64) -> Self {
        Self {
            h,
            scheme,
            fp_tol: Self::DEFAULT_FP_TOL,
            fp_max_iter: Self::DEFAULT_FP_MAX_ITER,
            avf_quad_nodes: Self::DEFAULT_AVF_NODES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidInput(format!("h must be positive, got {}", self.h)));
        }
        if !(self.fp_tol > 0.0) {
            return Err(Error::InvalidInput("fp_tol must be positive".into()));
        }
        if self.fp_max_iter < 1 {
            return Err(Error::InvalidInput("fp_max_iter must be >= 1".into()));
        }
        if self.avf_quad_nodes < 2 {
            return Err(Error::InvalidInput("avf_quad_nodes must be >= 2".into()));
        }
        Ok(())
    }

    /// The same configuration stepping backwards in time (`h → −h`).
    ///
    /// Steppers accept either sign; only [`validate`](Self::validate) insists on `h > 0`.
    pub fn reversed(&self) -> Self {
        Self { h: -self.h, ..*self }
    }
}

/// The discrete two-scale unknown `U(tₙ, τ_j)`.
#[derive(Debug, Clone)]
pub struct TwoScaleState {
    pub grid: TauGrid,
    pub values: GridValues,
    pub t: f64,
    pub eps: f64,
    /// Diagonal angle `τ* = (t/ε) mod 2π`, compensated.
    pub phase: Phase,
    /// Number of steps taken since the initial data.
    pub step_index: u64,
}

impl TwoScaleState {
    pub fn new(grid: TauGrid, values: GridValues, eps: f64) -> Result<Self> {
        if values.n_tau() != grid.n_tau() {
            return Err(Error::InvalidInput("values do not match the grid".into()));
        }
        Ok(Self {
            grid,
            values,
            t: 0.0,
            eps,
            phase: Phase::zero(),
            step_index: 0,
        })
    }

    /// Successor state after a step of size `h`.
    pub(crate) fn advanced(&self, values: GridValues, h: f64) -> Self {
        let mut phase = self.phase;
        phase.advance(h, self.eps);
        Self {
            grid: self.grid.clone(),
            values,
            t: self.t + h,
            eps: self.eps,
            phase,
            step_index: self.step_index + 1,
        }
    }

    /// Check finiteness and, for real problems, realness of the grid values.
    pub fn check(&self, real: bool) -> Result<()> {
        if !self.values.is_finite() {
            return Err(Error::InvalidState("non-finite two-scale values".into()));
        }
        if real {
            let tol = 1e-10 * self.values.sup_norm().max(f64::MIN_POSITIVE);
            let im = self.values.max_imag();
            if im > tol {
                return Err(Error::InvalidState(format!(
                    "imaginary contamination {im:e} in a real problem"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of one time step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub state: TwoScaleState,
    pub fp_iterations: usize,
    pub residual: f64,
}

/// `f_τ` on all grid nodes, with the node propagators cached.
pub struct TwoScaleField {
    problem: ProblemRef,
    grid: TauGrid,
    eps: f64,
    forward: Vec<Propagator>,
    backward: Vec<Propagator>,
}

impl fmt::Debug for TwoScaleField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoScaleField")
            .field("problem", &self.problem.name())
            .field("grid", &self.grid)
            .field("eps", &self.eps)
            .finish()
    }
}

impl TwoScaleField {
    pub fn new(problem: ProblemRef, grid: TauGrid, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
        }
        let forward = grid.nodes().iter().map(|&t| problem.propagator(t)).collect();
        let backward = grid.nodes().iter().map(|&t| problem.propagator(-t)).collect();
        Ok(Self {
            problem,
            grid,
            eps,
            forward,
            backward,
        })
    }

    pub fn problem(&self) -> &dyn Problem {
        self.problem.as_ref()
    }

    pub fn problem_ref(&self) -> &ProblemRef {
        &self.problem
    }

    pub fn grid(&self) -> &TauGrid {
        &self.grid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `f_{τ_j}(U(τ_j))` for every node `j`.
    pub fn eval(&self, values: &GridValues) -> Result<GridValues> {
        let n = self.grid.n_tau();
        let dim = values.dim();
        let mut out = GridValues::zeros(n, dim);
        for j in 0..n {
            let f = f_tau_with(
                self.problem.as_ref(),
                &self.forward[j],
                &self.backward[j],
                values.node(j),
            )?;
            out.node_mut(j).copy_from_slice(&f);
        }
        Ok(out)
    }
}

/// Second-order well-prepared data `U(0,τ) = u₀ + r(τ) − r(0)`, `r = ε𝒜f_τ(u₀)`.
pub fn prepare_initial_data_2nd(field: &TwoScaleField, u0: &[C64]) -> Result<TwoScaleState> {
    let grid = field.grid();
    let constant = grid.constant(u0);
    let f = field.eval(&constant)?;
    let a = grid.dft(&f)?.antiderivative();
    let r0 = a.eval_at_tau(0.0);
    let r = grid.idft(&a);
    let eps = field.eps();
    let values = GridValues::from_fn(grid.n_tau(), u0.len(), |j, c| {
        u0[c] + eps * (r.node(j)[c] - r0[c])
    });
    TwoScaleState::new(grid.clone(), values, eps)
}

/// Unprepared data `U(0,τ) ≡ u₀`.
pub fn prepare_initial_data_naive(field: &TwoScaleField, u0: &[C64]) -> Result<TwoScaleState> {
    let grid = field.grid();
    TwoScaleState::new(grid.clone(), grid.constant(u0), field.eps())
}

/// `u(tₙ) ≈ e^{JMτ*} U(tₙ, τ*)` with `τ* = tₙ/ε mod 2π`.
pub fn extract_solution(state: &TwoScaleState, problem: &dyn Problem) -> Result<Vec<C64>> {
    let tau = state.phase.value();
    let v = state.grid.dft(&state.values)?.eval_at_tau(tau);
    Ok(problem.propagator(tau).apply(&v))
}

/// One step of `cfg.scheme`. `history` is the ME nonlinearity cache.
pub fn step(
    state: &TwoScaleState,
    field: &TwoScaleField,
    cfg: &SchemeConfig,
    history: Option<&GridValues>,
) -> Result<(StepResult, Option<GridValues>)> {
    match cfg.scheme {
        Scheme::Se1 => step_se1(state, field, cfg).map(|r| (r, None)),
        Scheme::Se2 => step_se2(state, field, cfg).map(|r| (r, None)),
        Scheme::Fd => step_fd(state, field, cfg).map(|r| (r, None)),
        Scheme::Me => step_me(state, history, field, cfg).map(|(r, f)| (r, Some(f))),
    }
}

/// Drives one trajectory and owns the ME history.
#[derive(Debug)]
pub struct Integrator {
    field: TwoScaleField,
    cfg: SchemeConfig,
    state: TwoScaleState,
    history: Option<GridValues>,
    fp_iterations: usize,
}

impl Integrator {
    pub fn new(field: TwoScaleField, cfg: SchemeConfig, initial: TwoScaleState) -> Result<Self> {
        cfg.validate()?;
        if initial.grid != *field.grid() {
            return Err(Error::InvalidInput("state and field grids differ".into()));
        }
        Ok(Self {
            field,
            cfg,
            state: initial,
            history: None,
            fp_iterations: 0,
        })
    }

    /// Integrator started from the second-order prepared data.
    pub fn prepared(
        problem: ProblemRef,
        grid: TauGrid,
        eps: f64,
        u0: &[C64],
        cfg: SchemeConfig,
    ) -> Result<Self> {
        let field = TwoScaleField::new(problem, grid, eps)?;
        let initial = prepare_initial_data_2nd(&field, u0)?;
        Self::new(field, cfg, initial)
    }

    pub fn step(&mut self) -> Result<&TwoScaleState> {
        let index = self.state.step_index;
        let (result, cache) = step(&self.state, &self.field, &self.cfg, self.history.as_ref())
            .map_err(|e| e.at_step(index))?;
        if !result.state.values.is_finite() {
            return Err(Error::Divergence {
                step: Some(index),
                iterations: result.fp_iterations,
            });
        }
        self.fp_iterations += result.fp_iterations;
        self.history = cache;
        self.state = result.state;
        Ok(&self.state)
    }

    pub fn run(&mut self, steps: usize) -> Result<&TwoScaleState> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(&self.state)
    }

    pub fn state(&self) -> &TwoScaleState {
        &self.state
    }

    pub fn field(&self) -> &TwoScaleField {
        &self.field
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// Total fixed-point iterations spent so far.
    pub fn fp_iterations(&self) -> usize {
        self.fp_iterations
    }

    pub fn solution(&self) -> Result<Vec<C64>> {
        extract_solution(&self.state, self.field.problem())
    }
}
