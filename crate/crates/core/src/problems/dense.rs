use std::fmt;

use nalgebra::DMatrix;

use super::{real_parts, Problem, Propagator};
use crate::error::{Error, Result};
use crate::linalg::{apply_real, canonical_j, expm};
use crate::spectral::C64;

type GradFn = dyn Fn(&[C64]) -> Result<Vec<C64>> + Send + Sync;
type ValueFn = dyn Fn(&[f64]) -> Result<f64> + Send + Sync;
type PropagatorFn = dyn Fn(f64) -> DMatrix<f64> + Send + Sync;

/// Finite-dimensional problem with dense `J` and `M`.
pub struct DenseProblem {
    name: String,
    j: DMatrix<f64>,
    m: DMatrix<f64>,
    jm: DMatrix<f64>,
    grad: Box<GradFn>,
    h1: Box<ValueFn>,
    closed_form: Option<Box<PropagatorFn>>,
}

impl fmt::Debug for DenseProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseProblem")
            .field("name", &self.name)
            .field("j", &self.j)
            .field("m", &self.m)
            .finish()
    }
}

impl DenseProblem {
    pub fn new(
        name: impl Into<String>,
        j: DMatrix<f64>,
        m: DMatrix<f64>,
        grad: impl Fn(&[C64]) -> Result<Vec<C64>> + Send + Sync + 'static,
        h1: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !j.is_square() || j.shape() != m.shape() {
            return Err(Error::InvalidInput(format!(
                "J {:?} and M {:?} must be square of equal size",
                j.shape(),
                m.shape()
            )));
        }
        let jm = &j * &m;
        Ok(Self {
            name: name.into(),
            j,
            m,
            jm,
            grad: Box::new(grad),
            h1: Box::new(h1),
            closed_form: None,
        })
    }

    /// Use a closed form for `e^{τJM}` instead of the matrix exponential.
    pub fn with_propagator(
        mut self,
        f: impl Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.closed_form = Some(Box::new(f));
        self
    }

    /// `ẋ = v, v̇ = -x` with `J` canonical, `M = I`, `H₁ = 0`.
    pub fn harmonic_oscillator() -> Self {
        Self::new(
            "harmonic_oscillator",
            canonical_j(1),
            DMatrix::identity(2, 2),
            |u| Ok(vec![C64::new(0.0, 0.0); u.len()]),
            |_| Ok(0.0),
        )
        .expect("valid shapes")
    }

    /// Hénon–Heiles linear part with `H₁ ≡ 0`.
    pub fn free_henon_heiles() -> Self {
        Self::new(
            "free_henon_heiles",
            canonical_j(2),
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0])),
            |u| Ok(vec![C64::new(0.0, 0.0); u.len()]),
            |_| Ok(0.0),
        )
        .expect("valid shapes")
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn m(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `A = JM`.
    pub fn jm(&self) -> &DMatrix<f64> {
        &self.jm
    }

    pub fn propagator_matrix(&self, tau: f64) -> DMatrix<f64> {
        match &self.closed_form {
            Some(f) => f(tau),
            None => expm(&(&self.jm * tau)),
        }
    }
}

impl Problem for DenseProblem {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.j.nrows()
    }

    fn is_real(&self) -> bool {
        true
    }

    fn apply_j(&self, u: &[C64]) -> Vec<C64> {
        apply_real(&self.j, u)
    }

    fn apply_m(&self, u: &[C64]) -> Vec<C64> {
        apply_real(&self.m, u)
    }

    fn grad_h1(&self, u: &[C64]) -> Result<Vec<C64>> {
        (self.grad)(u)
    }

    fn h1(&self, u: &[C64]) -> Result<f64> {
        (self.h1)(&real_parts(u))
    }

    fn propagator(&self, tau: f64) -> Propagator {
        Propagator::Dense(self.propagator_matrix(tau))
    }
}
