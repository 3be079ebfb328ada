//! Uniformly accurate, time-symmetric two-scale integrators for highly
//! oscillatory Hamiltonian systems
//!
//! ```text
//! u̇ = J[(1/ε) M u + ∇H₁(u)],   0 < ε ≤ 1.
//! ```
//!
//! The fast phase `τ = t/ε` is promoted to a periodic variable and the
//! two-scale unknown `U(t, τ)` is discretized by a Fourier collocation grid
//! in `τ` ([`spectral`]). Four steppers act on that grid ([`integrators`]):
//! the symmetric exponential schemes SE1 and SE2 and the FD and ME
//! baselines. [`oracles`] provides reference solutions of the original
//! equation, [`diagnostics`] the error and conservation measures and
//! [`harness`] the sweep runner behind the `twoscale` binary.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod integrators;
pub mod linalg;
pub mod oracles;
pub mod phase;
pub mod problems;
pub mod spectral;

pub use error::{Error, Result};
pub use integrators::{
    extract_solution, prepare_initial_data_2nd, prepare_initial_data_naive, Integrator, Scheme,
    SchemeConfig, StepResult, TwoScaleField, TwoScaleState,
};
pub use problems::{Problem, ProblemRef};
pub use spectral::{GridValues, SpectralCoeffs, TauGrid, C64};
