#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use twoscale::harness::Setup;
use twoscale::{GridValues, TauGrid, C64};

/// A random two-scale state near `setup.u0` with τ-modes `|ℓ| ≤ N/4`.
///
/// For real problems the perturbation is real.
pub fn random_state(setup: &Setup, grid: &TauGrid, rng: &mut StdRng, amplitude: f64) -> GridValues {
    let n = grid.n_tau();
    let d = setup.u0.len();
    let kmax = n / 4;
    let real = setup.problem.is_real();
    let mut draw = |s: f64| {
        C64::new(
            rng.gen_range(-s..s),
            if real { 0.0 } else { rng.gen_range(-s..s) },
        )
    };
    let coef: Vec<Vec<(C64, C64)>> = (0..d)
        .map(|_| {
            (1..=kmax)
                .map(|l| {
                    let s = amplitude / (l * l) as f64;
                    (draw(s), draw(s))
                })
                .collect()
        })
        .collect();
    GridValues::from_fn(n, d, |j, c| {
        let tau = grid.node(j);
        let mut v = setup.u0[c];
        for (l, (a, b)) in coef[c].iter().enumerate() {
            let l = (l + 1) as f64;
            v += a * (l * tau).cos() + b * (l * tau).sin();
        }
        v
    })
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}
