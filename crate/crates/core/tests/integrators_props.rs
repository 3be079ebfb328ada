mod common;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use twoscale::harness::{ProblemKind, Setup};
use twoscale::integrators::{prepare_initial_data_naive, step};
use twoscale::linalg::canonical_j;
use twoscale::oracles::{rk_adaptive, OdeTolerance};
use twoscale::phase::Phase;
use twoscale::problems::{make_henon_heiles, DenseProblem, HENON_HEILES_U0};
use twoscale::{
    prepare_initial_data_2nd, Integrator, ProblemRef, Scheme, SchemeConfig, TauGrid,
    TwoScaleField, TwoScaleState, C64,
};

const PI_50: &str = "314159265358979323846264338327950288419716939937510";

fn two_pi() -> BigRational {
    let num: BigInt = PI_50.parse().unwrap();
    let den = BigInt::from(10u32).pow(50);
    BigRational::new(num * 2, den)
}

/// `(n·h/ε) mod 2π` in exact rational arithmetic (with a 50-digit π).
fn exact_phase(n: u64, h: f64, eps: f64) -> f64 {
    let ratio = BigRational::from_f64(h).unwrap() * BigInt::from(n) / BigRational::from_f64(eps).unwrap();
    let p = two_pi();
    let k = (&ratio / &p).floor();
    (ratio - k * p).to_f64().unwrap()
}

fn hh_u0() -> Vec<C64> {
    HENON_HEILES_U0.iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn run(problem: ProblemRef, eps: f64, cfg: SchemeConfig, n_tau: usize, steps: usize) -> Vec<C64> {
    let u0: Vec<C64> = (0..problem.dim()).map(|k| C64::new(0.12 + 0.01 * k as f64, 0.0)).collect();
    let mut it = Integrator::prepared(problem, TauGrid::new(n_tau).unwrap(), eps, &u0, cfg).unwrap();
    it.run(steps).unwrap();
    it.solution().unwrap()
}

/// `H₁ = (c/2)|u|²`, so `f_τ` is linear.
fn quadratic_problem(c: f64) -> DenseProblem {
    DenseProblem::new(
        "quadratic",
        canonical_j(2),
        DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0])),
        move |u| Ok(u.iter().map(|z| z * c).collect()),
        move |u| Ok(0.5 * c * u.iter().map(|x| x * x).sum::<f64>()),
    )
    .unwrap()
}

#[test]
fn free_flow_is_exact() {
    let problem: ProblemRef = Arc::new(DenseProblem::free_henon_heiles());
    let eps = 1e-3;
    let h = 0.1;
    let steps = 10;
    let t = h * steps as f64;
    let u0: Vec<C64> = (0..4).map(|k| C64::new(0.12 + 0.01 * k as f64, 0.0)).collect();
    let exact = problem.propagator((t / eps) % (2.0 * std::f64::consts::PI)).apply(&u0);
    for scheme in Scheme::ALL {
        let u = run(problem.clone(), eps, SchemeConfig::new(scheme, h), 16, steps);
        for (a, b) in u.iter().zip(&exact) {
            assert!((a - b).norm() <= 1e-12, "{scheme}: {a} vs {b}");
        }
    }
}

#[test]
fn schemes_match_runge_kutta_at_moderate_eps() {
    let problem: ProblemRef = Arc::new(make_henon_heiles());
    let eps = 0.5;
    let tol = OdeTolerance {
        rtol: 1e-12,
        atol: 1e-14,
        ..OdeTolerance::default()
    };
    let u0: Vec<C64> = (0..4).map(|k| C64::new(0.12 + 0.01 * k as f64, 0.0)).collect();
    let reference = rk_adaptive(problem.as_ref(), &u0, eps, 1.0, &tol).unwrap();
    for (scheme, bound) in [
        (Scheme::Se1, 1e-6),
        (Scheme::Se2, 1e-6),
        (Scheme::Fd, 1e-5),
        (Scheme::Me, 1e-5),
    ] {
        let u = run(problem.clone(), eps, SchemeConfig::new(scheme, 1e-3), 32, 1000);
        let err = twoscale::diagnostics::relative_solution_error(&u, &reference).unwrap();
        assert!(err <= bound, "{scheme}: {err:e}");
    }
}

#[test]
fn se2_is_node_independent_for_linear_fields() {
    let problem: ProblemRef = Arc::new(quadratic_problem(0.3));
    let mut a = SchemeConfig::new(Scheme::Se2, 0.1);
    a.avf_quad_nodes = 2;
    let mut b = a;
    b.avf_quad_nodes = 6;
    let ua = run(problem.clone(), 1e-2, a, 16, 20);
    let ub = run(problem, 1e-2, b, 16, 20);
    for (x, y) in ua.iter().zip(&ub) {
        assert!((x - y).norm() <= 1e-13, "{x} vs {y}");
    }
}

#[test]
fn real_problems_stay_real() {
    let problem: ProblemRef = Arc::new(make_henon_heiles());
    for scheme in [Scheme::Se1, Scheme::Se2] {
        let mut it = Integrator::prepared(
            problem.clone(),
            TauGrid::new(32).unwrap(),
            1e-2,
            &hh_u0(),
            SchemeConfig::new(scheme, 0.1),
        )
        .unwrap();
        it.run(10_000).unwrap();
        let imag = it.state().values.max_imag();
        assert!(imag <= 1e-9, "{scheme}: {imag:e}");
    }
}

#[test]
fn prepared_data_correction_scales_with_eps() {
    let problem: ProblemRef = Arc::new(make_henon_heiles());
    let grid = TauGrid::new(64).unwrap();
    let correction = |eps: f64| {
        let field = TwoScaleField::new(problem.clone(), grid.clone(), eps).unwrap();
        let prepared = prepare_initial_data_2nd(&field, &hh_u0()).unwrap();
        let naive = prepare_initial_data_naive(&field, &hh_u0()).unwrap();
        prepared.values.sup_distance(&naive.values)
    };
    for eps in [1e-1, 1e-2, 1e-3] {
        let ratio = correction(eps) / correction(eps / 10.0);
        assert!((10.0 / 1.5..=15.0).contains(&ratio), "eps {eps}: {ratio}");
    }
}

#[test]
fn prepared_data_is_u0_at_tau_zero() {
    let problem: ProblemRef = Arc::new(make_henon_heiles());
    let grid = TauGrid::new(32).unwrap();
    let field = TwoScaleField::new(problem, grid, 1e-2).unwrap();
    let state = prepare_initial_data_2nd(&field, &hh_u0()).unwrap();
    for (a, b) in state.values.node(0).iter().zip(hh_u0()) {
        assert!((a - b).norm() <= 1e-15);
    }
}

#[test]
fn phase_stays_accurate_over_many_steps() {
    let (h, eps) = (0.1, 1e-6);
    let mut phase = Phase::zero();
    for n in 1..=100_000u64 {
        phase.advance(h, eps);
        if n % 10_000 == 0 {
            let exact = exact_phase(n, h, eps);
            assert!((phase.value() - exact).abs() <= 1e-9, "step {n}: {} vs {exact}", phase.value());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symmetric_schemes_are_reversible(
        seed in any::<u64>(),
        log_eps in -6.0f64..0.0,
        h in 0.01f64..0.5,
        k in 0usize..3,
        se2 in any::<bool>(),
    ) {
        let kind = [ProblemKind::HenonHeiles, ProblemKind::Nls, ProblemKind::Cpd][k];
        let eps = 10f64.powf(log_eps);
        let setup = Setup::new(kind, eps, 8).unwrap();
        let grid = TauGrid::new(32).unwrap();
        let field = TwoScaleField::new(setup.problem.clone(), grid.clone(), eps).unwrap();
        let mut rng = StdRng::seed_from_u64(seed);
        let values = common::random_state(&setup, &grid, &mut rng, 0.05);
        let state = TwoScaleState::new(grid, values.clone(), eps).unwrap();
        let scheme = if se2 { Scheme::Se2 } else { Scheme::Se1 };
        let cfg = SchemeConfig::new(scheme, h);
        let (fwd, _) = step(&state, &field, &cfg, None).unwrap();
        let (back, _) = step(&fwd.state, &field, &cfg.reversed(), None).unwrap();
        let d = back.state.values.sup_distance(&values);
        prop_assert!(d <= 1e-9, "{kind} {scheme}: {d:e}");
        prop_assert!((back.state.phase.value() - state.phase.value()).abs() <= 1e-9);
    }

    #[test]
    fn phase_matches_exact_reduction(h in 1e-3f64..10.0, log_eps in -9.0f64..0.0, n in 1u64..1000) {
        let eps = 10f64.powf(log_eps);
        let mut phase = Phase::zero();
        for _ in 0..n {
            phase.advance(h, eps);
        }
        let exact = exact_phase(n, h, eps);
        let d = (phase.value() - exact).abs();
        // values straddling 0 ≡ 2π are equal
        let d = d.min((d - 2.0 * std::f64::consts::PI).abs());
        prop_assert!(d <= 1e-12, "{d:e}");
    }
}
