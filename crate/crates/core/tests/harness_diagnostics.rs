use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use twoscale::diagnostics::{conservation_from_values, relative_solution_error, slope_fit};
use twoscale::harness::{
    parse_config, run, Experiment, Overrides, ProblemKind, RunConfig, CSV_HEADER,
};
use twoscale::{Scheme, C64};

proptest! {
    #[test]
    fn relative_error_is_scale_invariant(
        a in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
        b in prop::collection::vec((0.1f64..1.0, -1.0f64..1.0), 6),
        s in 1e-6f64..1e6,
    ) {
        let to = |v: &[(f64, f64)], s: f64| v.iter().map(|&(x, y)| C64::new(x, y) * s).collect::<Vec<_>>();
        let e1 = relative_solution_error(&to(&a, 1.0), &to(&b, 1.0)).unwrap();
        let e2 = relative_solution_error(&to(&a, s), &to(&b, s)).unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-12 * e1.max(1.0));
    }

    #[test]
    fn conservation_is_relative_to_first_sample(
        vals in prop::collection::vec((0.5f64..2.0, 0.5f64..2.0, 0.5f64..2.0), 2..20),
        shift in 0.0f64..10.0,
    ) {
        let samples: Vec<_> = vals.iter().enumerate().map(|(k, &(h, i, m))| (k as f64 + shift, h, i, m)).collect();
        let recs = conservation_from_values(&samples).unwrap();
        prop_assert_eq!(recs[0].err_h, 0.0);
        prop_assert_eq!(recs[0].err_m, 0.0);
        for (r, s) in recs.iter().zip(&samples) {
            prop_assert!((r.err_i - (s.2 - samples[0].2).abs() / samples[0].2).abs() <= 1e-15);
            prop_assert!(!r.abs_h);
        }
    }

    #[test]
    fn slope_fit_recovers_power_law(c in 1e-6f64..1e3, p in 0.5f64..4.0) {
        let h = [0.1f64, 0.05, 0.025, 0.0125];
        let e: Vec<f64> = h.iter().map(|x| c * x.powf(p)).collect();
        prop_assert!((slope_fit(&h, &e).unwrap() - p).abs() <= 1e-10);
    }
}

#[test]
fn zero_initial_invariant_gives_absolute_drift() {
    let recs = conservation_from_values(&[(0.0, 0.0, 1.0, 1.0), (1.0, 1e-3, 1.0, 1.0)]).unwrap();
    assert!(recs[1].abs_h);
    assert_eq!(recs[1].err_h, 1e-3);
}

#[test]
fn slope_fit_tolerates_noise() {
    let mut rng = StdRng::seed_from_u64(11);
    let h: Vec<f64> = (0..5).map(|k| 0.1 / 2f64.powi(k)).collect();
    let e: Vec<f64> = h
        .iter()
        .map(|x| 0.3 * x * x * (1.0 + rng.gen_range(-0.05..0.05)))
        .collect();
    let s = slope_fit(&h, &e).unwrap();
    assert!((1.95..=2.05).contains(&s), "{s}");
}

#[test]
fn slope_fit_rejects_bad_input() {
    assert!(slope_fit(&[0.1, 0.05], &[1.0, 0.25]).is_err());
    assert!(slope_fit(&[0.1, 0.05, 0.025], &[1.0, 0.0, 0.1]).is_err());
}

fn small_convergence() -> RunConfig {
    let mut cfg = RunConfig::defaults(ProblemKind::HenonHeiles, Experiment::Convergence);
    cfg.eps = vec![1.0, 1e-2];
    cfg.h = vec![0.2, 0.1, 0.05];
    cfg.t_end = 0.4;
    cfg.n_tau = 16;
    cfg
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut one = small_convergence();
    one.threads = Some(1);
    let mut four = small_convergence();
    four.threads = Some(4);
    let a = run(&one).unwrap();
    let b = run(&four).unwrap();
    assert_eq!(a.rows.len(), 12);
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!((x.scheme.as_str(), x.eps, x.h), (y.scheme.as_str(), y.eps, y.h));
        assert_eq!(x.err, y.err);
    }
    assert_eq!(a.slopes, b.slopes);
}

#[test]
fn csv_has_header_and_one_line_per_row() {
    let table = run(&small_convergence()).unwrap();
    let csv = table.to_csv().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), table.rows.len());
    let json: serde_json::Value = serde_json::from_str(&table.sidecar_json().unwrap()).unwrap();
    assert_eq!(json["rows"], 12);
    assert_eq!(json["slopes"].as_array().unwrap().len(), 4);
}

#[test]
fn single_cell_table() {
    let mut cfg = RunConfig::defaults(ProblemKind::Cpd, Experiment::Single);
    cfg.t_end = 0.2;
    cfg.n_tau = 16;
    let table = run(&cfg).unwrap();
    assert_eq!(table.rows.len(), 1);
    let row = &table.rows[0];
    assert_eq!(row.status, "ok");
    assert!(row.err.unwrap() < 1e-2);
    assert!(row.err_h.is_some());
}

#[test]
fn longtime_with_zero_horizon_has_only_the_initial_sample() {
    let mut cfg = RunConfig::defaults(ProblemKind::HenonHeiles, Experiment::Longtime);
    cfg.schemes = vec![Scheme::Se2];
    cfg.eps = vec![0.1];
    cfg.t_end = 0.0;
    cfg.n_tau = 16;
    let table = run(&cfg).unwrap();
    assert!(table.rows.iter().all(|r| r.t == 0.0 && r.err_h == Some(0.0)));
}

#[test]
fn flags_override_config_file() {
    let file = parse_config("problem = nls\neps = 1e-2, 1/1000\nh = 1/10\n# comment\nthreads = 2\n").unwrap();
    let flags = Overrides {
        eps: Some(vec![0.5]),
        ..Overrides::default()
    };
    let cfg = RunConfig::resolve(Experiment::Single, &file, &flags).unwrap();
    assert_eq!(cfg.problem, ProblemKind::Nls);
    assert_eq!(cfg.eps, vec![0.5]);
    assert_eq!(cfg.h, vec![0.1]);
    assert_eq!(cfg.threads, Some(2));
    assert_eq!(cfg.n_tau, 256);
}

#[test]
fn unknown_config_key_is_rejected() {
    assert!(parse_config("stepsize = 0.1").is_err());
    assert!(parse_config("h = abc").is_err());
}
