//! Sweep runner behind the command-line tool.
//!
//! Each `(scheme, ε, h)` cell is an independent trajectory; cells run on a
//! rayon pool and their rows are collected in sweep order, so the output
//! does not depend on the thread count. A failing cell becomes a row with a
//! non-`ok` status.

mod config;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{parse_config, parse_real, Experiment, Overrides, ProblemKind, RunConfig};

use crate::diagnostics::{conservation_from_values, is_sampled, relative_solution_error, slope_fit};
use crate::error::{Error, Result};
use crate::integrators::{Integrator, Scheme};
use crate::oracles::{rk_adaptive, rk_cpd_physical, strang_splitting_nls, OdeTolerance};
use crate::problems::{
    cpd_from_canonical, cpd_to_canonical, invariants, make_cpd, make_henon_heiles, make_nls,
    nls_initial_data, CpdState, NlsProblem, ProblemRef, HENON_HEILES_U0,
};
use crate::spectral::{TauGrid, C64};

/// Below this ε the reference is the scheme itself on a finer step.
pub const SELF_REFERENCE_BELOW: f64 = 1e-5;

/// Self-reference step is the smallest tested step divided by this.
pub const SELF_REFERENCE_REFINEMENT: f64 = 16.0;

/// A problem instance at a fixed ε together with its initial value.
#[derive(Clone)]
pub struct Setup {
    pub kind: ProblemKind,
    pub eps: f64,
    pub problem: ProblemRef,
    /// The same problem with its concrete type, for the splitting oracle.
    pub nls: Option<Arc<NlsProblem>>,
    /// Initial value in the integrator's coordinates.
    pub u0: Vec<C64>,
}

impl Setup {
    pub fn new(kind: ProblemKind, eps: f64, n_x: usize) -> Result<Self> {
        let real = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();
        Ok(match kind {
            ProblemKind::HenonHeiles => Self {
                kind,
                eps,
                problem: Arc::new(make_henon_heiles()),
                nls: None,
                u0: real(&HENON_HEILES_U0),
            },
            ProblemKind::Cpd => {
                let (q, p) = cpd_to_canonical(&CpdState::DEFAULT, eps);
                Self {
                    kind,
                    eps,
                    problem: Arc::new(make_cpd(eps)?),
                    nls: None,
                    u0: real(&[q[0], q[1], p[0], p[1]]),
                }
            }
            ProblemKind::Nls => {
                let p = Arc::new(make_nls(n_x)?);
                Self {
                    kind,
                    eps,
                    problem: p.clone(),
                    nls: Some(p),
                    u0: nls_initial_data(n_x),
                }
            }
        })
    }

    /// Map a state to the coordinates errors are measured in: `(x, v)` for
    /// CPD, unchanged otherwise.
    pub fn physical(&self, u: &[C64]) -> Vec<C64> {
        match self.kind {
            ProblemKind::Cpd => {
                let s = cpd_from_canonical([u[0].re, u[1].re], [u[2].re, u[3].re], self.eps);
                [s.x[0], s.x[1], s.v[0], s.v[1]]
                    .iter()
                    .map(|&x| C64::new(x, 0.0))
                    .collect()
            }
            _ => u.to_vec(),
        }
    }
}

/// Number of steps of size `h` in `[0, t_end]`; must be an integer.
pub fn step_count(t_end: f64, h: f64) -> Result<usize> {
    let ratio = t_end / h;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-8 * n.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "t_end / h = {ratio} is not an integer"
        )));
    }
    Ok(n as usize)
}

/// Final state of one trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Extracted solution at `t_end`, integrator coordinates.
    pub solution: Vec<C64>,
    pub steps: usize,
    pub fp_iter_mean: f64,
}

/// Integrate from the prepared data to `t_end`, calling `observe(n, it)`
/// after every step (and once before the first).
pub fn integrate(
    setup: &Setup,
    cfg: &RunConfig,
    scheme: Scheme,
    h: f64,
    t_end: f64,
    mut observe: impl FnMut(usize, &Integrator) -> Result<()>,
) -> Result<Trajectory> {
    let steps = step_count(t_end, h)?;
    let grid = TauGrid::new(cfg.n_tau)?;
    let mut it = Integrator::prepared(
        setup.problem.clone(),
        grid,
        setup.eps,
        &setup.u0,
        cfg.scheme_config(scheme, h),
    )?;
    observe(0, &it)?;
    for n in 1..=steps {
        it.step()?;
        observe(n, &it)?;
    }
    Ok(Trajectory {
        solution: it.solution()?,
        steps,
        fp_iter_mean: if steps == 0 {
            0.0
        } else {
            it.fp_iterations() as f64 / steps as f64
        },
    })
}

/// How the reference solution of a convergence cell is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    RungeKutta(OdeTolerance),
    Strang { dt: f64 },
    /// The scheme under test at step `h`.
    SelfReference { h: f64 },
}

/// Reference policy for a sweep whose smallest step is `h_min`.
pub fn reference_policy(kind: ProblemKind, eps: f64, h_min: f64, t_end: f64) -> Reference {
    if eps < SELF_REFERENCE_BELOW {
        return Reference::SelfReference {
            h: h_min / SELF_REFERENCE_REFINEMENT,
        };
    }
    match kind {
        ProblemKind::Nls => {
            let target = eps.min(h_min) / 100.0;
            let n = (t_end / target).ceil().max(1.0);
            Reference::Strang { dt: t_end / n }
        }
        _ => Reference::RungeKutta(oracle_tolerance(eps)),
    }
}

/// RK tolerance for a reference at `ε`: the global error of the adaptive
/// solver grows like `rtol · t/ε`, so `rtol` shrinks with `ε`.
pub fn oracle_tolerance(eps: f64) -> OdeTolerance {
    let rtol = (1e-10 * eps).clamp(1e-14, 1e-10);
    OdeTolerance {
        rtol,
        atol: 1e-2 * rtol,
        max_steps: 500_000_000,
    }
}

/// Reference solution at `t_end`, in the coordinates of [`Setup::physical`].
pub fn reference_solution(
    setup: &Setup,
    cfg: &RunConfig,
    scheme: Scheme,
    policy: Reference,
    t_end: f64,
) -> Result<Vec<C64>> {
    match policy {
        Reference::RungeKutta(tol) if setup.kind == ProblemKind::Cpd => {
            let s = rk_cpd_physical(&CpdState::DEFAULT, setup.eps, t_end, &tol)?;
            Ok([s.x[0], s.x[1], s.v[0], s.v[1]]
                .iter()
                .map(|&a| C64::new(a, 0.0))
                .collect())
        }
        Reference::RungeKutta(tol) => {
            rk_adaptive(setup.problem.as_ref(), &setup.u0, setup.eps, t_end, &tol)
        }
        Reference::Strang { dt } => {
            let nls = setup
                .nls
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("splitting oracle needs the NLS problem".into()))?;
            strang_splitting_nls(nls, &setup.u0, setup.eps, dt, t_end)
        }
        Reference::SelfReference { h } => {
            let tr = integrate(setup, cfg, scheme, h, t_end, |_, _| Ok(()))?;
            Ok(setup.physical(&tr.solution))
        }
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: Experiment,
    pub problem: ProblemKind,
    pub scheme: String,
    pub eps: f64,
    pub h: f64,
    pub t: f64,
    pub err: Option<f64>,
    pub slope: Option<f64>,
    #[serde(rename = "err_H")]
    pub err_h: Option<f64>,
    #[serde(rename = "err_I")]
    pub err_i: Option<f64>,
    #[serde(rename = "err_M")]
    pub err_m: Option<f64>,
    pub fp_iter_mean: Option<f64>,
    pub status: String,
}

impl Row {
    fn new(cfg: &RunConfig, scheme: Scheme, eps: f64, h: f64, t: f64) -> Self {
        Self {
            experiment: cfg.experiment,
            problem: cfg.problem,
            scheme: scheme.to_string(),
            eps,
            h,
            t,
            err: None,
            slope: None,
            err_h: None,
            err_i: None,
            err_m: None,
            fp_iter_mean: None,
            status: "ok".into(),
        }
    }

    fn failed(mut self, e: &Error) -> Self {
        self.status = match e {
            Error::Divergence { .. } => format!("blowup: {e}"),
            _ => format!("error: {e}"),
        };
        self
    }
}

/// Fitted order of one `(scheme, ε)` group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeSummary {
    pub scheme: String,
    pub eps: f64,
    pub slope: Option<f64>,
    /// `max_h err(h)/h²`.
    pub max_err_over_h2: Option<f64>,
}

/// Result of an invocation.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub config: RunConfig,
    pub rows: Vec<Row>,
    pub slopes: Vec<SlopeSummary>,
}

pub const CSV_HEADER: &str =
    "experiment,problem,scheme,eps,h,t,err,slope,err_H,err_I,err_M,fp_iter_mean,status";

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        let mut text = String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))?;
        if self.rows.is_empty() {
            text = format!("{CSV_HEADER}\n");
        }
        Ok(text)
    }

    /// Resolved configuration and fitted slopes as JSON.
    pub fn sidecar_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            config: &'a RunConfig,
            slopes: &'a [SlopeSummary],
            rows: usize,
        }
        serde_json::to_string_pretty(&Sidecar {
            config: &self.config,
            slopes: &self.slopes,
            rows: self.rows.len(),
        })
        .map_err(|e| Error::Io(e.to_string()))
    }

    /// Write the CSV to `path` and the sidecar next to it (`.json`).
    pub fn write_to(&self, path: &Path) -> Result<PathBuf> {
        std::fs::write(path, self.to_csv()?)?;
        let sidecar = path.with_extension("json");
        std::fs::write(&sidecar, self.sidecar_json()? + "\n")?;
        Ok(sidecar)
    }
}

fn cells(cfg: &RunConfig) -> Vec<(Scheme, f64, f64)> {
    let mut out = Vec::new();
    for &s in &cfg.schemes {
        for &e in &cfg.eps {
            for &h in &cfg.h {
                out.push((s, e, h));
            }
        }
    }
    out
}

/// Error at `t_end` against the reference, for every cell, plus per-group slopes.
pub fn run_convergence(cfg: &RunConfig) -> Result<Table> {
    cfg.validate()?;
    let h_min = cfg.h.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_end = cfg.t_end;

    // external oracles are shared across schemes
    let oracles: Vec<Result<Option<(Setup, Vec<C64>)>>> = cfg
        .eps
        .par_iter()
        .map(|&eps| {
            let setup = Setup::new(cfg.problem, eps, cfg.n_x)?;
            match reference_policy(cfg.problem, eps, h_min, t_end) {
                Reference::SelfReference { .. } => Ok(None),
                policy => {
                    let r = reference_solution(&setup, cfg, cfg.schemes[0], policy, t_end)?;
                    Ok(Some((setup, r)))
                }
            }
        })
        .collect();

    let groups: Vec<(Scheme, usize)> = cfg
        .schemes
        .iter()
        .flat_map(|&s| (0..cfg.eps.len()).map(move |k| (s, k)))
        .collect();

    let results: Vec<(Vec<Row>, SlopeSummary)> = groups
        .par_iter()
        .map(|&(scheme, k)| {
            let eps = cfg.eps[k];
            let reference: Result<(Setup, Vec<C64>)> = match &oracles[k] {
                Ok(Some(pair)) => Ok(pair.clone()),
                Ok(None) => Setup::new(cfg.problem, eps, cfg.n_x).and_then(|setup| {
                    let policy = reference_policy(cfg.problem, eps, h_min, t_end);
                    let r = reference_solution(&setup, cfg, scheme, policy, t_end)?;
                    Ok((setup, r))
                }),
                Err(e) => Err(e.clone()),
            };
            let rows: Vec<Row> = cfg
                .h
                .par_iter()
                .map(|&h| {
                    let row = Row::new(cfg, scheme, eps, h, t_end);
                    let measured = reference.as_ref().map_err(Clone::clone).and_then(|(setup, r)| {
                        let tr = integrate(setup, cfg, scheme, h, t_end, |_, _| Ok(()))?;
                        let err =
                            relative_solution_error(&setup.physical(&tr.solution), r)?;
                        Ok((err, tr.fp_iter_mean))
                    });
                    match measured {
                        Ok((err, fp)) => Row {
                            err: Some(err),
                            fp_iter_mean: Some(fp),
                            ..row
                        },
                        Err(e) => row.failed(&e),
                    }
                })
                .collect();
            let ok: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| r.err.filter(|e| *e > 0.0).map(|e| (r.h, e)))
                .collect();
            let slope = if ok.len() == rows.len() {
                let (hs, es): (Vec<f64>, Vec<f64>) = ok.iter().cloned().unzip();
                slope_fit(&hs, &es).ok()
            } else {
                None
            };
            let max_ratio = ok.iter().map(|(h, e)| e / (h * h)).reduce(f64::max);
            let rows = rows.into_iter().map(|r| Row { slope, ..r }).collect();
            let summary = SlopeSummary {
                scheme: scheme.to_string(),
                eps,
                slope,
                max_err_over_h2: max_ratio,
            };
            (rows, summary)
        })
        .collect();

    let (rows, slopes): (Vec<Vec<Row>>, Vec<SlopeSummary>) = results.into_iter().unzip();
    Ok(Table {
        config: cfg.clone(),
        rows: rows.into_iter().flatten().collect(),
        slopes,
    })
}

/// Sampled `(t, H, I, m)` of one long run and how it ended.
#[derive(Debug, Clone)]
pub struct LongRun {
    pub samples: Vec<(f64, f64, f64, f64)>,
    pub fp_iter_mean: f64,
    /// Set when the run stopped early (blow-up or another failure).
    pub failure: Option<Error>,
}

/// Integrate one cell to `t_end`, sampling the invariants of the extracted
/// solution every `⌈steps/2000⌉` steps.
pub fn long_run(setup: &Setup, cfg: &RunConfig, scheme: Scheme, h: f64, t_end: f64) -> LongRun {
    let mut samples = Vec::new();
    let mut fp_total = 0usize;
    let mut taken = 0usize;
    let result = step_count(t_end, h).and_then(|steps| {
        integrate(setup, cfg, scheme, h, t_end, |n, it| {
            taken = n;
            fp_total = it.fp_iterations();
            if is_sampled(n, steps) {
                let u = it.solution()?;
                let q = invariants(setup.problem.as_ref(), &u, setup.eps)?;
                if !(q.h.is_finite() && q.i.is_finite() && q.m.is_finite()) {
                    return Err(Error::Divergence {
                        step: Some(n as u64),
                        iterations: 0,
                    });
                }
                samples.push((it.state().t, q.h, q.i, q.m));
            }
            Ok(())
        })
    });
    LongRun {
        samples,
        fp_iter_mean: if taken == 0 { 0.0 } else { fp_total as f64 / taken as f64 },
        failure: result.err(),
    }
}

/// Conservation series for every cell.
pub fn run_longtime(cfg: &RunConfig) -> Result<Table> {
    cfg.validate()?;
    let rows: Vec<Vec<Row>> = cells(cfg)
        .par_iter()
        .map(|&(scheme, eps, h)| {
            let base = Row::new(cfg, scheme, eps, h, 0.0);
            let setup = match Setup::new(cfg.problem, eps, cfg.n_x) {
                Ok(s) => s,
                Err(e) => return vec![base.failed(&e)],
            };
            let run = long_run(&setup, cfg, scheme, h, cfg.t_end);
            let mut rows = match conservation_from_values(&run.samples) {
                Ok(records) => records
                    .iter()
                    .map(|r| Row {
                        t: r.t,
                        err_h: Some(r.err_h),
                        err_i: Some(r.err_i),
                        err_m: Some(r.err_m),
                        fp_iter_mean: Some(run.fp_iter_mean),
                        ..base.clone()
                    })
                    .collect(),
                Err(_) => Vec::new(),
            };
            if let Some(e) = &run.failure {
                let t = rows.last().map_or(0.0, |r| r.t);
                rows.push(Row { t, ..base.clone() }.failed(e));
            }
            rows
        })
        .collect();
    Ok(Table {
        config: cfg.clone(),
        rows: rows.into_iter().flatten().collect(),
        slopes: Vec::new(),
    })
}

/// Error against the reference and invariant drift at `t_end`, per cell.
pub fn run_single(cfg: &RunConfig) -> Result<Table> {
    cfg.validate()?;
    let h_min = cfg.h.iter().cloned().fold(f64::INFINITY, f64::min);
    let rows: Vec<Row> = cells(cfg)
        .par_iter()
        .map(|&(scheme, eps, h)| {
            let row = Row::new(cfg, scheme, eps, h, cfg.t_end);
            let measured = (|| {
                let setup = Setup::new(cfg.problem, eps, cfg.n_x)?;
                let policy = reference_policy(cfg.problem, eps, h_min, cfg.t_end);
                let reference = reference_solution(&setup, cfg, scheme, policy, cfg.t_end)?;
                let tr = integrate(&setup, cfg, scheme, h, cfg.t_end, |_, _| Ok(()))?;
                let err = relative_solution_error(
                    &setup.physical(&tr.solution),
                    &reference,
                )?;
                let q0 = invariants(setup.problem.as_ref(), &setup.u0, eps)?;
                let q1 = invariants(setup.problem.as_ref(), &tr.solution, eps)?;
                let recs =
                    conservation_from_values(&[(0.0, q0.h, q0.i, q0.m), (cfg.t_end, q1.h, q1.i, q1.m)])?;
                Ok::<_, Error>((err, recs[1], tr.fp_iter_mean))
            })();
            match measured {
                Ok((err, rec, fp)) => Row {
                    err: Some(err),
                    err_h: Some(rec.err_h),
                    err_i: Some(rec.err_i),
                    err_m: Some(rec.err_m),
                    fp_iter_mean: Some(fp),
                    ..row
                },
                Err(e) => row.failed(&e),
            }
        })
        .collect();
    Ok(Table {
        config: cfg.clone(),
        rows,
        slopes: Vec::new(),
    })
}

/// Run the configured experiment on a pool of `cfg.threads` workers.
pub fn run(cfg: &RunConfig) -> Result<Table> {
    let go = || match cfg.experiment {
        Experiment::Convergence => run_convergence(cfg),
        Experiment::Longtime => run_longtime(cfg),
        Experiment::Single => run_single(cfg),
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Resource(e.to_string()))?
            .install(go),
        None => go(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_requires_integer_ratio() {
        assert_eq!(step_count(1.0, 0.1).unwrap(), 10);
        assert_eq!(step_count(1.0, 1.0 / 160.0).unwrap(), 160);
        assert!(step_count(1.0, 0.3).is_err());
        assert_eq!(step_count(0.0, 0.2).unwrap(), 0);
    }

    #[test]
    fn cpd_physical_round_trip() {
        let setup = Setup::new(ProblemKind::Cpd, 0.1, 16).unwrap();
        let x = setup.physical(&setup.u0);
        let want = [0.8, 0.9, 0.5, 0.6];
        for (a, b) in x.iter().zip(want) {
            assert!((a.re - b).abs() < 1e-14);
        }
    }

    #[test]
    fn policy_switches_to_self_reference() {
        let p = reference_policy(ProblemKind::HenonHeiles, 1e-6, 1.0 / 160.0, 1.0);
        assert_eq!(p, Reference::SelfReference { h: 1.0 / 2560.0 });
        assert!(matches!(
            reference_policy(ProblemKind::HenonHeiles, 1e-2, 0.1, 1.0),
            Reference::RungeKutta(_)
        ));
        match reference_policy(ProblemKind::Nls, 0.5, 0.01, 1.0) {
            Reference::Strang { dt } => assert!((dt - 1e-4).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_table_still_has_header() {
        let cfg = RunConfig::defaults(ProblemKind::HenonHeiles, Experiment::Single);
        let t = Table {
            config: cfg,
            rows: vec![],
            slopes: vec![],
        };
        assert_eq!(t.to_csv().unwrap(), format!("{CSV_HEADER}\n"));
    }
}
