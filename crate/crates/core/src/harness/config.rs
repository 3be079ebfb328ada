//! Run configuration: per-problem defaults, key-value files and overrides.
//!
//! A config file holds one `key = value` pair per line; `#` starts a
//! comment. List values are comma separated and `h` accepts fractions such
//! as `1/20`. Recognised keys:
//!
//! ```text
//! experiment   convergence | longtime | single
//! problem      henon_heiles | nls | cpd
//! scheme       SE1, SE2, FD, ME
//! eps          1, 1e-2, ...
//! h            1/10, 1/20, ...
//! t_end        1
//! n_tau        64
//! n_x          16
//! fp_tol       1e-10
//! fp_max_iter  200
//! avf_nodes    4
//! out          results.csv
//! threads      4
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrators::{Scheme, SchemeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    HenonHeiles,
    Nls,
    Cpd,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::HenonHeiles => "henon_heiles",
            ProblemKind::Nls => "nls",
            ProblemKind::Cpd => "cpd",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "henon_heiles" | "hh" => Ok(ProblemKind::HenonHeiles),
            "nls" => Ok(ProblemKind::Nls),
            "cpd" => Ok(ProblemKind::Cpd),
            other => Err(Error::config("problem", format!("unknown problem `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Convergence,
    Longtime,
    Single,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Convergence => "convergence",
            Experiment::Longtime => "longtime",
            Experiment::Single => "single",
        })
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "convergence" | "converge" => Ok(Experiment::Convergence),
            "longtime" => Ok(Experiment::Longtime),
            "single" => Ok(Experiment::Single),
            other => Err(Error::config("experiment", format!("unknown experiment `{other}`"))),
        }
    }
}

/// Fully resolved and validated settings of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub problem: ProblemKind,
    #[serde(serialize_with = "serialize_schemes")]
    pub schemes: Vec<Scheme>,
    pub eps: Vec<f64>,
    pub h: Vec<f64>,
    pub t_end: f64,
    pub n_tau: usize,
    /// Spatial grid size (NLS only).
    pub n_x: usize,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub avf_quad_nodes: usize,
    pub out: Option<PathBuf>,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

fn serialize_schemes<S: serde::Serializer>(v: &[Scheme], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

impl RunConfig {
    /// Defaults for `problem` and `experiment`.
    pub fn defaults(problem: ProblemKind, experiment: Experiment) -> Self {
        let (n_tau, n_x) = match problem {
            ProblemKind::Nls => (256, 16),
            _ => (64, 16),
        };
        let (schemes, eps, h, t_end) = match experiment {
            Experiment::Convergence => (
                vec![Scheme::Se1, Scheme::Se2],
                vec![1.0, 1e-2, 1e-4],
                vec![1.0 / 10.0, 1.0 / 20.0, 1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0],
                1.0,
            ),
            Experiment::Longtime => (
                Scheme::ALL.to_vec(),
                match problem {
                    ProblemKind::Cpd => vec![0.5, 0.1],
                    _ => vec![1e-1, 1e-2],
                },
                vec![1.0 / 5.0],
                100.0,
            ),
            Experiment::Single => (vec![Scheme::Se2], vec![1e-2], vec![1.0 / 20.0], 1.0),
        };
        Self {
            experiment,
            problem,
            schemes,
            eps,
            h,
            t_end,
            n_tau,
            n_x,
            fp_tol: SchemeConfig::DEFAULT_FP_TOL,
            fp_max_iter: SchemeConfig::DEFAULT_FP_MAX_ITER,
            avf_quad_nodes: SchemeConfig::DEFAULT_AVF_NODES,
            out: None,
            threads: None,
        }
    }

    /// Defaults, then `file`, then `flags`; later sources win.
    pub fn resolve(experiment: Experiment, file: &Overrides, flags: &Overrides) -> Result<Self> {
        let experiment = flags.experiment.or(file.experiment).unwrap_or(experiment);
        let problem = flags
            .problem
            .or(file.problem)
            .unwrap_or(ProblemKind::HenonHeiles);
        let mut cfg = Self::defaults(problem, experiment);
        file.apply(&mut cfg);
        flags.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: &[f64]| -> Result<()> {
            if v.is_empty() {
                return Err(Error::config(key, "list must not be empty"));
            }
            if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::config(key, "values must be positive"));
            }
            Ok(())
        };
        if self.schemes.is_empty() {
            return Err(Error::config("scheme", "list must not be empty"));
        }
        positive("eps", &self.eps)?;
        positive("h", &self.h)?;
        if self.eps.iter().any(|&e| e > 1.0) {
            return Err(Error::config("eps", "values must lie in (0, 1]"));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::config("t_end", "must be a finite number >= 0"));
        }
        if self.experiment != Experiment::Longtime && self.t_end == 0.0 {
            return Err(Error::config("t_end", "must be > 0"));
        }
        if self.n_tau % 2 != 0 {
            return Err(Error::config("n_tau", "n_tau must be even"));
        }
        if self.n_tau < 4 {
            return Err(Error::config("n_tau", "n_tau must be at least 4"));
        }
        if self.n_x % 2 != 0 || self.n_x < 4 {
            return Err(Error::config("n_x", "n_x must be even and at least 4"));
        }
        if !(self.fp_tol > 0.0) {
            return Err(Error::config("fp_tol", "must be > 0"));
        }
        if self.fp_max_iter == 0 {
            return Err(Error::config("fp_max_iter", "must be >= 1"));
        }
        if self.avf_quad_nodes < 2 {
            return Err(Error::config("avf_nodes", "must be >= 2"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be >= 1"));
        }
        Ok(())
    }

    pub fn scheme_config(&self, scheme: Scheme, h: f64) -> SchemeConfig {
        SchemeConfig {
            h,
            scheme,
            fp_tol: self.fp_tol,
            fp_max_iter: self.fp_max_iter,
            avf_quad_nodes: self.avf_quad_nodes,
        }
    }
}

/// Partially specified settings from a file or the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub problem: Option<ProblemKind>,
    pub schemes: Option<Vec<Scheme>>,
    pub eps: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
    pub t_end: Option<f64>,
    pub n_tau: Option<usize>,
    pub n_x: Option<usize>,
    pub fp_tol: Option<f64>,
    pub fp_max_iter: Option<usize>,
    pub avf_quad_nodes: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.schemes {
            cfg.schemes = v.clone();
        }
        if let Some(v) = &self.eps {
            cfg.eps = v.clone();
        }
        if let Some(v) = &self.h {
            cfg.h = v.clone();
        }
        if let Some(v) = self.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = self.n_tau {
            cfg.n_tau = v;
        }
        if let Some(v) = self.n_x {
            cfg.n_x = v;
        }
        if let Some(v) = self.fp_tol {
            cfg.fp_tol = v;
        }
        if let Some(v) = self.fp_max_iter {
            cfg.fp_max_iter = v;
        }
        if let Some(v) = self.avf_quad_nodes {
            cfg.avf_quad_nodes = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.threads {
            cfg.threads = Some(v);
        }
    }
}

/// A real number, optionally written as a fraction `a/b`.
pub fn parse_real(key: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::config(key, format!("`{s}` is not a number"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            Ok(a / b)
        }
        None => s.parse().map_err(|_| bad()),
    }
}

fn parse_usize(key: &str, s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(key, format!("`{}` is not a non-negative integer", s.trim())))
}

fn parse_list<T>(key: &str, s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let out = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(item)
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(Error::config(key, "list must not be empty"));
    }
    Ok(out)
}

/// Parse key-value config text.
pub fn parse_config(text: &str) -> Result<Overrides> {
    let mut o = Overrides::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(line, format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "experiment" => o.experiment = Some(value.parse()?),
            "problem" => o.problem = Some(value.parse()?),
            "scheme" | "schemes" => {
                o.schemes = Some(parse_list(key, value, |s| {
                    s.parse::<Scheme>().map_err(|e| Error::config("scheme", e.to_string()))
                })?)
            }
            "eps" => o.eps = Some(parse_list(key, value, |s| parse_real("eps", s))?),
            "h" => o.h = Some(parse_list(key, value, |s| parse_real("h", s))?),
            "t_end" => o.t_end = Some(parse_real(key, value)?),
            "n_tau" => o.n_tau = Some(parse_usize(key, value)?),
            "n_x" => o.n_x = Some(parse_usize(key, value)?),
            "fp_tol" => o.fp_tol = Some(parse_real(key, value)?),
            "fp_max_iter" => o.fp_max_iter = Some(parse_usize(key, value)?),
            "avf_nodes" | "avf_quad_nodes" => o.avf_quad_nodes = Some(parse_usize(key, value)?),
            "out" => o.out = Some(PathBuf::from(value)),
            "threads" => o.threads = Some(parse_usize(key, value)?),
            other => return Err(Error::config(other, "unknown key")),
        }
    }
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_problem_defaults() {
        let cfg =
            RunConfig::resolve(Experiment::Convergence, &Overrides::default(), &Overrides::default())
                .unwrap();
        assert_eq!(cfg.problem, ProblemKind::HenonHeiles);
        assert_eq!(cfg.n_tau, 64);
        assert_eq!(cfg.t_end, 1.0);
        assert_eq!(cfg.fp_tol, 1e-10);
        assert_eq!(cfg.fp_max_iter, 200);

        let nls = RunConfig::defaults(ProblemKind::Nls, Experiment::Convergence);
        assert_eq!((nls.n_tau, nls.n_x), (256, 16));
        let cpd = RunConfig::defaults(ProblemKind::Cpd, Experiment::Longtime);
        assert_eq!(cpd.eps, vec![0.5, 0.1]);
    }

    #[test]
    fn odd_n_tau_is_rejected() {
        let file = parse_config("n_tau = 7").unwrap();
        let err = RunConfig::resolve(Experiment::Single, &file, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("n_tau must be even"), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config("h = 1/10, 1/20\nproblem = nls # comment\n").unwrap();
        assert_eq!(file.h, Some(vec![0.1, 0.05]));
        let flags = Overrides {
            h: Some(vec![0.25]),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Experiment::Single, &file, &flags).unwrap();
        assert_eq!(cfg.h, vec![0.25]);
        assert_eq!(cfg.problem, ProblemKind::Nls);
    }

    #[test]
    fn unknown_key_names_the_key() {
        match parse_config("colour = blue").unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "colour"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_config("eps = abc").is_err());
        assert!(parse_config("just words").is_err());
    }
}
