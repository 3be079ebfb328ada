use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use twoscale::harness::{parse_config, parse_real, run, Experiment, Overrides, RunConfig};
use twoscale::{Error, Scheme};

/// Two-scale integrators for highly oscillatory Hamiltonian systems.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error at t_end against a reference for every (scheme, eps, h), with fitted slopes.
    Converge(Flags),
    /// Sampled conservation errors of long trajectories.
    Longtime(Flags),
    /// Error and invariant drift of individual runs.
    Single(Flags),
}

#[derive(Args)]
struct Flags {
    /// henon_heiles, nls or cpd.
    #[arg(long)]
    problem: Option<String>,
    /// SE1, SE2, FD or ME (repeatable).
    #[arg(long)]
    scheme: Vec<String>,
    /// Repeatable.
    #[arg(long)]
    eps: Vec<String>,
    /// Step size, fractions allowed (repeatable).
    #[arg(long)]
    h: Vec<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    n_tau: Option<usize>,
    #[arg(long)]
    n_x: Option<usize>,
    #[arg(long)]
    fp_tol: Option<String>,
    #[arg(long)]
    fp_max_iter: Option<usize>,
    #[arg(long)]
    avf_nodes: Option<usize>,
    /// CSV output; a JSON sidecar is written next to it. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key-value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn reals(key: &str, v: &[String]) -> twoscale::Result<Option<Vec<f64>>> {
    if v.is_empty() {
        return Ok(None);
    }
    v.iter().map(|s| parse_real(key, s)).collect::<Result<_, _>>().map(Some)
}

impl Flags {
    fn overrides(&self) -> twoscale::Result<Overrides> {
        let schemes = if self.scheme.is_empty() {
            None
        } else {
            Some(
                self.scheme
                    .iter()
                    .map(|s| {
                        s.parse::<Scheme>().map_err(|e| Error::Config {
                            key: "scheme".into(),
                            message: e.to_string(),
                        })
                    })
                    .collect::<Result<_, _>>()?,
            )
        };
        Ok(Overrides {
            experiment: None,
            problem: self.problem.as_deref().map(str::parse).transpose()?,
            schemes,
            eps: reals("eps", &self.eps)?,
            h: reals("h", &self.h)?,
            t_end: self.t_end.as_deref().map(|s| parse_real("t_end", s)).transpose()?,
            n_tau: self.n_tau,
            n_x: self.n_x,
            fp_tol: self.fp_tol.as_deref().map(|s| parse_real("fp_tol", s)).transpose()?,
            fp_max_iter: self.fp_max_iter,
            avf_quad_nodes: self.avf_nodes,
            out: self.out.clone(),
            threads: self.threads,
        })
    }
}

fn resolve(experiment: Experiment, flags: &Flags) -> twoscale::Result<RunConfig> {
    let file = match &flags.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => Overrides::default(),
    };
    // the subcommand fixes the experiment
    let file = Overrides {
        experiment: None,
        ..file
    };
    RunConfig::resolve(experiment, &file, &flags.overrides()?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, flags) = match &cli.command {
        Command::Converge(f) => (Experiment::Convergence, f),
        Command::Longtime(f) => (Experiment::Longtime, f),
        Command::Single(f) => (Experiment::Single, f),
    };
    let outcome = resolve(experiment, flags).and_then(|cfg| {
        let table = run(&cfg)?;
        match &cfg.out {
            Some(path) => {
                let sidecar = table.write_to(path)?;
                eprintln!(
                    "wrote {} rows to {} ({})",
                    table.rows.len(),
                    path.display(),
                    sidecar.display()
                );
            }
            None => print!("{}", table.to_csv()?),
        }
        for s in &table.slopes {
            if let Some(slope) = s.slope {
                eprintln!("{} eps={:e}: slope {slope:.3}", s.scheme, s.eps);
            }
        }
        Ok(())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
