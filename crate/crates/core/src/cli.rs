//! The `markovdyn` command line: `analyze`, `simulate`, `plot`, `sample`.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid
//! matrix or failed spectral analysis, 4 output write failure, 5 plotting a
//! chain that is not two-dimensional.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::chain_spec::{self, ChainSpec};
use crate::dynamics::{self, ConvergenceReport};
use crate::export::{self, TrajectorySet};
use crate::matrix::{StochasticMatrix, Vector};
use crate::montecarlo;
use crate::numfmt;
use crate::spectral::{self, Spectrum};
use crate::svg::{self, Viewport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_WRITE: i32 = 4;
pub const EXIT_DIMENSION: i32 = 5;

const DIGITS: usize = 12;
const DEFAULT_TOL: f64 = 0.02;
const DEFAULT_SAMPLE_STEPS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(
    name = "markovdyn",
    version,
    about = "Analyze and simulate column-stochastic linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the spectrum, stationary distribution and per-state convergence.
    Analyze {
        spec: PathBuf,
        /// Distance to the steady state that counts as converged.
        #[arg(long, default_value_t = DEFAULT_TOL, value_parser = positive_f64)]
        tol: f64,
    },
    /// Write every trajectory as CSV.
    Simulate {
        spec: PathBuf,
        /// Overrides the spec's step count.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Draw the phase plane of a two-state chain as SVG.
    Plot {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare random-walk visit frequencies with the stationary distribution.
    Sample {
        spec: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        walks: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_STEPS)]
        steps: usize,
        /// Base seed; walk `w` uses `seed + w`. Defaults to the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err("must be positive and finite".to_string())
    }
}

/// A failed command: its exit code and the message for stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing the
/// report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return EXIT_INPUT;
            }
            let _ = write!(out, "{text}");
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Analyze { spec, tol } => cmd_analyze(&spec, tol, out),
        Command::Simulate {
            spec,
            steps,
            output,
        } => cmd_simulate(&spec, steps, &output),
        Command::Plot { spec, output } => cmd_plot(&spec, &output),
        Command::Sample {
            spec,
            walks,
            steps,
            seed,
        } => cmd_sample(&spec, walks, steps, seed, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load(path: &Path) -> Result<(ChainSpec, StochasticMatrix), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
    let (spec, locs) = chain_spec::parse_with_locations(&text)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    let a = chain_spec::validate_matrix(&spec, &locs)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("{}: {e}", path.display())))?;
    Ok((spec, a))
}

/// Named initials followed by the seeded random ones, named `rand_1`,
/// `rand_2`, … with any name already taken skipped.
fn all_initials(spec: &ChainSpec) -> Vec<(String, Vector)> {
    let mut out: Vec<(String, Vector)> = spec
        .initials
        .iter()
        .map(|i| (i.name.clone(), i.state.clone()))
        .collect();
    let randoms =
        montecarlo::random_initial_states(spec.matrix.rows(), spec.random_initials, spec.seed);
    let mut suffix = 0usize;
    for x in randoms {
        let name = loop {
            suffix += 1;
            let candidate = format!("rand_{suffix}");
            if !out.iter().any(|(n, _)| *n == candidate) {
                break candidate;
            }
        };
        out.push((name, x));
    }
    out
}

fn trajectories(
    a: &StochasticMatrix,
    spec: &ChainSpec,
    steps: usize,
) -> Result<Option<TrajectorySet>, Failure> {
    let initials = all_initials(spec);
    if initials.is_empty() {
        return Ok(None);
    }
    let entries = initials
        .into_iter()
        .map(|(name, x0)| {
            dynamics::iterate_trajectory(a, &x0, steps)
                .map(|t| (name, t))
                .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    TrajectorySet::new(entries)
        .map(Some)
        .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))
}

/// Writes through a temporary file in the target directory, so a failed
/// run never leaves a partial file behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let fail = |e: &dyn std::fmt::Display| {
        Failure::new(EXIT_WRITE, format!("cannot write {}: {e}", path.display()))
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| fail(&e))?;
    tmp.flush().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

fn list(v: &Vector) -> String {
    numfmt::join(v.iter().copied(), DIGITS, ", ")
}

fn num(x: f64) -> String {
    numfmt::significant(x, DIGITS)
}

/// Collects report lines; errors are reported inline and remembered.
struct Report<'a> {
    out: &'a mut dyn Write,
    first_error: Option<String>,
}

impl Report<'_> {
    fn line(&mut self, key: &str, value: &str) {
        let _ = writeln!(self.out, "{key} = {value}");
    }

    fn error(&mut self, key: &str, message: String) {
        self.line(key, &format!("error: {message}"));
        if self.first_error.is_none() {
            self.first_error = Some(format!("{key}: {message}"));
        }
    }

    fn finish(self) -> Result<(), Failure> {
        match self.first_error {
            None => Ok(()),
            Some(m) => Err(Failure::new(EXIT_INVALID, m)),
        }
    }
}

fn cmd_analyze(path: &Path, tol: f64, out: &mut dyn Write) -> Result<(), Failure> {
    let (spec, a) = load(path)?;
    let n = a.dim();
    let mut r = Report {
        out,
        first_error: None,
    };
    r.line("dim", &n.to_string());
    for i in 0..n {
        let row = a.as_matrix().row(i);
        r.line(
            &format!("matrix_row_{i}"),
            &numfmt::join(row.iter().copied(), DIGITS, ", "),
        );
    }

    let spectrum = match spectral::eigen_decompose(&a) {
        Ok(s) => {
            for (i, p) in s.pairs().iter().enumerate() {
                r.line(&format!("lambda_{}", i + 1), &num(p.value));
            }
            for (i, p) in s.pairs().iter().enumerate() {
                r.line(&format!("v_{}", i + 1), &list(&p.vector));
            }
            Some(s)
        }
        Err(e) => {
            r.error("spectrum", e.to_string());
            None
        }
    };

    match dynamics::stationary_distribution(&a) {
        Ok(pi) => r.line("stationary", &list(&pi)),
        Err(e) => r.error("stationary", e.to_string()),
    }

    r.line("tol", &num(tol));
    for (name, x0) in all_initials(&spec) {
        r.line(&format!("initial.{name}"), &list(&x0));
        let Some(s) = &spectrum else { continue };
        match initial_report(s, &x0, tol) {
            Ok((coeffs, report)) => {
                r.line(
                    &format!("coeffs.{name}"),
                    &numfmt::join(coeffs, DIGITS, ", "),
                );
                r.line(&format!("steady_state.{name}"), &list(&report.steady_state));
                r.line(&format!("rate.{name}"), &num(report.rate));
                r.line(
                    &format!("steps_to_tol.{name}"),
                    &report.steps_to_tol.to_string(),
                );
            }
            Err(m) => r.error(&format!("convergence.{name}"), m),
        }
    }
    r.finish()
}

fn initial_report(
    s: &Spectrum,
    x0: &Vector,
    tol: f64,
) -> Result<(Vec<f64>, ConvergenceReport), String> {
    let c = spectral::decompose_in_eigenbasis(s, x0).map_err(|e| e.to_string())?;
    let report = dynamics::convergence_report(s, &c, tol).map_err(|e| e.to_string())?;
    Ok((c.coeffs, report))
}

fn cmd_simulate(path: &Path, steps: Option<usize>, output: &Path) -> Result<(), Failure> {
    let (spec, a) = load(path)?;
    let steps = steps.unwrap_or(spec.steps);
    let ts = trajectories(&a, &spec, steps)?
        .ok_or_else(|| Failure::new(EXIT_INVALID, "spec declares no initial states"))?;
    write_atomic(output, &export::write_trajectory_csv(&ts))
}

fn cmd_plot(path: &Path, output: &Path) -> Result<(), Failure> {
    let (spec, a) = load(path)?;
    if a.dim() != 2 {
        return Err(Failure::new(
            EXIT_DIMENSION,
            format!("plotting needs a 2-state chain, got {} states", a.dim()),
        ));
    }
    let spectrum =
        spectral::eigen_decompose(&a).map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
    let ts = trajectories(&a, &spec, spec.steps)?
        .ok_or_else(|| Failure::new(EXIT_INVALID, "spec declares no initial states"))?;
    let doc = svg::render_svg(&ts, &spectrum, &Viewport::default())
        .map_err(|e| Failure::new(EXIT_DIMENSION, e.to_string()))?;
    write_atomic(output, &doc)
}

fn cmd_sample(
    path: &Path,
    walks: u64,
    steps: usize,
    seed: Option<u64>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let (spec, a) = load(path)?;
    let base = seed.unwrap_or(spec.seed);
    let burn_in = steps / 100;
    let mut r = Report {
        out,
        first_error: None,
    };
    r.line("walks", &walks.to_string());
    r.line("steps", &steps.to_string());
    r.line("burn_in", &burn_in.to_string());

    let mut empirical = Vec::new();
    for w in 0..walks {
        let walk_seed = base.wrapping_add(w);
        let walk = montecarlo::sample_walk(&a, 0, steps, walk_seed)
            .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
        let d = montecarlo::empirical_distribution(&walk, burn_in, a.dim())
            .map_err(|e| Failure::new(EXIT_INVALID, e.to_string()))?;
        r.line(&format!("seed.{w}"), &walk_seed.to_string());
        r.line(&format!("empirical.{w}"), &list(&d));
        empirical.push(d);
    }

    match dynamics::stationary_distribution(&a) {
        Ok(pi) => {
            r.line("stationary", &list(&pi));
            let mut worst = 0.0f64;
            for (w, d) in empirical.iter().enumerate() {
                let dist = d.dist_inf(&pi);
                worst = worst.max(dist);
                r.line(&format!("distance.{w}"), &num(dist));
            }
            r.line("max_distance", &num(worst));
        }
        Err(e) => r.error("stationary", e.to_string()),
    }
    r.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn help_and_usage_errors() {
        let (code, out, _) = run_args(&["markovdyn", "--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("analyze"));
        let (code, _, err) = run_args(&["markovdyn", "bogus"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(!err.is_empty());
        let (code, _, _) = run_args(&["markovdyn", "analyze", "x", "--tol", "-1"]);
        assert_eq!(code, EXIT_INPUT);
        let (code, _, _) = run_args(&["markovdyn", "sample", "x", "--walks", "0"]);
        assert_eq!(code, EXIT_INPUT);
    }

    #[test]
    fn random_names_avoid_declared_ones() {
        let text = "matrix 2 2\n0.5 0.5\n0.5 0.5\ninitial rand_1 1 1\nrandom 2\n";
        let spec = chain_spec::parse_chain_spec(text).unwrap();
        let names: Vec<String> = all_initials(&spec).into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, ["rand_1", "rand_2", "rand_3"]);
    }

    #[test]
    fn atomic_write_into_missing_directory_fails_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("missing").join("out.csv");
        let f = write_atomic(&target, "x").unwrap_err();
        assert_eq!(f.code, EXIT_WRITE);
        assert!(!target.exists());
    }
}
