//! Command-line front end.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 input error, 3 infeasible
//! or inconsistent moments, 4 degenerate pencil.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::io::{fmt_f64, ProblemFile};
use crate::markov::{
    forward_moments, invert_moments, invert_rescaled, perturbation_probe, roundtrip_study,
    InversionOptions, InversionReport, Precision, TrialOutcome, TrialStats,
};
use crate::selftest::{self, Fixture};

pub const EXIT_OK: u8 = 0;
pub const EXIT_SELFTEST: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_DEGENERATE: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "markov-moment",
    version,
    about = "Recover the switch points of a {0,1} step density from its power moments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the moments of a switches file.
    Forward {
        input: PathBuf,
        /// Output file [default: standard output]
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Recover switch points from a moments file.
    Invert {
        input: PathBuf,
        /// Output file [default: standard output]
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Forward/inverse roundtrip on random configurations; CSV per trial.
    Roundtrip {
        /// Number of intervals (K = 2n moments)
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Minimum distance between consecutive points on [0, 1]
        #[arg(long, default_value_t = 0.05)]
        gap: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file [default: standard output]
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Recovery error under uniform moment noise of size eps; CSV per trial.
    Probe {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file [default: standard output]
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Run the embedded invariant suite.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SolverFlags {
    /// Largest accepted imaginary part of an eigenvalue
    /// [default: 1e-6 * max(1, max |g|) per pencil]
    #[arg(long)]
    pub imag_tol: Option<f64>,
    /// Moment residual above which the result is flagged ill-conditioned
    /// [default: 1e-8 * max(1, max |m_k|)]
    #[arg(long)]
    pub residual_tol: Option<f64>,
    /// Map the problem to [0, 1] before inverting, using the file's
    /// domain_scale or max_k |m_k|^(1/k)
    #[arg(long)]
    pub rescale: bool,
    #[arg(long, value_enum, default_value_t = PrecisionArg::DoubleDouble)]
    pub precision: PrecisionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    Double,
    DoubleDouble,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::DoubleDouble => Precision::DoubleDouble,
        }
    }
}

impl SolverFlags {
    fn options(&self, file: Option<&ProblemFile>) -> Result<InversionOptions, Failure> {
        let from_file = file.and_then(|f| f.tolerances).unwrap_or_default();
        let imag_tol = self.imag_tol.or(from_file.imag_tol);
        let residual_tol = self.residual_tol.or(from_file.residual_tol);
        for (name, v) in [("imag-tol", imag_tol), ("residual-tol", residual_tol)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Failure::input(format!(
                        "--{name} must be nonnegative, got {v}"
                    )));
                }
            }
        }
        Ok(InversionOptions {
            imag_tol,
            residual_tol,
            precision: self.precision.into(),
            ..InversionOptions::default()
        })
    }
}

/// An error message together with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: String) -> Self {
        Self {
            code: EXIT_INPUT,
            message,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(format!("i/o error: {e}"))
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible { .. } | Error::Inconsistent(_) | Error::NonConvergence { .. } => {
            EXIT_INFEASIBLE
        }
        Error::Degenerate { .. } => EXIT_DEGENERATE,
        Error::Dimension { .. }
        | Error::InvalidInput(_)
        | Error::Singular { .. }
        | Error::Scaling(_) => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

pub fn main() -> ExitCode {
    let code = run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8, Failure> {
    match cmd {
        Command::Forward { input, output } => forward(&input, output.as_deref(), stdout, stderr),
        Command::Invert {
            input,
            output,
            solver,
        } => invert(&input, output.as_deref(), &solver, stdout, stderr),
        Command::Roundtrip {
            n,
            trials,
            gap,
            seed,
            output,
            solver,
        } => roundtrip(
            n,
            trials,
            gap,
            seed,
            output.as_deref(),
            &solver,
            stdout,
            stderr,
        ),
        Command::Probe {
            input,
            eps,
            trials,
            seed,
            output,
            solver,
        } => probe(
            &input,
            eps,
            trials,
            seed,
            output.as_deref(),
            &solver,
            stdout,
            stderr,
        ),
        Command::Selftest { seed } => {
            Ok(run_selftest(&selftest::default_fixtures(), seed, stdout)?)
        }
    }
}

fn emit(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn forward(
    input: &Path,
    output: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<u8, Failure> {
    let u = ProblemFile::read(input)?.to_switches()?;
    let mut out = ProblemFile::moments(&forward_moments(&u));
    out.domain_scale = Some(u.support_end()).filter(|x| *x > 0.0);
    emit(&out.to_text(), output, stdout)?;
    writeln!(stderr, "K = {}", u.len())?;
    writeln!(stderr, "X = {}", fmt_f64(u.support_end()))?;
    Ok(EXIT_OK)
}

fn invert(
    input: &Path,
    output: Option<&Path>,
    solver: &SolverFlags,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<u8, Failure> {
    let file = ProblemFile::read(input)?;
    let m = file.to_moments()?;
    let opts = solver.options(Some(&file))?;
    let (u, report) = if solver.rescale {
        invert_rescaled(&m, file.domain_scale, &opts)?
    } else {
        invert_moments(&m, &opts)?
    };
    emit(&ProblemFile::switches(&u).to_text(), output, stdout)?;
    write_report(&report, stderr)?;
    Ok(EXIT_OK)
}

fn write_report(r: &InversionReport, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "residual_inf = {}", fmt_f64(r.residual_inf))?;
    writeln!(w, "eig_imag_max = {}", fmt_f64(r.eig_imag_max))?;
    writeln!(w, "min_gap = {}", fmt_f64(r.min_gap))?;
    writeln!(w, "pivot_ratio = {}", fmt_f64(r.pivot_ratio))?;
    writeln!(w, "status = {}", r.status.as_str())
}

fn trial_csv<'a>(header: &str, outcomes: impl Iterator<Item = &'a TrialOutcome>) -> String {
    let mut csv = format!("trial,{header},status\n");
    for (i, o) in outcomes.enumerate() {
        let err = o.error().map_or_else(|| "nan".to_string(), fmt_f64);
        csv.push_str(&format!("{i},{err},{}\n", o.status()));
    }
    csv
}

fn write_stats(s: &TrialStats, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "worst = {}", fmt_f64(s.worst))?;
    writeln!(w, "mean = {}", fmt_f64(s.mean))?;
    writeln!(w, "failures = {}", s.failures)
}

#[allow(clippy::too_many_arguments)]
fn roundtrip(
    n: usize,
    trials: usize,
    gap: f64,
    seed: u64,
    output: Option<&Path>,
    solver: &SolverFlags,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<u8, Failure> {
    if !(gap > 0.0) {
        return Err(Failure::input(format!("--gap must be positive, got {gap}")));
    }
    let opts = solver.options(None)?;
    let study = roundtrip_study(n, trials, gap, seed, &opts)?;
    let outcomes: Vec<TrialOutcome> = study.into_iter().map(|t| t.outcome).collect();
    emit(&trial_csv("max_error", outcomes.iter()), output, stdout)?;
    write_stats(&TrialStats::from_outcomes(&outcomes), stderr)?;
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn probe(
    input: &Path,
    eps: f64,
    trials: usize,
    seed: u64,
    output: Option<&Path>,
    solver: &SolverFlags,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<u8, Failure> {
    let file = ProblemFile::read(input)?;
    let u = file.to_switches()?;
    let opts = solver.options(Some(&file))?;
    let summary = perturbation_probe(&u, eps, trials, seed, &opts)?;
    emit(&trial_csv("error", summary.trials.iter()), output, stdout)?;
    let baseline = summary
        .baseline
        .error()
        .map_or_else(|| summary.baseline.status().to_string(), fmt_f64);
    writeln!(stderr, "baseline = {baseline}")?;
    write_stats(&summary.stats, stderr)?;
    Ok(EXIT_OK)
}

/// Runs the invariant suite on `fixtures`, printing one line per check.
/// Returns 0 when every check passes and 1 otherwise.
pub fn run_selftest(fixtures: &[Fixture], seed: u64, out: &mut dyn Write) -> std::io::Result<u8> {
    let results = selftest::run(fixtures, seed);
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name.as_str())
        .collect();
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        writeln!(out, "{tag} {}: {}", r.name, r.detail)?;
    }
    if failed.is_empty() {
        writeln!(out, "selftest: {} checks passed", results.len())?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "selftest: failed: {}", failed.join(", "))?;
        Ok(EXIT_SELFTEST)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (u8, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("markov-moment").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn error_mapping() {
        assert_eq!(exit_code(&Error::InvalidInput(String::new())), EXIT_INPUT);
        assert_eq!(
            exit_code(&Error::Degenerate {
                pivot_ratio: 0.0,
                threshold: 1e-10
            }),
            EXIT_DEGENERATE
        );
        assert_eq!(
            exit_code(&Error::Infeasible {
                roots: vec![],
                imag_tol: 1e-6
            }),
            EXIT_INFEASIBLE
        );
    }

    #[test]
    fn usage_errors_are_input_errors() {
        assert_eq!(call(&[]).0, EXIT_INPUT);
        assert_eq!(call(&["invert"]).0, EXIT_INPUT);
        assert_eq!(call(&["roundtrip", "--gap", "x"]).0, EXIT_INPUT);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("roundtrip"));
    }

    #[test]
    fn roundtrip_csv_shape() {
        let (code, out, err) = call(&["roundtrip", "--n", "1", "--trials", "3", "--seed", "5"]);
        assert_eq!(code, EXIT_OK, "{err}");
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "trial,max_error,status");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,") && lines[1].ends_with(",ok"));
        assert!(err.contains("worst = ") && err.contains("failures = 0"));
    }

    #[test]
    fn roundtrip_rejects_bad_parameters() {
        assert_eq!(call(&["roundtrip", "--n", "0"]).0, EXIT_INPUT);
        assert_eq!(
            call(&["roundtrip", "--n", "5", "--gap", "0.2"]).0,
            EXIT_INPUT
        );
        assert_eq!(call(&["roundtrip", "--gap", "0"]).0, EXIT_INPUT);
        assert_eq!(call(&["roundtrip", "--trials", "0"]).0, EXIT_INPUT);
    }

    #[test]
    fn selftest_passes_and_names_corrupted_fixture() {
        let (code, out, _) = call(&["selftest"]);
        assert_eq!(code, EXIT_OK, "{out}");

        let mut fixtures = selftest::default_fixtures();
        fixtures[0].switches = vec![0.25, 0.8];
        let mut buf = Vec::new();
        assert_eq!(run_selftest(&fixtures, 0, &mut buf).unwrap(), EXIT_SELFTEST);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("FAIL fixture_k2"), "{text}");
        assert!(text.contains("failed: fixture_k2"), "{text}");
    }
}
