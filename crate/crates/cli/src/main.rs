//! `latin-mate`: generate rectangles, build and verify mates, run ensembles.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 algorithmic failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latin_mate::baselines::{backtrack_mate, hall_greedy, random_latin_rectangle, BacktrackLimits};
use latin_mate::diagnostics::{summarize, write_trajectory_csv, EnsembleSummary};
use latin_mate::exec::Exec;
use latin_mate::latin::{verify_latin, verify_orthogonal, LatinRectangle, Shape};
use latin_mate::matching::EtaPolicy;
use latin_mate::process::{run_process, ProcessConfig, ProcessResult};
use latin_mate::scalar::Arithmetic;
use latin_mate::trials::{
    run_trials_detailed, success_fraction, write_trials_csv, Algorithm, TrialsConfig,
};
use latin_mate::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser, Debug)]
#[command(name = "latin-mate", version, about = "Orthogonal mates for Latin rectangles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random Latin rectangle.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build an orthogonal mate of a rectangle.
    Mate {
        /// Rectangle file.
        j: PathBuf,
        /// Defaults to `1 - m/n` of the input.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Algo::Guided)]
        algorithm: Algo,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trajectory CSV (guided only).
        #[arg(long)]
        diag: Option<PathBuf>,
        #[command(flatten)]
        process: ProcessArgs,
    },
    /// Check that two rectangles are Latin and orthogonal.
    Verify { j: PathBuf, l: PathBuf },
    /// Run an ensemble on fresh random inputs and write a CSV.
    Trials {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Algo::Guided)]
        algorithm: Algo,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record diagnostics and add their columns.
        #[arg(long)]
        diag: bool,
        #[command(flatten)]
        process: ProcessArgs,
    },
    /// Guided ensemble with full diagnostics; prints a JSON report.
    Diag {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 30)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// JSON report path; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-trial trajectory CSVs.
        #[arg(long)]
        diag: Option<PathBuf>,
        #[command(flatten)]
        process: ProcessArgs,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Algo {
    Guided,
    Hall,
    Backtrack,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Guided => Algorithm::Guided,
            Algo::Hall => Algorithm::Hall,
            Algo::Backtrack => Algorithm::Backtrack,
        }
    }
}

#[derive(Args, Debug)]
struct ProcessArgs {
    /// JSON process config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    eta_initial: Option<f64>,
    #[arg(long)]
    eta_max: Option<f64>,
    /// Keep the starting slack instead of doubling it.
    #[arg(long)]
    fixed_eta: bool,
    /// Exact rational arithmetic.
    #[arg(long)]
    exact: bool,
}

impl ProcessArgs {
    fn build(&self, record: bool) -> Result<ProcessConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => ProcessConfig::from_json(&read(p)?).map_err(Failure::usage)?,
            None => ProcessConfig::default(),
        };
        if let Some(e) = self.eta_initial {
            cfg.eta_initial = Some(e);
        }
        if let Some(e) = self.eta_max {
            cfg.eta_max = e;
        }
        if self.fixed_eta {
            cfg.eta_policy = EtaPolicy::Fixed;
        }
        if self.exact {
            cfg.arithmetic = Arithmetic::Exact;
        }
        cfg.record_trajectory |= record;
        Ok(cfg)
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Algorithmic(String),
}

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Failure::Usage(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Algorithmic(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Parse { .. }
            | Error::NotLatin(_)
            | Error::InvalidShape(_)
            | Error::IndexOutOfRange(_)
            | Error::TooLarge { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Algorithmic(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_rectangle(path: &Path) -> Result<LatinRectangle, Failure> {
    LatinRectangle::parse(&read(path)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Writes `l` only after it verifies against `j`.
fn emit_verified(l: &LatinRectangle, j: &LatinRectangle, out: Option<&Path>) -> Result<(), Failure> {
    let latin = verify_latin(l);
    let orth = verify_orthogonal(l, j)?;
    if !latin.ok || !orth.ok {
        return Err(Failure::Algorithmic(
            "internal error: result failed verification".into(),
        ));
    }
    emit(out, &l.to_text())
}

fn cmd_gen(n: usize, m: usize, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    Shape::new(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = random_latin_rectangle(n, m, &mut rng)?;
    assert!(verify_latin(&r).ok);
    emit(out, &r.to_text())
}

#[allow(clippy::too_many_arguments)]
fn cmd_mate(
    j_path: &Path,
    epsilon: Option<f64>,
    seed: u64,
    algorithm: Algo,
    out: Option<&Path>,
    diag: Option<&Path>,
    process: &ProcessArgs,
) -> Result<(), Failure> {
    let j = read_rectangle(j_path)?;
    let epsilon = epsilon.unwrap_or_else(|| j.shape().epsilon());
    match algorithm {
        Algo::Guided => {
            let cfg = process.build(diag.is_some())?;
            let outcome = run_process(&j, epsilon, seed, &cfg)?;
            if let Some(p) = diag {
                let file = fs::File::create(p)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
                write_trajectory_csv(&outcome.trajectory, file)?;
            }
            match &outcome.result {
                ProcessResult::Success { mate } => emit_verified(mate, &j, out),
                ProcessResult::GammaExit { time, report } => {
                    let ids: Vec<&str> = report
                        .violated_inequalities()
                        .iter()
                        .map(|i| i.id())
                        .collect();
                    Err(Failure::Algorithmic(format!(
                        "gamma exit at t = {time}: violated {} ({} violations)",
                        ids.join(", "),
                        report.violations.len()
                    )))
                }
                ProcessResult::InfeasibleRow { time, reason } => Err(Failure::Algorithmic(
                    format!("infeasible row at t = {time}: {reason}"),
                )),
            }
        }
        Algo::Hall => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match hall_greedy(&j, j.m(), &mut rng) {
                Ok(l) => emit_verified(&l, &j, out),
                Err(e) => Err(Failure::Algorithmic(format!("hall greedy failed: {e}"))),
            }
        }
        Algo::Backtrack => match backtrack_mate(&j, BacktrackLimits::default())? {
            Some(l) => emit_verified(&l, &j, out),
            None => Err(Failure::Algorithmic(
                "search exhausted: no orthogonal mate exists".into(),
            )),
        },
    }
}

fn cmd_verify(j_path: &Path, l_path: &Path) -> Result<(), Failure> {
    let j = LatinRectangle::parse_unvalidated(&read(j_path)?)?;
    let l = LatinRectangle::parse_unvalidated(&read(l_path)?)?;
    let mut problems = Vec::new();
    for (name, r) in [("J", &j), ("L", &l)] {
        for v in verify_latin(r).violations {
            problems.push(format!("{name}: {v}"));
        }
    }
    match verify_orthogonal(&l, &j) {
        Ok(report) => problems.extend(report.violations.iter().map(|v| v.to_string())),
        Err(e) => problems.push(e.to_string()),
    }
    if problems.is_empty() {
        println!("ok");
        Ok(())
    } else {
        for p in &problems {
            println!("{p}");
        }
        Err(Failure::Algorithmic(format!("{} violations", problems.len())))
    }
}

fn trials_config(
    n: usize,
    epsilon: f64,
    count: usize,
    seed: u64,
    jobs: usize,
    process: ProcessConfig,
) -> Result<TrialsConfig, Failure> {
    if count == 0 {
        return Err(Failure::Usage("--count must be at least 1".into()));
    }
    let mut cfg = TrialsConfig::new(n, epsilon, count, seed);
    cfg.shape()?;
    cfg.jobs = jobs;
    cfg.exec = if jobs == 1 { Exec::Sequential } else { Exec::Parallel };
    cfg.process = process;
    Ok(cfg)
}

fn run() -> Result<(), Failure> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Ok(()),
                _ => Err(Failure::Usage(String::new())),
            };
        }
    };
    match cli.command {
        Command::Gen { n, m, seed, out } => cmd_gen(n, m, seed, out.as_deref()),
        Command::Mate {
            j,
            epsilon,
            seed,
            algorithm,
            out,
            diag,
            process,
        } => cmd_mate(&j, epsilon, seed, algorithm, out.as_deref(), diag.as_deref(), &process),
        Command::Verify { j, l } => cmd_verify(&j, &l),
        Command::Trials {
            n,
            epsilon,
            count,
            seed,
            algorithm,
            jobs,
            out,
            diag,
            process,
        } => {
            let mut cfg = trials_config(n, epsilon, count, seed, jobs, process.build(diag)?)?;
            cfg.algorithm = algorithm.into();
            let results = run_trials_detailed(&cfg)?;
            let records: Vec<_> = results.into_iter().map(|r| r.record).collect();
            let mut buf = Vec::new();
            write_trials_csv(&records, &mut buf)?;
            match out.as_deref() {
                Some(p) => {
                    fs::write(p, &buf).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
                    println!("success fraction: {:.4}", success_fraction(&records));
                }
                None => {
                    io::stdout().write_all(&buf)?;
                    eprintln!("success fraction: {:.4}", success_fraction(&records));
                }
            }
            Ok(())
        }
        Command::Diag {
            n,
            epsilon,
            count,
            seed,
            jobs,
            out,
            diag,
            process,
        } => {
            let cfg = trials_config(n, epsilon, count, seed, jobs, process.build(true)?)?;
            let results = run_trials_detailed(&cfg)?;
            if let Some(dir) = &diag {
                fs::create_dir_all(dir)?;
            }
            let mut ensemble = EnsembleSummary::default();
            let mut runs = Vec::new();
            for r in &results {
                let traj = r.trajectory.as_ref().expect("diagnostics recorded");
                if let Some(dir) = &diag {
                    let file = fs::File::create(dir.join(format!("trial_{:04}.csv", r.record.trial)))?;
                    write_trajectory_csv(traj, file)?;
                }
                let s = summarize(traj)?;
                ensemble = ensemble.merge(&EnsembleSummary::from_summary(&s));
                runs.push(serde_json::json!({
                    "trial": r.record.trial,
                    "seed": r.record.seed,
                    "outcome": r.record.outcome,
                    "summary": s,
                }));
            }
            let records: Vec<_> = results.iter().map(|r| r.record.clone()).collect();
            let report = serde_json::json!({
                "n": n,
                "epsilon": epsilon,
                "count": count,
                "success_fraction": success_fraction(&records),
                "phi": latin_mate::process::phi(n),
                "ensemble": ensemble,
                "runs": runs,
            });
            let text = serde_json::to_string_pretty(&report).map_err(Failure::usage)? + "\n";
            emit(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) if !msg.is_empty() => eprintln!("error: {msg}"),
                Failure::Algorithmic(msg) => eprintln!("failure: {msg}"),
                _ => {}
            }
            ExitCode::from(f.code())
        }
    }
}
