//! Ensembles of independent runs on fresh random inputs.
//!
//! Trial `i` uses seed `seed + i` for everything it draws. Records do not
//! depend on scheduling.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{backtrack_mate, hall_greedy, prefix_of, random_latin_rectangle, BacktrackLimits};
use crate::diagnostics::{summarize, SummaryReport, TrajectoryStats};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::latin::{verify_latin, verify_orthogonal, LatinRectangle, Shape};
use crate::process::{run_process, ProcessConfig, ProcessResult};

/// First line of every trials CSV.
pub const TRIALS_SCHEMA: &str = "# latin-mate trials schema v1";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Guided,
    Hall,
    Backtrack,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Guided => "guided",
            Algorithm::Hall => "hall",
            Algorithm::Backtrack => "backtrack",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "guided" => Ok(Algorithm::Guided),
            "hall" => Ok(Algorithm::Hall),
            "backtrack" => Ok(Algorithm::Backtrack),
            other => Err(Error::InvalidShape(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Success,
    GammaExit,
    InfeasibleRow,
    BaselineFailure,
}

/// One CSV row. Column order is part of the schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub algorithm: Algorithm,
    pub outcome: OutcomeKind,
    pub exit_time: Option<usize>,
    pub exit_reason: String,
    pub eta_max: f64,
    pub eta_mean: f64,
    pub b_deviation_max: Option<f64>,
    pub c_deviation_max: Option<f64>,
    pub p_max: Option<f64>,
    pub martingale_residual_max: Option<f64>,
    pub max_line_kills: Option<usize>,
    pub max_c_kills: Option<usize>,
    pub wall_ms: f64,
}

/// Everything one trial produced.
#[derive(Clone, Debug)]
pub struct TrialResult {
    pub record: TrialRecord,
    pub j: LatinRectangle,
    pub mate: Option<LatinRectangle>,
    pub trajectory: Option<TrajectoryStats>,
    pub summary: Option<SummaryReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialsConfig {
    pub n: usize,
    pub epsilon: f64,
    pub count: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub process: ProcessConfig,
    pub backtrack: BacktrackLimits,
    /// Worker threads; `0` uses the global pool.
    pub jobs: usize,
    pub exec: Exec,
}

impl TrialsConfig {
    pub fn new(n: usize, epsilon: f64, count: usize, seed: u64) -> Self {
        TrialsConfig {
            n,
            epsilon,
            count,
            seed,
            algorithm: Algorithm::Guided,
            process: ProcessConfig::default(),
            backtrack: BacktrackLimits::default(),
            jobs: 0,
            exec: Exec::Parallel,
        }
    }

    pub fn shape(&self) -> Result<Shape> {
        Shape::from_epsilon(self.n, self.epsilon)
    }
}

/// Runs trial `index`: a fresh `J` from seed `seed + index`, then the
/// algorithm, seeded from the same stream.
pub fn run_trial(cfg: &TrialsConfig, index: usize) -> Result<TrialResult> {
    let shape = cfg.shape()?;
    let seed = cfg.seed.wrapping_add(index as u64);
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = random_latin_rectangle(shape.n, shape.m, &mut rng)?;

    let mut record = TrialRecord {
        trial: index,
        seed,
        n: shape.n,
        m: shape.m,
        epsilon: cfg.epsilon,
        algorithm: cfg.algorithm,
        outcome: OutcomeKind::Success,
        exit_time: None,
        exit_reason: String::new(),
        eta_max: 0.0,
        eta_mean: 0.0,
        b_deviation_max: None,
        c_deviation_max: None,
        p_max: None,
        martingale_residual_max: None,
        max_line_kills: None,
        max_c_kills: None,
        wall_ms: 0.0,
    };
    let mut trajectory = None;
    let mut summary = None;

    let mate = match cfg.algorithm {
        Algorithm::Guided => {
            let out = run_process(&j, cfg.epsilon, rng.gen(), &cfg.process)?;
            record.eta_max = out.eta_max();
            record.eta_mean = out.eta_mean();
            record.exit_time = out.result.exit_time();
            if cfg.process.record_trajectory {
                let s = summarize(&out.trajectory)?;
                record.b_deviation_max = Some(s.b_deviation_max);
                record.c_deviation_max = Some(s.c_deviation_max);
                record.p_max = Some(s.p_max);
                record.martingale_residual_max = Some(s.martingale_residual_max);
                record.max_line_kills = Some(s.max_line_kills);
                record.max_c_kills = Some(s.max_c_kills);
                summary = Some(s);
                trajectory = Some(out.trajectory);
            }
            match out.result {
                ProcessResult::Success { mate } => Some(mate),
                ProcessResult::GammaExit { report, .. } => {
                    record.outcome = OutcomeKind::GammaExit;
                    record.exit_reason = report
                        .violated_inequalities()
                        .iter()
                        .map(|i| i.id())
                        .collect::<Vec<_>>()
                        .join("|");
                    None
                }
                ProcessResult::InfeasibleRow { reason, .. } => {
                    record.outcome = OutcomeKind::InfeasibleRow;
                    record.exit_reason = reason;
                    None
                }
            }
        }
        Algorithm::Hall => match hall_greedy(&j, shape.m, &mut rng) {
            Ok(l) => Some(l),
            Err(Error::NoPerfectMatching { row }) => {
                record.outcome = OutcomeKind::BaselineFailure;
                record.exit_time = Some(row);
                record.exit_reason = "no perfect matching".into();
                None
            }
            Err(e) => return Err(e),
        },
        Algorithm::Backtrack => match backtrack_mate(&j, cfg.backtrack) {
            Ok(Some(l)) => Some(l),
            Ok(None) => {
                record.outcome = OutcomeKind::BaselineFailure;
                record.exit_reason = "exhausted".into();
                None
            }
            Err(Error::LimitExceeded { .. }) => {
                record.outcome = OutcomeKind::BaselineFailure;
                record.exit_reason = "node limit".into();
                None
            }
            Err(e) => return Err(e),
        },
    };

    if let Some(l) = &mate {
        let target = prefix_of(&j, l.m());
        assert!(
            verify_latin(l).ok && verify_orthogonal(l, &target)?.ok,
            "trial {index} produced an unverified mate"
        );
    }
    record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(TrialResult {
        record,
        j,
        mate,
        trajectory,
        summary,
    })
}

/// Runs all trials, in parallel when `cfg.exec` allows, and returns them in
/// trial order.
pub fn run_trials_detailed(cfg: &TrialsConfig) -> Result<Vec<TrialResult>> {
    if cfg.count == 0 {
        return Err(Error::InvalidShape("trial count must be at least 1".into()));
    }
    cfg.shape()?;
    let work = || cfg.exec.map_range(0..cfg.count, |i| run_trial(cfg, i));
    #[cfg(feature = "parallel")]
    let results = if cfg.jobs > 0 && cfg.exec.is_parallel() {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidShape(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };
    #[cfg(not(feature = "parallel"))]
    let results = work();
    results.into_iter().collect()
}

pub fn run_trials(cfg: &TrialsConfig) -> Result<Vec<TrialRecord>> {
    Ok(run_trials_detailed(cfg)?.into_iter().map(|r| r.record).collect())
}

pub fn success_fraction(records: &[TrialRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let ok = records.iter().filter(|r| r.outcome == OutcomeKind::Success).count();
    ok as f64 / records.len() as f64
}

/// Schema line, header, then one row per record in the given order.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    writeln!(out, "{TRIALS_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
