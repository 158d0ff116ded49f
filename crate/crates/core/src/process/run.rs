use std::any::Any;
use std::borrow::Cow;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gamma::{check_gamma_with, GammaReport};
use super::geometry::Geometry;
use super::state::advance_with;
use super::{init_state, GuidanceState, ProcessConfig};
use crate::diagnostics::{Recorder, StepContext, StopInfo, TrajectoryStats};
use crate::error::{Error, Result};
use crate::latin::{verify_latin, verify_orthogonal, LatinRectangle, Shape};
use crate::matching::{
    birkhoff_decompose, build_fractional_matching, normalize_row, BirkhoffDecomposition,
    FractionalMatching,
};
use crate::scalar::{Arithmetic, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessResult {
    Success { mate: LatinRectangle },
    /// The state left the good region before row `time` was placed.
    GammaExit { time: usize, report: GammaReport },
    /// Row `time` could not be extended although the state was good.
    InfeasibleRow { time: usize, reason: String },
}

impl ProcessResult {
    pub fn kind(&self) -> &'static str {
        match self {
            ProcessResult::Success { .. } => "success",
            ProcessResult::GammaExit { .. } => "gamma_exit",
            ProcessResult::InfeasibleRow { .. } => "infeasible_row",
        }
    }

    pub fn exit_time(&self) -> Option<usize> {
        match self {
            ProcessResult::Success { .. } => None,
            ProcessResult::GammaExit { time, .. } | ProcessResult::InfeasibleRow { time, .. } => {
                Some(*time)
            }
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, ProcessResult::Success { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessOutcome {
    pub result: ProcessResult,
    /// Slack used for each placed row.
    pub eta_used: Vec<f64>,
    /// Per-step diagnostics; empty unless `record_trajectory` is set.
    pub trajectory: TrajectoryStats,
}

impl ProcessOutcome {
    pub fn eta_max(&self) -> f64 {
        self.eta_used.iter().copied().fold(0.0, f64::max)
    }

    pub fn eta_mean(&self) -> f64 {
        if self.eta_used.is_empty() {
            0.0
        } else {
            self.eta_used.iter().sum::<f64>() / self.eta_used.len() as f64
        }
    }
}

/// Runs the guided process on `j`: before each row, check the state, then
/// draw the row from a Birkhoff decomposition of the flow matching built
/// on the normalized row masses. All randomness comes from one
/// `ChaCha8Rng` seeded with `seed`, one draw per placed row.
pub fn run_process(
    j: &LatinRectangle,
    epsilon: f64,
    seed: u64,
    config: &ProcessConfig,
) -> Result<ProcessOutcome> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidShape(format!("epsilon {epsilon} outside [0, 1)")));
    }
    match config.arithmetic {
        Arithmetic::F64 => Ok(run_generic::<f64>(j, epsilon, seed, config)),
        Arithmetic::Exact => Ok(run_generic::<BigRational>(j, epsilon, seed, config)),
    }
}

/// Borrows `x` when it already is the `f64` form, converts otherwise.
fn as_f64<X: 'static, Y: Clone + 'static>(x: &X, convert: impl Fn(&X) -> Y) -> Cow<'_, Y> {
    match (x as &dyn Any).downcast_ref::<Y>() {
        Some(y) => Cow::Borrowed(y),
        None => Cow::Owned(convert(x)),
    }
}

fn run_generic<S: Scalar>(
    j: &LatinRectangle,
    epsilon: f64,
    seed: u64,
    config: &ProcessConfig,
) -> ProcessOutcome {
    let shape = j.shape();
    let Shape { n, m } = shape;
    let geo = Geometry::new(j);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state: GuidanceState<S> = init_state(shape);
    let mut recorder = config.record_trajectory.then(|| Recorder::new(j));
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(m);
    let mut eta_used = Vec::with_capacity(m);
    let eta_initial = config.eta_initial_for(n);

    let finish = |recorder: Option<Recorder>, result, eta_used| ProcessOutcome {
        result,
        eta_used,
        trajectory: recorder.map(Recorder::finish).unwrap_or_else(|| TrajectoryStats {
            n,
            m,
            ..TrajectoryStats::default()
        }),
    };

    for t in 0..m {
        let report = check_gamma_with(&state, epsilon, &config.gamma_constants, config.exec);
        if !report.good {
            state.stop();
            if let Some(r) = recorder.as_mut() {
                r.record_stop(StopInfo {
                    time: t,
                    reasons: report
                        .violated_inequalities()
                        .iter()
                        .map(|i| i.id().to_string())
                        .collect(),
                    gamma: Some(report.stats),
                });
            }
            return finish(recorder, ProcessResult::GammaExit { time: t, report }, eta_used);
        }

        let step = (|| -> Result<_> {
            let d = normalize_row(&state, t)?;
            let (q, eta) = build_fractional_matching(&d, config.eta_policy, eta_initial, config.eta_max)?;
            let dec = birkhoff_decompose(&q)?;
            let idx = dec.sample_index(&mut rng);
            let row = dec.terms()[idx].permutation.clone();
            let next = advance_with(&state, &q, &row, &geo, config.exec)?;
            Ok((q, eta, dec, row, next))
        })();
        let (q, eta, dec, row, next) = match step {
            Ok(v) => v,
            Err(e) => {
                state.stop();
                let reason = e.to_string();
                if let Some(r) = recorder.as_mut() {
                    r.record_stop(StopInfo {
                        time: t,
                        reasons: vec![reason.clone()],
                        gamma: Some(report.stats),
                    });
                }
                return finish(recorder, ProcessResult::InfeasibleRow { time: t, reason }, eta_used);
            }
        };

        if let Some(r) = recorder.as_mut() {
            let before = as_f64::<_, GuidanceState<f64>>(&state, GuidanceState::to_f64);
            let after = as_f64::<_, GuidanceState<f64>>(&next, GuidanceState::to_f64);
            let q64 = as_f64::<_, FractionalMatching<f64>>(&q, FractionalMatching::to_f64);
            let dec64 =
                as_f64::<_, BirkhoffDecomposition<f64>>(&dec, BirkhoffDecomposition::to_f64);
            r.record_step(&StepContext {
                before: &before,
                after: &after,
                q: &q64,
                dec: &dec64,
                row: &row,
                gamma: &report,
                eta,
            });
        }
        eta_used.push(eta);
        rows.push(row);
        state = next;
    }

    let mate = LatinRectangle::from_rows_unvalidated(rows).expect("rows have the right shape");
    assert!(verify_latin(&mate).ok, "guided process produced a non-Latin rectangle");
    assert!(
        verify_orthogonal(&mate, j).map(|r| r.ok).unwrap_or(false),
        "guided process produced a non-orthogonal rectangle"
    );
    finish(recorder, ProcessResult::Success { mate }, eta_used)
}
