//! Per-step measurements of the quantities that keep the process in the
//! good region: line sums and their one-step deviations, pair products,
//! martingale residuals, kill counts, growth factors, and the product/sum
//! identity along a sample of central lines.
//!
//! All quantities are observations. Nothing here fails a run.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latin::{LatinRectangle, LineClass, LineId, Point, Shape};
use crate::matching::{BirkhoffDecomposition, FractionalMatching};
use crate::process::{phi, GammaReport, GammaStats, GuidanceState};
use crate::process::geometry::Geometry;

/// Number of central lines and pair-product triples sampled per run.
pub const SAMPLE_CAP: usize = 64;

/// Statistics of one extension step `t -> t + 1`.
///
/// Line and pair statistics before the step come from the Γ check of the
/// pre-step state; deviations and residuals cover rows `> t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub b_sum_min: f64,
    pub b_sum_max: f64,
    pub c_lhs_max: f64,
    pub p_max: f64,
    /// Points with positive mass that this step zeroed.
    pub kills_this_step: usize,
    pub eta_used: f64,
    pub b_margin_min: f64,
    pub c_margin_min: f64,
    pub max_line_kills: usize,
    pub max_c_kills: usize,
    pub martingale_residual: f64,
    /// `max |X^{t+1} - E_t X^{t+1}|` over local line sums.
    pub b_step_dev: f64,
    /// `max |E_t X^{t+1} - X^t|` over local line sums.
    pub b_drift: f64,
    /// `max |X^{t+1} - E_t X^{t+1}|` over sampled pair products.
    pub c_step_dev: f64,
    /// Mean of `n (E_t X^{t+1} - X^t)` over sampled pair products.
    pub c_drift: f64,
    pub growth_min: f64,
    pub growth_max: f64,
    pub s_identity_residual: f64,
    pub s_lines_alive: usize,
    pub decomposition_terms: usize,
    pub reconstruction_error: f64,
}

/// Why and when a run stopped short of a full rectangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopInfo {
    pub time: usize,
    /// Violated inequality ids, or the failure reason for an infeasible row.
    pub reasons: Vec<String>,
    /// Γ statistics of the stopped state.
    pub gamma: Option<GammaStats>,
}

/// Records of the executed steps (the pre-stop prefix) and, when the run
/// stopped, the frozen state's statistics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub n: usize,
    pub m: usize,
    pub records: Vec<StepRecord>,
    pub stop: Option<StopInfo>,
}

/// Inputs of [`Recorder::record_step`]. `gamma` is the report on `before`.
pub struct StepContext<'a> {
    pub before: &'a GuidanceState<f64>,
    pub after: &'a GuidanceState<f64>,
    pub q: &'a FractionalMatching<f64>,
    pub dec: &'a BirkhoffDecomposition<f64>,
    pub row: &'a [u32],
    pub gamma: &'a GammaReport,
    pub eta: f64,
}

#[derive(Clone, Debug)]
struct TrackedLine {
    line: LineId,
    s: f64,
    prod: f64,
    alive: bool,
}

/// Single-owner recorder for one run.
#[derive(Clone, Debug)]
pub struct Recorder {
    geo: Geometry,
    lines: Vec<TrackedLine>,
    stats: TrajectoryStats,
}

impl Recorder {
    pub fn new(j: &LatinRectangle) -> Self {
        let shape = j.shape();
        let n = shape.n;
        let count = n.min(SAMPLE_CAP);
        let lines = (0..count)
            .map(|idx| {
                let u = idx * n * n / count;
                let class = if idx % 2 == 0 { LineClass::CS } else { LineClass::DS };
                TrackedLine {
                    line: LineId::new(class, u / n, u % n),
                    s: 0.0,
                    prod: 1.0,
                    alive: true,
                }
            })
            .collect();
        Recorder {
            geo: Geometry::new(j),
            lines,
            stats: TrajectoryStats {
                n,
                m: shape.m,
                records: Vec::new(),
                stop: None,
            },
        }
    }

    pub fn stats(&self) -> &TrajectoryStats {
        &self.stats
    }

    pub fn record_step(&mut self, ctx: &StepContext<'_>) -> &StepRecord {
        let rec = self.measure(ctx);
        self.stats.records.push(rec);
        self.stats.records.last().expect("just pushed")
    }

    pub fn record_stop(&mut self, stop: StopInfo) {
        self.stats.stop = Some(stop);
    }

    pub fn finish(self) -> TrajectoryStats {
        self.stats
    }

    fn measure(&mut self, ctx: &StepContext<'_>) -> StepRecord {
        let shape = ctx.before.shape();
        let Shape { n, m } = shape;
        let t = ctx.before.t();
        let geo = &self.geo;
        let q = ctx.q.entries();
        let qhat = ctx.dec.reconstruct();
        let reconstruction_error = q
            .iter()
            .zip(&qhat)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);

        let mut rec = StepRecord {
            t,
            b_sum_min: ctx.gamma.stats.b_min,
            b_sum_max: ctx.gamma.stats.b_max,
            c_lhs_max: ctx.gamma.stats.c_max.max(0.0),
            p_max: ctx.gamma.stats.p_max,
            kills_this_step: 0,
            eta_used: ctx.eta,
            b_margin_min: ctx.gamma.stats.b_margin,
            c_margin_min: ctx.gamma.stats.c_margin,
            max_line_kills: 0,
            max_c_kills: 0,
            martingale_residual: 0.0,
            b_step_dev: 0.0,
            b_drift: 0.0,
            c_step_dev: 0.0,
            c_drift: 0.0,
            growth_min: f64::INFINITY,
            growth_max: 1.0,
            s_identity_residual: 0.0,
            s_lines_alive: 0,
            decomposition_terms: ctx.dec.len(),
            reconstruction_error,
        };

        let nn = n * n;
        let mut expected = vec![0.0; nn];
        let mut killed = vec![false; nn];
        let mut col_kills: Vec<Vec<usize>> = vec![Vec::with_capacity(2); n];
        for i in t + 1..m {
            let before = ctx.before.row(i);
            let after = ctx.after.row(i);
            for list in col_kills.iter_mut() {
                list.clear();
            }
            for (k, kills) in col_kills.iter_mut().enumerate() {
                let k2 = geo.diagonal_column(t, i, k);
                for g in 0..n {
                    let idx = k * n + g;
                    let hit = ctx.row[k] as usize == g || ctx.row[k2] as usize == g;
                    killed[idx] = hit;
                    if hit {
                        kills.push(g);
                    }
                    let p = before[idx];
                    if p <= 0.0 {
                        expected[idx] = 0.0;
                        continue;
                    }
                    if hit {
                        rec.kills_this_step += 1;
                    } else {
                        let r = after[idx] / p;
                        rec.growth_min = rec.growth_min.min(r);
                        rec.growth_max = rec.growth_max.max(r);
                    }
                    let den = 1.0 - q[idx] - q[k2 * n + g];
                    let e = p * (1.0 - qhat[idx] - qhat[k2 * n + g]) / den;
                    expected[idx] = e;
                    rec.martingale_residual = rec.martingale_residual.max((e - p).abs());
                }
            }

            for a in 0..n {
                let (mut x0, mut x1, mut ex, mut kc) = (0.0, 0.0, 0.0, 0);
                for b in 0..n {
                    let idx = a * n + b;
                    x0 += before[idx];
                    x1 += after[idx];
                    ex += expected[idx];
                    kc += killed[idx] as usize;
                }
                rec.max_line_kills = rec.max_line_kills.max(kc);
                rec.b_step_dev = rec.b_step_dev.max((x1 - ex).abs());
                rec.b_drift = rec.b_drift.max((ex - x0).abs());

                let (mut x0, mut x1, mut ex, mut kc) = (0.0, 0.0, 0.0, 0);
                for b in 0..n {
                    let idx = b * n + a;
                    x0 += before[idx];
                    x1 += after[idx];
                    ex += expected[idx];
                    kc += killed[idx] as usize;
                }
                rec.max_line_kills = rec.max_line_kills.max(kc);
                rec.b_step_dev = rec.b_step_dev.max((x1 - ex).abs());
                rec.b_drift = rec.b_drift.max((ex - x0).abs());
            }

            for k in 0..n {
                for l in k + 1..n {
                    let union = col_kills[k].len()
                        + col_kills[l].iter().filter(|g| !col_kills[k].contains(g)).count();
                    rec.max_c_kills = rec.max_c_kills.max(union);
                }
            }
        }

        // Sampled pair products.
        let rows_left = m.saturating_sub(t + 1);
        if rows_left > 0 && n >= 2 {
            let count = n.min(SAMPLE_CAP);
            let mut drift = 0.0;
            for j in 0..count {
                let i = t + 1 + j % rows_left;
                let k = (j * 7) % n;
                let l = (k + 1 + (j * 3) % (n - 1)) % n;
                let (x0, x1, ex) = pair_product_step(ctx, geo, &qhat, i, k, l);
                rec.c_step_dev = rec.c_step_dev.max((x1 - ex).abs());
                drift += n as f64 * (ex - x0);
            }
            rec.c_drift = drift / count as f64;
        }

        // Product/sum identity along the tracked central lines.
        for tl in self.lines.iter_mut().filter(|l| l.alive) {
            let y = match tl.line.class {
                LineClass::CS => Point::new(t, tl.line.first, tl.line.second),
                _ => Point::new(t, geo.column_of(t, tl.line.first), tl.line.second),
            };
            let p = *ctx.before.get(y);
            let tilde = (1.0 - tl.s) * p;
            tl.s += tilde;
            if p >= 1.0 {
                tl.alive = false;
                continue;
            }
            tl.prod /= 1.0 - p;
            let residual = (tl.prod - 1.0 / (1.0 - tl.s)).abs();
            rec.s_identity_residual = rec.s_identity_residual.max(residual);
            if ctx.row[y.col] as usize == y.sym {
                tl.alive = false;
            } else {
                rec.s_lines_alive += 1;
            }
        }

        if rec.growth_min.is_infinite() {
            rec.growth_min = 1.0;
        }
        rec
    }
}

/// `(X^t, X^{t+1}, E_t X^{t+1})` for `X = sum_g p(i,k,g) p(i,l,g)`.
fn pair_product_step(
    ctx: &StepContext<'_>,
    geo: &Geometry,
    qhat: &[f64],
    i: usize,
    k: usize,
    l: usize,
) -> (f64, f64, f64) {
    let n = ctx.before.shape().n;
    let t = ctx.before.t();
    let q = ctx.q.entries();
    let (before, after) = (ctx.before.row(i), ctx.after.row(i));
    let k2 = geo.diagonal_column(t, i, k);
    let l2 = geo.diagonal_column(t, i, l);
    let (mut x0, mut x1, mut ex) = (0.0, 0.0, 0.0);
    for g in 0..n {
        let (a, b) = (before[k * n + g], before[l * n + g]);
        x0 += a * b;
        x1 += after[k * n + g] * after[l * n + g];
        if a <= 0.0 || b <= 0.0 {
            continue;
        }
        let den_k = 1.0 - q[k * n + g] - q[k2 * n + g];
        let den_l = 1.0 - q[l * n + g] - q[l2 * n + g];
        let r_k = qhat[k * n + g] + qhat[k2 * n + g];
        let r_l = qhat[l * n + g] + qhat[l2 * n + g];
        // Both kills need the active row's symbol g in a shared column.
        let mut joint = 0.0;
        for c in [k, k2] {
            if c == l || c == l2 {
                joint += qhat[c * n + g];
            }
        }
        ex += a * b * (1.0 - r_k - r_l + joint) / (den_k * den_l);
    }
    (x0, x1, ex)
}

/// Report-level aggregate of one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub n: usize,
    pub m: usize,
    pub steps: usize,
    pub exit_time: Option<usize>,
    pub exit_reasons: Vec<String>,
    /// `ln n / sqrt n`, the scale of the line and pair bounds.
    pub phi: f64,
    /// `max |X - 1|` over local line sums at checked times.
    pub b_deviation_max: f64,
    /// `max (n X - 1)` over pair products at checked times.
    pub c_deviation_max: f64,
    pub p_max: f64,
    pub martingale_residual_max: f64,
    pub s_identity_residual_max: f64,
    pub max_line_kills: usize,
    pub max_c_kills: usize,
    pub growth_min: f64,
    pub growth_max: f64,
    /// `N m / X^0 + xi_- + xi_+` for local line sums.
    pub xi_b: f64,
    /// `N m / X^0 + xi_- + xi_+` for pair products.
    pub xi_c: f64,
    pub b_step_dev_max: f64,
    pub c_step_dev_max: f64,
    pub cumulative_b_drift: f64,
    pub cumulative_c_drift: f64,
    pub eta_max_used: f64,
    pub eta_mean: f64,
}

pub fn summarize(stats: &TrajectoryStats) -> Result<SummaryReport> {
    let recs = &stats.records;
    if recs.is_empty() && stats.stop.is_none() {
        return Err(Error::EmptyTrajectory);
    }
    let n = stats.n;
    let nf = n as f64;
    let fold = |f: fn(&StepRecord) -> f64, init: f64, op: fn(f64, f64) -> f64| {
        recs.iter().map(f).fold(init, op)
    };
    let mut b_dev = fold(|r| (r.b_sum_max - 1.0).max(1.0 - r.b_sum_min), 0.0, f64::max);
    let mut c_max = fold(|r| r.c_lhs_max, 0.0, f64::max);
    let mut p_max = fold(|r| r.p_max, 0.0, f64::max);
    if let Some(g) = stats.stop.as_ref().and_then(|s| s.gamma.as_ref()) {
        if g.b_min.is_finite() {
            b_dev = b_dev.max((g.b_max - 1.0).max(1.0 - g.b_min));
        }
        c_max = c_max.max(g.c_max);
        p_max = p_max.max(g.p_max);
    }
    let growth_min = fold(|r| r.growth_min, 1.0, f64::min);
    let growth_max = fold(|r| r.growth_max, 1.0, f64::max);
    let max_line_kills = recs.iter().map(|r| r.max_line_kills).max().unwrap_or(0);
    let max_c_kills = recs.iter().map(|r| r.max_c_kills).max().unwrap_or(0);
    let xi_minus = (1.0 - growth_min).max(0.0);
    let xi_plus = growth_max - 1.0;
    let xi_b = max_line_kills as f64 * p_max + xi_minus + xi_plus;
    let xi_c = max_c_kills as f64 * p_max * p_max * nf
        + (1.0 - growth_min * growth_min).max(0.0)
        + (growth_max * growth_max - 1.0);
    Ok(SummaryReport {
        n,
        m: stats.m,
        steps: recs.len(),
        exit_time: stats.stop.as_ref().map(|s| s.time),
        exit_reasons: stats.stop.as_ref().map(|s| s.reasons.clone()).unwrap_or_default(),
        phi: phi(n),
        b_deviation_max: b_dev,
        c_deviation_max: nf * c_max - 1.0,
        p_max,
        martingale_residual_max: fold(|r| r.martingale_residual, 0.0, f64::max),
        s_identity_residual_max: fold(|r| r.s_identity_residual, 0.0, f64::max),
        max_line_kills,
        max_c_kills,
        growth_min,
        growth_max,
        xi_b,
        xi_c,
        b_step_dev_max: fold(|r| r.b_step_dev, 0.0, f64::max),
        c_step_dev_max: fold(|r| r.c_step_dev, 0.0, f64::max),
        cumulative_b_drift: recs.iter().map(|r| r.b_drift).sum(),
        cumulative_c_drift: recs.iter().map(|r| r.c_drift).sum(),
        eta_max_used: fold(|r| r.eta_used, 0.0, f64::max),
        eta_mean: if recs.is_empty() {
            0.0
        } else {
            recs.iter().map(|r| r.eta_used).sum::<f64>() / recs.len() as f64
        },
    })
}

/// Bin edges, in units of `phi`, of the line-sum deviation histogram.
pub const B_HIST_EDGES: [f64; 8] = [0.125, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0];

/// Aggregate over many runs. [`EnsembleSummary::merge`] is associative and
/// commutative, with [`EnsembleSummary::default`] as identity.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub runs: usize,
    pub completed: usize,
    pub exits_by_reason: BTreeMap<String, usize>,
    pub b_deviation_max: f64,
    pub c_deviation_max: f64,
    pub martingale_residual_max: f64,
    pub s_identity_residual_max: f64,
    pub max_line_kills: usize,
    pub max_c_kills: usize,
    pub growth_max: f64,
    /// Counts of per-run `b_deviation_max / phi`; last bin is open.
    pub b_deviation_hist: Vec<usize>,
}

impl EnsembleSummary {
    pub fn from_summary(s: &SummaryReport) -> Self {
        let mut hist = vec![0; B_HIST_EDGES.len() + 1];
        let scaled = s.b_deviation_max / s.phi;
        let bin = B_HIST_EDGES
            .iter()
            .position(|&e| scaled < e)
            .unwrap_or(B_HIST_EDGES.len());
        hist[bin] = 1;
        let mut exits = BTreeMap::new();
        for r in &s.exit_reasons {
            *exits.entry(r.clone()).or_insert(0) += 1;
        }
        EnsembleSummary {
            runs: 1,
            completed: s.exit_time.is_none() as usize,
            exits_by_reason: exits,
            b_deviation_max: s.b_deviation_max,
            c_deviation_max: s.c_deviation_max,
            martingale_residual_max: s.martingale_residual_max,
            s_identity_residual_max: s.s_identity_residual_max,
            max_line_kills: s.max_line_kills,
            max_c_kills: s.max_c_kills,
            growth_max: s.growth_max,
            b_deviation_hist: hist,
        }
    }

    pub fn merge(mut self, other: &EnsembleSummary) -> Self {
        if other.runs == 0 {
            return self;
        }
        if self.runs == 0 {
            return other.clone();
        }
        self.runs += other.runs;
        self.completed += other.completed;
        for (k, v) in &other.exits_by_reason {
            *self.exits_by_reason.entry(k.clone()).or_insert(0) += v;
        }
        self.b_deviation_max = self.b_deviation_max.max(other.b_deviation_max);
        self.c_deviation_max = self.c_deviation_max.max(other.c_deviation_max);
        self.martingale_residual_max = self.martingale_residual_max.max(other.martingale_residual_max);
        self.s_identity_residual_max = self.s_identity_residual_max.max(other.s_identity_residual_max);
        self.max_line_kills = self.max_line_kills.max(other.max_line_kills);
        self.max_c_kills = self.max_c_kills.max(other.max_c_kills);
        self.growth_max = self.growth_max.max(other.growth_max);
        for (a, b) in self.b_deviation_hist.iter_mut().zip(&other.b_deviation_hist) {
            *a += b;
        }
        self
    }
}

/// Writes one CSV row per step.
pub fn write_trajectory_csv<W: Write>(stats: &TrajectoryStats, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &stats.records {
        w.serialize(r)?;
    }
    if stats.records.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

/// Header of [`write_trajectory_csv`].
pub const CSV_COLUMNS: [&str; 22] = [
    "t",
    "b_sum_min",
    "b_sum_max",
    "c_lhs_max",
    "p_max",
    "kills_this_step",
    "eta_used",
    "b_margin_min",
    "c_margin_min",
    "max_line_kills",
    "max_c_kills",
    "martingale_residual",
    "b_step_dev",
    "b_drift",
    "c_step_dev",
    "c_drift",
    "growth_min",
    "growth_max",
    "s_identity_residual",
    "s_lines_alive",
    "decomposition_terms",
    "reconstruction_error",
];

pub fn trajectory_to_json(stats: &TrajectoryStats) -> Result<String> {
    Ok(serde_json::to_string_pretty(stats)?)
}

pub fn summary_to_json(summary: &SummaryReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(summary)?)
}
