use serde::{Deserialize, Serialize};

use super::flow::{EdgeRef, FlowNetwork};
use super::RowDistribution;
use crate::error::{Error, Result};
use crate::scalar::{abs, coarse, Scalar};

/// A nonnegative `n x n` matrix over (column, symbol) with unit row and
/// column sums.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalMatching<S = f64> {
    n: usize,
    q: Vec<S>,
}

impl<S: Scalar> FractionalMatching<S> {
    /// Validates double stochasticity within the scalar tolerance.
    pub fn new(n: usize, q: Vec<S>) -> Result<Self> {
        if q.len() != n * n {
            return Err(Error::NotDoublyStochastic(format!(
                "expected {} entries, got {}",
                n * n,
                q.len()
            )));
        }
        if let Some(idx) = q.iter().position(|x| *x < S::zero() && !x.is_dust()) {
            return Err(Error::NotDoublyStochastic(format!("negative entry at {idx}")));
        }
        let fm = FractionalMatching { n, q };
        let err = fm.stochastic_error();
        if err > S::tolerance() {
            return Err(Error::NotDoublyStochastic(format!(
                "line sums deviate from 1 by {:e}",
                err.to_f64()
            )));
        }
        Ok(fm)
    }

    pub fn uniform(n: usize) -> Self {
        FractionalMatching {
            n,
            q: vec![S::ratio(1, n); n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, col: usize, sym: usize) -> &S {
        &self.q[col * self.n + sym]
    }

    pub fn entries(&self) -> &[S] {
        &self.q
    }

    /// Largest `|line sum - 1|` over rows and columns.
    pub fn stochastic_error(&self) -> S {
        let n = self.n;
        let mut worst = S::zero();
        for a in 0..n {
            let row = (0..n).fold(S::zero(), |acc, b| acc + self.q[a * n + b].clone());
            let col = (0..n).fold(S::zero(), |acc, b| acc + self.q[b * n + a].clone());
            worst = S::max_of(worst, abs(row - S::one()));
            worst = S::max_of(worst, abs(col - S::one()));
        }
        worst
    }

    pub fn to_f64(&self) -> FractionalMatching<f64> {
        FractionalMatching {
            n: self.n,
            q: self.q.iter().map(Scalar::to_f64).collect(),
        }
    }

    pub fn to_rows_f64(&self) -> Vec<Vec<f64>> {
        self.q.chunks(self.n).map(|r| r.iter().map(Scalar::to_f64).collect()).collect()
    }
}

/// How the slack `eta` in `q <= (1 + eta) d` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaPolicy {
    /// Use `eta_initial` only.
    Fixed,
    /// Start at `eta_initial` and double until feasible or past `eta_max`.
    #[default]
    Doubling,
}

/// Default starting slack `4 * sqrt(ln n / sqrt n)`.
pub fn default_eta_initial(n: usize) -> f64 {
    let n = n as f64;
    4.0 * (n.ln() / n.sqrt()).max(0.0).sqrt()
}

/// First slack tried after a zero start under [`EtaPolicy::Doubling`].
const ETA_FLOOR: f64 = 0.125;

/// Builds `q` as a flow through source -> column (cap 1) -> symbol
/// (cap `(1+eta) d(k, g)`) -> sink (cap 1).
///
/// The flow is first maximized with capacities `d` and then augmented as
/// the capacities are raised. A doubly stochastic `d` is returned
/// unchanged for every `eta`.
pub fn build_fractional_matching<S: Scalar>(
    d: &RowDistribution<S>,
    policy: EtaPolicy,
    eta_initial: f64,
    eta_max: f64,
) -> Result<(FractionalMatching<S>, f64)> {
    let n = d.n();
    let (source, sink) = (0, 2 * n + 1);
    let mut net = FlowNetwork::<S>::new(2 * n + 2);
    let source_edges: Vec<EdgeRef> = (0..n)
        .map(|k| net.add_edge(source, 1 + k, S::one()))
        .collect();
    let middle: Vec<EdgeRef> = (0..n * n)
        .map(|idx| net.add_edge(1 + idx / n, 1 + n + idx % n, d.weights()[idx].clone()))
        .collect();
    for g in 0..n {
        net.add_edge(1 + n + g, sink, S::one());
    }
    let target = S::ratio(n, 1);
    let hint = S::ratio(n + 1, 1);
    net.augment(source, sink, hint.clone());

    let mut eta = eta_initial.max(0.0);
    loop {
        let factor = S::one() + coarse::<S>(eta);
        for (idx, &e) in middle.iter().enumerate() {
            net.set_capacity(e, factor.clone() * d.weights()[idx].clone());
        }
        net.augment(source, sink, hint.clone());
        let value = net.value(source);
        if value.clone() + S::tolerance() >= target {
            let q = middle.iter().map(|&e| net.flow(e).clone()).collect();
            debug_assert!(source_edges.iter().all(|&e| net.flow(e).clone() + S::tolerance() >= S::one()));
            return Ok((FractionalMatching { n, q }, eta));
        }
        if policy == EtaPolicy::Fixed || eta >= eta_max {
            return Err(Error::Infeasible {
                n,
                flow: value.to_f64(),
                eta,
            });
        }
        eta = if eta <= 0.0 { ETA_FLOOR } else { 2.0 * eta }.min(eta_max);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn dist(n: usize, w: Vec<f64>) -> RowDistribution<f64> {
        RowDistribution::from_normalized(n, w).unwrap()
    }

    #[test]
    fn uniform_passes_through() {
        let n = 5;
        let d = dist(n, vec![0.2; 25]);
        for eta in [0.0, 0.5, 3.0] {
            let (q, used) = build_fractional_matching(&d, EtaPolicy::Fixed, eta, eta).unwrap();
            assert_eq!(used, eta);
            assert!(q.entries().iter().all(|x| (x - 0.2).abs() < 1e-12));
        }
    }

    #[test]
    fn doubly_stochastic_at_zero_slack() {
        let n = 3;
        let w = vec![0.5, 0.25, 0.25, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5];
        let d = dist(n, w.clone());
        let (q, _) = build_fractional_matching(&d, EtaPolicy::Fixed, 0.0, 0.0).unwrap();
        for (a, b) in q.entries().iter().zip(&w) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn needs_slack() {
        // Column 0 carries 0.6 of every symbol; columns 1,2 share the rest.
        let n = 3;
        let w = vec![0.6, 0.6, 0.6, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2];
        let d = dist(n, w.clone());
        assert!(matches!(
            build_fractional_matching(&d, EtaPolicy::Fixed, 0.0, 0.0),
            Err(Error::Infeasible { .. })
        ));
        // Columns 1 and 2 need total 1 from 0.6 of mass: eta >= 2/3.
        assert!(build_fractional_matching(&d, EtaPolicy::Fixed, 0.6, 0.6).is_err());
        let (q, eta) = build_fractional_matching(&d, EtaPolicy::Doubling, 0.1, 10.0).unwrap();
        assert_eq!(eta, 0.8);
        assert!(q.stochastic_error() < 1e-9);
        for (a, b) in q.entries().iter().zip(&w) {
            assert!(*a <= (1.0 + eta) * b + 1e-12);
        }
    }

    #[test]
    fn exact_arithmetic() {
        let n = 3;
        let r = |a, b| BigRational::ratio(a, b);
        let w = vec![r(3, 5), r(3, 5), r(3, 5), r(1, 5), r(1, 5), r(1, 5), r(1, 5), r(1, 5), r(1, 5)];
        let d = RowDistribution::from_normalized(n, w).unwrap();
        let (q, eta) = build_fractional_matching(&d, EtaPolicy::Doubling, 0.25, 4.0).unwrap();
        assert_eq!(eta, 1.0);
        assert_eq!(q.stochastic_error(), BigRational::from_integer(0.into()));
    }

    #[test]
    fn default_eta() {
        assert_eq!(default_eta_initial(1), 0.0);
        let e = default_eta_initial(64);
        assert!((e - 4.0 * (64f64.ln() / 8.0).sqrt()).abs() < 1e-15);
    }
}
