use crate::error::{Error, Result};
use crate::process::GuidanceState;
use crate::scalar::Scalar;

/// Per-row weights over (column, symbol), normalized so that every symbol
/// carries total weight one across the columns.
#[derive(Clone, Debug, PartialEq)]
pub struct RowDistribution<S = f64> {
    n: usize,
    weights: Vec<S>,
}

impl<S: Scalar> RowDistribution<S> {
    /// Normalizes a row-major `n x n` slice of (column, symbol) masses.
    /// `row` is only used in the error.
    pub fn normalize(n: usize, masses: &[S], row: usize) -> Result<Self> {
        assert_eq!(masses.len(), n * n);
        let mut totals = vec![S::zero(); n];
        for k in 0..n {
            for (g, t) in totals.iter_mut().enumerate() {
                *t = t.clone() + masses[k * n + g].clone();
            }
        }
        if let Some(sym) = totals.iter().position(|t| t.is_dust() || *t <= S::zero()) {
            return Err(Error::DeadSymbol { row, sym });
        }
        let weights = masses
            .iter()
            .enumerate()
            .map(|(idx, w)| w.clone() / totals[idx % n].clone())
            .collect();
        Ok(RowDistribution { n, weights })
    }

    /// Wraps weights that are already normalized per symbol (up to tolerance).
    pub fn from_normalized(n: usize, weights: Vec<S>) -> Result<Self> {
        let d = RowDistribution { n, weights };
        for g in 0..n {
            let total = (0..n).fold(S::zero(), |acc, k| acc + d.get(k, g).clone());
            let err = crate::scalar::abs(total - S::one());
            if err > S::tolerance() {
                return Err(Error::InvalidShape(format!(
                    "symbol {g} weights sum to 1 {:+e}",
                    err.to_f64()
                )));
            }
        }
        if d.weights.iter().any(|w| *w < S::zero()) {
            return Err(Error::InvalidShape("negative weight".into()));
        }
        Ok(d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, col: usize, sym: usize) -> &S {
        &self.weights[col * self.n + sym]
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }
}

/// Per-symbol normalization of the state's masses on `row`.
pub fn normalize_row<S: Scalar>(state: &GuidanceState<S>, row: usize) -> Result<RowDistribution<S>> {
    if row < state.t() {
        return Err(Error::RowAlreadyColoured {
            row,
            time: state.t(),
        });
    }
    RowDistribution::normalize(state.shape().n, state.row(row), row)
}
