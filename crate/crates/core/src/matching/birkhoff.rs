//! Birkhoff–von Neumann decomposition of a fractional matching and sampling
//! of a permutation from it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bipartite::Matcher;
use super::FractionalMatching;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct BirkhoffTerm<S = f64> {
    pub coefficient: S,
    /// `permutation[col] = sym`.
    pub permutation: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BirkhoffDecomposition<S = f64> {
    n: usize,
    terms: Vec<BirkhoffTerm<S>>,
}

/// Serializable view for debugging exports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub n: usize,
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl<S: Scalar> BirkhoffDecomposition<S> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[BirkhoffTerm<S>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient_sum(&self) -> S {
        self.terms
            .iter()
            .fold(S::zero(), |acc, t| acc + t.coefficient.clone())
    }

    /// `sum_M c_M M` as a row-major (column, symbol) matrix.
    pub fn reconstruct(&self) -> Vec<S> {
        let n = self.n;
        let mut q = vec![S::zero(); n * n];
        for t in &self.terms {
            for (k, &g) in t.permutation.iter().enumerate() {
                let e = &mut q[k * n + g as usize];
                *e = e.clone() + t.coefficient.clone();
            }
        }
        q
    }

    /// Index of a term drawn with probability proportional to its coefficient.
    /// Consumes exactly one `f64` from `rng`.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let total = self.coefficient_sum().to_f64();
        let target = u * total;
        let mut acc = 0.0;
        for (i, t) in self.terms.iter().enumerate() {
            acc += t.coefficient.to_f64();
            if target < acc {
                return i;
            }
        }
        self.terms.len() - 1
    }

    pub fn to_f64(&self) -> BirkhoffDecomposition<f64> {
        BirkhoffDecomposition {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| BirkhoffTerm {
                    coefficient: t.coefficient.to_f64(),
                    permutation: t.permutation.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| (t.coefficient.to_f64(), t.permutation.clone()))
                .collect(),
        }
    }
}

/// Decomposes `q` greedily: take a perfect matching on the positive support,
/// subtract its smallest entry along the matching, repeat. Entries at or
/// below dust are zeroed first and after every subtraction.
pub fn birkhoff_decompose<S: Scalar>(q: &FractionalMatching<S>) -> Result<BirkhoffDecomposition<S>> {
    let n = q.n();
    if q.stochastic_error() > S::tolerance() {
        return Err(Error::NotDoublyStochastic(format!(
            "line sums deviate by {:e}",
            q.stochastic_error().to_f64()
        )));
    }
    let mut residual: Vec<S> = q
        .entries()
        .iter()
        .map(|x| if x.is_dust() { S::zero() } else { x.clone() })
        .collect();
    let mut support = residual.iter().filter(|x| **x > S::zero()).count();
    let mut matcher = Matcher::new(n);
    let mut terms = Vec::new();
    let mut remaining = S::one();

    while support > 0 {
        let found = {
            let r = &residual;
            matcher.complete(|k, g| r[k * n + g] > S::zero())
        };
        if !found {
            // Leftover floating-point dust, not real mass.
            let largest = residual.iter().fold(S::zero(), |a, x| S::max_of(a, x.clone()));
            if !S::EXACT && largest.to_f64() <= crate::scalar::F64_TOLERANCE {
                break;
            }
            return Err(Error::NoSupportMatching {
                remaining: remaining.to_f64(),
            });
        }
        let perm: Vec<u32> = matcher.assignment().iter().map(|&g| g as u32).collect();
        let coefficient = perm
            .iter()
            .enumerate()
            .map(|(k, &g)| residual[k * n + g as usize].clone())
            .reduce(S::min_of)
            .expect("n >= 1");
        for (k, &g) in perm.iter().enumerate() {
            let e = &mut residual[k * n + g as usize];
            *e = e.clone() - coefficient.clone();
            if e.is_dust() {
                *e = S::zero();
                support -= 1;
                matcher.unmatch_edge(k, g as usize);
            }
        }
        remaining = remaining - coefficient.clone();
        terms.push(BirkhoffTerm {
            coefficient,
            permutation: perm,
        });
    }
    Ok(BirkhoffDecomposition { n, terms })
}

/// Draws a permutation (column -> symbol) with probability equal to its coefficient.
pub fn sample_matching<S: Scalar, R: Rng + ?Sized>(
    dec: &BirkhoffDecomposition<S>,
    rng: &mut R,
) -> Vec<u32> {
    dec.terms[dec.sample_index(rng)].permutation.clone()
}

/// Upper bound on the number of terms, `n^2 - 2n + 2`.
pub fn max_terms(n: usize) -> usize {
    (n * n + 2).saturating_sub(2 * n).max(1)
}
