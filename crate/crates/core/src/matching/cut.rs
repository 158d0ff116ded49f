//! Exhaustive cut oracle for the fractional-matching network.
//!
//! A cut is fixed by a symbol set `A` (sink side) and a column set `B`
//! (source side). Its capacity is `2n - |A| - |B| + (1+eta) d(B, A)`. For
//! fixed `A` the best `B` takes exactly the columns with
//! `(1+eta) d(k, A) < 1`, so only the `2^n` symbol sets are enumerated.

use super::RowDistribution;
use crate::error::{Error, Result};
use crate::scalar::{coarse, Scalar};

/// Largest `n` accepted by [`cut_check_bruteforce`].
pub const MAX_CUT_N: usize = 14;

#[derive(Clone, Debug, PartialEq)]
pub struct CutCheck {
    pub feasible: bool,
    /// First violating `(A, B)` in enumeration order of `A` (as a bitmask).
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
    /// Smallest cut capacity seen.
    pub min_capacity: f64,
}

pub fn cut_check_bruteforce<S: Scalar>(d: &RowDistribution<S>, eta: f64) -> Result<CutCheck> {
    let n = d.n();
    if n > MAX_CUT_N {
        return Err(Error::TooLarge { n, max: MAX_CUT_N });
    }
    let factor = S::one() + coarse::<S>(eta);
    let target = S::ratio(n, 1);
    let mut min_capacity: Option<S> = None;
    let mut witness = None;
    for mask in 0u32..(1u32 << n) {
        let a: Vec<usize> = (0..n).filter(|g| mask & (1 << g) != 0).collect();
        let mut capacity = S::ratio(2 * n - a.len(), 1);
        let mut b = Vec::new();
        for k in 0..n {
            let mass = a
                .iter()
                .fold(S::zero(), |acc, &g| acc + d.get(k, g).clone());
            let w = factor.clone() * mass;
            if w < S::one() {
                capacity = capacity + w - S::one();
                b.push(k);
            }
        }
        if witness.is_none() && capacity.clone() + S::tolerance() < target {
            witness = Some((a, b));
        }
        min_capacity = Some(match min_capacity {
            None => capacity,
            Some(m) => S::min_of(m, capacity),
        });
    }
    Ok(CutCheck {
        feasible: witness.is_none(),
        witness,
        min_capacity: min_capacity.map_or(n as f64, |c| c.to_f64()),
    })
}
