//! Numeric backends for the process: `f64` with tolerances, or exact
//! rationals for small-`n` oracle runs.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Arithmetic mode selectable from configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    #[default]
    F64,
    Exact,
}

pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Whether arithmetic is exact (no tolerances apply).
    const EXACT: bool;

    /// Values at or below this magnitude are treated as zero.
    fn dust() -> Self;

    /// Slack allowed in equality and feasibility checks.
    fn tolerance() -> Self;

    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn ratio(num: usize, den: usize) -> Self;

    fn is_dust(&self) -> bool {
        *self <= Self::dust() && Self::zero() - self.clone() <= Self::dust()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn dot(a: &[Self], b: &[Self]) -> Self {
        a.iter()
            .zip(b)
            .fold(Self::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
    }

    fn sum(a: &[Self]) -> Self {
        a.iter().fold(Self::zero(), |acc, x| acc + x.clone())
    }
}

/// Truncation threshold for floating-point dust.
pub const F64_DUST: f64 = 1e-12;

/// Equality slack for sums (stochasticity, flow value).
pub const F64_TOLERANCE: f64 = 1e-9;

impl Scalar for f64 {
    const EXACT: bool = false;

    fn dust() -> Self {
        F64_DUST
    }

    fn tolerance() -> Self {
        F64_TOLERANCE
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn ratio(num: usize, den: usize) -> Self {
        num as f64 / den as f64
    }

    // Four independent accumulators so the loop vectorizes.
    fn dot(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len().min(b.len());
        let (a, b) = (&a[..n], &b[..n]);
        let mut acc = [0.0f64; 4];
        let mut ca = a.chunks_exact(4);
        let mut cb = b.chunks_exact(4);
        for (x, y) in (&mut ca).zip(&mut cb) {
            for j in 0..4 {
                acc[j] += x[j] * y[j];
            }
        }
        let tail: f64 = ca
            .remainder()
            .iter()
            .zip(cb.remainder())
            .map(|(x, y)| x * y)
            .sum();
        (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
    }

    fn sum(a: &[f64]) -> f64 {
        a.iter().sum()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn dust() -> Self {
        BigRational::zero()
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }

    /// Exact binary value of `x`. Non-finite input maps to zero.
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).unwrap_or_else(BigRational::zero)
    }

    fn to_f64(&self) -> f64 {
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
            _ => {
                // Scale down huge numerators/denominators before dividing.
                let shift = self.numer().bits().max(self.denom().bits()).saturating_sub(1000);
                let num = self.numer() >> shift as usize;
                let den = self.denom() >> shift as usize;
                num.to_f64().unwrap_or(0.0) / den.to_f64().unwrap_or(1.0)
            }
        }
    }

    fn ratio(num: usize, den: usize) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn is_dust(&self) -> bool {
        self.is_zero()
    }
}

/// Rounds `x` to a multiple of 2^-20 so exact runs keep small denominators.
pub fn coarse<S: Scalar>(x: f64) -> S {
    if S::EXACT {
        let scale = (1u64 << 20) as f64;
        S::from_f64((x * scale).round() / scale)
    } else {
        S::from_f64(x)
    }
}

pub(crate) fn abs<S: Scalar>(x: S) -> S {
    if x < S::zero() {
        S::zero() - x
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_dot_matches_naive() {
        let a: Vec<f64> = (0..13).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..13).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((f64::dot(&a, &b) - naive).abs() < 1e-12);
    }

    #[test]
    fn rational_roundtrip() {
        let third = BigRational::ratio(1, 3);
        assert!((Scalar::to_f64(&third) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(BigRational::from_f64(0.5), BigRational::ratio(1, 2));
        assert!(BigRational::zero().is_dust());
        assert!(!BigRational::ratio(1, 1 << 40).is_dust());
        assert!(1e-13f64.is_dust());
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = BigInt::from(3) << 5000usize;
        let r = BigRational::new(big.clone(), big * BigInt::from(4));
        assert!((Scalar::to_f64(&r) - 0.25).abs() < 1e-12);
    }
}
