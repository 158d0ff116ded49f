use std::fmt;

use serde::{Deserialize, Serialize};

use super::LatinRectangle;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `sym` occurs `count` times in `row` (count 0 means missing).
    RowSymbol { row: usize, sym: usize, count: usize },
    /// `sym` occurs more than once in `col`.
    ColumnRepeat { col: usize, sym: usize, count: usize },
    /// The ordered pair (J symbol, L symbol) appears at two cells.
    PairRepeat {
        j_sym: usize,
        l_sym: usize,
        first: (usize, usize),
        second: (usize, usize),
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSymbol { row, sym, count } => {
                write!(f, "row {row} contains symbol {sym} {count} times")
            }
            Violation::ColumnRepeat { col, sym, count } => {
                write!(f, "column {col} contains symbol {sym} {count} times")
            }
            Violation::PairRepeat {
                j_sym,
                l_sym,
                first,
                second,
            } => write!(
                f,
                "pair ({j_sym}, {l_sym}) repeated at cells {first:?} and {second:?}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        VerifyReport {
            ok: violations.is_empty(),
            violations,
        }
    }
}

/// Checks that every row is a permutation and every column repeats no symbol.
pub fn verify_latin(l: &LatinRectangle) -> VerifyReport {
    let (n, m) = (l.n(), l.m());
    let mut violations = Vec::new();
    let mut count = vec![0usize; n];
    for (i, row) in l.rows().enumerate() {
        count.iter_mut().for_each(|c| *c = 0);
        for &s in row {
            count[s as usize] += 1;
        }
        for (sym, &c) in count.iter().enumerate() {
            if c != 1 {
                violations.push(Violation::RowSymbol { row: i, sym, count: c });
            }
        }
    }
    for k in 0..n {
        count.iter_mut().for_each(|c| *c = 0);
        for i in 0..m {
            count[l.get(i, k)] += 1;
        }
        for (sym, &c) in count.iter().enumerate() {
            if c > 1 {
                violations.push(Violation::ColumnRepeat { col: k, sym, count: c });
            }
        }
    }
    VerifyReport::from_violations(violations)
}

/// Checks that the `m n` pairs `(J(i,k), L(i,k))` are distinct.
pub fn verify_orthogonal(l: &LatinRectangle, j: &LatinRectangle) -> Result<VerifyReport> {
    if l.shape() != j.shape() {
        return Err(Error::ShapeMismatch {
            left: l.shape().to_string(),
            right: j.shape().to_string(),
        });
    }
    let n = l.n();
    let mut seen: Vec<Option<(usize, usize)>> = vec![None; n * n];
    let mut violations = Vec::new();
    for i in 0..l.m() {
        for k in 0..n {
            let (a, b) = (j.get(i, k), l.get(i, k));
            match seen[a * n + b] {
                Some(first) => violations.push(Violation::PairRepeat {
                    j_sym: a,
                    l_sym: b,
                    first,
                    second: (i, k),
                }),
                None => seen[a * n + b] = Some((i, k)),
            }
        }
    }
    Ok(VerifyReport::from_violations(violations))
}

/// Cells with pairwise distinct rows, columns and `J` symbols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialTransversal {
    pub cells: Vec<(usize, usize)>,
}

impl PartialTransversal {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_valid_for(&self, j: &LatinRectangle) -> bool {
        let (n, m) = (j.n(), j.m());
        let mut rows = vec![false; m];
        let mut cols = vec![false; n];
        let mut syms = vec![false; n];
        self.cells.iter().all(|&(i, k)| {
            if i >= m || k >= n {
                return false;
            }
            let s = j.get(i, k);
            let fresh = !rows[i] && !cols[k] && !syms[s];
            rows[i] = true;
            cols[k] = true;
            syms[s] = true;
            fresh
        })
    }
}

/// Splits the cells by `L` symbol; for an orthogonal pair each class is a
/// partial transversal of `J` of size `m`.
pub fn extract_transversals(
    l: &LatinRectangle,
    j: &LatinRectangle,
) -> Result<Vec<PartialTransversal>> {
    let report = verify_orthogonal(l, j)?;
    if !report.ok {
        return Err(Error::NotOrthogonal {
            violations: report.violations.len(),
        });
    }
    let mut classes = vec![Vec::with_capacity(l.m()); l.n()];
    for i in 0..l.m() {
        for k in 0..l.n() {
            classes[l.get(i, k)].push((i, k));
        }
    }
    Ok(classes
        .into_iter()
        .map(|cells| PartialTransversal { cells })
        .collect())
}
