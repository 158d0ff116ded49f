//! Reference constructions: the row-by-row greedy matcher that always
//! works for `m <= n/4`, an exhaustive mate search for tiny orders, and a
//! generator of random input rectangles.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latin::{verify_orthogonal, LatinRectangle, Shape};
use crate::matching::bipartite::Matcher;

/// Column/symbol pairs that may be placed on the next row of a partial mate.
///
/// `(k, g)` is an edge iff `g` does not occur in column `k` of the prefix and
/// the pair `(J(t, k), g)` does not occur in the prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegalityGraph {
    n: usize,
    t: usize,
    adj: Vec<bool>,
}

impl LegalityGraph {
    /// Graph for row `prefix.len()` of a mate of `j`.
    pub fn build(j: &LatinRectangle, prefix: &[Vec<u32>]) -> Result<Self> {
        let n = j.n();
        let t = prefix.len();
        if t >= j.m() {
            return Err(Error::IndexOutOfRange(format!(
                "row {t} of a rectangle with {} rows",
                j.m()
            )));
        }
        let mut adj = vec![true; n * n];
        let pos = j.symbol_positions();
        for (s, row) in prefix.iter().enumerate() {
            for (k, &g) in row.iter().enumerate() {
                let g = g as usize;
                adj[k * n + g] = false;
                let d = j.get(s, k);
                let k_t = pos[t * n + d] as usize;
                adj[k_t * n + g] = false;
            }
        }
        Ok(LegalityGraph { n, t, adj })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    #[inline]
    pub fn has_edge(&self, col: usize, sym: usize) -> bool {
        self.adj[col * self.n + sym]
    }

    pub fn col_degree(&self, col: usize) -> usize {
        (0..self.n).filter(|&g| self.has_edge(col, g)).count()
    }

    pub fn sym_degree(&self, sym: usize) -> usize {
        (0..self.n).filter(|&k| self.has_edge(k, sym)).count()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n)
            .map(|v| self.col_degree(v).min(self.sym_degree(v)))
            .min()
            .unwrap_or(0)
    }

    /// Perfect matching with columns and symbols visited in shuffled order.
    pub fn random_matching<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<u32>> {
        shuffled_matching(self.n, rng, |k, g| self.has_edge(k, g))
    }
}

fn shuffled_matching<R, F>(n: usize, rng: &mut R, adj: F) -> Option<Vec<u32>>
where
    R: Rng + ?Sized,
    F: Fn(usize, usize) -> bool,
{
    let mut cols: Vec<usize> = (0..n).collect();
    cols.shuffle(rng);
    let mut syms: Vec<usize> = (0..n).collect();
    syms.shuffle(rng);
    let mut matcher = Matcher::with_order(n, syms);
    if !matcher.complete(|u, g| adj(cols[u], g)) {
        return None;
    }
    let mut row = vec![0u32; n];
    for (u, &g) in matcher.assignment().iter().enumerate() {
        row[cols[u]] = g as u32;
    }
    Some(row)
}

/// Greedy mate of the first `m` rows of `j`: each row is a perfect matching
/// of its legality graph. Each placed row removes at most two edges at every
/// vertex, so the degree stays `>= n - 2t >= n/2` and Hall's condition holds
/// while `m <= n/4`.
pub fn hall_greedy<R: Rng + ?Sized>(
    j: &LatinRectangle,
    m: usize,
    rng: &mut R,
) -> Result<LatinRectangle> {
    let n = j.n();
    if m == 0 || m > j.m() {
        return Err(Error::InvalidShape(format!(
            "cannot build {m} rows against a rectangle with {} rows",
            j.m()
        )));
    }
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(m);
    for t in 0..m {
        let g = LegalityGraph::build(j, &rows)?;
        debug_assert!(g.min_degree() + 2 * t >= n);
        match g.random_matching(rng) {
            Some(row) => rows.push(row),
            None => return Err(Error::NoPerfectMatching { row: t }),
        }
    }
    let mate = LatinRectangle::from_rows(rows)?;
    let prefix = prefix_of(j, m);
    debug_assert!(verify_orthogonal(&mate, &prefix)?.ok);
    Ok(mate)
}

/// The first `m` rows of `j`.
pub fn prefix_of(j: &LatinRectangle, m: usize) -> LatinRectangle {
    if m == j.m() {
        return j.clone();
    }
    let rows = j.rows().take(m).map(<[u32]>::to_vec).collect();
    LatinRectangle::from_rows_unvalidated(rows).expect("prefix of a valid rectangle")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BacktrackLimits {
    /// Cell assignments tried before giving up.
    pub max_nodes: u64,
}

impl Default for BacktrackLimits {
    fn default() -> Self {
        BacktrackLimits {
            max_nodes: 50_000_000,
        }
    }
}

/// Largest order the exhaustive search accepts.
pub const BACKTRACK_MAX_N: usize = 10;

struct Search<'a> {
    j: &'a LatinRectangle,
    n: usize,
    m: usize,
    full: u64,
    // bitmasks over symbols
    col_used: Vec<u64>,
    pair_used: Vec<u64>,
    row_used: u64,
    rows: Vec<Vec<u32>>,
    nodes: u64,
    limit: u64,
}

impl Search<'_> {
    fn avail(&self, t: usize, k: usize) -> u64 {
        !self.col_used[k] & !self.pair_used[self.j.get(t, k)] & self.full
    }

    /// Every later row still has a perfect matching.
    fn forward_ok(&self, from: usize) -> bool {
        (from..self.m).all(|s| {
            let masks: Vec<u64> = (0..self.n).map(|k| self.avail(s, k)).collect();
            if masks.contains(&0) {
                return false;
            }
            let mut matcher = Matcher::new(self.n);
            matcher.complete(|k, g| masks[k] >> g & 1 == 1)
        })
    }

    fn place(&mut self, t: usize, k: usize, g: usize, on: bool) {
        let bit = 1u64 << g;
        let d = self.j.get(t, k);
        if on {
            self.col_used[k] |= bit;
            self.pair_used[d] |= bit;
            self.row_used |= bit;
        } else {
            self.col_used[k] &= !bit;
            self.pair_used[d] &= !bit;
            self.row_used &= !bit;
        }
    }

    fn cell(&mut self, t: usize, k: usize) -> Result<bool> {
        if k == self.n {
            let saved = self.row_used;
            self.row_used = 0;
            let done = t + 1 == self.m || (self.forward_ok(t + 1) && self.cell(t + 1, 0)?);
            self.row_used = saved;
            return Ok(done);
        }
        let mut options = self.avail(t, k) & !self.row_used;
        while options != 0 {
            let g = options.trailing_zeros() as usize;
            options &= options - 1;
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(Error::LimitExceeded { limit: self.limit });
            }
            self.place(t, k, g, true);
            if t == self.rows.len() {
                self.rows.push(vec![0; self.n]);
            }
            self.rows[t][k] = g as u32;
            if self.cell(t, k + 1)? {
                return Ok(true);
            }
            self.place(t, k, g, false);
        }
        if k == 0 && self.rows.len() > t {
            self.rows.truncate(t);
        }
        Ok(false)
    }
}

/// Exhaustive depth-first search for a mate of `j`, in lexicographic order
/// of cell assignments, with a matching check on every later row after each
/// completed row. `Ok(None)` means the search space is exhausted.
pub fn backtrack_mate(j: &LatinRectangle, limits: BacktrackLimits) -> Result<Option<LatinRectangle>> {
    let Shape { n, m } = j.shape();
    if n > BACKTRACK_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: BACKTRACK_MAX_N,
        });
    }
    let mut search = Search {
        j,
        n,
        m,
        full: (1u64 << n) - 1,
        col_used: vec![0; n],
        pair_used: vec![0; n],
        row_used: 0,
        rows: Vec::with_capacity(m),
        nodes: 0,
        limit: limits.max_nodes,
    };
    if !search.forward_ok(0) || !search.cell(0, 0)? {
        return Ok(None);
    }
    let mate = LatinRectangle::from_rows(search.rows)?;
    assert!(verify_orthogonal(&mate, j)?.ok, "search returned a non-mate");
    Ok(Some(mate))
}

/// A Latin rectangle grown row by row, each row a perfect matching of the
/// column/symbol availability graph found in shuffled order. Every vertex of
/// that graph has degree `n - t`, so extension never fails. The result is
/// not uniform over all Latin rectangles.
pub fn random_latin_rectangle<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<LatinRectangle> {
    let shape = Shape::new(n, m)?;
    let mut col_used = vec![false; n * n];
    let mut cells = Vec::with_capacity(m * n);
    for _ in 0..m {
        let row = shuffled_matching(n, rng, |k, g| !col_used[k * n + g])
            .expect("regular bipartite graphs have perfect matchings");
        for (k, &g) in row.iter().enumerate() {
            col_used[k * n + g as usize] = true;
        }
        cells.extend(row);
    }
    Ok(LatinRectangle::from_cells(shape, cells))
}
