use serde::{Deserialize, Serialize};

use super::geometry::Geometry;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::latin::{LatinRectangle, LineClass, Point, Shape};
use crate::matching::FractionalMatching;
use crate::scalar::Scalar;

/// The guiding state: one mass per point, frozen once its row is placed.
///
/// Row `i` is placed at step `t = i`, so a point is uncoloured at time `t`
/// iff its row is `>= t`, and is updated by a step iff its row is `> t`.
#[derive(Clone, Debug, PartialEq)]
pub struct GuidanceState<S = f64> {
    shape: Shape,
    t: usize,
    p: Vec<S>,
    stopped_at: Option<usize>,
}

/// Uniform start `p(x) = 1/n`.
pub fn init_state<S: Scalar>(shape: Shape) -> GuidanceState<S> {
    GuidanceState {
        shape,
        t: 0,
        p: vec![S::ratio(1, shape.n); shape.points()],
        stopped_at: None,
    }
}

impl<S: Scalar> GuidanceState<S> {
    pub fn from_masses(shape: Shape, t: usize, p: Vec<S>) -> Result<Self> {
        if p.len() != shape.points() || t > shape.m {
            return Err(Error::InvalidShape(format!(
                "state of {} masses at t = {t} for {shape}",
                p.len()
            )));
        }
        Ok(GuidanceState {
            shape,
            t,
            p,
            stopped_at: None,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn stopped_at(&self) -> Option<usize> {
        self.stopped_at
    }

    /// Freezes the state; later calls to [`advance_state`] fail.
    pub fn stop(&mut self) {
        self.stopped_at.get_or_insert(self.t);
    }

    pub fn masses(&self) -> &[S] {
        &self.p
    }

    pub fn masses_mut(&mut self) -> &mut [S] {
        &mut self.p
    }

    #[inline]
    pub fn get(&self, x: Point) -> &S {
        &self.p[x.index(self.shape)]
    }

    /// Row-major (column, symbol) masses of `row`.
    pub fn row(&self, row: usize) -> &[S] {
        let nn = self.shape.n * self.shape.n;
        &self.p[row * nn..(row + 1) * nn]
    }

    pub fn to_f64(&self) -> GuidanceState<f64> {
        GuidanceState {
            shape: self.shape,
            t: self.t,
            p: self.p.iter().map(Scalar::to_f64).collect(),
            stopped_at: self.stopped_at,
        }
    }
}

/// `(rho_CS(x), rho_DS(x))`: the points of the active row `t` on the column
/// line and on the diagonal line through `x`. Both share `x`'s symbol.
pub fn central_projections(x: Point, t: usize, j: &LatinRectangle) -> Result<(Point, Point)> {
    if !x.in_range(j.shape()) || t >= j.m() {
        return Err(Error::IndexOutOfRange(format!("{x:?} at t = {t}")));
    }
    if x.row <= t {
        return Err(Error::RowAlreadyColoured { row: x.row, time: t });
    }
    let diagonal = j.get(x.row, x.col) as u32;
    let col = j
        .row(t)
        .iter()
        .position(|&s| s == diagonal)
        .expect("J rows are permutations");
    Ok((Point::new(t, x.col, x.sym), Point::new(t, col, x.sym)))
}

/// Points of rows after `t` whose column or diagonal line meets the placed row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KillMask {
    shape: Shape,
    t: usize,
    // rows t+1..m, flattened like the state
    killed: Vec<bool>,
}

impl KillMask {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn is_killed(&self, x: Point) -> bool {
        if x.row <= self.t || x.row >= self.shape.m {
            return false;
        }
        let base = (self.t + 1) * self.shape.n * self.shape.n;
        self.killed[x.index(self.shape) - base]
    }

    pub fn count(&self) -> usize {
        self.killed.iter().filter(|&&k| k).count()
    }

    pub fn killed_points(&self) -> impl Iterator<Item = Point> + '_ {
        let base = (self.t + 1) * self.shape.n * self.shape.n;
        let shape = self.shape;
        self.killed
            .iter()
            .enumerate()
            .filter(|(_, &k)| k)
            .map(move |(i, _)| Point::from_index(base + i, shape))
    }

    /// Largest number of killed points on one local line of the given class.
    pub fn max_per_local_line(&self, class: LineClass) -> usize {
        let n = self.shape.n;
        let mut worst = 0;
        for row in self.killed.chunks(n * n) {
            for a in 0..n {
                let c = match class {
                    LineClass::RC => (0..n).filter(|&g| row[a * n + g]).count(),
                    LineClass::RS => (0..n).filter(|&k| row[k * n + a]).count(),
                    _ => panic!("{class:?} is not a local line class"),
                };
                worst = worst.max(c);
            }
        }
        worst
    }
}

/// Kill indicators for placing `row_perm` (column -> symbol) on row `t`.
pub fn kill_mask(row_perm: &[u32], t: usize, j: &LatinRectangle) -> KillMask {
    kill_mask_with(row_perm, t, &Geometry::new(j))
}

pub(crate) fn kill_mask_with(row_perm: &[u32], t: usize, geo: &Geometry) -> KillMask {
    let Shape { n, m } = geo.shape;
    let rows = m.saturating_sub(t + 1);
    let mut killed = vec![false; rows * n * n];
    for (r, chunk) in killed.chunks_mut(n * n).enumerate() {
        let i = t + 1 + r;
        for k in 0..n {
            let k2 = geo.diagonal_column(t, i, k);
            chunk[k * n + row_perm[k] as usize] = true;
            chunk[k * n + row_perm[k2] as usize] = true;
        }
    }
    KillMask {
        shape: geo.shape,
        t,
        killed,
    }
}

/// One step of the state update: place `row_perm` (drawn from `q`) on the
/// active row. Uncoloured points are killed or rescaled by the inverse of
/// their survival probability `1 - q(rho_CS) - q(rho_DS)`.
pub fn advance_state<S: Scalar>(
    s: &GuidanceState<S>,
    q: &FractionalMatching<S>,
    row_perm: &[u32],
    j: &LatinRectangle,
) -> Result<GuidanceState<S>> {
    advance_with(s, q, row_perm, &Geometry::new(j), Exec::Sequential)
}

pub(crate) fn advance_with<S: Scalar>(
    s: &GuidanceState<S>,
    q: &FractionalMatching<S>,
    row_perm: &[u32],
    geo: &Geometry,
    exec: Exec,
) -> Result<GuidanceState<S>> {
    if let Some(at) = s.stopped_at {
        return Err(Error::Stopped(at));
    }
    let Shape { n, m } = s.shape;
    let t = s.t;
    if t >= m {
        return Err(Error::IndexOutOfRange(format!("no row left to place at t = {t}")));
    }
    assert_eq!(row_perm.len(), n);
    let nn = n * n;
    let later = exec.map_range(t + 1..m, |i| -> Result<Vec<S>> {
        let old = s.row(i);
        let mut out = Vec::with_capacity(nn);
        for k in 0..n {
            let k2 = geo.diagonal_column(t, i, k);
            for g in 0..n {
                let p = &old[k * n + g];
                if *p <= S::zero() {
                    out.push(S::zero());
                    continue;
                }
                let denominator = S::one() - q.get(k, g).clone() - q.get(k2, g).clone();
                if denominator <= S::dust() {
                    return Err(Error::DegenerateDenominator {
                        point: Point::new(i, k, g),
                        denominator: denominator.to_f64(),
                    });
                }
                let killed = row_perm[k] as usize == g || row_perm[k2] as usize == g;
                out.push(if killed {
                    S::zero()
                } else {
                    p.clone() / denominator
                });
            }
        }
        Ok(out)
    });
    let mut p = Vec::with_capacity(s.p.len());
    p.extend_from_slice(&s.p[..(t + 1) * nn]);
    for row in later {
        p.extend(row?);
    }
    Ok(GuidanceState {
        shape: s.shape,
        t: t + 1,
        p,
        stopped_at: None,
    })
}

/// Serializable snapshot for debugging.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub n: usize,
    pub m: usize,
    pub t: usize,
    pub stopped_at: Option<usize>,
    pub p: Vec<f64>,
}

impl<S: Scalar> From<&GuidanceState<S>> for StateJson {
    fn from(s: &GuidanceState<S>) -> Self {
        StateJson {
            n: s.shape.n,
            m: s.shape.m,
            t: s.t,
            stopped_at: s.stopped_at,
            p: s.p.iter().map(Scalar::to_f64).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::birkhoff_decompose;
    use num_rational::BigRational;

    #[test]
    fn init_values() {
        let s: GuidanceState = init_state(Shape::new(4, 2).unwrap());
        assert_eq!(s.masses().len(), 32);
        assert!(s.masses().iter().all(|&x| x == 0.25));
        let s: GuidanceState = init_state(Shape::new(1, 1).unwrap());
        assert_eq!(s.masses(), &[1.0]);
    }

    #[test]
    fn projections_on_cyclic_three() {
        let j = LatinRectangle::cyclic(3, 3).unwrap();
        let x = Point::new(2, 0, 1);
        let (cs, ds) = central_projections(x, 0, &j).unwrap();
        assert_eq!(cs, Point::new(0, 0, 1));
        // J(2,0) = 2 and J(0,2) = 2.
        assert_eq!(ds, Point::new(0, 2, 1));
        assert_ne!(cs, ds);
        assert!(matches!(
            central_projections(Point::new(0, 1, 1), 0, &j),
            Err(Error::RowAlreadyColoured { .. })
        ));
    }

    #[test]
    fn kill_mask_cyclic_three_identity() {
        let j = LatinRectangle::cyclic(3, 3).unwrap();
        let mask = kill_mask(&[0, 1, 2], 0, &j);
        // Brute force: x = (i,k,g) is killed iff L(0,k) = g or L(0,k') = g
        // where J(0,k') = J(i,k).
        for i in 1..3 {
            for k in 0..3 {
                for g in 0..3 {
                    let kp = (0..3).find(|&c| j.get(0, c) == j.get(i, k)).unwrap();
                    let expect = k == g || kp == g;
                    assert_eq!(mask.is_killed(Point::new(i, k, g)), expect);
                }
            }
        }
        assert_eq!(mask.count(), 2 * 3 * 2);
        assert!(mask.max_per_local_line(LineClass::RC) <= 2);
        assert!(mask.max_per_local_line(LineClass::RS) <= 2);
    }

    #[test]
    fn single_row_mask_is_empty() {
        let j = LatinRectangle::cyclic(4, 1).unwrap();
        assert_eq!(kill_mask(&[1, 0, 3, 2], 0, &j).count(), 0);
    }

    #[test]
    fn advance_kills_and_rescales() {
        let j = LatinRectangle::cyclic(4, 2).unwrap();
        let s: GuidanceState = init_state(j.shape());
        let q = FractionalMatching::<f64>::uniform(4);
        let row = [0u32, 1, 2, 3];
        let next = advance_state(&s, &q, &row, &j).unwrap();
        let mask = kill_mask(&row, 0, &j);
        for k in 0..4 {
            for g in 0..4 {
                let x = Point::new(1, k, g);
                let expect = if mask.is_killed(x) { 0.0 } else { 0.25 / 0.5 };
                assert_eq!(*next.get(x), expect);
                assert_eq!(*next.get(Point::new(0, k, g)), 0.25);
            }
        }
        assert_eq!(next.t(), 1);
    }

    #[test]
    fn zero_mass_projections_leave_survivor_unchanged() {
        // q = (P0 + P1 + P2)/3 with P_a(k) = k + a mod 5. For J cyclic the
        // projections of (1, k, k+4) are (0, k, k+4) and (0, k+1, k+4), both
        // outside the support of q.
        let n = 5;
        let j = LatinRectangle::cyclic(n, 2).unwrap();
        let s: GuidanceState = init_state(j.shape());
        let mut qm = vec![0.0; n * n];
        for k in 0..n {
            for a in 0..3 {
                qm[k * n + (k + a) % n] = 1.0 / 3.0;
            }
        }
        let q = FractionalMatching::new(n, qm).unwrap();
        let row: Vec<u32> = (0..n as u32).collect();
        let next = advance_state(&s, &q, &row, &j).unwrap();
        for k in 0..n {
            let x = Point::new(1, k, (k + 4) % n);
            assert_eq!(*next.get(x), *s.get(x));
        }
        // Everything else survives with growth or dies.
        for (a, b) in s.masses().iter().zip(next.masses()) {
            assert!(*b == 0.0 || *b >= *a);
        }
    }

    #[test]
    fn degenerate_denominator() {
        let j = LatinRectangle::cyclic(2, 2).unwrap();
        let s: GuidanceState = init_state(j.shape());
        let q = FractionalMatching::<f64>::uniform(2);
        assert!(matches!(
            advance_state(&s, &q, &[0, 1], &j),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn stopped_state_is_frozen() {
        let j = LatinRectangle::cyclic(3, 2).unwrap();
        let mut s: GuidanceState = init_state(j.shape());
        s.stop();
        let q = FractionalMatching::<f64>::uniform(3);
        assert!(matches!(advance_state(&s, &q, &[0, 1, 2], &j), Err(Error::Stopped(0))));
    }

    #[test]
    fn exact_martingale_over_support() {
        let j = LatinRectangle::cyclic(3, 3).unwrap();
        let s: GuidanceState<BigRational> = init_state(j.shape());
        let q = FractionalMatching::<BigRational>::uniform(3);
        let dec = birkhoff_decompose(&q).unwrap();
        let mut mean = vec![BigRational::from_integer(0.into()); s.masses().len()];
        for term in dec.terms() {
            let next = advance_state(&s, &q, &term.permutation, &j).unwrap();
            for (acc, v) in mean.iter_mut().zip(next.masses()) {
                *acc = acc.clone() + term.coefficient.clone() * v.clone();
            }
        }
        assert_eq!(mean.as_slice(), s.masses());
    }
}
