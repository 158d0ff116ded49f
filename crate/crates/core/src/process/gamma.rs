//! Membership test for the region of good states.
//!
//! Three families of inequalities, with `phi = ln n / sqrt n`:
//! * pointwise `p(x) <= 1.1 eps^-2 / n` for every point,
//! * line sums in `[1 - phi, 1 + phi]` for every cell line (RC) and
//!   row-symbol line (RS) of an uncoloured row,
//! * `sum_g p(i,k,g) p(i,l,g) <= (1 + phi) / n` for every uncoloured row
//!   `i` and columns `k != l`.
//!
//! Uncoloured rows at time `t` are rows `>= t`, the active row included.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::GuidanceState;
use crate::exec::Exec;
use crate::latin::{LineClass, LineId, Point};
use crate::scalar::Scalar;

/// Constants of the three inequality families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GammaConstants {
    /// Multiplier in `p <= a_factor * eps^-2 / n`.
    pub a_factor: f64,
    /// Multiplier on `ln n / sqrt n` in the line-sum bounds.
    pub b_scale: f64,
    /// Multiplier on `ln n / sqrt n` in the pair-product bound.
    pub c_scale: f64,
}

impl Default for GammaConstants {
    fn default() -> Self {
        GammaConstants {
            a_factor: 1.1,
            b_scale: 1.0,
            c_scale: 1.0,
        }
    }
}

/// `ln n / sqrt n`.
pub fn phi(n: usize) -> f64 {
    let n = n as f64;
    n.ln() / n.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Inequality {
    /// Pointwise upper bound.
    #[serde(rename = "A_x")]
    PointBound,
    /// Local line sum outside `[1 - phi, 1 + phi]`.
    #[serde(rename = "B_line")]
    LineSum,
    /// Pair-product bound on a row.
    #[serde(rename = "C_ikl")]
    PairProduct,
}

impl Inequality {
    pub fn id(self) -> &'static str {
        match self {
            Inequality::PointBound => "A_x",
            Inequality::LineSum => "B_line",
            Inequality::PairProduct => "C_ikl",
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Point(Point),
    Line(LineId),
    Pair { row: usize, k: usize, l: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaViolation {
    pub inequality: Inequality,
    pub location: Location,
    pub lhs: f64,
    pub bound: f64,
    /// Signed slack; negative for a violation.
    pub margin: f64,
}

/// Extremes of the three statistics over the checked ranges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaStats {
    pub p_max: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub c_max: f64,
    pub a_bound: f64,
    pub phi: f64,
    /// Smallest slack in each family (positive when satisfied).
    pub a_margin: f64,
    pub b_margin: f64,
    pub c_margin: f64,
}

impl GammaStats {
    fn empty(a_bound: f64, phi: f64) -> Self {
        GammaStats {
            p_max: 0.0,
            b_min: f64::INFINITY,
            b_max: f64::NEG_INFINITY,
            c_max: f64::NEG_INFINITY,
            a_bound,
            phi,
            a_margin: f64::INFINITY,
            b_margin: f64::INFINITY,
            c_margin: f64::INFINITY,
        }
    }

    fn merge(&mut self, o: &GammaStats) {
        self.p_max = self.p_max.max(o.p_max);
        self.b_min = self.b_min.min(o.b_min);
        self.b_max = self.b_max.max(o.b_max);
        self.c_max = self.c_max.max(o.c_max);
        self.a_margin = self.a_margin.min(o.a_margin);
        self.b_margin = self.b_margin.min(o.b_margin);
        self.c_margin = self.c_margin.min(o.c_margin);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub good: bool,
    pub violations: Vec<GammaViolation>,
    pub stats: GammaStats,
}

impl GammaReport {
    /// Distinct inequality families that failed, in first-seen order.
    pub fn violated_inequalities(&self) -> Vec<Inequality> {
        let mut out = Vec::new();
        for v in &self.violations {
            if !out.contains(&v.inequality) {
                out.push(v.inequality);
            }
        }
        out
    }
}

/// Checks all three families; `epsilon` enters only the pointwise bound.
pub fn check_gamma<S: Scalar>(s: &GuidanceState<S>, epsilon: f64) -> GammaReport {
    check_gamma_with(s, epsilon, &GammaConstants::default(), Exec::Sequential)
}

pub fn check_gamma_with<S: Scalar>(
    s: &GuidanceState<S>,
    epsilon: f64,
    constants: &GammaConstants,
    exec: Exec,
) -> GammaReport {
    let shape = s.shape();
    let n = shape.n;
    let nf = n as f64;
    let a_bound = constants.a_factor / (epsilon * epsilon) / nf;
    let phi = phi(n);
    let (b_low, b_high) = (1.0 - constants.b_scale * phi, 1.0 + constants.b_scale * phi);
    let c_bound = (1.0 + constants.c_scale * phi) / nf;
    let t = s.t();

    let per_row = exec.map_range(0..shape.m, |i| {
        let row = s.row(i);
        let mut stats = GammaStats::empty(a_bound, phi);
        let mut violations = Vec::new();

        for (idx, v) in row.iter().enumerate() {
            let v = v.to_f64();
            stats.p_max = stats.p_max.max(v);
            stats.a_margin = stats.a_margin.min(a_bound - v);
            if v > a_bound {
                violations.push(GammaViolation {
                    inequality: Inequality::PointBound,
                    location: Location::Point(Point::new(i, idx / n, idx % n)),
                    lhs: v,
                    bound: a_bound,
                    margin: a_bound - v,
                });
            }
        }
        if i < t {
            return (stats, violations);
        }

        let mut line = |class: LineClass, a: usize, sum: f64| {
            stats.b_min = stats.b_min.min(sum);
            stats.b_max = stats.b_max.max(sum);
            let margin = (sum - b_low).min(b_high - sum);
            stats.b_margin = stats.b_margin.min(margin);
            if margin < 0.0 {
                let bound = if sum < b_low { b_low } else { b_high };
                violations.push(GammaViolation {
                    inequality: Inequality::LineSum,
                    location: Location::Line(LineId::new(class, i, a)),
                    lhs: sum,
                    bound,
                    margin,
                });
            }
        };
        for k in 0..n {
            line(LineClass::RC, k, S::sum(&row[k * n..(k + 1) * n]).to_f64());
        }
        for g in 0..n {
            let sum = (0..n).fold(S::zero(), |acc, k| acc + row[k * n + g].clone());
            line(LineClass::RS, g, sum.to_f64());
        }

        for k in 0..n {
            let rk = &row[k * n..(k + 1) * n];
            for l in k + 1..n {
                let lhs = S::dot(rk, &row[l * n..(l + 1) * n]).to_f64();
                stats.c_max = stats.c_max.max(lhs);
                stats.c_margin = stats.c_margin.min(c_bound - lhs);
                if lhs > c_bound {
                    violations.push(GammaViolation {
                        inequality: Inequality::PairProduct,
                        location: Location::Pair { row: i, k, l },
                        lhs,
                        bound: c_bound,
                        margin: c_bound - lhs,
                    });
                }
            }
        }
        (stats, violations)
    });

    let mut stats = GammaStats::empty(a_bound, phi);
    let mut violations = Vec::new();
    for (st, v) in per_row {
        stats.merge(&st);
        violations.extend(v);
    }
    GammaReport {
        good: violations.is_empty(),
        violations,
        stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::Shape;
    use crate::process::init_state;

    #[test]
    fn initial_state_is_good() {
        for n in 1..=12 {
            for m in 1..=n {
                let shape = Shape::new(n, m).unwrap();
                let s: GuidanceState = init_state(shape);
                let eps = shape.epsilon().max(1.0 / n as f64);
                let r = check_gamma(&s, eps);
                assert!(r.good, "n={n} m={m}: {:?}", r.violations.first());
                assert!((r.stats.b_min - 1.0).abs() < 1e-12);
                if n > 1 {
                    assert!((r.stats.c_max - 1.0 / n as f64).abs() < 1e-12);
                }
            }
        }
        // eps = 0 gives an infinite pointwise bound.
        let s: GuidanceState = init_state(Shape::new(5, 5).unwrap());
        assert!(check_gamma(&s, 0.0).good);
    }

    #[test]
    fn point_bound_violation() {
        let shape = Shape::new(100, 50).unwrap();
        let mut s: GuidanceState = init_state(shape);
        let x = Point::new(3, 4, 5);
        s.masses_mut()[x.index(shape)] = 1.0;
        let r = check_gamma(&s, 0.5);
        assert!(!r.good);
        let v = r
            .violations
            .iter()
            .find(|v| v.inequality == Inequality::PointBound)
            .unwrap();
        assert_eq!(v.location, Location::Point(x));
        assert!((v.bound - 0.044).abs() < 1e-12);
        assert!(v.margin < 0.0);
    }

    #[test]
    fn zeroed_rs_line() {
        let shape = Shape::new(9, 3).unwrap();
        let mut s: GuidanceState = init_state(shape);
        for k in 0..9 {
            s.masses_mut()[Point::new(2, k, 4).index(shape)] = 0.0;
        }
        let r = check_gamma(&s, 0.5);
        assert!(!r.good);
        assert!(r.violations.iter().any(|v| v.inequality == Inequality::LineSum
            && v.location == Location::Line(LineId::new(LineClass::RS, 2, 4))
            && v.lhs == 0.0));
        assert_eq!(r.stats.b_min, 0.0);
    }

    #[test]
    fn pair_product_violation() {
        // Two columns of row 0 concentrated on the same symbols.
        let n = 16;
        let shape = Shape::new(n, 2).unwrap();
        let mut s: GuidanceState = init_state(shape);
        for (k, g, v) in [(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 0.5)] {
            s.masses_mut()[Point::new(0, k, g).index(shape)] = v;
        }
        for g in 2..n {
            s.masses_mut()[Point::new(0, 0, g).index(shape)] = 0.0;
            s.masses_mut()[Point::new(0, 1, g).index(shape)] = 0.0;
        }
        let r = check_gamma_with(
            &s,
            0.0,
            &GammaConstants::default(),
            Exec::Parallel,
        );
        assert!(r
            .violations
            .iter()
            .any(|v| v.inequality == Inequality::PairProduct
                && v.location == Location::Pair { row: 0, k: 0, l: 1 }));
    }

    #[test]
    fn coloured_rows_skip_line_checks() {
        let shape = Shape::new(9, 3).unwrap();
        let mut s: GuidanceState = init_state(shape);
        for k in 0..9 {
            s.masses_mut()[Point::new(0, k, 4).index(shape)] = 0.0;
        }
        let s = GuidanceState::from_masses(shape, 1, s.masses().to_vec()).unwrap();
        assert!(check_gamma(&s, 0.5).good);
    }
}
