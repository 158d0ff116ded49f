use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions of an `m x n` rectangle over `n` symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub n: usize,
    pub m: usize,
}

impl Shape {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m == 0 || n == 0 || m > n {
            return Err(Error::InvalidShape(format!(
                "need 1 <= m <= n, got m = {m}, n = {n}"
            )));
        }
        Ok(Shape { n, m })
    }

    /// Shape with `m = round((1 - epsilon) n)`, clamped to `[1, n]`.
    pub fn from_epsilon(n: usize, epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidShape(format!(
                "epsilon must lie in [0, 1), got {epsilon}"
            )));
        }
        let m = ((1.0 - epsilon) * n as f64).round() as usize;
        Shape::new(n, m.clamp(1, n.max(1)))
    }

    /// `1 - m/n`.
    pub fn epsilon(&self) -> f64 {
        1.0 - self.m as f64 / self.n as f64
    }

    /// Number of points `m * n * n`.
    pub fn points(&self) -> usize {
        self.m * self.n * self.n
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.m, self.n)
    }
}

/// An `m x n` grid of symbols in `[0, n)`.
///
/// Values built through [`LatinRectangle::from_rows`] or parsing are
/// guaranteed Latin. [`LatinRectangle::from_rows_unvalidated`] only checks
/// dimensions and symbol range, for feeding arbitrary grids to the verifiers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "RectangleJson", try_from = "RectangleJson")]
pub struct LatinRectangle {
    shape: Shape,
    cells: Vec<u32>,
}

/// JSON form `{"n": .., "m": .., "grid": [[..], ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectangleJson {
    pub n: usize,
    pub m: usize,
    pub grid: Vec<Vec<u32>>,
}

impl LatinRectangle {
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self> {
        let r = Self::from_rows_unvalidated(rows)?;
        let report = super::verify_latin(&r);
        match report.violations.first() {
            None => Ok(r),
            Some(v) => Err(Error::NotLatin(v.to_string())),
        }
    }

    pub fn from_rows_unvalidated(rows: Vec<Vec<u32>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let shape = Shape::new(n, m)?;
        let mut cells = Vec::with_capacity(m * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidShape(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(&s) = row.iter().find(|&&s| s as usize >= n) {
                return Err(Error::IndexOutOfRange(format!(
                    "symbol {s} in row {i} is outside [0, {n})"
                )));
            }
            cells.extend(row);
        }
        Ok(LatinRectangle { shape, cells })
    }

    /// The cyclic rectangle `J(i, k) = (i + k) mod n`.
    pub fn cyclic(n: usize, m: usize) -> Result<Self> {
        let shape = Shape::new(n, m)?;
        let cells = (0..m)
            .flat_map(|i| (0..n).map(move |k| ((i + k) % n) as u32))
            .collect();
        Ok(LatinRectangle { shape, cells })
    }

    pub(crate) fn from_cells(shape: Shape, cells: Vec<u32>) -> Self {
        debug_assert_eq!(cells.len(), shape.m * shape.n);
        LatinRectangle { shape, cells }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn m(&self) -> usize {
        self.shape.m
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> usize {
        self.cells[row * self.shape.n + col] as usize
    }

    pub fn row(&self, row: usize) -> &[u32] {
        let n = self.shape.n;
        &self.cells[row * n..(row + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.cells.chunks(self.shape.n)
    }

    /// `pos[row * n + sym]` = column holding `sym` in `row`. Requires Latin rows.
    pub fn symbol_positions(&self) -> Vec<u32> {
        let n = self.shape.n;
        let mut pos = vec![u32::MAX; self.cells.len()];
        for (i, row) in self.rows().enumerate() {
            for (k, &s) in row.iter().enumerate() {
                pos[i * n + s as usize] = k as u32;
            }
        }
        pos
    }

    /// Rows as text, one line per row, entries separated by single spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() * 4);
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses a whitespace- or comma-separated grid. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let r = Self::parse_unvalidated(text)?;
        match super::verify_latin(&r).violations.first() {
            None => Ok(r),
            Some(v) => Err(Error::NotLatin(v.to_string())),
        }
    }

    /// Like [`LatinRectangle::parse`] without the Latin checks.
    pub fn parse_unvalidated(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<u32>().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        msg: format!("{t:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first().map(Vec::len) {
                if row.len() != first {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected {first} entries, found {}", row.len()),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "empty grid".into(),
            });
        }
        let n = rows[0].len();
        if rows.len() > n {
            return Err(Error::Parse {
                line: 0,
                msg: format!("{} rows exceed {n} columns", rows.len()),
            });
        }
        if let Some((i, s)) = rows
            .iter()
            .enumerate()
            .find_map(|(i, r)| r.iter().find(|&&s| s as usize >= n).map(|&s| (i, s)))
        {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("symbol {s} outside [0, {n})"),
            });
        }
        Self::from_rows_unvalidated(rows)
    }

    pub fn to_json(&self) -> RectangleJson {
        RectangleJson {
            n: self.n(),
            m: self.m(),
            grid: self.rows().map(<[u32]>::to_vec).collect(),
        }
    }

    pub fn from_json(json: RectangleJson) -> Result<Self> {
        let r = Self::from_rows(json.grid)?;
        if r.n() != json.n || r.m() != json.m {
            return Err(Error::ShapeMismatch {
                left: format!("{}x{}", json.m, json.n),
                right: r.shape.to_string(),
            });
        }
        Ok(r)
    }
}

impl From<LatinRectangle> for RectangleJson {
    fn from(r: LatinRectangle) -> Self {
        r.to_json()
    }
}

impl TryFrom<RectangleJson> for LatinRectangle {
    type Error = Error;

    fn try_from(json: RectangleJson) -> Result<Self> {
        LatinRectangle::from_json(json)
    }
}

impl FromStr for LatinRectangle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for LatinRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
