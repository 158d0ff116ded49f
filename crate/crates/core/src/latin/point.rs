use serde::{Deserialize, Serialize};

use super::{LatinRectangle, Shape};
use crate::error::{Error, Result};

/// A (row, column, symbol) triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub row: usize,
    pub col: usize,
    pub sym: usize,
}

impl Point {
    pub fn new(row: usize, col: usize, sym: usize) -> Self {
        Point { row, col, sym }
    }

    /// Flat index into a `m * n * n` state vector.
    #[inline]
    pub fn index(&self, shape: Shape) -> usize {
        (self.row * shape.n + self.col) * shape.n + self.sym
    }

    pub fn from_index(index: usize, shape: Shape) -> Self {
        let n = shape.n;
        Point {
            row: index / (n * n),
            col: (index / n) % n,
            sym: index % n,
        }
    }

    pub fn in_range(&self, shape: Shape) -> bool {
        self.row < shape.m && self.col < shape.n && self.sym < shape.n
    }
}

/// Which two coordinates a line fixes. Diagonals are `J`-colour classes,
/// indexed by the `J` symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineClass {
    /// (row, column): a cell. Local.
    RC,
    /// (row, symbol). Local.
    RS,
    /// (column, symbol). Central.
    CS,
    /// (diagonal, symbol). Central.
    DS,
}

impl LineClass {
    pub const ALL: [LineClass; 4] = [LineClass::RC, LineClass::RS, LineClass::CS, LineClass::DS];

    pub fn is_local(self) -> bool {
        matches!(self, LineClass::RC | LineClass::RS)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineId {
    pub class: LineClass,
    pub first: usize,
    pub second: usize,
}

impl LineId {
    pub fn new(class: LineClass, first: usize, second: usize) -> Self {
        LineId {
            class,
            first,
            second,
        }
    }

    /// The line of class `class` through `x`, using `j` for diagonals.
    pub fn through(class: LineClass, x: Point, j: &LatinRectangle) -> Self {
        match class {
            LineClass::RC => LineId::new(class, x.row, x.col),
            LineClass::RS => LineId::new(class, x.row, x.sym),
            LineClass::CS => LineId::new(class, x.col, x.sym),
            LineClass::DS => LineId::new(class, j.get(x.row, x.col), x.sym),
        }
    }
}

/// All points on `line`. RC and RS lines have `n` points, CS and DS lines `m`.
pub fn line_members(line: LineId, j: &LatinRectangle) -> Result<Vec<Point>> {
    let Shape { n, m } = j.shape();
    let (a, b) = (line.first, line.second);
    let bound = match line.class {
        LineClass::RC | LineClass::RS => (m, n),
        LineClass::CS | LineClass::DS => (n, n),
    };
    if a >= bound.0 || b >= bound.1 {
        return Err(Error::IndexOutOfRange(format!(
            "{line:?} outside {}",
            j.shape()
        )));
    }
    Ok(match line.class {
        LineClass::RC => (0..n).map(|s| Point::new(a, b, s)).collect(),
        LineClass::RS => (0..n).map(|k| Point::new(a, k, b)).collect(),
        LineClass::CS => (0..m).map(|i| Point::new(i, a, b)).collect(),
        LineClass::DS => {
            let pos = j.symbol_positions();
            (0..m)
                .map(|i| Point::new(i, pos[i * n + a] as usize, b))
                .collect()
        }
    })
}
