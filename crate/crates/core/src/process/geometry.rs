use crate::latin::{LatinRectangle, Shape};

/// Lookup tables for the central projections of a fixed `J`.
#[derive(Clone, Debug)]
pub(crate) struct Geometry {
    pub shape: Shape,
    cells: Vec<u32>,
    // pos[row * n + sym] = column of `sym` in `row` of J
    pos: Vec<u32>,
}

impl Geometry {
    pub fn new(j: &LatinRectangle) -> Self {
        Geometry {
            shape: j.shape(),
            cells: j.rows().flatten().copied().collect(),
            pos: j.symbol_positions(),
        }
    }

    #[inline]
    pub fn diagonal(&self, row: usize, col: usize) -> usize {
        self.cells[row * self.shape.n + col] as usize
    }

    /// Column of the active row `t` that lies on the diagonal through `(row, col)`.
    #[inline]
    pub fn diagonal_column(&self, t: usize, row: usize, col: usize) -> usize {
        self.pos[t * self.shape.n + self.diagonal(row, col)] as usize
    }

    #[inline]
    pub fn column_of(&self, row: usize, diagonal: usize) -> usize {
        self.pos[row * self.shape.n + diagonal] as usize
    }
}
