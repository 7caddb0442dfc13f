//! Dense 2D grids and integer cell coordinates shared by every module.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Integer grid coordinate. Column `x`, row `y`.
///
/// Ordering is row-major (lowest row first, then lowest column), which is the
/// tie-break used by every selection rule in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// Chebyshev distance in cells.
    pub fn chebyshev(self, other: Cell) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }

    /// Euclidean distance in cells.
    pub fn euclidean(self, other: Cell) -> f64 {
        let dx = self.x as f64 - other.x as f64;
        let dy = self.y as f64 - other.y as f64;
        dx.hypot(dy)
    }

    pub fn offset(self, dx: i64, dy: i64) -> Option<Cell> {
        let x = self.x as i64 + dx;
        let y = self.y as i64 + dy;
        if x < 0 || y < 0 {
            None
        } else {
            Some(Cell::new(x as usize, y as usize))
        }
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

pub const NEIGHBORS4: [(i64, i64); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

pub const NEIGHBORS8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Axis-aligned inclusive-exclusive cell rectangle `[x0, x1) × [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn of_cell(c: Cell) -> Self {
        Self::new(c.x, c.y, c.x + 1, c.y + 1)
    }

    pub fn width(&self) -> usize {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> usize {
        self.y1.saturating_sub(self.y0)
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= self.x0 && c.x < self.x1 && c.y >= self.y0 && c.y < self.y1
    }

    pub fn include(&mut self, c: Cell) {
        self.x0 = self.x0.min(c.x);
        self.y0 = self.y0.min(c.y);
        self.x1 = self.x1.max(c.x + 1);
        self.y1 = self.y1.max(c.y + 1);
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.x0.min(other.x0),
            self.y0.min(other.y0),
            self.x1.max(other.x1),
            self.y1.max(other.y1),
        )
    }

    /// Grows by `margin` cells on every side, clipped to `[0, w) × [0, h)`.
    pub fn expand(&self, margin: usize, w: usize, h: usize) -> Rect {
        Rect::new(
            self.x0.saturating_sub(margin),
            self.y0.saturating_sub(margin),
            (self.x1 + margin).min(w),
            (self.y1 + margin).min(h),
        )
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.y0..self.y1).flat_map(move |y| (self.x0..self.x1).map(move |x| Cell::new(x, y)))
    }
}

/// Row-major dense grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn new(width: usize, height: usize, fill: T) -> Self {
        Self {
            width,
            height,
            data: vec![fill; width * height],
        }
    }

    pub fn fill(&mut self, value: T) {
        self.data.fill(value);
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), width * height, "grid data length mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(Cell) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(Cell::new(x, y)));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    #[inline]
    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    /// Cell for signed coordinates, if inside the grid.
    #[inline]
    pub fn cell_at(&self, x: i64, y: i64) -> Option<Cell> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            None
        } else {
            Some(Cell::new(x as usize, y as usize))
        }
    }

    #[inline]
    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(
            self.contains(c),
            "cell {c} outside {}x{}",
            self.width,
            self.height
        );
        c.y * self.width + c.x
    }

    #[inline]
    pub fn cell_of_index(&self, i: usize) -> Cell {
        Cell::new(i % self.width, i / self.width)
    }

    #[inline]
    pub fn get(&self, c: Cell) -> Option<&T> {
        if self.contains(c) {
            Some(&self.data[c.y * self.width + c.x])
        } else {
            None
        }
    }

    #[inline]
    pub fn set(&mut self, c: Cell, value: T) {
        let i = self.index(c);
        self.data[i] = value;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (Cell, &T)> {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (Cell::new(i % w, i / w), v))
    }

    /// Neighbours of `c` inside the grid, in the order of `offsets`.
    pub fn neighbors<'a>(
        &'a self,
        c: Cell,
        offsets: &'a [(i64, i64)],
    ) -> impl Iterator<Item = Cell> + 'a {
        offsets
            .iter()
            .filter_map(move |&(dx, dy)| self.cell_at(c.x as i64 + dx, c.y as i64 + dy))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Copy> Grid<T> {
    /// Copies the `window` region into a new grid whose cell (0, 0) is `window`'s corner.
    pub fn crop(&self, window: Rect) -> Grid<T> {
        Grid::from_fn(window.width(), window.height(), |c| {
            self.data[(c.y + window.y0) * self.width + c.x + window.x0]
        })
    }

    #[inline]
    pub fn at(&self, c: Cell) -> T {
        self.data[self.index(c)]
    }
}

impl std::ops::Index<Cell> for Grid<bool> {
    type Output = bool;

    fn index(&self, c: Cell) -> &bool {
        &self.data[c.y * self.width + c.x]
    }
}

pub type BinaryGrid = Grid<bool>;

impl Grid<bool> {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn set_cells(&self) -> Vec<Cell> {
        self.iter_cells()
            .filter_map(|(c, &b)| b.then_some(c))
            .collect()
    }

    pub fn invert(&self) -> Grid<bool> {
        self.map(|b| !b)
    }
}

/// 4-connected flood fill over `true` cells from `start`. Returns the reached set.
pub fn flood_fill(mask: &BinaryGrid, start: Cell) -> BinaryGrid {
    let mut seen = Grid::new(mask.width(), mask.height(), false);
    if !mask.contains(start) || !mask[start] {
        return seen;
    }
    let mut stack = vec![start];
    seen.set(start, true);
    while let Some(c) = stack.pop() {
        for n in mask.neighbors(c, &NEIGHBORS4) {
            if mask[n] && !seen[n] {
                seen.set(n, true);
                stack.push(n);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_order_is_row_major() {
        let mut cells = vec![
            Cell::new(3, 1),
            Cell::new(0, 2),
            Cell::new(5, 0),
            Cell::new(1, 1),
        ];
        cells.sort();
        assert_eq!(
            cells,
            vec![
                Cell::new(5, 0),
                Cell::new(1, 1),
                Cell::new(3, 1),
                Cell::new(0, 2)
            ]
        );
    }

    #[test]
    fn crop_keeps_values() {
        let g = Grid::from_fn(5, 4, |c| c.x * 10 + c.y);
        let w = g.crop(Rect::new(1, 2, 4, 4));
        assert_eq!(w.width(), 3);
        assert_eq!(w.height(), 2);
        assert_eq!(w.at(Cell::new(0, 0)), 12);
        assert_eq!(w.at(Cell::new(2, 1)), 33);
    }

    #[test]
    fn flood_fill_stops_at_walls() {
        let mut m = Grid::new(5, 3, true);
        for y in 0..3 {
            m.set(Cell::new(2, y), false);
        }
        let r = flood_fill(&m, Cell::new(0, 0));
        assert_eq!(r.count(), 6);
        assert!(!r[Cell::new(3, 0)]);
    }
}
