//! First-order Fast Marching Method for `|∇T| = 1` on a square grid.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::PlanError;
use crate::grid::{BinaryGrid, Cell, Grid, NEIGHBORS4};

/// Value of cells the front never reached.
pub const UNREACHABLE: f64 = f64::INFINITY;

/// Geodesic distance field over a traversability mask.
///
/// `origin` is the world position of the lower corner of cell (0, 0); with
/// `cell_size` it maps world points to field cells.
#[derive(Clone, Debug)]
pub struct DistanceField {
    values: Grid<f64>,
    sources: Vec<Cell>,
    mask: BinaryGrid,
    cell_size: f64,
    origin: (f64, f64),
}

impl DistanceField {
    pub fn values(&self) -> &Grid<f64> {
        &self.values
    }

    pub fn value(&self, c: Cell) -> f64 {
        self.values.get(c).copied().unwrap_or(UNREACHABLE)
    }

    pub fn sources(&self) -> &[Cell] {
        &self.sources
    }

    pub fn mask(&self) -> &BinaryGrid {
        &self.mask
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn with_origin(mut self, origin: (f64, f64)) -> Self {
        self.origin = origin;
        self
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn is_reachable(&self, c: Cell) -> bool {
        self.value(c).is_finite()
    }

    /// Field cell containing a world point.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<Cell> {
        let fx = ((x - self.origin.0) / self.cell_size).floor();
        let fy = ((y - self.origin.1) / self.cell_size).floor();
        if !fx.is_finite() || !fy.is_finite() {
            return None;
        }
        self.values.cell_at(fx as i64, fy as i64)
    }

    pub fn cell_center(&self, c: Cell) -> (f64, f64) {
        (
            self.origin.0 + (c.x as f64 + 0.5) * self.cell_size,
            self.origin.1 + (c.y as f64 + 0.5) * self.cell_size,
        )
    }
}

/// Solves the eikonal equation from `sources` over `mask` (true = traversable).
///
/// Sources on blocked cells are ignored; if none remain the call fails.
pub fn distance_field(
    mask: &BinaryGrid,
    sources: &[Cell],
    cell_size: f64,
) -> Result<DistanceField, PlanError> {
    march(mask, sources, cell_size, Stop::Never)
}

/// Like [`distance_field`], but stops once every `target` is accepted and nothing
/// left in the band can tie with them. Cells not accepted by then read as
/// [`UNREACHABLE`]; values below the largest target value are exact.
pub fn distance_field_until(
    mask: &BinaryGrid,
    sources: &[Cell],
    cell_size: f64,
    targets: &[Cell],
) -> Result<DistanceField, PlanError> {
    march(mask, sources, cell_size, Stop::All(targets))
}

/// Marches until the first of `targets` is settled, then finishes every cell tied
/// with it. Returns the field and the row-major-smallest target at the minimum
/// value, or `None` if no target is reachable.
pub fn distance_field_to_nearest(
    mask: &BinaryGrid,
    sources: &[Cell],
    cell_size: f64,
    targets: &[Cell],
) -> Result<(DistanceField, Option<Cell>), PlanError> {
    let field = march(mask, sources, cell_size, Stop::Any(targets))?;
    let best = targets
        .iter()
        .copied()
        .filter(|&t| field.is_reachable(t))
        .min_by(|a, b| field.value(*a).total_cmp(&field.value(*b)).then(a.cmp(b)));
    Ok((field, best))
}

#[derive(Clone, Copy)]
enum Stop<'a> {
    Never,
    /// Every listed cell settled.
    All(&'a [Cell]),
    /// Any listed cell settled.
    Any(&'a [Cell]),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Far,
    Band,
    Accepted,
}

/// Total-ordered f64 key for the heap; values are never NaN.
#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn march(
    mask: &BinaryGrid,
    sources: &[Cell],
    h: f64,
    stop: Stop,
) -> Result<DistanceField, PlanError> {
    let (w, ht) = (mask.width(), mask.height());
    let mut values = Grid::new(w, ht, UNREACHABLE);
    let mut state = Grid::new(w, ht, State::Far);
    let mut heap = BinaryHeap::new();

    let mut used_sources: Vec<Cell> = sources
        .iter()
        .copied()
        .filter(|&c| mask.contains(c) && mask[c])
        .collect();
    used_sources.sort();
    used_sources.dedup();
    if used_sources.is_empty() {
        return Err(PlanError::AllSourcesBlocked);
    }
    for &s in &used_sources {
        values.set(s, 0.0);
        state.set(s, State::Band);
        heap.push(Reverse(Key(0.0, mask.index(s))));
    }

    let (mut pending, any_mode) = match stop {
        Stop::Never => (Vec::new(), false),
        Stop::All(t) => (
            t.iter().copied().filter(|&c| mask.contains(c)).collect(),
            false,
        ),
        Stop::Any(t) => (
            t.iter().copied().filter(|&c| mask.contains(c)).collect(),
            true,
        ),
    };
    let early = !matches!(stop, Stop::Never);
    let mut is_target = Grid::new(w, ht, false);
    for &t in &pending {
        is_target.set(t, true);
    }
    // Once the stop condition holds, keep settling cells tied at this value.
    let mut stop_above = f64::NEG_INFINITY;
    let mut done = false;

    while let Some(Reverse(Key(v, i))) = heap.pop() {
        let c = mask.cell_of_index(i);
        if state.at(c) == State::Accepted || v > values.at(c) {
            continue;
        }
        if early && done && v > stop_above {
            break;
        }
        state.set(c, State::Accepted);
        if early && !done {
            if any_mode {
                if is_target[c] {
                    done = true;
                    stop_above = v;
                }
            } else {
                if is_target[c] {
                    pending.retain(|&t| t != c);
                }
                stop_above = stop_above.max(v);
                done = pending.is_empty();
            }
        }

        for n in mask.neighbors(c, &NEIGHBORS4) {
            if !mask[n] || state.at(n) == State::Accepted {
                continue;
            }
            let t = upwind_update(&values, &state, mask, n, h);
            if t < values.at(n) {
                values.set(n, t);
                state.set(n, State::Band);
                heap.push(Reverse(Key(t, mask.index(n))));
            }
        }
    }

    // Discard tentative band values so every finite value is final.
    for (v, s) in values.data_mut().iter_mut().zip(state.data()) {
        if *s != State::Accepted {
            *v = UNREACHABLE;
        }
    }

    Ok(DistanceField {
        values,
        sources: used_sources,
        mask: mask.clone(),
        cell_size: h,
        origin: (0.0, 0.0),
    })
}

fn accepted_min(
    values: &Grid<f64>,
    state: &Grid<State>,
    mask: &BinaryGrid,
    c: Cell,
    dx: i64,
    dy: i64,
) -> f64 {
    let mut m = UNREACHABLE;
    for s in [-1i64, 1] {
        if let Some(n) = mask.cell_at(c.x as i64 + s * dx, c.y as i64 + s * dy) {
            if mask[n] && state.at(n) == State::Accepted {
                m = m.min(values.at(n));
            }
        }
    }
    m
}

fn upwind_update(
    values: &Grid<f64>,
    state: &Grid<State>,
    mask: &BinaryGrid,
    c: Cell,
    h: f64,
) -> f64 {
    let a = accepted_min(values, state, mask, c, 1, 0);
    let b = accepted_min(values, state, mask, c, 0, 1);
    solve_quadratic(a, b, h)
}

/// Upwind solution of `(T-a)² + (T-b)² = h²`, falling back to one axis when the
/// two-axis discriminant is negative or one side is unknown.
pub(crate) fn solve_quadratic(a: f64, b: f64, h: f64) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (false, false) => UNREACHABLE,
        (true, false) => a + h,
        (false, true) => b + h,
        (true, true) => {
            let diff = a - b;
            let disc = 2.0 * h * h - diff * diff;
            if disc < 0.0 || diff.abs() >= h {
                a.min(b) + h
            } else {
                0.5 * (a + b + disc.sqrt())
            }
        }
    }
}

/// Largest violation of the discrete upwind equation over accepted non-source cells,
/// recomputed from final neighbor values strictly below each cell.
pub fn eikonal_residual(field: &DistanceField) -> f64 {
    let h = field.cell_size;
    let values = field.values();
    let mut worst: f64 = 0.0;
    for (c, &v) in values.iter_cells() {
        if !v.is_finite() || v == 0.0 {
            continue;
        }
        let side = |dx: i64, dy: i64| {
            let mut m = UNREACHABLE;
            for s in [-1i64, 1] {
                if let Some(n) = values.cell_at(c.x as i64 + s * dx, c.y as i64 + s * dy) {
                    let nv = values.at(n);
                    if field.mask[n] && nv < v {
                        m = m.min(nv);
                    }
                }
            }
            m
        };
        let t = solve_quadratic(side(1, 0), side(0, 1), h);
        worst = worst.max((t - v).abs());
    }
    worst
}
