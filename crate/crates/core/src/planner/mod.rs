//! Eikonal distance fields, obstacle dilation and discrete action selection.

mod action;
mod dilate;
mod export;
mod fmm;

pub use action::{
    angle_diff, descent_neighbor, next_action, next_action_from, next_action_with, PlanSignal,
    ALIGN_TOLERANCE,
};
pub use dilate::dilate_obstacles;
pub use export::write_pfm;
pub use fmm::{
    distance_field, distance_field_to_nearest, distance_field_until, eikonal_residual,
    DistanceField, UNREACHABLE,
};

use serde::{Deserialize, Serialize};

use crate::grid::{BinaryGrid, Cell, Grid, Rect};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("every source cell is blocked")]
    AllSourcesBlocked,
    #[error("no goal cells given")]
    NoGoals,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerParams {
    /// Chebyshev obstacle growth in cells.
    pub dilation: usize,
    /// Descent steps between the pose cell and the steering waypoint.
    pub lookahead: usize,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            dilation: 2,
            lookahead: 5,
        }
    }
}

/// Distance field solved on a sub-window of a larger grid.
#[derive(Clone, Debug)]
pub struct WindowedField {
    pub field: DistanceField,
    pub window: Rect,
}

impl WindowedField {
    /// Value at a cell in full-grid coordinates.
    pub fn value(&self, c: Cell) -> f64 {
        if !self.window.contains(c) {
            return UNREACHABLE;
        }
        self.field.value(self.to_local(c))
    }

    pub fn to_local(&self, c: Cell) -> Cell {
        Cell::new(c.x - self.window.x0, c.y - self.window.y0)
    }

    pub fn to_global(&self, c: Cell) -> Cell {
        Cell::new(c.x + self.window.x0, c.y + self.window.y0)
    }
}

/// Traversability used for planning over an occupancy grid (true = obstacle).
///
/// Goal cells are removed from the obstacle set before dilation. Cells within the
/// dilation radius of the agent that are not raw obstacles stay traversable, so an
/// agent that drifted close to a wall can still leave; the agent cell always is.
/// Everything else that is not a dilated obstacle is traversable, unknown space included.
pub fn planning_mask(
    obstacles: &BinaryGrid,
    agent: Cell,
    goals: &[Cell],
    dilation: usize,
) -> BinaryGrid {
    planning_mask_with(obstacles, agent, goals, dilation, false)
}

/// [`planning_mask`], optionally also carving around every goal cell so a goal
/// against a wall can be approached.
pub fn planning_mask_with(
    obstacles: &BinaryGrid,
    agent: Cell,
    goals: &[Cell],
    dilation: usize,
    carve_goals: bool,
) -> BinaryGrid {
    let mut raw = obstacles.clone();
    for &g in goals {
        if raw.contains(g) {
            raw.set(g, false);
        }
    }
    let mut mask = dilate_obstacles(&raw, dilation).invert();
    let r = dilation as i64;
    let carve = |center: Cell, mask: &mut BinaryGrid| {
        for dy in -r..=r {
            for dx in -r..=r {
                if let Some(c) = mask.cell_at(center.x as i64 + dx, center.y as i64 + dy) {
                    if !raw[c] {
                        mask.set(c, true);
                    }
                }
            }
        }
    };
    carve(agent, &mut mask);
    if carve_goals {
        for &g in goals {
            carve(g, &mut mask);
        }
    }
    if mask.contains(agent) {
        mask.set(agent, true);
    }
    mask
}

/// Builds the planning mask over `window` of `obstacles` and solves the field from
/// `goals`. `origin` is the world position of the lower corner of full-grid cell
/// (0, 0). With `stop_at_agent` the march ends once the agent cell is settled.
pub fn plan_to_goals(
    obstacles: &BinaryGrid,
    window: Rect,
    agent: Cell,
    goals: &[Cell],
    dilation: usize,
    cell_size: f64,
    origin: (f64, f64),
    stop_at_agent: bool,
    carve_goals: bool,
) -> Result<WindowedField, PlanError> {
    let goals_in: Vec<Cell> = goals
        .iter()
        .copied()
        .filter(|&g| window.contains(g))
        .collect();
    if goals_in.is_empty() {
        return Err(PlanError::NoGoals);
    }
    let crop = obstacles.crop(window);
    let local = |c: Cell| Cell::new(c.x - window.x0, c.y - window.y0);
    let local_goals: Vec<Cell> = goals_in.iter().map(|&g| local(g)).collect();
    let local_agent = local(agent);
    let mask = planning_mask_with(&crop, local_agent, &local_goals, dilation, carve_goals);
    let field = if stop_at_agent && window.contains(agent) {
        distance_field_until(&mask, &local_goals, cell_size, &[local_agent])?
    } else {
        distance_field(&mask, &local_goals, cell_size)?
    };
    let field = field.with_origin((
        origin.0 + window.x0 as f64 * cell_size,
        origin.1 + window.y0 as f64 * cell_size,
    ));
    Ok(WindowedField { field, window })
}

/// 8-connected Dijkstra over `mask` with step costs h and h·√2, without corner
/// cutting. Test oracle.
pub fn dijkstra8(mask: &BinaryGrid, sources: &[Cell], h: f64) -> Grid<f64> {
    dijkstra(mask, sources, h, true)
}

/// 4-connected Dijkstra over `mask` with step cost h. Test oracle.
pub fn dijkstra4(mask: &BinaryGrid, sources: &[Cell], h: f64) -> Grid<f64> {
    dijkstra(mask, sources, h, false)
}

fn dijkstra(mask: &BinaryGrid, sources: &[Cell], h: f64, diagonal: bool) -> Grid<f64> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let mut dist = Grid::new(mask.width(), mask.height(), UNREACHABLE);
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    for &s in sources {
        if mask.contains(s) && mask[s] {
            dist.set(s, 0.0);
            heap.push(Reverse((0f64.to_bits(), mask.index(s))));
        }
    }
    let diag = h * std::f64::consts::SQRT_2;
    while let Some(Reverse((bits, i))) = heap.pop() {
        let d = f64::from_bits(bits);
        let c = mask.cell_of_index(i);
        if d > dist.at(c) {
            continue;
        }
        for (dx, dy) in crate::grid::NEIGHBORS8 {
            let is_diag = dx != 0 && dy != 0;
            if is_diag && !diagonal {
                continue;
            }
            let Some(n) = mask.cell_at(c.x as i64 + dx, c.y as i64 + dy) else {
                continue;
            };
            if !mask[n] {
                continue;
            }
            // No corner cutting: a diagonal step needs both side cells free.
            if is_diag && !(mask[Cell::new(n.x, c.y)] && mask[Cell::new(c.x, n.y)]) {
                continue;
            }
            let nd = d + if is_diag { diag } else { h };
            if nd < dist.at(n) {
                dist.set(n, nd);
                // Non-negative floats order the same as their bit patterns.
                heap.push(Reverse((nd.to_bits(), mask.index(n))));
            }
        }
    }
    dist
}
