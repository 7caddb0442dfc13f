//! The agent's binary K×M×M semantic map and its denoising.

mod denoise;
mod snapshot;

pub use denoise::{denoise, linear_opening, DenoiseParams};
pub use snapshot::{write_channel_pgm, write_color_ppm};

use serde::{Deserialize, Serialize};

use crate::category::Category;
use crate::grid::{BinaryGrid, Cell, Grid, Rect};
use crate::sensors::Observation;

pub const OBSTACLE: usize = 0;
pub const EXPLORED: usize = 1;
pub const CURRENT: usize = 2;
pub const PAST: usize = 3;
/// Index of the first category channel; category `c` lives at `CATEGORY_BASE + c`.
pub const CATEGORY_BASE: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("invalid map dimensions: {0}")]
    InvalidDimensions(String),
    #[error("pose ({x:.3}, {y:.3}) falls outside the map")]
    OutOfMap { x: f64, y: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapParams {
    /// Cells per side; odd.
    pub size: usize,
    pub cell_size: f64,
    /// Frames of evidence before a cell is written to the obstacle channel.
    pub obstacle_confirm: u16,
}

impl Default for MapParams {
    fn default() -> Self {
        Self {
            size: 481,
            cell_size: 0.05,
            obstacle_confirm: 1,
        }
    }
}

/// Egocentric-origin semantic map. The agent's first pose sits at the center cell.
#[derive(Clone, Debug)]
pub struct SemanticMap {
    size: usize,
    n_categories: usize,
    cell_size: f64,
    /// World coordinates of the center of the center cell.
    origin: (f64, f64),
    channels: Vec<BinaryGrid>,
    current: Cell,
    evidence: Grid<u16>,
    obstacle_confirm: u16,
    /// Smallest rectangle holding every cell ever written.
    bounds: Rect,
}

/// Map with `c` category channels and `m` cells per side, origin at world (0, 0).
pub fn new_map(c: usize, m: usize) -> Result<SemanticMap, MapError> {
    SemanticMap::new(
        c,
        MapParams {
            size: m,
            ..MapParams::default()
        },
        (0.0, 0.0),
    )
}

impl SemanticMap {
    pub fn new(
        n_categories: usize,
        params: MapParams,
        origin: (f64, f64),
    ) -> Result<Self, MapError> {
        let m = params.size;
        if n_categories == 0 {
            return Err(MapError::InvalidDimensions(
                "need at least one category".into(),
            ));
        }
        if m < 3 || m % 2 == 0 {
            return Err(MapError::InvalidDimensions(format!(
                "size {m} must be odd and >= 3"
            )));
        }
        if !(params.cell_size > 0.0 && params.cell_size.is_finite()) {
            return Err(MapError::InvalidDimensions(format!(
                "cell size {}",
                params.cell_size
            )));
        }
        if params.obstacle_confirm == 0 {
            return Err(MapError::InvalidDimensions(
                "obstacle_confirm must be >= 1".into(),
            ));
        }
        let k = n_categories + CATEGORY_BASE;
        let mut channels = vec![Grid::new(m, m, false); k];
        let center = Cell::new(m / 2, m / 2);
        channels[CURRENT].set(center, true);
        Ok(Self {
            size: m,
            n_categories,
            cell_size: params.cell_size,
            origin,
            channels,
            current: center,
            evidence: Grid::new(m, m, 0),
            obstacle_confirm: params.obstacle_confirm,
            bounds: Rect::of_cell(center),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    /// Channel count, always `C + 4`.
    pub fn k(&self) -> usize {
        self.channels.len()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn center(&self) -> Cell {
        Cell::new(self.size / 2, self.size / 2)
    }

    pub fn channel(&self, k: usize) -> &BinaryGrid {
        &self.channels[k]
    }

    pub fn channels(&self) -> &[BinaryGrid] {
        &self.channels
    }

    pub fn obstacles(&self) -> &BinaryGrid {
        &self.channels[OBSTACLE]
    }

    pub fn explored(&self) -> &BinaryGrid {
        &self.channels[EXPLORED]
    }

    pub fn category_channel(&self, c: Category) -> Option<&BinaryGrid> {
        (c.index() < self.n_categories).then(|| &self.channels[CATEGORY_BASE + c.index()])
    }

    pub fn current(&self) -> Cell {
        self.current
    }

    pub fn evidence(&self) -> &Grid<u16> {
        &self.evidence
    }

    pub fn obstacle_confirm(&self) -> u16 {
        self.obstacle_confirm
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    /// World position of the lower corner of map cell (0, 0).
    pub fn corner(&self) -> (f64, f64) {
        let half = (self.size / 2) as f64 + 0.5;
        (
            self.origin.0 - half * self.cell_size,
            self.origin.1 - half * self.cell_size,
        )
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<Cell> {
        let c = self.center();
        let fx = ((x - self.origin.0) / self.cell_size + 0.5).floor();
        let fy = ((y - self.origin.1) / self.cell_size + 0.5).floor();
        if !fx.is_finite() || !fy.is_finite() {
            return None;
        }
        self.channels[0].cell_at(c.x as i64 + fx as i64, c.y as i64 + fy as i64)
    }

    pub fn cell_center(&self, c: Cell) -> (f64, f64) {
        let m = self.center();
        (
            self.origin.0 + (c.x as f64 - m.x as f64) * self.cell_size,
            self.origin.1 + (c.y as f64 - m.y as f64) * self.cell_size,
        )
    }

    /// Total set cells over all channels.
    pub fn total_set(&self) -> usize {
        self.channels.iter().map(|g| g.count()).sum()
    }

    fn mark(&mut self, k: usize, c: Cell) {
        self.channels[k].set(c, true);
        self.bounds.include(c);
    }

    /// Folds one observation into the map.
    ///
    /// Each finite ray walks a Bresenham line from the pose cell to the cell holding
    /// the hit point. Cells on the way are marked explored; the hit cell is marked
    /// explored, gains one frame of evidence, and becomes an obstacle once evidence
    /// reaches the confirm threshold. Far rays mark explored cells out to max range.
    pub fn integrate(&mut self, obs: &Observation) -> Result<(), MapError> {
        let pose = obs.pose;
        let p = self.cell_of(pose.x, pose.y).ok_or(MapError::OutOfMap {
            x: pose.x,
            y: pose.y,
        })?;
        self.channels[CURRENT].set(self.current, false);
        self.current = p;
        self.mark(CURRENT, p);
        self.mark(PAST, p);
        self.mark(EXPLORED, p);

        let mut hit_this_frame: Vec<Cell> = Vec::new();
        for i in 0..obs.depth.len() {
            let b = obs.bearing(i);
            let (dx, dy) = (b.cos(), b.sin());
            let d = obs.depth[i];
            let finite = d.is_finite();
            let reach = if finite {
                d + 1e-6
            } else {
                obs.camera.max_range
            };
            let end = (pose.x + dx * reach, pose.y + dy * reach);
            let end_cell = self.cell_index(end);
            let mut last = None;
            for c in bresenham(p, end_cell) {
                let Some(c) = self.channels[0].cell_at(c.0, c.1) else {
                    break;
                };
                self.mark(EXPLORED, c);
                last = Some(c);
            }
            if !finite {
                continue;
            }
            // The walk stops early only at the map edge; then the hit is off-map.
            let Some(hc) = last.filter(|&c| (c.x as i64, c.y as i64) == end_cell) else {
                continue;
            };
            if !hit_this_frame.contains(&hc) {
                hit_this_frame.push(hc);
            }
            if let Some(cat) = obs.category[i] {
                if cat.index() < self.n_categories {
                    self.mark(CATEGORY_BASE + cat.index(), hc);
                }
            }
        }
        for c in hit_this_frame {
            let e = self.evidence.at(c).saturating_add(1);
            self.evidence.set(c, e);
            if e >= self.obstacle_confirm {
                self.mark(OBSTACLE, c);
            }
        }
        Ok(())
    }

    fn cell_index(&self, (x, y): (f64, f64)) -> (i64, i64) {
        let c = self.center();
        (
            c.x as i64 + ((x - self.origin.0) / self.cell_size + 0.5).floor() as i64,
            c.y as i64 + ((y - self.origin.1) / self.cell_size + 0.5).floor() as i64,
        )
    }

    /// Sets one cell of channel `k` directly, for synthetic maps. Obstacle cells get
    /// enough evidence to survive denoising; current-location moves.
    pub fn mark_cell(&mut self, k: usize, c: Cell) {
        if k == CURRENT {
            self.channels[CURRENT].set(self.current, false);
            self.current = c;
        }
        if k == OBSTACLE {
            self.evidence.set(c, self.evidence.at(c).max(u16::MAX / 2));
        }
        self.mark(k, c);
    }

    /// Obstacle channel replaced wholesale; used by denoising.
    pub(crate) fn set_obstacles(&mut self, obstacles: BinaryGrid) {
        self.channels[OBSTACLE] = obstacles;
    }
}

/// Set cells of the `c` channel, row-major. Empty for categories the map does not track.
pub fn goal_cells(map: &SemanticMap, c: Category) -> Vec<Cell> {
    let Some(ch) = map.category_channel(c) else {
        return Vec::new();
    };
    map.bounds().cells().filter(|&cell| ch[cell]).collect()
}

/// Integer line from `a` to `b` inclusive. On a tie the step goes to the lower-index
/// neighbor (x before y).
pub fn bresenham(a: Cell, b: (i64, i64)) -> impl Iterator<Item = (i64, i64)> {
    let (mut x, mut y) = (a.x as i64, a.y as i64);
    let dx = (b.0 - x).abs();
    let dy = -(b.1 - y).abs();
    let sx = if b.0 >= x { 1 } else { -1 };
    let sy = if b.1 >= y { 1 } else { -1 };
    let mut err = dx + dy;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out = (x, y);
        if x == b.0 && y == b.1 {
            done = true;
            return Some(out);
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
        Some(out)
    })
}
