use serde::{Deserialize, Serialize};

use super::SemanticMap;
use crate::grid::{BinaryGrid, Cell, Grid, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseParams {
    pub obstacle_confirm: u16,
    /// Half-length of the linear structuring elements, cells.
    pub opening_radius: usize,
}

impl Default for DenoiseParams {
    fn default() -> Self {
        Self {
            obstacle_confirm: 2,
            opening_radius: 1,
        }
    }
}

/// Removes spurious obstacle cells: drops cells with too little evidence, then opens
/// the obstacle channel. Other channels are untouched.
///
/// The opening is the union of openings by horizontal, vertical and both diagonal
/// segments of length `2r + 1`. Isolated specks vanish while walls one cell thick
/// in any of those directions survive.
pub fn denoise(map: &SemanticMap, params: &DenoiseParams) -> SemanticMap {
    let mut out = map.clone();
    let bounds = map.bounds();
    let evidence = map.evidence();
    let kept = Grid::from_fn(map.size(), map.size(), |c| {
        map.obstacles()[c] && evidence.at(c) >= params.obstacle_confirm
    });
    out.set_obstacles(linear_opening(&kept, params.opening_radius, bounds));
    out
}

const DIRECTIONS: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

/// Union of openings by centered line segments of half-length `r`, restricted to
/// `window` (cells outside stay as they are).
pub fn linear_opening(mask: &BinaryGrid, r: usize, window: Rect) -> BinaryGrid {
    if r == 0 {
        return mask.clone();
    }
    let r = r as i64;
    let mut out = mask.clone();
    for c in window.cells() {
        out.set(c, false);
    }
    let set = |x: i64, y: i64| mask.cell_at(x, y).is_some_and(|c| mask[c]);
    for (dx, dy) in DIRECTIONS {
        // Erosion: centers whose whole segment is set. Then dilate back by the same segment.
        let eroded: Vec<Cell> = window
            .cells()
            .filter(|c| mask[*c])
            .filter(|c| (-r..=r).all(|k| set(c.x as i64 + k * dx, c.y as i64 + k * dy)))
            .collect();
        for c in eroded {
            for k in -r..=r {
                if let Some(n) = mask.cell_at(c.x as i64 + k * dx, c.y as i64 + k * dy) {
                    out.set(n, true);
                }
            }
        }
    }
    out
}
