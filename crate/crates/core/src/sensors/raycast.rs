//! Grid traversal for depth rays.

use crate::grid::Cell;
use crate::gridworld::Scene;

/// First blocking cell met by a ray. `cell` is `None` when the ray left the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub dist: f64,
    pub cell: Option<Cell>,
}

/// Walks cells along `dir` (unit vector) from `origin` with a DDA and returns the
/// first non-free cell whose boundary lies within `max_dist`.
///
/// `skip` is treated as free; it lets a reflected ray leave the mirror cell it starts on.
pub fn cast_ray(
    scene: &Scene,
    origin: (f64, f64),
    dir: (f64, f64),
    max_dist: f64,
    skip: Option<Cell>,
) -> Option<Hit> {
    let h = scene.cell_size();
    let (w, ht) = (scene.width() as i64, scene.height() as i64);
    let mut cx = (origin.0 / h).floor() as i64;
    let mut cy = (origin.1 / h).floor() as i64;
    let free = scene.free();

    let step_x: i64 = if dir.0 > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dir.1 > 0.0 { 1 } else { -1 };
    let t_delta_x = if dir.0 != 0.0 {
        h / dir.0.abs()
    } else {
        f64::INFINITY
    };
    let t_delta_y = if dir.1 != 0.0 {
        h / dir.1.abs()
    } else {
        f64::INFINITY
    };
    let next_boundary = |c: i64, o: f64, d: f64| {
        if d > 0.0 {
            ((c + 1) as f64 * h - o) / d
        } else if d < 0.0 {
            (c as f64 * h - o) / d
        } else {
            f64::INFINITY
        }
    };
    let mut t_max_x = next_boundary(cx, origin.0, dir.0);
    let mut t_max_y = next_boundary(cy, origin.1, dir.1);

    loop {
        let t = if t_max_x <= t_max_y {
            cx += step_x;
            let t = t_max_x;
            t_max_x += t_delta_x;
            t
        } else {
            cy += step_y;
            let t = t_max_y;
            t_max_y += t_delta_y;
            t
        };
        if t > max_dist {
            return None;
        }
        if cx < 0 || cy < 0 || cx >= w || cy >= ht {
            return Some(Hit {
                dist: t,
                cell: None,
            });
        }
        let c = Cell::new(cx as usize, cy as usize);
        if !free[c] && Some(c) != skip {
            return Some(Hit {
                dist: t,
                cell: Some(c),
            });
        }
    }
}

/// Reflects a direction about the line through `a` and `b`.
pub fn reflect(dir: (f64, f64), a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (ux, uy) = (b.0 - a.0, b.1 - a.1);
    let n = ux.hypot(uy);
    let (ux, uy) = (ux / n, uy / n);
    let dot = dir.0 * ux + dir.1 * uy;
    (2.0 * dot * ux - dir.0, 2.0 * dot * uy - dir.1)
}
