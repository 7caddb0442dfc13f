use crate::grid::{BinaryGrid, Grid};

/// Grows the `true` (obstacle) set by a Chebyshev radius. Radius 0 is the identity.
///
/// Separable: a horizontal then a vertical running-window max.
pub fn dilate_obstacles(mask: &BinaryGrid, radius: usize) -> BinaryGrid {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width(), mask.height());
    let src = mask.data();
    let mut rows = vec![false; w * h];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        let out = &mut rows[y * w..(y + 1) * w];
        window_max(row, out, radius);
    }
    let mut cols = vec![false; w * h];
    let mut col_in = vec![false; h];
    let mut col_out = vec![false; h];
    for x in 0..w {
        for y in 0..h {
            col_in[y] = rows[y * w + x];
        }
        window_max(&col_in, &mut col_out, radius);
        for y in 0..h {
            cols[y * w + x] = col_out[y];
        }
    }
    Grid::from_vec(w, h, cols)
}

fn window_max(input: &[bool], out: &mut [bool], radius: usize) {
    let n = input.len();
    // Count of set cells within the sliding window [i - r, i + r].
    let mut count = 0usize;
    for v in input.iter().take(radius.min(n)) {
        count += *v as usize;
    }
    for i in 0..n {
        let enter = i + radius;
        if enter < n {
            count += input[enter] as usize;
        }
        if i > radius {
            count -= input[i - radius - 1] as usize;
        }
        out[i] = count > 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Cell;

    #[test]
    fn radius_zero_is_identity() {
        let mut m = Grid::new(6, 5, false);
        m.set(Cell::new(2, 3), true);
        assert_eq!(dilate_obstacles(&m, 0), m);
    }

    #[test]
    fn single_cell_becomes_block() {
        let mut m = Grid::new(7, 7, false);
        m.set(Cell::new(3, 3), true);
        let d = dilate_obstacles(&m, 1);
        assert_eq!(d.count(), 9);
        for y in 2..=4 {
            for x in 2..=4 {
                assert!(d[Cell::new(x, y)]);
            }
        }
    }

    #[test]
    fn clipped_at_border() {
        let mut m = Grid::new(5, 5, false);
        m.set(Cell::new(0, 0), true);
        let d = dilate_obstacles(&m, 2);
        assert_eq!(d.count(), 9);
    }
}
