use std::io::{self, Write};

use super::fmm::DistanceField;

/// Writes the field as a grayscale PFM (little-endian). Unreachable cells are -1.
///
/// PFM stores rows bottom to top, so the last grid row comes first.
pub fn write_pfm<W: Write>(field: &DistanceField, mut out: W) -> io::Result<()> {
    let (w, h) = (field.width(), field.height());
    write!(out, "Pf\n{w} {h}\n-1.0\n")?;
    let values = field.values().data();
    let mut buf = Vec::with_capacity(w * h * 4);
    for y in (0..h).rev() {
        for &v in &values[y * w..(y + 1) * w] {
            let v = if v.is_finite() { v as f32 } else { -1.0 };
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, Grid};
    use crate::planner::distance_field;

    #[test]
    fn header_and_size() {
        let f = distance_field(&Grid::new(4, 3, true), &[Cell::new(0, 0)], 0.5).unwrap();
        let mut out = Vec::new();
        write_pfm(&f, &mut out).unwrap();
        let header = b"Pf\n4 3\n-1.0\n";
        assert_eq!(&out[..header.len()], header);
        assert_eq!(out.len(), header.len() + 4 * 3 * 4);
        // First stored value is cell (0, 2) = 1.0.
        let v = f32::from_le_bytes(out[header.len()..header.len() + 4].try_into().unwrap());
        assert_eq!(v, 1.0);
    }
}
