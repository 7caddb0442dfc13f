use std::io::{self, Write};

use super::{SemanticMap, CATEGORY_BASE, CURRENT, EXPLORED, OBSTACLE, PAST};
use crate::grid::Rect;

/// Binary PGM of one channel over `window` (255 = set).
pub fn write_channel_pgm<W: Write>(
    map: &SemanticMap,
    k: usize,
    window: Rect,
    mut out: W,
) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", window.width(), window.height())?;
    let ch = map.channel(k);
    let bytes: Vec<u8> = window
        .cells()
        .map(|c| if ch[c] { 255 } else { 0 })
        .collect();
    out.write_all(&bytes)
}

const PALETTE: [[u8; 3]; 6] = [
    [230, 120, 30],
    [170, 60, 170],
    [40, 160, 60],
    [30, 120, 220],
    [220, 40, 40],
    [200, 180, 40],
];

/// Binary PPM combining all channels over `window`: unexplored black, explored light
/// gray, obstacles dark gray, categories in fixed colors, past path blue, agent red.
pub fn write_color_ppm<W: Write>(map: &SemanticMap, window: Rect, mut out: W) -> io::Result<()> {
    write!(out, "P6\n{} {}\n255\n", window.width(), window.height())?;
    let mut bytes = Vec::with_capacity(window.width() * window.height() * 3);
    for c in window.cells() {
        let mut px = [0u8; 3];
        if map.channel(EXPLORED)[c] {
            px = [210, 210, 210];
        }
        if map.channel(OBSTACLE)[c] {
            px = [80, 80, 80];
        }
        for cat in 0..map.n_categories() {
            if map.channel(CATEGORY_BASE + cat)[c] {
                px = PALETTE[cat % PALETTE.len()];
            }
        }
        if map.channel(PAST)[c] {
            px = [60, 90, 255];
        }
        if map.channel(CURRENT)[c] {
            px = [255, 0, 0];
        }
        bytes.extend_from_slice(&px);
    }
    out.write_all(&bytes)
}
