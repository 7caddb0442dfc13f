//! Scene file reader and canonical writer.
//!
//! The file is JSON with a fixed key order. Wall rows are run-length encoded strings
//! (`"12#3.185#"`: count then `#` for wall, `.` for free), and cell sets are lists of
//! horizontal runs `[x, y, len]`. `save` always emits the canonical layout, so
//! `save(load(text)) == text` for any canonical file.

use std::fmt::Write as _;

use serde::Deserialize;

use super::scene::{ObjectInstance, ReflectionMode, ReflectiveSurface, Scene};
use super::SceneError;
use crate::category::Category;
use crate::grid::{BinaryGrid, Cell, Grid};

pub const SCENE_FORMAT: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    format: u32,
    id: String,
    width: usize,
    height: usize,
    cell_size: f64,
    #[serde(default)]
    provenance: Option<String>,
    obstacles: Vec<String>,
    objects: Vec<RawObject>,
    reflective: Vec<RawReflective>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    id: u32,
    category: String,
    cells: Vec<[usize; 3]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReflective {
    cells: Vec<[usize; 3]>,
    mode: String,
    #[serde(default)]
    axis: Option<[[usize; 2]; 2]>,
}

/// Parses scene-file text.
pub fn load_scene(text: &str) -> Result<Scene, SceneError> {
    let raw: RawScene = serde_json::from_str(text).map_err(|e| SceneError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.format != SCENE_FORMAT {
        return Err(SceneError::field(
            "format",
            format!(
                "unsupported format {} (expected {SCENE_FORMAT})",
                raw.format
            ),
        ));
    }
    if raw.width == 0 || raw.height == 0 {
        return Err(SceneError::invariant(
            "width, height > 0",
            format!("got {}x{}", raw.width, raw.height),
        ));
    }
    if raw.obstacles.len() != raw.height {
        return Err(SceneError::field(
            "obstacles",
            format!("{} rows for height {}", raw.obstacles.len(), raw.height),
        ));
    }
    let mut walls = Grid::new(raw.width, raw.height, false);
    for (y, row) in raw.obstacles.iter().enumerate() {
        let decoded =
            decode_row(row).map_err(|m| SceneError::field(format!("obstacles[{y}]"), m))?;
        if decoded.len() != raw.width {
            return Err(SceneError::field(
                format!("obstacles[{y}]"),
                format!(
                    "row decodes to {} cells, width is {}",
                    decoded.len(),
                    raw.width
                ),
            ));
        }
        for (x, w) in decoded.into_iter().enumerate() {
            walls.set(Cell::new(x, y), w);
        }
    }

    let mut objects = Vec::with_capacity(raw.objects.len());
    for (i, o) in raw.objects.into_iter().enumerate() {
        let category: Category =
            o.category
                .parse()
                .map_err(|e: crate::category::UnknownCategory| {
                    SceneError::field(format!("objects[{i}].category"), e.to_string())
                })?;
        objects.push(ObjectInstance {
            instance_id: o.id,
            category,
            cells: expand_runs(&o.cells)
                .map_err(|m| SceneError::field(format!("objects[{i}].cells"), m))?,
        });
    }

    let mut reflective = Vec::with_capacity(raw.reflective.len());
    for (i, r) in raw.reflective.into_iter().enumerate() {
        let mode = match r.mode.as_str() {
            "mirror" => ReflectionMode::Mirror,
            "beyond-range" => ReflectionMode::BeyondRange,
            other => {
                return Err(SceneError::field(
                    format!("reflective[{i}].mode"),
                    format!("unknown mode {other:?}"),
                ))
            }
        };
        let mut cells = expand_runs(&r.cells)
            .map_err(|m| SceneError::field(format!("reflective[{i}].cells"), m))?;
        cells.sort();
        cells.dedup();
        reflective.push(ReflectiveSurface {
            cells,
            mode,
            axis: r
                .axis
                .map(|[a, b]| (Cell::new(a[0], a[1]), Cell::new(b[0], b[1]))),
        });
    }

    let scene = Scene::new(raw.id, raw.cell_size, walls, objects, reflective)?;
    Ok(match raw.provenance {
        Some(p) => scene.with_provenance(p),
        None => scene,
    })
}

/// Canonical scene-file text.
pub fn save_scene(scene: &Scene) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"format\": {SCENE_FORMAT},");
    let _ = writeln!(out, "  \"id\": {},", json_str(scene.id()));
    let _ = writeln!(out, "  \"width\": {},", scene.width());
    let _ = writeln!(out, "  \"height\": {},", scene.height());
    let _ = writeln!(
        out,
        "  \"cell_size\": {},",
        serde_json::to_string(&scene.cell_size()).expect("finite cell size")
    );
    if let Some(p) = scene.provenance() {
        let _ = writeln!(out, "  \"provenance\": {},", json_str(p));
    }

    out.push_str("  \"obstacles\": [\n");
    let walls = scene.walls();
    for y in 0..scene.height() {
        let row: Vec<bool> = (0..scene.width()).map(|x| walls[Cell::new(x, y)]).collect();
        let sep = if y + 1 < scene.height() { "," } else { "" };
        let _ = writeln!(out, "    \"{}\"{sep}", encode_row(&row));
    }
    out.push_str("  ],\n");

    write_list(
        &mut out,
        "objects",
        scene.objects().iter().map(|o| {
            format!(
                "{{\"id\": {}, \"category\": {}, \"cells\": {}}}",
                o.instance_id,
                json_str(o.category.name()),
                runs_json(&o.cells)
            )
        }),
        true,
    );

    write_list(
        &mut out,
        "reflective",
        scene.reflective().iter().map(|r| {
            let mut s = format!(
                "{{\"cells\": {}, \"mode\": {}",
                runs_json(&r.cells),
                json_str(r.mode.name())
            );
            if let Some((a, b)) = r.axis {
                let _ = write!(s, ", \"axis\": [[{}, {}], [{}, {}]]", a.x, a.y, b.x, b.y);
            }
            s.push('}');
            s
        }),
        false,
    );
    out.push_str("}\n");
    out
}

fn write_list(out: &mut String, key: &str, items: impl Iterator<Item = String>, comma: bool) {
    let items: Vec<String> = items.collect();
    let tail = if comma { "," } else { "" };
    if items.is_empty() {
        let _ = writeln!(out, "  \"{key}\": []{tail}");
        return;
    }
    let _ = writeln!(out, "  \"{key}\": [");
    for (i, item) in items.iter().enumerate() {
        let sep = if i + 1 < items.len() { "," } else { "" };
        let _ = writeln!(out, "    {item}{sep}");
    }
    let _ = writeln!(out, "  ]{tail}");
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

fn encode_row(row: &[bool]) -> String {
    let mut s = String::new();
    let mut i = 0;
    while i < row.len() {
        let v = row[i];
        let mut j = i;
        while j < row.len() && row[j] == v {
            j += 1;
        }
        let _ = write!(s, "{}{}", j - i, if v { '#' } else { '.' });
        i = j;
    }
    s
}

fn decode_row(s: &str) -> Result<Vec<bool>, String> {
    let mut out = Vec::new();
    let mut count = String::new();
    for ch in s.chars() {
        match ch {
            '0'..='9' => count.push(ch),
            '#' | '.' => {
                let n: usize = if count.is_empty() {
                    1
                } else {
                    count
                        .parse()
                        .map_err(|_| format!("bad run length {count:?}"))?
                };
                out.extend(std::iter::repeat_n(ch == '#', n));
                count.clear();
            }
            other => return Err(format!("unexpected character {other:?} in row")),
        }
    }
    if !count.is_empty() {
        return Err(format!("dangling run length {count:?}"));
    }
    Ok(out)
}

fn expand_runs(runs: &[[usize; 3]]) -> Result<Vec<Cell>, String> {
    let mut cells = Vec::new();
    for (k, &[x, y, n]) in runs.iter().enumerate() {
        if n == 0 {
            return Err(format!("run {k} has zero length"));
        }
        cells.extend((x..x + n).map(|xx| Cell::new(xx, y)));
    }
    Ok(cells)
}

fn runs_json(cells: &[Cell]) -> String {
    let mut sorted = cells.to_vec();
    sorted.sort();
    let mut runs: Vec<[usize; 3]> = Vec::new();
    for c in sorted {
        match runs.last_mut() {
            Some(r) if r[1] == c.y && r[0] + r[2] == c.x => r[2] += 1,
            _ => runs.push([c.x, c.y, 1]),
        }
    }
    let body: Vec<String> = runs
        .iter()
        .map(|r| format!("[{}, {}, {}]", r[0], r[1], r[2]))
        .collect();
    format!("[{}]", body.join(", "))
}

/// Wall grid from text art (`#` wall, anything else free). Handy for tests and fixtures.
pub fn walls_from_art(art: &str) -> BinaryGrid {
    let rows: Vec<&str> = art
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty())
        .collect();
    let h = rows.len();
    let w = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    Grid::from_fn(w, h, |c| rows[c.y].as_bytes().get(c.x) == Some(&b'#'))
}
