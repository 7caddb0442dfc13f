//! Procedural single-floor homes: BSP rooms, doors on every split wall, and objects
//! placed against walls according to room-type affinities.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scene::{ObjectInstance, ReflectionMode, ReflectiveSurface, Scene};
use crate::category::Category;
use crate::grid::{flood_fill, BinaryGrid, Cell, Grid, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoomType {
    Living,
    Kitchen,
    Bedroom,
    Bathroom,
}

impl RoomType {
    pub const ALL: [RoomType; 4] = [
        RoomType::Living,
        RoomType::Kitchen,
        RoomType::Bedroom,
        RoomType::Bathroom,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            RoomType::Living => "living",
            RoomType::Kitchen => "kitchen",
            RoomType::Bedroom => "bedroom",
            RoomType::Bathroom => "bathroom",
        }
    }
}

/// A generated room: its interior cells (walls excluded) and type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Room {
    pub rect: Rect,
    pub kind: RoomType,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    pub cell_size: f64,
    /// Side length range of the home, meters.
    pub side_m: (f64, f64),
    /// Inclusive room-count range.
    pub rooms: (usize, usize),
    pub min_room_m: f64,
    pub door_m: f64,
    /// Probability that a room of a given type gets one instance of a category,
    /// indexed `[room type][category]`.
    pub affinity: [[f64; Category::COUNT]; 4],
    /// Minimum gap between objects and between objects and doors, cells.
    pub object_gap: usize,
    /// Minimum clearance from an object to a wall it does not touch, cells.
    pub wall_clearance: usize,
    pub mirror_probability: f64,
    /// Mark tv screens as surfaces the depth sensor sees through.
    pub tv_beyond_range: bool,
    pub max_attempts: usize,
}

/// Category order: chair, couch, potted plant, toilet, tv, bed.
pub const DEFAULT_AFFINITY: [[f64; Category::COUNT]; 4] = [
    [0.4, 1.0, 0.6, 0.0, 0.9, 0.0],
    [1.0, 0.0, 0.5, 0.0, 0.0, 0.0],
    [0.3, 0.0, 0.0, 0.0, 0.3, 1.0],
    [0.0, 0.0, 0.3, 1.0, 0.0, 0.0],
];

impl Default for GenParams {
    fn default() -> Self {
        Self {
            cell_size: 0.05,
            side_m: (10.0, 12.0),
            rooms: (5, 8),
            min_room_m: 2.6,
            door_m: 0.8,
            affinity: DEFAULT_AFFINITY,
            object_gap: 10,
            wall_clearance: 6,
            mirror_probability: 0.5,
            tv_beyond_range: true,
            max_attempts: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator parameter {field}: {message}")]
    InvalidParams {
        field: &'static str,
        message: String,
    },
    #[error("home generation failed after {attempts} attempts: {last}")]
    Exhausted { attempts: usize, last: String },
}

/// Placement table where each category lives in exactly one room type, and two
/// categories share a room type only when they co-occur.
pub const CORRELATED_AFFINITY: [[f64; Category::COUNT]; 4] = [
    [0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
    [1.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
];

impl GenParams {
    /// Default homes with [`CORRELATED_AFFINITY`] placement.
    pub fn correlated() -> Self {
        Self {
            affinity: CORRELATED_AFFINITY,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |field, message: String| Err(GenError::InvalidParams { field, message });
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return bad("cell_size", format!("{} must be positive", self.cell_size));
        }
        if !(self.side_m.0 > 0.0 && self.side_m.0 <= self.side_m.1) {
            return bad("side_m", format!("{:?} is not a valid range", self.side_m));
        }
        if self.rooms.0 == 0 || self.rooms.0 > self.rooms.1 {
            return bad("rooms", format!("{:?} is not a valid range", self.rooms));
        }
        if self.min_room_m <= 0.0 || self.door_m <= 0.0 || self.door_m >= self.min_room_m {
            return bad("door_m", "need 0 < door_m < min_room_m".to_string());
        }
        for row in &self.affinity {
            for &a in row {
                if !(0.0..=1.0).contains(&a) {
                    return bad("affinity", format!("{a} outside [0, 1]"));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.mirror_probability) {
            return bad(
                "mirror_probability",
                format!("{} outside [0, 1]", self.mirror_probability),
            );
        }
        if self.max_attempts == 0 {
            return bad("max_attempts", "must be at least 1".to_string());
        }
        Ok(())
    }

    fn cells(&self, meters: f64) -> usize {
        (meters / self.cell_size).round() as usize
    }
}

/// Generates a home. Pure in `(seed, params)`.
pub fn generate_home(seed: u64, params: &GenParams) -> Result<Scene, GenError> {
    generate_home_with_rooms(seed, params).map(|(s, _)| s)
}

/// [`generate_home`] that also returns the room layout.
pub fn generate_home_with_rooms(
    seed: u64,
    params: &GenParams,
) -> Result<(Scene, Vec<Room>), GenError> {
    params.validate()?;
    let mut last = String::new();
    for attempt in 0..params.max_attempts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        match try_generate(seed, params, &mut rng) {
            Ok(v) => return Ok(v),
            Err(e) => last = e,
        }
    }
    Err(GenError::Exhausted {
        attempts: params.max_attempts,
        last,
    })
}

/// A split wall line between two BSP children.
struct Split {
    vertical: bool,
    /// Column (vertical) or row (horizontal) of the wall.
    at: usize,
    /// Extent along the wall, inclusive-exclusive.
    from: usize,
    to: usize,
}

fn try_generate(
    seed: u64,
    p: &GenParams,
    rng: &mut ChaCha8Rng,
) -> Result<(Scene, Vec<Room>), String> {
    let w = p.cells(rng.random_range(p.side_m.0..=p.side_m.1));
    let h = p.cells(rng.random_range(p.side_m.0..=p.side_m.1));
    let min_room = p.cells(p.min_room_m);
    let target = rng.random_range(p.rooms.0..=p.rooms.1);

    let mut walls = Grid::from_fn(w, h, |c| {
        c.x == 0 || c.y == 0 || c.x == w - 1 || c.y == h - 1
    });
    let mut leaves = vec![Rect::new(1, 1, w - 1, h - 1)];
    let mut splits = Vec::new();
    while leaves.len() < target {
        // Split the largest splittable leaf.
        let mut order: Vec<usize> = (0..leaves.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse((leaves[i].width() * leaves[i].height(), i)));
        let Some(i) = order.into_iter().find(|&i| {
            let r = leaves[i];
            r.width() > 2 * min_room || r.height() > 2 * min_room
        }) else {
            return Err(format!(
                "cannot fit {target} rooms of {} m in {w}x{h} cells",
                p.min_room_m
            ));
        };
        let r = leaves.swap_remove(i);
        let vertical = if r.width() > 2 * min_room && r.height() > 2 * min_room {
            r.width() >= r.height()
        } else {
            r.width() > 2 * min_room
        };
        if vertical {
            let at = rng.random_range(r.x0 + min_room..=r.x1 - min_room - 1);
            for y in r.y0..r.y1 {
                walls.set(Cell::new(at, y), true);
            }
            splits.push(Split {
                vertical,
                at,
                from: r.y0,
                to: r.y1,
            });
            leaves.push(Rect::new(r.x0, r.y0, at, r.y1));
            leaves.push(Rect::new(at + 1, r.y0, r.x1, r.y1));
        } else {
            let at = rng.random_range(r.y0 + min_room..=r.y1 - min_room - 1);
            for x in r.x0..r.x1 {
                walls.set(Cell::new(x, at), true);
            }
            splits.push(Split {
                vertical,
                at,
                from: r.x0,
                to: r.x1,
            });
            leaves.push(Rect::new(r.x0, r.y0, r.x1, at));
            leaves.push(Rect::new(r.x0, at + 1, r.x1, r.y1));
        }
    }

    let door = p.cells(p.door_m);
    let mut door_cells = Vec::new();
    for s in &splits {
        // Door runs need free cells on both sides of every door cell.
        let ok = |k: usize| {
            let (a, b) = if s.vertical {
                (Cell::new(s.at - 1, k), Cell::new(s.at + 1, k))
            } else {
                (Cell::new(k, s.at - 1), Cell::new(k, s.at + 1))
            };
            !walls[a] && !walls[b]
        };
        let margin = 2;
        let starts: Vec<usize> = (s.from + margin..s.to.saturating_sub(door + margin))
            .filter(|&k0| (k0 - margin..k0 + door + margin).all(ok))
            .collect();
        let &k0 = starts
            .choose(rng)
            .ok_or("no room for a door on a split wall")?;
        for k in k0..k0 + door {
            let c = if s.vertical {
                Cell::new(s.at, k)
            } else {
                Cell::new(k, s.at)
            };
            walls.set(c, false);
            door_cells.push(c);
        }
    }

    leaves.sort();
    let rooms = assign_room_types(&leaves, rng);
    let (objects, reflective) = place_objects(p, &walls, &rooms, &door_cells, rng)?;

    let scene = Scene::new(
        format!("gen-{seed}"),
        p.cell_size,
        walls,
        objects,
        reflective,
    )
    .map_err(|e| e.to_string())?;
    check_connected(&scene)?;
    Ok((
        scene.with_provenance(format!("generated seed={seed}")),
        rooms,
    ))
}

fn assign_room_types(leaves: &[Rect], rng: &mut ChaCha8Rng) -> Vec<Room> {
    // Largest room is the living room; the rest cycle kitchen, bedroom, bathroom
    // before random extras.
    let mut by_area: Vec<usize> = (0..leaves.len()).collect();
    by_area
        .sort_by_key(|&i| std::cmp::Reverse((leaves[i].width() * leaves[i].height(), leaves[i])));
    let mut kinds = vec![RoomType::Living; leaves.len()];
    let mut rest: Vec<usize> = by_area[1..].to_vec();
    rest.shuffle(rng);
    let base = [RoomType::Kitchen, RoomType::Bedroom, RoomType::Bathroom];
    for (k, &i) in rest.iter().enumerate() {
        kinds[i] = if k < base.len() {
            base[k]
        } else {
            *[
                RoomType::Bedroom,
                RoomType::Bathroom,
                RoomType::Living,
                RoomType::Kitchen,
            ]
            .choose(rng)
            .expect("non-empty")
        };
    }
    leaves
        .iter()
        .zip(kinds)
        .map(|(&rect, kind)| Room { rect, kind })
        .collect()
}

/// Footprint (along the wall, away from the wall) in meters.
fn footprint(c: Category) -> (f64, f64) {
    match c {
        Category::Bed => (1.4, 2.0),
        Category::Couch => (2.0, 0.9),
        Category::Chair => (0.5, 0.5),
        Category::PottedPlant => (0.4, 0.4),
        Category::Toilet => (0.4, 0.7),
        Category::Tv => (1.0, 0.15),
    }
}

#[derive(Clone, Copy)]
enum Side {
    North,
    South,
    West,
    East,
}

type Placed = (Vec<ObjectInstance>, Vec<ReflectiveSurface>);

fn place_objects(
    p: &GenParams,
    walls: &BinaryGrid,
    rooms: &[Room],
    doors: &[Cell],
    rng: &mut ChaCha8Rng,
) -> Result<Placed, String> {
    let (w, h) = (walls.width(), walls.height());
    // Cells objects may not use: near doors, and later near other objects.
    let mut blocked = Grid::new(w, h, false);
    let gap = p.object_gap as i64;
    let block_around = |blocked: &mut BinaryGrid, cells: &[Cell]| {
        for &c in cells {
            for dy in -gap..=gap {
                for dx in -gap..=gap {
                    if let Some(n) = blocked.cell_at(c.x as i64 + dx, c.y as i64 + dy) {
                        blocked.set(n, true);
                    }
                }
            }
        }
    };
    block_around(&mut blocked, doors);

    let mut occupied = walls.clone();
    let mut objects = Vec::new();
    let mut reflective = Vec::new();
    for room in rooms {
        for cat in Category::ALL {
            let a = p.affinity[room.kind.index()][cat.index()];
            if a <= 0.0 || rng.random::<f64>() >= a {
                continue;
            }
            let (along, away) = footprint(cat);
            let (along, away) = (p.cells(along).max(1), p.cells(away).max(1));
            let mut candidates = Vec::new();
            let r = room.rect;
            let cl = p.wall_clearance;
            for side in [Side::North, Side::South, Side::West, Side::East] {
                let (fw, fh) = match side {
                    Side::North | Side::South => (along, away),
                    Side::West | Side::East => (away, along),
                };
                if fw + 2 * cl > r.width() || fh + 2 * cl > r.height() {
                    continue;
                }
                match side {
                    Side::North | Side::South => {
                        let y0 = if matches!(side, Side::North) {
                            r.y0
                        } else {
                            r.y1 - fh
                        };
                        for x0 in r.x0 + cl..=r.x1 - cl - fw {
                            candidates.push(Rect::new(x0, y0, x0 + fw, y0 + fh));
                        }
                    }
                    Side::West | Side::East => {
                        let x0 = if matches!(side, Side::West) {
                            r.x0
                        } else {
                            r.x1 - fw
                        };
                        for y0 in r.y0 + cl..=r.y1 - cl - fh {
                            candidates.push(Rect::new(x0, y0, x0 + fw, y0 + fh));
                        }
                    }
                }
            }
            candidates.retain(|c| c.cells().all(|cell| !blocked[cell] && !occupied[cell]));
            let Some(&fp) = candidates.choose(rng) else {
                continue;
            };
            let cells: Vec<Cell> = fp.cells().collect();
            for &c in &cells {
                occupied.set(c, true);
            }
            block_around(&mut blocked, &cells);
            let id = objects.len() as u32;
            if cat == Category::Tv && p.tv_beyond_range {
                reflective.push(ReflectiveSurface {
                    cells: cells.clone(),
                    mode: ReflectionMode::BeyondRange,
                    axis: None,
                });
            }
            objects.push(ObjectInstance {
                instance_id: id,
                category: cat,
                cells,
            });
        }
        if room.kind == RoomType::Bathroom && rng.random::<f64>() < p.mirror_probability {
            if let Some(m) = mirror_for(room, walls, &occupied, p) {
                reflective.push(m);
            }
        }
    }
    Ok((objects, reflective))
}

/// A mirror on the room's north wall, if a stretch of solid wall without doors exists.
fn mirror_for(
    room: &Room,
    walls: &BinaryGrid,
    occupied: &BinaryGrid,
    p: &GenParams,
) -> Option<ReflectiveSurface> {
    let len = p.cells(0.6);
    let r = room.rect;
    let y = r.y0.checked_sub(1)?;
    let cl = p.wall_clearance;
    for x0 in r.x0 + cl..(r.x1 - cl).saturating_sub(len) {
        let run = (x0..x0 + len).map(|x| Cell::new(x, y));
        // Solid wall with free floor in front.
        if run
            .clone()
            .all(|c| walls[c] && !occupied[Cell::new(c.x, y + 1)])
        {
            let cells: Vec<Cell> = run.collect();
            return Some(ReflectiveSurface {
                axis: Some((cells[0], cells[len - 1])),
                cells,
                mode: ReflectionMode::Mirror,
            });
        }
    }
    None
}

fn check_connected(scene: &Scene) -> Result<(), String> {
    let free = scene.free();
    let Some(start) = free.iter_cells().find(|(_, &f)| f).map(|(c, _)| c) else {
        return Err("no free space".into());
    };
    let reach = flood_fill(free, start);
    if reach.count() != free.count() {
        return Err("free space is not connected".into());
    }
    Ok(())
}

/// Free cells at least `clearance` cells (Chebyshev) from any non-free cell.
pub fn clear_cells(scene: &Scene, clearance: usize) -> Vec<Cell> {
    let blocked = scene.free().invert();
    let grown = crate::planner::dilate_obstacles(&blocked, clearance);
    grown
        .iter_cells()
        .filter(|(_, &b)| !b)
        .map(|(c, _)| c)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let p = GenParams::default();
        let a = generate_home(7, &p).unwrap();
        let b = generate_home(7, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(super::super::save_scene(&a), super::super::save_scene(&b));
        assert_ne!(a, generate_home(8, &p).unwrap());
    }

    #[test]
    fn beds_only_in_bedrooms() {
        let p = GenParams::default();
        for seed in 0..10 {
            let (scene, rooms) = generate_home_with_rooms(seed, &p).unwrap();
            for bed in scene.instances_of(Category::Bed) {
                let room = rooms
                    .iter()
                    .find(|r| r.rect.contains(bed.cells[0]))
                    .unwrap();
                assert_eq!(room.kind, RoomType::Bedroom);
                assert!(bed.cells.iter().all(|&c| room.rect.contains(c)));
            }
        }
    }

    #[test]
    fn impossible_params_fail_cleanly() {
        let p = GenParams {
            side_m: (4.0, 4.0),
            rooms: (8, 8),
            max_attempts: 3,
            ..GenParams::default()
        };
        assert!(matches!(
            generate_home(1, &p),
            Err(GenError::Exhausted { attempts: 3, .. })
        ));
        let p = GenParams {
            rooms: (3, 2),
            ..GenParams::default()
        };
        assert!(matches!(
            generate_home(1, &p),
            Err(GenError::InvalidParams { .. })
        ));
    }
}
