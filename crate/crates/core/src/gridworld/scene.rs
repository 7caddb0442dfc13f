use std::collections::HashSet;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::SceneError;
use crate::category::Category;
use crate::grid::{BinaryGrid, Cell, Grid};

/// Planar agent pose in world meters. `heading` is in `[0, 2π)`, measured from +x toward +y.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_heading(heading),
        }
    }

    /// Pose at the center of `cell`.
    pub fn at_cell(cell: Cell, cell_size: f64, heading: f64) -> Self {
        Self::new(
            (cell.x as f64 + 0.5) * cell_size,
            (cell.y as f64 + 0.5) * cell_size,
            heading,
        )
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

pub fn normalize_heading(h: f64) -> f64 {
    let r = h.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// One object of a goal category occupying a set of cells.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectInstance {
    pub instance_id: u32,
    pub category: Category,
    /// Sorted row-major, no duplicates.
    pub cells: Vec<Cell>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReflectionMode {
    /// The surface acts as a mirror about `axis`.
    Mirror,
    /// The sensor reports nothing within range.
    BeyondRange,
}

impl ReflectionMode {
    pub fn name(self) -> &'static str {
        match self {
            ReflectionMode::Mirror => "mirror",
            ReflectionMode::BeyondRange => "beyond-range",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReflectiveSurface {
    pub cells: Vec<Cell>,
    pub mode: ReflectionMode,
    /// Segment between the centers of two surface cells; present only for mirrors.
    pub axis: Option<(Cell, Cell)>,
}

/// Ground-truth home: walls, objects and reflective surfaces on a square-cell grid.
///
/// Immutable once built; share it freely across episode runs.
#[derive(Clone, Debug)]
pub struct Scene {
    id: String,
    cell_size: f64,
    walls: BinaryGrid,
    traversable: BinaryGrid,
    free: BinaryGrid,
    objects: Vec<ObjectInstance>,
    reflective: Vec<ReflectiveSurface>,
    object_at: Grid<Option<u32>>,
    reflective_at: Grid<Option<u32>>,
    provenance: Option<String>,
}

impl PartialEq for Scene {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.cell_size == other.cell_size
            && self.walls == other.walls
            && self.objects == other.objects
            && self.reflective == other.reflective
            && self.provenance == other.provenance
    }
}

impl Scene {
    /// Builds a scene and checks every structural invariant.
    pub fn new(
        id: impl Into<String>,
        cell_size: f64,
        walls: BinaryGrid,
        mut objects: Vec<ObjectInstance>,
        reflective: Vec<ReflectiveSurface>,
    ) -> Result<Scene, SceneError> {
        let (width, height) = (walls.width(), walls.height());
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(SceneError::invariant(
                "cell_size > 0",
                format!("got {cell_size}"),
            ));
        }
        if width == 0 || height == 0 {
            return Err(SceneError::invariant(
                "width, height > 0",
                format!("got {width}x{height}"),
            ));
        }

        let mut object_at: Grid<Option<u32>> = Grid::new(width, height, None);
        let mut seen_ids = HashSet::new();
        for (k, obj) in objects.iter_mut().enumerate() {
            if obj.cells.is_empty() {
                return Err(SceneError::invariant(
                    "object cells non-empty",
                    format!("object {} has no cells", obj.instance_id),
                ));
            }
            if !seen_ids.insert(obj.instance_id) {
                return Err(SceneError::invariant(
                    "unique instance ids",
                    format!("instance id {} repeated", obj.instance_id),
                ));
            }
            obj.cells.sort();
            obj.cells.dedup();
            for &c in &obj.cells {
                if !walls.contains(c) {
                    return Err(SceneError::invariant(
                        "object cells inside grid",
                        format!(
                            "object {} cell {c} outside {width}x{height} grid",
                            obj.instance_id
                        ),
                    ));
                }
                match object_at.at(c) {
                    Some(other) if other as usize != k => {
                        return Err(SceneError::invariant(
                            "objects do not overlap",
                            format!("cell {c} claimed by two instances"),
                        ));
                    }
                    _ => object_at.set(c, Some(k as u32)),
                }
            }
        }

        let traversable = walls.invert();
        let free = Grid::from_fn(width, height, |c| !walls[c] && object_at.at(c).is_none());

        let mut reflective_at: Grid<Option<u32>> = Grid::new(width, height, None);
        for (k, surf) in reflective.iter().enumerate() {
            if surf.cells.is_empty() {
                return Err(SceneError::invariant(
                    "reflective cells non-empty",
                    format!("reflective surface {k} has no cells"),
                ));
            }
            for &c in &surf.cells {
                if !walls.contains(c) {
                    return Err(SceneError::invariant(
                        "reflective cells inside grid",
                        format!("reflective surface {k} cell {c} outside grid"),
                    ));
                }
                if free[c] {
                    return Err(SceneError::invariant(
                        "reflective cells are solid",
                        format!("reflective surface {k} cell {c} is free space"),
                    ));
                }
                reflective_at.set(c, Some(k as u32));
            }
            match (surf.mode, surf.axis) {
                (ReflectionMode::Mirror, None) => {
                    return Err(SceneError::invariant(
                        "mirror has axis",
                        format!("reflective surface {k} is a mirror without an axis"),
                    ))
                }
                (ReflectionMode::Mirror, Some((a, b))) => {
                    if a == b || !surf.cells.contains(&a) || !surf.cells.contains(&b) {
                        return Err(SceneError::invariant(
                            "mirror axis lies on the surface",
                            format!("reflective surface {k} axis {a}-{b} not on its cells"),
                        ));
                    }
                }
                (ReflectionMode::BeyondRange, _) => {}
            }
        }

        Ok(Scene {
            id: id.into(),
            cell_size,
            walls,
            traversable,
            free,
            objects,
            reflective,
            object_at,
            reflective_at,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = Some(provenance.into());
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn width(&self) -> usize {
        self.walls.width()
    }

    pub fn height(&self) -> usize {
        self.walls.height()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn walls(&self) -> &BinaryGrid {
        &self.walls
    }

    /// Cells not covered by walls (objects stand on traversable floor).
    pub fn traversable(&self) -> &BinaryGrid {
        &self.traversable
    }

    /// Traversable cells not occupied by any object: where the agent can be.
    pub fn free(&self) -> &BinaryGrid {
        &self.free
    }

    pub fn objects(&self) -> &[ObjectInstance] {
        &self.objects
    }

    pub fn reflective(&self) -> &[ReflectiveSurface] {
        &self.reflective
    }

    pub fn object_at(&self, c: Cell) -> Option<&ObjectInstance> {
        self.object_at
            .get(c)
            .copied()
            .flatten()
            .map(|k| &self.objects[k as usize])
    }

    /// Position in [`Scene::objects`] of the instance covering `c`.
    pub fn object_index_at(&self, c: Cell) -> Option<usize> {
        self.object_at.get(c).copied().flatten().map(|k| k as usize)
    }

    pub fn reflective_at(&self, c: Cell) -> Option<&ReflectiveSurface> {
        self.reflective_at
            .get(c)
            .copied()
            .flatten()
            .map(|k| &self.reflective[k as usize])
    }

    pub fn instances_of(&self, category: Category) -> impl Iterator<Item = &ObjectInstance> {
        self.objects.iter().filter(move |o| o.category == category)
    }

    pub fn categories_present(&self) -> Vec<Category> {
        let mut v: Vec<Category> = self.objects.iter().map(|o| o.category).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Cell containing a world point, if inside the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<Cell> {
        let cx = (x / self.cell_size).floor();
        let cy = (y / self.cell_size).floor();
        if cx < 0.0 || cy < 0.0 {
            return None;
        }
        let c = Cell::new(cx as usize, cy as usize);
        self.walls.contains(c).then_some(c)
    }

    pub fn is_free_point(&self, x: f64, y: f64) -> bool {
        self.cell_of(x, y).is_some_and(|c| self.free[c])
    }

    pub fn pose_is_valid(&self, pose: &Pose) -> bool {
        self.is_free_point(pose.x, pose.y)
    }

    pub fn cell_center(&self, c: Cell) -> (f64, f64) {
        (
            (c.x as f64 + 0.5) * self.cell_size,
            (c.y as f64 + 0.5) * self.cell_size,
        )
    }

    /// Euclidean distance (meters) from a world point to the nearest cell center of any
    /// instance of `category`; `None` if the category is absent.
    pub fn euclidean_to_category(&self, x: f64, y: f64, category: Category) -> Option<f64> {
        self.instances_of(category)
            .flat_map(|o| o.cells.iter())
            .map(|&c| {
                let (cx, cy) = self.cell_center(c);
                (cx - x).hypot(cy - y)
            })
            .min_by(f64::total_cmp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(id: u32, category: Category, cells: &[(usize, usize)]) -> ObjectInstance {
        ObjectInstance {
            instance_id: id,
            category,
            cells: cells.iter().map(|&(x, y)| Cell::new(x, y)).collect(),
        }
    }

    #[test]
    fn rejects_out_of_bounds_object() {
        let walls = Grid::new(10, 10, false);
        let err = Scene::new(
            "s",
            0.05,
            walls,
            vec![obj(0, Category::Tv, &[(12, 3)])],
            vec![],
        )
        .unwrap_err();
        assert!(err.to_string().contains("inside grid"), "{err}");
    }

    #[test]
    fn rejects_overlap_and_mirror_without_axis() {
        let walls = Grid::new(10, 10, false);
        let err = Scene::new(
            "s",
            0.05,
            walls.clone(),
            vec![
                obj(0, Category::Chair, &[(1, 1)]),
                obj(1, Category::Chair, &[(1, 1)]),
            ],
            vec![],
        )
        .unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");

        let mut w = walls;
        w.set(Cell::new(0, 0), true);
        let err = Scene::new(
            "s",
            0.05,
            w,
            vec![],
            vec![ReflectiveSurface {
                cells: vec![Cell::new(0, 0)],
                mode: ReflectionMode::Mirror,
                axis: None,
            }],
        )
        .unwrap_err();
        assert!(err.to_string().contains("mirror has axis"), "{err}");
    }

    #[test]
    fn heading_is_normalized() {
        let p = Pose::new(0.0, 0.0, -std::f64::consts::FRAC_PI_2);
        assert!((p.heading - 1.5 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(Pose::new(0.0, 0.0, TAU).heading, 0.0);
    }
}
