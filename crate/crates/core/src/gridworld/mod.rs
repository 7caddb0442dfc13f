//! Ground-truth homes: scenes, the scene file format, and procedural generation.

mod format;
mod generate;
mod scene;

pub use format::{load_scene, save_scene, walls_from_art, SCENE_FORMAT};
pub use generate::{
    clear_cells, generate_home, generate_home_with_rooms, GenError, GenParams, Room, RoomType,
    CORRELATED_AFFINITY, DEFAULT_AFFINITY,
};
pub use scene::{
    normalize_heading, ObjectInstance, Pose, ReflectionMode, ReflectiveSurface, Scene,
};

use crate::category::Category;
use crate::planner::{distance_field_until, PlanError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field {path}: {message}")]
    Field { path: String, message: String },
    #[error("invariant violated ({invariant}): {detail}")]
    Invariant { invariant: String, detail: String },
}

impl SceneError {
    pub(crate) fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        SceneError::Field {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invariant(invariant: impl Into<String>, detail: impl Into<String>) -> Self {
        SceneError::Invariant {
            invariant: invariant.into(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GoalError {
    #[error("scene {scene} has no {category} instance")]
    NoInstance { scene: String, category: Category },
    #[error("no {category} instance reachable from the start pose")]
    Unreachable { category: Category },
    #[error("start pose ({x:.3}, {y:.3}) is not in free space")]
    InvalidStart { x: f64, y: f64 },
}

/// The instance of `category` geodesically closest to `start`, with its distance in meters.
///
/// Distance runs over ground-truth free space to the instance's own cells, so an
/// instance touching the start cell is one cell away. Ties go to the lower instance
/// position in the scene.
pub fn nearest_goal_instance<'a>(
    scene: &'a Scene,
    start: &Pose,
    category: Category,
) -> Result<(&'a ObjectInstance, f64), GoalError> {
    let start_cell = scene
        .cell_of(start.x, start.y)
        .filter(|&c| scene.free()[c])
        .ok_or(GoalError::InvalidStart {
            x: start.x,
            y: start.y,
        })?;
    let mut best: Option<(&ObjectInstance, f64)> = None;
    let mut any = false;
    for obj in scene.instances_of(category) {
        any = true;
        let mut mask = scene.free().clone();
        for &c in &obj.cells {
            mask.set(c, true);
        }
        let field = match distance_field_until(&mask, &obj.cells, scene.cell_size(), &[start_cell])
        {
            Ok(f) => f,
            Err(PlanError::AllSourcesBlocked) => continue,
            Err(e) => unreachable!("distance field over scene: {e}"),
        };
        let d = field.value(start_cell);
        if d.is_finite() && best.is_none_or(|(_, b)| d < b) {
            best = Some((obj, d));
        }
    }
    if !any {
        return Err(GoalError::NoInstance {
            scene: scene.id().to_string(),
            category,
        });
    }
    best.ok_or(GoalError::Unreachable { category })
}
