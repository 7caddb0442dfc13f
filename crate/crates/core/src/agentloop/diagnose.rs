use super::map_to_scene;
use crate::category::Category;
use crate::grid::{Cell, Grid};
use crate::gridworld::{Pose, Scene};
use crate::planner::{distance_field_until, planning_mask};
use crate::semmap::SemanticMap;

/// Door-blocking detector.
///
/// Projects the map's obstacle channel onto the scene (the map center sits on
/// `start`), then asks whether every goal-category instance is cut off from the
/// agent in the planning mask, and whether dropping obstacle cells that are free in
/// the scene would reconnect one. Unknown cells count as traversable both times.
pub fn goal_blocked_by_false_obstacles(
    scene: &Scene,
    map: &SemanticMap,
    start: Cell,
    pose: &Pose,
    goal: Category,
    dilation: usize,
) -> bool {
    let Some(agent) = scene.cell_of(pose.x, pose.y) else {
        return false;
    };
    let mut mapped = Grid::new(scene.width(), scene.height(), false);
    for m in map.bounds().cells() {
        if map.obstacles()[m] {
            if let Some(s) = map_to_scene(scene, map, start, m) {
                mapped.set(s, true);
            }
        }
    }
    let goals: Vec<Cell> = scene
        .instances_of(goal)
        .flat_map(|o| o.cells.iter().copied())
        .collect();
    if goals.is_empty() {
        return false;
    }
    let reaches = |obstacles: &Grid<bool>| {
        let mask = planning_mask(obstacles, agent, &goals, dilation);
        distance_field_until(&mask, &goals, scene.cell_size(), &[agent])
            .is_ok_and(|f| f.is_reachable(agent))
    };
    if reaches(&mapped) {
        return false;
    }
    let free = scene.free();
    let truthful = Grid::from_fn(scene.width(), scene.height(), |c| mapped[c] && !free[c]);
    reaches(&truthful)
}
