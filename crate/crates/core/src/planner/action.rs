use std::f64::consts::PI;

use super::fmm::DistanceField;
use crate::grid::{Cell, NEIGHBORS8};
use crate::gridworld::Pose;
use crate::sensors::ActionCommand;

/// Half the turn quantum: alignment within this counts as facing the waypoint.
pub const ALIGN_TOLERANCE: f64 = PI / 12.0;

/// Non-action outcomes of [`next_action`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanSignal {
    /// The pose cell is within one cell of a source.
    AtGoal,
    /// The pose cell is unreachable or is a local minimum of the field.
    Stuck,
}

/// Signed angle `a − b` wrapped to (−π, π].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

/// Steepest-descent 8-neighbor of `c`, if one is strictly lower. Ties go row-major.
pub fn descent_neighbor(field: &DistanceField, c: Cell) -> Option<Cell> {
    let here = field.value(c);
    let mut best: Option<(Cell, f64)> = None;
    for n in field.values().neighbors(c, &NEIGHBORS8) {
        let v = field.value(n);
        if v < here && best.is_none_or(|(_, b)| v < b) {
            best = Some((n, v));
        }
    }
    best.map(|(n, _)| n)
}

/// Next discrete action following the field's steepest descent from the pose cell.
pub fn next_action(field: &DistanceField, pose: &Pose) -> Result<ActionCommand, PlanSignal> {
    next_action_with(field, pose, 1)
}

/// [`next_action`] aiming at the cell `lookahead` descent steps ahead instead of the
/// immediate neighbor. Aiming a few cells out keeps the bearing stable when the
/// pose sits off the cell center.
pub fn next_action_with(
    field: &DistanceField,
    pose: &Pose,
    lookahead: usize,
) -> Result<ActionCommand, PlanSignal> {
    let cell = field.cell_of(pose.x, pose.y).ok_or(PlanSignal::Stuck)?;
    next_action_from(field, cell, pose, lookahead)
}

/// [`next_action_with`] for a caller that already knows the pose cell, so rounding
/// at a cell boundary cannot pick a different cell than the caller planned for.
pub fn next_action_from(
    field: &DistanceField,
    cell: Cell,
    pose: &Pose,
    lookahead: usize,
) -> Result<ActionCommand, PlanSignal> {
    if !field.values().contains(cell) {
        return Err(PlanSignal::Stuck);
    }
    let here = field.value(cell);
    if !here.is_finite() {
        return Err(PlanSignal::Stuck);
    }
    if here <= field.cell_size() {
        return Err(PlanSignal::AtGoal);
    }
    let mut waypoint = descent_neighbor(field, cell).ok_or(PlanSignal::Stuck)?;
    for _ in 1..lookahead.max(1) {
        match descent_neighbor(field, waypoint) {
            Some(n) => waypoint = n,
            None => break,
        }
    }
    let (wx, wy) = field.cell_center(waypoint);
    let bearing = (wy - pose.y).atan2(wx - pose.x);
    let diff = angle_diff(bearing, pose.heading);
    Ok(if diff.abs() <= ALIGN_TOLERANCE + 1e-9 {
        ActionCommand::Forward
    } else if diff > 0.0 {
        ActionCommand::TurnLeft
    } else {
        ActionCommand::TurnRight
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::planner::distance_field;

    fn corridor() -> DistanceField {
        distance_field(&Grid::new(40, 9, true), &[Cell::new(35, 4)], 0.05).unwrap()
    }

    #[test]
    fn aligned_goal_ahead_moves_forward() {
        let f = corridor();
        let p = Pose::at_cell(Cell::new(5, 4), 0.05, 0.0);
        assert_eq!(next_action(&f, &p), Ok(ActionCommand::Forward));
        assert_eq!(next_action_with(&f, &p, 5), Ok(ActionCommand::Forward));
    }

    #[test]
    fn goal_behind_turns_left() {
        let f = corridor();
        let p = Pose::at_cell(Cell::new(5, 4), 0.05, PI);
        assert_eq!(next_action(&f, &p), Ok(ActionCommand::TurnLeft));
        let p = Pose::at_cell(Cell::new(5, 4), 0.05, 0.3);
        assert_eq!(next_action(&f, &p), Ok(ActionCommand::TurnRight));
    }

    #[test]
    fn signals() {
        let f = corridor();
        assert_eq!(
            next_action(&f, &Pose::at_cell(Cell::new(34, 4), 0.05, 0.0)),
            Err(PlanSignal::AtGoal)
        );
        let mut mask = Grid::new(10, 10, true);
        for y in 0..10 {
            mask.set(Cell::new(5, y), false);
        }
        let f = distance_field(&mask, &[Cell::new(8, 4)], 0.05).unwrap();
        assert_eq!(
            next_action(&f, &Pose::at_cell(Cell::new(1, 1), 0.05, 0.0)),
            Err(PlanSignal::Stuck)
        );
    }

    #[test]
    fn wraps_angles() {
        assert!((angle_diff(0.1, 2.0 * PI - 0.1) - 0.2).abs() < 1e-12);
        assert!((angle_diff(PI, 0.0) - PI).abs() < 1e-12);
        assert!((angle_diff(0.0, PI) - PI).abs() < 1e-12);
    }
}
