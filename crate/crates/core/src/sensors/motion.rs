use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::noise::NoiseProfile;
use super::SensorRng;
use crate::gridworld::{Pose, Scene};

/// Nominal forward translation in meters.
pub const FORWARD_STEP: f64 = 0.25;
/// Nominal turn in radians (30°).
pub const TURN_ANGLE: f64 = PI / 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionCommand {
    Forward,
    TurnLeft,
    TurnRight,
    Stop,
}

impl ActionCommand {
    pub fn name(self) -> &'static str {
        match self {
            ActionCommand::Forward => "forward",
            ActionCommand::TurnLeft => "turn_left",
            ActionCommand::TurnRight => "turn_right",
            ActionCommand::Stop => "stop",
        }
    }
}

impl fmt::Display for ActionCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActionCommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" => Ok(ActionCommand::Forward),
            "turn_left" => Ok(ActionCommand::TurnLeft),
            "turn_right" => Ok(ActionCommand::TurnRight),
            "stop" => Ok(ActionCommand::Stop),
            other => Err(format!("unknown action {other:?}")),
        }
    }
}

/// Outcome of one executed action.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Motion {
    pub pose: Pose,
    pub collided: bool,
    /// Distance actually translated, meters.
    pub translation: f64,
}

/// Executes a movement command. `Stop` leaves the pose untouched.
///
/// Forward motion is swept in sub-steps no longer than one cell; the first
/// sub-step landing outside free space ends the motion at the previous one.
pub fn apply_action(
    scene: &Scene,
    pose: &Pose,
    cmd: ActionCommand,
    noise: &NoiseProfile,
    rng: &mut SensorRng,
) -> Motion {
    let unchanged = Motion {
        pose: *pose,
        collided: false,
        translation: 0.0,
    };
    match cmd {
        ActionCommand::Stop => unchanged,
        ActionCommand::TurnLeft | ActionCommand::TurnRight => {
            let sign = if cmd == ActionCommand::TurnLeft {
                1.0
            } else {
                -1.0
            };
            let mut angle = sign * TURN_ANGLE;
            if noise.actuation_rot_sigma > 0.0 {
                let n = Normal::new(0.0, noise.actuation_rot_sigma).expect("validated sigma");
                angle += n.sample(&mut rng.actuation);
            }
            Motion {
                pose: Pose::new(pose.x, pose.y, pose.heading + angle),
                ..unchanged
            }
        }
        ActionCommand::Forward => {
            let mut dist = FORWARD_STEP;
            if noise.actuation_trans_sigma > 0.0 {
                let n = Normal::new(0.0, noise.actuation_trans_sigma).expect("validated sigma");
                dist = (dist + n.sample(&mut rng.actuation)).max(0.0);
            }
            let h = scene.cell_size();
            let steps = (dist / h).ceil().max(1.0) as usize;
            let (dx, dy) = (pose.heading.cos(), pose.heading.sin());
            let mut reached = 0.0;
            let mut collided = false;
            for k in 1..=steps {
                let s = dist * k as f64 / steps as f64;
                if !scene.is_free_point(pose.x + dx * s, pose.y + dy * s) {
                    collided = true;
                    break;
                }
                reached = s;
            }
            Motion {
                pose: Pose {
                    x: pose.x + dx * reached,
                    y: pose.y + dy * reached,
                    heading: pose.heading,
                },
                collided,
                translation: reached,
            }
        }
    }
}
