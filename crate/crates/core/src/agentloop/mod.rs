//! The modular navigation loop: sense, map, denoise, select a goal, plan, act.

mod diagnose;
mod pipeline;

pub use diagnose::goal_blocked_by_false_obstacles;
pub use pipeline::{
    map_to_scene, step_pipeline, Agent, PipelineState, ScriptedAgent, StepInfo, StepSignal,
    SPIN_LIMIT, STOP_MARGIN,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::category::Category;
use crate::explore::{Mode, PolicyConfig};
use crate::grid::Cell;
use crate::gridworld::{nearest_goal_instance, GoalError, Pose, Scene};
use crate::planner::PlannerParams;
use crate::semmap::{DenoiseParams, MapError, MapParams};
use crate::sensors::{apply_action, observe, ActionCommand, CameraModel, NoiseProfile, SensorRng};

/// Agent-side configuration: everything except the world and the noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub policy: PolicyConfig,
    pub map: MapParams,
    pub denoise: bool,
    pub denoise_params: DenoiseParams,
    pub planner: PlannerParams,
    pub camera: CameraModel,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            policy: PolicyConfig::default(),
            map: MapParams::default(),
            denoise: true,
            denoise_params: DenoiseParams::default(),
            planner: PlannerParams::default(),
            camera: CameraModel::default(),
        }
    }
}

impl AgentConfig {
    pub fn with_policy(policy: PolicyConfig) -> Self {
        Self {
            policy,
            ..Self::default()
        }
    }
}

/// One navigation trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSpec {
    pub episode_id: String,
    pub scene_id: String,
    pub start: Pose,
    #[serde(rename = "goal_category")]
    pub goal: Category,
    pub max_steps: usize,
    pub max_collisions: usize,
    /// Meters.
    pub success_radius: f64,
    pub seed: u64,
    /// Geodesic start-to-goal distance recorded at generation time, meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shortest_path_length: Option<f64>,
}

pub const DEFAULT_MAX_STEPS: usize = 500;
pub const DEFAULT_MAX_COLLISIONS: usize = 20;
pub const DEFAULT_SUCCESS_RADIUS: f64 = 1.0;

impl EpisodeSpec {
    pub fn new(
        episode_id: impl Into<String>,
        scene_id: impl Into<String>,
        start: Pose,
        goal: Category,
        seed: u64,
    ) -> Self {
        Self {
            episode_id: episode_id.into(),
            scene_id: scene_id.into(),
            start,
            goal,
            max_steps: DEFAULT_MAX_STEPS,
            max_collisions: DEFAULT_MAX_COLLISIONS,
            success_radius: DEFAULT_SUCCESS_RADIUS,
            seed,
            shortest_path_length: None,
        }
    }

    /// Checks budgets and that the goal exists and is reachable; returns the
    /// shortest path length in meters.
    pub fn validate(&self, scene: &Scene) -> Result<f64, EpisodeError> {
        if self.max_steps == 0 || self.max_collisions == 0 {
            return Err(EpisodeError::Budget);
        }
        if !(self.success_radius > 0.0 && self.success_radius.is_finite()) {
            return Err(EpisodeError::Budget);
        }
        if self.scene_id != scene.id() {
            return Err(EpisodeError::SceneMismatch {
                expected: self.scene_id.clone(),
                found: scene.id().to_string(),
            });
        }
        let (_, d) = nearest_goal_instance(scene, &self.start, self.goal)?;
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EpisodeError {
    #[error("step, collision and radius budgets must be positive")]
    Budget,
    #[error("episode is for scene {expected:?} but scene {found:?} was given")]
    SceneMismatch { expected: String, found: String },
    #[error(transparent)]
    Goal(#[from] GoalError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureClass {
    None,
    Timeout,
    CollisionBudget,
    FalseStop,
    /// The episode could not be run.
    Error,
}

/// Loop incidents kept for failure attribution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Diagnostics {
    pub stuck_incidents: usize,
    pub no_frontier_steps: usize,
    pub abandoned_frontiers: usize,
    /// First step the goal category appeared on the map.
    pub first_exploit_step: Option<usize>,
    /// Failed episodes only: the goal is cut off on the final planning map, and
    /// removing its false obstacles reconnects it.
    pub map_blocked: bool,
    pub error: Option<String>,
}

/// One step of a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub pose: Pose,
    pub action: ActionCommand,
    pub mode: Option<Mode>,
    /// Planner goal in map cells.
    pub goal: Option<(usize, usize)>,
    pub collisions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<StepSignal>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub episode_id: String,
    pub scene_id: String,
    #[serde(rename = "goal_category")]
    pub goal: Category,
    pub seed: u64,
    pub success: bool,
    pub agent_path_length: f64,
    /// NaN when the episode could not be run; written as null.
    #[serde(with = "nullable_f64")]
    pub shortest_path_length: f64,
    pub steps: usize,
    pub collisions: usize,
    pub stop_called: bool,
    #[serde(with = "nullable_f64")]
    pub terminal_distance_to_goal: f64,
    pub failure_class: FailureClass,
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceRecord>>,
}

impl EpisodeResult {
    /// Failed record for an episode that could not be run.
    pub fn errored(spec: &EpisodeSpec, err: &dyn std::fmt::Display) -> Self {
        Self {
            episode_id: spec.episode_id.clone(),
            scene_id: spec.scene_id.clone(),
            goal: spec.goal,
            seed: spec.seed,
            success: false,
            agent_path_length: 0.0,
            shortest_path_length: spec.shortest_path_length.unwrap_or(f64::NAN),
            steps: 0,
            collisions: 0,
            stop_called: false,
            terminal_distance_to_goal: f64::NAN,
            failure_class: FailureClass::Error,
            diagnostics: Diagnostics {
                error: Some(err.to_string()),
                ..Diagnostics::default()
            },
            trace: None,
        }
    }
}

/// A running episode, advanced one action at a time.
pub struct Episode<'a, A: Agent> {
    scene: &'a Scene,
    spec: &'a EpisodeSpec,
    noise: &'a NoiseProfile,
    camera: CameraModel,
    pub agent: A,
    pose: Pose,
    rng: SensorRng,
    start_cell: Cell,
    shortest: f64,
    steps: usize,
    collisions: usize,
    path_length: f64,
    stop_called: bool,
    bumped: bool,
    done: bool,
    diagnostics: Diagnostics,
    trace: Option<Vec<TraceRecord>>,
}

impl<'a> Episode<'a, PipelineState> {
    /// Episode driven by the modular pipeline.
    pub fn modular(
        scene: &'a Scene,
        spec: &'a EpisodeSpec,
        config: &AgentConfig,
        noise: &'a NoiseProfile,
        record_trace: bool,
    ) -> Result<Self, EpisodeError> {
        let start_cell =
            scene
                .cell_of(spec.start.x, spec.start.y)
                .ok_or(GoalError::InvalidStart {
                    x: spec.start.x,
                    y: spec.start.y,
                })?;
        let mut rng = SensorRng::new(spec.seed);
        let policy_seed = rng.policy.random::<u64>();
        let agent = PipelineState::new(
            config,
            spec.goal,
            spec.success_radius,
            scene.cell_center(start_cell),
            policy_seed,
        )?;
        Self::with_agent(scene, spec, agent, config.camera, noise, rng, record_trace)
    }
}

impl<'a, A: Agent> Episode<'a, A> {
    pub fn with_agent(
        scene: &'a Scene,
        spec: &'a EpisodeSpec,
        agent: A,
        camera: CameraModel,
        noise: &'a NoiseProfile,
        rng: SensorRng,
        record_trace: bool,
    ) -> Result<Self, EpisodeError> {
        let shortest = spec.validate(scene)?;
        let start_cell = scene
            .cell_of(spec.start.x, spec.start.y)
            .expect("validated start");
        Ok(Self {
            scene,
            spec,
            noise,
            camera,
            agent,
            pose: spec.start,
            rng,
            start_cell,
            shortest,
            steps: 0,
            collisions: 0,
            path_length: 0.0,
            stop_called: false,
            bumped: false,
            done: false,
            diagnostics: Diagnostics::default(),
            trace: record_trace.then(Vec::new),
        })
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn start_cell(&self) -> Cell {
        self.start_cell
    }

    /// Senses, acts and moves once. Returns the action taken, or `None` once done.
    pub fn step(&mut self) -> Result<Option<(ActionCommand, StepInfo)>, EpisodeError> {
        if self.done {
            return Ok(None);
        }
        let mut obs = observe(
            self.scene,
            &self.pose,
            &self.camera,
            self.noise,
            &mut self.rng,
            self.steps,
        );
        obs.collided = self.bumped;
        let (action, info) = self.agent.act(&obs)?;
        self.steps += 1;
        match info.signal {
            Some(StepSignal::Stuck) => self.diagnostics.stuck_incidents += 1,
            Some(StepSignal::NoFrontier) | Some(StepSignal::UnreachableFrontier) => {
                self.diagnostics.no_frontier_steps += 1
            }
            Some(StepSignal::Abandoned) => self.diagnostics.abandoned_frontiers += 1,
            _ => {}
        }
        if info.mode == Some(Mode::Exploit) && self.diagnostics.first_exploit_step.is_none() {
            self.diagnostics.first_exploit_step = Some(self.steps - 1);
        }
        if action == ActionCommand::Stop {
            self.stop_called = true;
            self.done = true;
        } else {
            let m = apply_action(self.scene, &self.pose, action, self.noise, &mut self.rng);
            self.pose = m.pose;
            self.path_length += m.translation;
            self.bumped = m.collided;
            if m.collided {
                self.collisions += 1;
            }
            if self.collisions > self.spec.max_collisions || self.steps >= self.spec.max_steps {
                self.done = true;
            }
        }
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceRecord {
                step: self.steps - 1,
                pose: self.pose,
                action,
                mode: info.mode,
                goal: info.goal.map(|c| (c.x, c.y)),
                collisions: self.collisions,
                signal: info.signal,
            });
        }
        Ok(Some((action, info)))
    }

    /// Runs to termination and scores the outcome against ground truth.
    pub fn run(mut self) -> Result<EpisodeResult, EpisodeError> {
        while self.step()?.is_some() {}
        Ok(self.finish())
    }

    /// Scores the episode as it stands.
    pub fn finish(mut self) -> EpisodeResult {
        let spec = self.spec;
        let terminal = self
            .scene
            .euclidean_to_category(self.pose.x, self.pose.y, spec.goal)
            .unwrap_or(f64::INFINITY);
        let success = self.stop_called && terminal <= spec.success_radius;
        let failure_class = if success {
            FailureClass::None
        } else if self.stop_called {
            FailureClass::FalseStop
        } else if self.collisions > spec.max_collisions {
            FailureClass::CollisionBudget
        } else {
            FailureClass::Timeout
        };
        if !success {
            if let Some(map) = self.agent.planning_map() {
                self.diagnostics.map_blocked = goal_blocked_by_false_obstacles(
                    self.scene,
                    &map,
                    self.start_cell,
                    &self.pose,
                    spec.goal,
                    self.agent.dilation(),
                );
            }
        }
        EpisodeResult {
            episode_id: spec.episode_id.clone(),
            scene_id: spec.scene_id.clone(),
            goal: spec.goal,
            seed: spec.seed,
            success,
            agent_path_length: self.path_length,
            shortest_path_length: self.shortest,
            steps: self.steps,
            collisions: self.collisions,
            stop_called: self.stop_called,
            terminal_distance_to_goal: terminal,
            failure_class,
            diagnostics: self.diagnostics,
            trace: self.trace,
        }
    }
}

/// Non-finite floats as JSON null, read back as NaN.
mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Simulates one episode of the modular agent to termination.
pub fn run_episode(
    scene: &Scene,
    spec: &EpisodeSpec,
    config: &AgentConfig,
    noise: &NoiseProfile,
) -> Result<EpisodeResult, EpisodeError> {
    Episode::modular(scene, spec, config, noise, false)?.run()
}

/// [`run_episode`] keeping the per-step trace.
pub fn run_episode_traced(
    scene: &Scene,
    spec: &EpisodeSpec,
    config: &AgentConfig,
    noise: &NoiseProfile,
) -> Result<EpisodeResult, EpisodeError> {
    Episode::modular(scene, spec, config, noise, true)?.run()
}
