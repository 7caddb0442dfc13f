use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::AgentConfig;
use crate::category::Category;
use crate::explore::{is_frontier, map_window, ExplorationPolicy, ExploreError, Mode};
use crate::grid::Cell;
use crate::gridworld::{Pose, Scene};
use crate::planner::{next_action_from, plan_to_goals, PlanSignal};
use crate::semmap::{denoise, goal_cells, MapError, SemanticMap, EXPLORED, OBSTACLE};
use crate::sensors::{ActionCommand, Observation};

/// The stop rule fires this far inside the success radius.
pub const STOP_MARGIN: f64 = 0.25;

/// Turns spent at a reached frontier before it is given up.
pub const SPIN_LIMIT: usize = 12;

/// Something other than a planned action happened this step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSignal {
    /// The planner found no descent from the pose cell.
    Stuck,
    NoFrontier,
    UnreachableFrontier,
    /// Turning in place at a reached frontier.
    Spin,
    /// A reached frontier was given up after a full turn.
    Abandoned,
}

/// What the agent decided in one step, for traces and diagnostics.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepInfo {
    pub mode: Option<Mode>,
    /// Planner goal in map cells: the exploration goal, or the nearest goal cell in exploit mode.
    pub goal: Option<Cell>,
    pub signal: Option<StepSignal>,
}

/// A controller mapping frames to actions.
pub trait Agent {
    fn act(&mut self, obs: &Observation) -> Result<(ActionCommand, StepInfo), MapError>;

    /// The obstacle map the agent planned on last, if it keeps one.
    fn planning_map(&self) -> Option<Cow<'_, SemanticMap>> {
        None
    }

    fn dilation(&self) -> usize {
        0
    }
}

/// Mutable state of the modular agent across one episode.
pub struct PipelineState {
    pub map: SemanticMap,
    /// Exploration goal and the number of steps it has been kept.
    pub cached_goal: Option<(Cell, usize)>,
    pub policy: Box<dyn ExplorationPolicy>,
    pub step: usize,
    pub collisions: usize,
    pub path_length: f64,
    pub stuck_incidents: usize,
    pub goal: Category,
    pub config: AgentConfig,
    pub success_radius: f64,
    spin: usize,
}

impl PipelineState {
    /// Fresh state for an agent starting at the cell center `start`.
    pub fn new(
        config: &AgentConfig,
        goal: Category,
        success_radius: f64,
        start: (f64, f64),
        policy_seed: u64,
    ) -> Result<Self, MapError> {
        Ok(Self {
            map: SemanticMap::new(Category::COUNT, config.map, start)?,
            cached_goal: None,
            policy: config.policy.build(config.planner.dilation, policy_seed),
            step: 0,
            collisions: 0,
            path_length: 0.0,
            stuck_incidents: 0,
            goal,
            config: config.clone(),
            success_radius,
            spin: 0,
        })
    }

    /// Marks the unexplored cells around a frontier the agent could not resolve.
    fn abandon(&mut self, g: Cell) {
        for dy in -2..=2 {
            for dx in -2..=2 {
                if let Some(c) = self
                    .map
                    .explored()
                    .cell_at(g.x as i64 + dx, g.y as i64 + dy)
                {
                    if !self.map.explored()[c] {
                        self.map.mark_cell(EXPLORED, c);
                    }
                }
            }
        }
    }
}

/// Writes a 3-cell-wide, 2-cell-deep obstacle block just ahead of a bumped agent.
fn mark_collision(map: &mut SemanticMap, pose: &Pose) {
    let h = map.cell_size();
    let (dx, dy) = (pose.heading.cos(), pose.heading.sin());
    for along in [1.0, 2.0] {
        for side in [-1.0, 0.0, 1.0] {
            let x = pose.x + dx * along * h - dy * side * h;
            let y = pose.y + dy * along * h + dx * side * h;
            if let Some(c) = map.cell_of(x, y) {
                if Some(c) != map.cell_of(pose.x, pose.y) {
                    map.mark_cell(OBSTACLE, c);
                    map.mark_cell(EXPLORED, c);
                }
            }
        }
    }
}

fn plan_map<'a>(map: &'a SemanticMap, config: &AgentConfig) -> Cow<'a, SemanticMap> {
    if config.denoise {
        Cow::Owned(denoise(map, &config.denoise_params))
    } else {
        Cow::Borrowed(map)
    }
}

/// One sense-map-plan-act step: integrates `obs` and returns the next action.
pub fn step_pipeline(
    state: &mut PipelineState,
    obs: &Observation,
) -> Result<(ActionCommand, StepInfo), MapError> {
    state.map.integrate(obs)?;
    if obs.collided {
        mark_collision(&mut state.map, &obs.pose);
    }
    state.step += 1;
    let plan_map = plan_map(&state.map, &state.config);
    let agent = plan_map
        .cell_of(obs.pose.x, obs.pose.y)
        .expect("integrate checked the pose");
    let dilation = state.config.planner.dilation;

    let goals = goal_cells(&plan_map, state.goal);
    let selected = if !goals.is_empty() {
        state.cached_goal = None;
        Ok((goals, Mode::Exploit))
    } else {
        match state.cached_goal {
            Some((g, age)) if age < state.policy.resample_period() && is_frontier(&plan_map, g) => {
                state.cached_goal = Some((g, age + 1));
                Ok((vec![g], Mode::Explore))
            }
            _ => state
                .policy
                .select_goal(&plan_map, agent, state.goal)
                .map(|g| {
                    state.cached_goal = Some((g, 1));
                    (vec![g], Mode::Explore)
                }),
        }
    };
    let (targets, mode) = match selected {
        Ok(t) => t,
        Err(e) => {
            state.cached_goal = None;
            let signal = match e {
                ExploreError::NoFrontier => StepSignal::NoFrontier,
                ExploreError::Unreachable => StepSignal::UnreachableFrontier,
            };
            let info = StepInfo {
                mode: Some(Mode::Explore),
                goal: None,
                signal: Some(signal),
            };
            return Ok((ActionCommand::TurnLeft, info));
        }
    };
    let mut info = StepInfo {
        mode: Some(mode),
        goal: targets.first().copied(),
        signal: None,
    };

    let window = map_window(&plan_map, &[agent], dilation);
    let planned = plan_to_goals(
        plan_map.obstacles(),
        window,
        agent,
        &targets,
        dilation,
        plan_map.cell_size(),
        plan_map.corner(),
        true,
        mode == Mode::Exploit,
    );
    drop(plan_map);

    let field = match planned {
        Ok(f) => f,
        Err(_) => {
            state.stuck_incidents += 1;
            state.cached_goal = None;
            info.signal = Some(StepSignal::Stuck);
            return Ok((ActionCommand::TurnLeft, info));
        }
    };
    if mode == Mode::Exploit {
        let here = field.value(agent);
        info.goal = targets
            .iter()
            .copied()
            .min_by(|a, b| a.euclidean(agent).total_cmp(&b.euclidean(agent)));
        if here <= state.success_radius - STOP_MARGIN {
            return Ok((ActionCommand::Stop, info));
        }
    }
    match next_action_from(
        &field.field,
        field.to_local(agent),
        &obs.pose,
        state.config.planner.lookahead,
    ) {
        Ok(a) => {
            state.spin = 0;
            Ok((a, info))
        }
        Err(PlanSignal::AtGoal) if mode == Mode::Exploit => Ok((ActionCommand::Stop, info)),
        Err(PlanSignal::AtGoal) => {
            state.spin += 1;
            info.signal = Some(StepSignal::Spin);
            if state.spin >= SPIN_LIMIT {
                if let Some(g) = targets.first() {
                    state.abandon(*g);
                }
                state.spin = 0;
                state.cached_goal = None;
                info.signal = Some(StepSignal::Abandoned);
            }
            Ok((ActionCommand::TurnLeft, info))
        }
        Err(PlanSignal::Stuck) => {
            state.stuck_incidents += 1;
            state.cached_goal = None;
            info.signal = Some(StepSignal::Stuck);
            Ok((ActionCommand::TurnLeft, info))
        }
    }
}

impl Agent for PipelineState {
    fn act(&mut self, obs: &Observation) -> Result<(ActionCommand, StepInfo), MapError> {
        step_pipeline(self, obs)
    }

    fn planning_map(&self) -> Option<Cow<'_, SemanticMap>> {
        Some(plan_map(&self.map, &self.config))
    }

    fn dilation(&self) -> usize {
        self.config.planner.dilation
    }
}

/// Scripted stand-in for a learned end-to-end policy: uniformly random moves, with
/// `Stop` drawn at probability `stop_probability`.
pub struct ScriptedAgent {
    pub rng: rand_chacha::ChaCha8Rng,
    pub stop_probability: f64,
}

impl Agent for ScriptedAgent {
    fn act(&mut self, _obs: &Observation) -> Result<(ActionCommand, StepInfo), MapError> {
        use rand::Rng;
        let a = if self.rng.random::<f64>() < self.stop_probability {
            ActionCommand::Stop
        } else {
            match self.rng.random_range(0..3) {
                0 => ActionCommand::Forward,
                1 => ActionCommand::TurnLeft,
                _ => ActionCommand::TurnRight,
            }
        };
        Ok((a, StepInfo::default()))
    }
}

/// Scene cell holding map cell `m`, for a map whose center sits on scene cell `start`.
pub fn map_to_scene(scene: &Scene, map: &SemanticMap, start: Cell, m: Cell) -> Option<Cell> {
    let c = map.center();
    scene.walls().cell_at(
        m.x as i64 - c.x as i64 + start.x as i64,
        m.y as i64 - c.y as i64 + start.y as i64,
    )
}
