//! Exploration-goal selection: nearest frontier, a prior-scored frontier, and a
//! random frontier baseline, all behind [`ExplorationPolicy`].

mod priors;

pub use priors::{CategoryPriors, PriorsError, DEFAULT_BETA, DEFAULT_LAMBDA};

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::category::Category;
use crate::grid::{Cell, Rect};
use crate::planner::{distance_field, distance_field_to_nearest, planning_mask, DistanceField};
use crate::semmap::{goal_cells, SemanticMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ExploreError {
    #[error("no frontier cells: the map is fully explored")]
    NoFrontier,
    #[error("no frontier cell is reachable from the agent")]
    Unreachable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exploit,
    Explore,
}

/// Explored non-obstacle cells 4-adjacent to at least one unexplored cell, row-major.
pub fn frontier_cells(map: &SemanticMap) -> Vec<Cell> {
    let explored = map.explored();
    let obstacles = map.obstacles();
    let b = map.bounds();
    let mut out = Vec::new();
    for c in b.cells() {
        if explored[c]
            && !obstacles[c]
            && explored
                .neighbors(c, &crate::grid::NEIGHBORS4)
                .any(|n| !explored[n])
        {
            out.push(c);
        }
    }
    out
}

pub fn is_frontier(map: &SemanticMap, c: Cell) -> bool {
    let e = map.explored();
    e[c] && !map.obstacles()[c] && e.neighbors(c, &crate::grid::NEIGHBORS4).any(|n| !e[n])
}

/// Planning window: explored bounds plus the given cells, padded past the dilation.
pub fn map_window(map: &SemanticMap, extra: &[Cell], dilation: usize) -> Rect {
    let mut r = map.bounds();
    for &c in extra {
        r.include(c);
    }
    r.expand(dilation + 2, map.size(), map.size())
}

/// Planning mask of `map` cropped to `window`.
fn agent_mask(
    map: &SemanticMap,
    agent: Cell,
    window: Rect,
    dilation: usize,
) -> crate::grid::BinaryGrid {
    let crop = map.obstacles().crop(window);
    planning_mask(
        &crop,
        Cell::new(agent.x - window.x0, agent.y - window.y0),
        &[],
        dilation,
    )
}

fn to_local(window: Rect, c: Cell) -> Cell {
    Cell::new(c.x - window.x0, c.y - window.y0)
}

fn to_global(window: Rect, c: Cell) -> Cell {
    Cell::new(c.x + window.x0, c.y + window.y0)
}

/// The frontier cell geodesically nearest the agent; ties go row-major.
pub fn frontier_goal(
    map: &SemanticMap,
    agent: Cell,
    dilation: usize,
) -> Result<Cell, ExploreError> {
    let frontier = frontier_cells(map);
    if frontier.is_empty() {
        return Err(ExploreError::NoFrontier);
    }
    let window = map_window(map, &[agent], dilation);
    let mask = agent_mask(map, agent, window, dilation);
    let local: Vec<Cell> = frontier.iter().map(|&f| to_local(window, f)).collect();
    let (_, best) =
        distance_field_to_nearest(&mask, &[to_local(window, agent)], map.cell_size(), &local)
            .map_err(|_| ExploreError::Unreachable)?;
    best.map(|c| to_global(window, c))
        .ok_or(ExploreError::Unreachable)
}

/// Full geodesic field from the agent plus the reachable frontier cells (global coordinates).
fn reachable_frontier(
    map: &SemanticMap,
    agent: Cell,
    dilation: usize,
) -> Result<(DistanceField, Rect, Vec<Cell>), ExploreError> {
    let frontier = frontier_cells(map);
    if frontier.is_empty() {
        return Err(ExploreError::NoFrontier);
    }
    let window = map_window(map, &[agent], dilation);
    let mask = agent_mask(map, agent, window, dilation);
    let field = distance_field(&mask, &[to_local(window, agent)], map.cell_size())
        .map_err(|_| ExploreError::Unreachable)?;
    let reachable: Vec<Cell> = frontier
        .into_iter()
        .filter(|&f| field.is_reachable(to_local(window, f)))
        .collect();
    if reachable.is_empty() {
        return Err(ExploreError::Unreachable);
    }
    Ok((field, window, reachable))
}

/// The frontier cell maximizing
/// `Σ_c affinity[goal][c]·exp(−d(f, nearest cat_c cell)/λ) − β·d_geo(agent, f)`.
/// Ties go row-major.
pub fn prior_goal(
    map: &SemanticMap,
    agent: Cell,
    goal: Category,
    priors: &CategoryPriors,
    dilation: usize,
) -> Result<Cell, ExploreError> {
    let (field, window, frontier) = reachable_frontier(map, agent, dilation)?;
    let h = map.cell_size();
    let mut bonus = vec![0.0; frontier.len()];
    for c in Category::ALL {
        let w = priors.affinity(goal, c);
        if w <= 0.0 {
            continue;
        }
        let cells = goal_cells(map, c);
        if cells.is_empty() {
            continue;
        }
        for (b, f) in bonus.iter_mut().zip(&frontier) {
            let d = cells
                .iter()
                .map(|&o| f.euclidean(o))
                .fold(f64::INFINITY, f64::min)
                * h;
            *b += w * (-d / priors.lambda).exp();
        }
    }
    let mut best: Option<(Cell, f64)> = None;
    for (&f, b) in frontier.iter().zip(bonus) {
        let score = b - priors.beta * field.value(to_local(window, f));
        // Frontier is row-major, so strict improvement keeps the earliest on ties.
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((f, score));
        }
    }
    Ok(best.expect("non-empty frontier").0)
}

/// Goal cells for the planner: every mapped cell of the goal category when any exist
/// (exploit), else the policy's exploration goal (explore).
pub fn goal_or_explore(
    map: &SemanticMap,
    agent: Cell,
    goal: Category,
    policy: &mut dyn ExplorationPolicy,
) -> Result<(Vec<Cell>, Mode), ExploreError> {
    let cells = goal_cells(map, goal);
    if !cells.is_empty() {
        return Ok((cells, Mode::Exploit));
    }
    policy
        .select_goal(map, agent, goal)
        .map(|c| (vec![c], Mode::Explore))
}

/// Chooses a long-term exploration goal on the map.
pub trait ExplorationPolicy: Send {
    fn name(&self) -> &'static str;
    fn select_goal(
        &mut self,
        map: &SemanticMap,
        agent: Cell,
        goal: Category,
    ) -> Result<Cell, ExploreError>;
    /// Steps a selected goal is kept before selecting again.
    fn resample_period(&self) -> usize;
}

pub struct FrontierPolicy {
    pub dilation: usize,
}

impl ExplorationPolicy for FrontierPolicy {
    fn name(&self) -> &'static str {
        "frontier"
    }

    fn select_goal(
        &mut self,
        map: &SemanticMap,
        agent: Cell,
        _goal: Category,
    ) -> Result<Cell, ExploreError> {
        frontier_goal(map, agent, self.dilation)
    }

    fn resample_period(&self) -> usize {
        1
    }
}

pub struct PriorPolicy {
    pub priors: CategoryPriors,
    pub dilation: usize,
    pub period: usize,
}

impl ExplorationPolicy for PriorPolicy {
    fn name(&self) -> &'static str {
        "prior"
    }

    fn select_goal(
        &mut self,
        map: &SemanticMap,
        agent: Cell,
        goal: Category,
    ) -> Result<Cell, ExploreError> {
        prior_goal(map, agent, goal, &self.priors, self.dilation)
    }

    fn resample_period(&self) -> usize {
        self.period
    }
}

/// Uniformly random reachable frontier cell.
pub struct RandomPolicy {
    pub dilation: usize,
    pub period: usize,
    pub rng: ChaCha8Rng,
}

impl ExplorationPolicy for RandomPolicy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn select_goal(
        &mut self,
        map: &SemanticMap,
        agent: Cell,
        _goal: Category,
    ) -> Result<Cell, ExploreError> {
        let (_, _, frontier) = reachable_frontier(map, agent, self.dilation)?;
        Ok(*frontier.choose(&mut self.rng).expect("non-empty frontier"))
    }

    fn resample_period(&self) -> usize {
        self.period
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Frontier,
    Prior,
    Random,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Frontier => "frontier",
            PolicyKind::Prior => "prior",
            PolicyKind::Random => "random",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frontier" => Ok(PolicyKind::Frontier),
            "prior" => Ok(PolicyKind::Prior),
            "random" => Ok(PolicyKind::Random),
            other => Err(format!(
                "unknown policy {other:?} (expected frontier, prior or random)"
            )),
        }
    }
}

/// Policy selection plus its parameters, as read from config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub priors: CategoryPriors,
    /// Steps between goal selections for the prior and random policies.
    pub resample_period: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            kind: PolicyKind::Frontier,
            priors: CategoryPriors::default(),
            resample_period: 25,
        }
    }
}

impl PolicyConfig {
    pub fn frontier() -> Self {
        Self::default()
    }

    pub fn prior() -> Self {
        Self {
            kind: PolicyKind::Prior,
            ..Self::default()
        }
    }

    /// Instantiates the policy for one episode. `seed` feeds the random policy only.
    pub fn build(&self, dilation: usize, seed: u64) -> Box<dyn ExplorationPolicy> {
        let period = self.resample_period.max(1);
        match self.kind {
            PolicyKind::Frontier => Box::new(FrontierPolicy { dilation }),
            PolicyKind::Prior => Box::new(PriorPolicy {
                priors: self.priors.clone(),
                dilation,
                period,
            }),
            PolicyKind::Random => Box::new(RandomPolicy {
                dilation,
                period,
                rng: ChaCha8Rng::seed_from_u64(seed),
            }),
        }
    }
}

#[cfg(test)]
mod tests;
