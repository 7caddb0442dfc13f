use std::io::{BufRead, Write};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::agentloop::{
    EpisodeSpec, DEFAULT_MAX_COLLISIONS, DEFAULT_MAX_STEPS, DEFAULT_SUCCESS_RADIUS,
};
use crate::category::Category;
use crate::gridworld::{clear_cells, Pose, Scene};
use crate::planner::{distance_field, DistanceField};

/// Half-open shortest-path range `[lo, hi)`, meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBin {
    pub lo: f64,
    pub hi: f64,
}

impl DistanceBin {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, d: f64) -> bool {
        d >= self.lo && d < self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeSetParams {
    pub bins: Vec<DistanceBin>,
    pub max_steps: usize,
    pub max_collisions: usize,
    pub success_radius: f64,
    /// Starts keep at least this many cells from any wall or object.
    pub start_clearance: usize,
    /// Sampling attempts per episode before a bin is declared infeasible.
    pub attempts_per_episode: usize,
}

impl Default for EpisodeSetParams {
    fn default() -> Self {
        Self {
            bins: vec![
                DistanceBin::new(1.0, 5.0),
                DistanceBin::new(5.0, 10.0),
                DistanceBin::new(10.0, 15.0),
            ],
            max_steps: DEFAULT_MAX_STEPS,
            max_collisions: DEFAULT_MAX_COLLISIONS,
            success_radius: DEFAULT_SUCCESS_RADIUS,
            start_clearance: 6,
            attempts_per_episode: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeSet {
    pub episodes: Vec<EpisodeSpec>,
    pub bins: Vec<DistanceBin>,
    /// Requested episodes per bin.
    pub targets: Vec<usize>,
    /// Episodes per bin by recorded shortest path.
    pub achieved: Vec<usize>,
    /// Episodes per goal category, in [`Category::ALL`] order.
    pub category_counts: [usize; Category::COUNT],
}

/// Per-scene sampling tables: candidate start cells and a field to each category.
struct SceneTable<'a> {
    scene: &'a Scene,
    starts: Vec<crate::grid::Cell>,
    fields: Vec<(Category, DistanceField)>,
}

impl<'a> SceneTable<'a> {
    fn new(scene: &'a Scene, clearance: usize) -> Self {
        let mut fields = Vec::new();
        for c in scene.categories_present() {
            let cells: Vec<_> = scene
                .instances_of(c)
                .flat_map(|o| o.cells.iter().copied())
                .collect();
            let mut mask = scene.free().clone();
            for &g in &cells {
                mask.set(g, true);
            }
            if let Ok(f) = distance_field(&mask, &cells, scene.cell_size()) {
                fields.push((c, f));
            }
        }
        let starts = clear_cells(scene, clearance)
            .into_iter()
            .filter(|&c| scene.free()[c])
            .collect();
        Self {
            scene,
            starts,
            fields,
        }
    }
}

fn split_targets(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

/// Samples `n` episodes spread evenly over the distance bins.
///
/// Each attempt draws a scene and a start cell, then keeps the goal category whose
/// geodesic distance falls in the current bin and has been used least so far.
/// Early attempts hold out for one of the globally least used categories.
pub fn generate_episodes(
    scenes: &[Scene],
    n: usize,
    params: &EpisodeSetParams,
    seed: u64,
) -> Result<EpisodeSet, BenchError> {
    if scenes.is_empty() {
        return Err(BenchError::NoScenes);
    }
    if params.bins.is_empty() {
        return Err(BenchError::BadBins("no bins".into()));
    }
    for b in &params.bins {
        if !(b.lo.is_finite() && b.hi.is_finite() && b.lo < b.hi && b.lo >= 0.0) {
            return Err(BenchError::BadBins(format!(
                "[{}, {}) is not a valid range",
                b.lo, b.hi
            )));
        }
    }
    let tables: Vec<SceneTable> = scenes
        .iter()
        .map(|s| SceneTable::new(s, params.start_clearance))
        .collect();
    let targets = split_targets(n, params.bins.len());
    // Categories reachable at a distance inside each bin from some start.
    let feasible: Vec<Vec<Category>> = params
        .bins
        .iter()
        .map(|bin| {
            Category::ALL
                .into_iter()
                .filter(|&c| {
                    tables.iter().any(|t| {
                        t.fields.iter().any(|(k, f)| {
                            *k == c
                                && t.starts.iter().any(|&s| {
                                    let d = f.value(s);
                                    bin.contains(d) && d > params.success_radius
                                })
                        })
                    })
                })
                .collect()
        })
        .collect();
    // Bins take turns so category balancing sees all of them.
    let max_target = targets.iter().copied().max().unwrap_or(0);
    let t = &targets;
    let schedule: Vec<usize> = (0..max_target)
        .flat_map(|k| (0..t.len()).filter(move |&bi| k < t[bi]))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0usize; Category::COUNT];
    let mut achieved = vec![0; params.bins.len()];
    let mut episodes = Vec::with_capacity(n);
    for bi in schedule {
        let bin = &params.bins[bi];
        {
            let mut placed = false;
            // The first half of the attempts only accepts one of the least used
            // categories this bin can offer.
            let least = feasible[bi]
                .iter()
                .map(|c| counts[c.index()])
                .min()
                .unwrap_or(0);
            for attempt in 0..params.attempts_per_episode {
                let strict = attempt < params.attempts_per_episode / 2;
                let t = tables.choose(&mut rng).expect("non-empty");
                let Some(&start) = t.starts.choose(&mut rng) else {
                    continue;
                };
                let heading = rng.random_range(0.0..std::f64::consts::TAU);
                let ep_seed = rng.random::<u64>();
                let fits: Vec<Category> = t
                    .fields
                    .iter()
                    .filter(|(_, f)| {
                        let d = f.value(start);
                        bin.contains(d) && d > params.success_radius
                    })
                    .filter(|(c, _)| !strict || counts[c.index()] == least)
                    .map(|(c, _)| *c)
                    .collect();
                let Some(&goal) = fits.iter().min_by_key(|c| (counts[c.index()], c.index())) else {
                    continue;
                };
                let mut spec = EpisodeSpec::new(
                    format!("{}_{:05}", t.scene.id(), episodes.len()),
                    t.scene.id(),
                    Pose::at_cell(start, t.scene.cell_size(), heading),
                    goal,
                    ep_seed,
                );
                spec.max_steps = params.max_steps;
                spec.max_collisions = params.max_collisions;
                spec.success_radius = params.success_radius;
                let d = spec.validate(t.scene)?;
                if !bin.contains(d) || d <= params.success_radius {
                    continue;
                }
                spec.shortest_path_length = Some(d);
                counts[goal.index()] += 1;
                achieved[bi] += 1;
                episodes.push(spec);
                placed = true;
                break;
            }
            if !placed {
                return Err(BenchError::InfeasibleBins {
                    lo: bin.lo,
                    hi: bin.hi,
                    achieved: achieved[bi],
                    target: targets[bi],
                });
            }
        }
    }
    Ok(EpisodeSet {
        episodes,
        bins: params.bins.clone(),
        targets,
        achieved,
        category_counts: counts,
    })
}

/// One episode spec per line.
pub fn write_episodes<W: Write>(episodes: &[EpisodeSpec], mut out: W) -> std::io::Result<()> {
    for e in episodes {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads line-delimited episode specs; `name` labels parse errors. Blank lines are skipped.
pub fn read_episodes<R: BufRead>(input: R, name: &str) -> Result<Vec<EpisodeSpec>, BenchError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| BenchError::Parse {
            path: name.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
