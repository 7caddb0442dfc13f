use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::attribution::{Rerun, EXTENDED_MAX_STEPS};
use super::{paired_report, BenchError, PairedReport};
use crate::agentloop::{run_episode, run_episode_traced, AgentConfig, EpisodeResult, EpisodeSpec};
use crate::gridworld::Scene;
use crate::sensors::NoiseProfile;

/// Scenes by id.
#[derive(Clone, Debug, Default)]
pub struct SceneIndex {
    scenes: HashMap<String, Scene>,
}

impl SceneIndex {
    pub fn new(scenes: impl IntoIterator<Item = Scene>) -> Result<Self, BenchError> {
        let mut index = Self::default();
        for s in scenes {
            let id = s.id().to_string();
            if index.scenes.insert(id.clone(), s).is_some() {
                return Err(BenchError::DuplicateScene(id));
            }
        }
        Ok(index)
    }

    pub fn get(&self, id: &str) -> Option<&Scene> {
        self.scenes.get(id)
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BatchOptions {
    /// Worker threads; 0 is treated as 1.
    pub parallelism: usize,
    pub trace: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            parallelism: 1,
            trace: false,
        }
    }
}

fn run_one(
    scenes: &SceneIndex,
    spec: &EpisodeSpec,
    config: &AgentConfig,
    noise: &NoiseProfile,
    trace: bool,
) -> EpisodeResult {
    let Some(scene) = scenes.get(&spec.scene_id) else {
        return EpisodeResult::errored(spec, &BenchError::UnknownScene(spec.scene_id.clone()));
    };
    let run = if trace {
        run_episode_traced
    } else {
        run_episode
    };
    run(scene, spec, config, noise).unwrap_or_else(|e| EpisodeResult::errored(spec, &e))
}

/// Runs every episode and returns the results sorted by episode id.
///
/// An episode that cannot be run is recorded as an errored failure; only a
/// duplicate episode id or a bad worker count aborts the batch.
pub fn run_batch(
    scenes: &SceneIndex,
    episodes: &[EpisodeSpec],
    config: &AgentConfig,
    noise: &NoiseProfile,
    opts: &BatchOptions,
) -> Result<Vec<EpisodeResult>, BenchError> {
    let mut seen = HashSet::new();
    for e in episodes {
        if !seen.insert(e.episode_id.as_str()) {
            return Err(BenchError::DuplicateEpisode(e.episode_id.clone()));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallelism.max(1))
        .build()
        .map_err(|e| BenchError::Io(std::io::Error::other(e)))?;
    let mut results: Vec<EpisodeResult> = pool.install(|| {
        episodes
            .par_iter()
            .map(|spec| run_one(scenes, spec, config, noise, opts.trace))
            .collect()
    });
    results.sort_by(|a, b| a.episode_id.cmp(&b.episode_id));
    Ok(results)
}

/// One side of a domain comparison.
#[derive(Clone, Copy, Debug)]
pub struct Domain<'a> {
    pub config: &'a AgentConfig,
    pub noise: &'a NoiseProfile,
}

/// Runs the same episodes under two configurations and pairs the outcomes.
pub fn compare_domains(
    scenes: &SceneIndex,
    episodes: &[EpisodeSpec],
    a: Domain,
    b: Domain,
    opts: &BatchOptions,
) -> Result<(Vec<EpisodeResult>, Vec<EpisodeResult>, PairedReport), BenchError> {
    let ra = run_batch(scenes, episodes, a.config, a.noise, opts)?;
    let rb = run_batch(scenes, episodes, b.config, b.noise, opts)?;
    let report = paired_report(&ra, &rb)?;
    Ok((ra, rb, report))
}

/// Rerun callback for [`super::attribute_failures`]: looks each result up in
/// `episodes` and replays it under the requested condition.
pub fn ladder_rerun<'a>(
    scenes: &'a SceneIndex,
    episodes: &'a [EpisodeSpec],
    config: &'a AgentConfig,
    noise: &'a NoiseProfile,
) -> impl FnMut(&EpisodeResult, Rerun) -> Result<EpisodeResult, BenchError> + 'a {
    let by_id: HashMap<&str, &EpisodeSpec> = episodes
        .iter()
        .map(|e| (e.episode_id.as_str(), e))
        .collect();
    let oracle = noise.with_oracle_segmentation();
    move |r, how| {
        let spec = by_id
            .get(r.episode_id.as_str())
            .ok_or_else(|| BenchError::UnknownEpisode(r.episode_id.clone()))?;
        if spec.seed != r.seed {
            return Err(BenchError::RerunMismatch(r.episode_id.clone()));
        }
        let mut spec = (*spec).clone();
        let noise = match how {
            Rerun::Unchanged => noise,
            Rerun::OracleSegmentation => &oracle,
            Rerun::OracleSegmentationExtended => {
                spec.max_steps = EXTENDED_MAX_STEPS;
                &oracle
            }
        };
        Ok(run_one(scenes, &spec, config, noise, false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{generate_episodes, EpisodeSetParams};
    use crate::gridworld::{generate_home, GenParams, Pose};
    use crate::Category;

    fn small_batch() -> (SceneIndex, Vec<EpisodeSpec>) {
        let scenes: Vec<Scene> = (0..2)
            .map(|s| generate_home(s, &GenParams::default()).unwrap())
            .collect();
        let params = EpisodeSetParams {
            max_steps: 150,
            ..Default::default()
        };
        let set = generate_episodes(&scenes, 6, &params, 2).unwrap();
        (SceneIndex::new(scenes).unwrap(), set.episodes)
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let (scenes, mut eps) = small_batch();
        let mut bad = EpisodeSpec::new(
            "zz_missing",
            "nowhere",
            Pose::new(0.0, 0.0, 0.0),
            Category::Bed,
            1,
        );
        bad.shortest_path_length = Some(3.0);
        eps.push(bad);
        let cfg = AgentConfig::default();
        let noise = NoiseProfile::simlike();
        let one = run_batch(&scenes, &eps, &cfg, &noise, &BatchOptions::default()).unwrap();
        eps.reverse();
        let opts = BatchOptions {
            parallelism: 3,
            trace: false,
        };
        let three = run_batch(&scenes, &eps, &cfg, &noise, &opts).unwrap();
        // NaN distances defeat ==; compare the serialized records.
        let json = |v: &[EpisodeResult]| serde_json::to_string(v).unwrap();
        assert_eq!(json(&one), json(&three));
        let last = one.last().unwrap();
        assert_eq!(last.failure_class, crate::agentloop::FailureClass::Error);
        assert!(last.diagnostics.error.as_ref().unwrap().contains("nowhere"));
    }

    #[test]
    fn duplicate_ids_abort() {
        let (scenes, mut eps) = small_batch();
        eps.push(eps[0].clone());
        let r = run_batch(
            &scenes,
            &eps,
            &AgentConfig::default(),
            &NoiseProfile::oracle(),
            &BatchOptions::default(),
        );
        assert!(matches!(r, Err(BenchError::DuplicateEpisode(_))));
    }

    #[test]
    fn identical_domains_correlate_perfectly() {
        let (scenes, eps) = small_batch();
        let cfg = AgentConfig::default();
        let noise = NoiseProfile::reallike();
        let d = Domain {
            config: &cfg,
            noise: &noise,
        };
        let (a, b, rep) = compare_domains(&scenes, &eps, d, d, &BatchOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(rep.srcc, 1.0);
        assert_eq!(rep.sr_a, rep.sr_b);
    }
}
