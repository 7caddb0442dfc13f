use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::agentloop::{EpisodeResult, FailureClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributionClass {
    SegmentationError,
    ExplorationFailure,
    MapNoiseError,
    PlanningError,
    /// The agent reached an unannotated instance. Accepted in imported counts only;
    /// simulated scenes are annotated exhaustively.
    AnnotationError,
    Other,
}

impl AttributionClass {
    pub const ALL: [AttributionClass; 6] = [
        AttributionClass::SegmentationError,
        AttributionClass::ExplorationFailure,
        AttributionClass::MapNoiseError,
        AttributionClass::PlanningError,
        AttributionClass::AnnotationError,
        AttributionClass::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttributionClass::SegmentationError => "segmentation_error",
            AttributionClass::ExplorationFailure => "exploration_failure",
            AttributionClass::MapNoiseError => "map_noise_error",
            AttributionClass::PlanningError => "planning_error",
            AttributionClass::AnnotationError => "annotation_error",
            AttributionClass::Other => "other",
        }
    }
}

/// Rerun conditions of the attribution ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rerun {
    /// Same configuration; must reproduce the recorded result.
    Unchanged,
    /// Ground-truth segmentation, same step budget.
    OracleSegmentation,
    /// Ground-truth segmentation and a 2000-step budget.
    OracleSegmentationExtended,
}

pub const EXTENDED_MAX_STEPS: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub total: usize,
    pub successes: usize,
    pub failures: usize,
    /// Every class, zero counts included.
    pub counts: BTreeMap<AttributionClass, usize>,
    /// Class counts over `total`.
    pub proportions: BTreeMap<AttributionClass, f64>,
    /// Successes plus annotation errors, over `total`.
    pub success_proportion: f64,
    /// Class of each attributed episode.
    pub episodes: BTreeMap<String, AttributionClass>,
}

impl AttributionReport {
    fn from_counts(
        total: usize,
        successes: usize,
        counts: BTreeMap<AttributionClass, usize>,
        episodes: BTreeMap<String, AttributionClass>,
    ) -> Self {
        let mut full: BTreeMap<AttributionClass, usize> =
            AttributionClass::ALL.iter().map(|&c| (c, 0)).collect();
        full.extend(counts);
        let frac = |k: usize| {
            if total == 0 {
                0.0
            } else {
                k as f64 / total as f64
            }
        };
        let proportions = full.iter().map(|(&c, &k)| (c, frac(k))).collect();
        let annotation = full[&AttributionClass::AnnotationError];
        Self {
            total,
            successes,
            failures: full.values().sum(),
            success_proportion: frac(successes + annotation),
            counts: full,
            proportions,
            episodes,
        }
    }

    pub fn count(&self, c: AttributionClass) -> usize {
        self.counts.get(&c).copied().unwrap_or(0)
    }

    pub fn proportion(&self, c: AttributionClass) -> f64 {
        self.proportions.get(&c).copied().unwrap_or(0.0)
    }
}

/// Successful-episode counts after each ladder rung, plus manually classified
/// remainders, as published for a benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderCounts {
    pub total: usize,
    pub base_successes: usize,
    pub oracle_segmentation_successes: usize,
    pub extended_successes: usize,
    pub planning: usize,
    pub annotation: usize,
}

impl LadderCounts {
    pub fn report(&self) -> Result<AttributionReport, BenchError> {
        let c = self;
        if !(c.base_successes <= c.oracle_segmentation_successes
            && c.oracle_segmentation_successes <= c.extended_successes
            && c.extended_successes <= c.total)
        {
            return Err(BenchError::BadCounts(
                "rung successes must be nondecreasing and at most the total".into(),
            ));
        }
        let remaining = c.total - c.extended_successes;
        if c.planning + c.annotation > remaining {
            return Err(BenchError::BadCounts(format!(
                "{} planning + {} annotation exceed the {remaining} remaining failures",
                c.planning, c.annotation
            )));
        }
        let counts = BTreeMap::from([
            (
                AttributionClass::SegmentationError,
                c.oracle_segmentation_successes - c.base_successes,
            ),
            (
                AttributionClass::ExplorationFailure,
                c.extended_successes - c.oracle_segmentation_successes,
            ),
            (AttributionClass::PlanningError, c.planning),
            (AttributionClass::AnnotationError, c.annotation),
            (
                AttributionClass::Other,
                remaining - c.planning - c.annotation,
            ),
        ]);
        Ok(AttributionReport::from_counts(
            c.total,
            c.base_successes,
            counts,
            BTreeMap::new(),
        ))
    }
}

fn without_trace(r: &EpisodeResult) -> EpisodeResult {
    EpisodeResult {
        trace: None,
        ..r.clone()
    }
}

/// Runs the counterfactual ladder over every failed result.
///
/// Each failure is first rerun unchanged and must reproduce exactly. Then with
/// oracle segmentation (a success there is a segmentation error), then also with a
/// 2000-step budget (exploration failure). What still fails is a map-noise error
/// if the final map cut the goal off with false obstacles, a planning error if the
/// planner reported being stuck, else other.
pub fn attribute_failures<F>(
    results: &[EpisodeResult],
    mut rerun: F,
) -> Result<AttributionReport, BenchError>
where
    F: FnMut(&EpisodeResult, Rerun) -> Result<EpisodeResult, BenchError>,
{
    let mut failed: Vec<&EpisodeResult> = results.iter().filter(|r| !r.success).collect();
    failed.sort_by(|a, b| a.episode_id.cmp(&b.episode_id));
    let mut counts: BTreeMap<AttributionClass, usize> = BTreeMap::new();
    let mut episodes = BTreeMap::new();
    for r in failed {
        let class = if r.failure_class == FailureClass::Error {
            AttributionClass::Other
        } else {
            if without_trace(&rerun(r, Rerun::Unchanged)?) != without_trace(r) {
                return Err(BenchError::RerunMismatch(r.episode_id.clone()));
            }
            if rerun(r, Rerun::OracleSegmentation)?.success {
                AttributionClass::SegmentationError
            } else {
                let last = rerun(r, Rerun::OracleSegmentationExtended)?;
                if last.success {
                    AttributionClass::ExplorationFailure
                } else if last.diagnostics.map_blocked {
                    AttributionClass::MapNoiseError
                } else if last.diagnostics.stuck_incidents > 0 {
                    AttributionClass::PlanningError
                } else {
                    AttributionClass::Other
                }
            }
        };
        *counts.entry(class).or_default() += 1;
        episodes.insert(r.episode_id.clone(), class);
    }
    let successes = results.iter().filter(|r| r.success).count();
    Ok(AttributionReport::from_counts(
        results.len(),
        successes,
        counts,
        episodes,
    ))
}
