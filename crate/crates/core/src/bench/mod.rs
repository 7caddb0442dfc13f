//! Benchmark harness: episode sets, batch runs, metrics, domain comparison and
//! failure attribution.

mod attribution;
mod episodes;
mod metrics;
mod results;
mod runner;
mod stats;
mod table;

pub use attribution::{
    attribute_failures, AttributionClass, AttributionReport, LadderCounts, Rerun,
    EXTENDED_MAX_STEPS,
};
pub use episodes::{
    generate_episodes, read_episodes, write_episodes, DistanceBin, EpisodeSet, EpisodeSetParams,
};
pub use metrics::{
    metrics_report, paired_report, spl, srcc, success_rate, GroupMetrics, MetricsReport,
    PairedReport,
};
pub use results::{
    read_results, read_trace, write_group_csv, write_results, write_summary, write_trace,
    ResultRecord, TraceEntry,
};
pub use runner::{compare_domains, ladder_rerun, run_batch, BatchOptions, Domain, SceneIndex};
pub use stats::{paired_t_test, PairedTTest};
pub use table::{import_table, TableEpisode};

use crate::agentloop::{EpisodeError, EpisodeResult};
use crate::category::Category;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("no results to score")]
    Empty,
    #[error("episode {episode_id}: shortest path length {value} must be positive")]
    NonpositiveShortest { episode_id: String, value: f64 },
    #[error("outcome vectors differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("episodes without a partner: {}", .0.join(", "))]
    Unpaired(Vec<String>),
    #[error("duplicate episode id {0}")]
    DuplicateEpisode(String),
    #[error("duplicate scene id {0}")]
    DuplicateScene(String),
    #[error("episode {0} not found in the episode set")]
    UnknownEpisode(String),
    #[error("no scenes given")]
    NoScenes,
    #[error("invalid distance bins: {0}")]
    BadBins(String),
    #[error("bin [{lo}, {hi}) m: reached {achieved} of {target} episodes within the retry budget")]
    InfeasibleBins {
        lo: f64,
        hi: f64,
        achieved: usize,
        target: usize,
    },
    #[error("scene {0:?} not found")]
    UnknownScene(String),
    #[error(
        "rerun of episode {0} with an unchanged configuration diverged from the recorded result"
    )]
    RerunMismatch(String),
    #[error("inconsistent ladder counts: {0}")]
    BadCounts(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Episode(#[from] EpisodeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What the metrics need from one scored episode.
pub trait Outcome {
    fn episode_id(&self) -> &str;
    fn home(&self) -> &str;
    fn goal(&self) -> Category;
    fn success(&self) -> bool;
    fn shortest_path_length(&self) -> f64;
    fn agent_path_length(&self) -> f64;
}

impl Outcome for EpisodeResult {
    fn episode_id(&self) -> &str {
        &self.episode_id
    }

    fn home(&self) -> &str {
        &self.scene_id
    }

    fn goal(&self) -> Category {
        self.goal
    }

    fn success(&self) -> bool {
        self.success
    }

    fn shortest_path_length(&self) -> f64 {
        self.shortest_path_length
    }

    fn agent_path_length(&self) -> f64 {
        self.agent_path_length
    }
}

impl<T: Outcome + ?Sized> Outcome for &T {
    fn episode_id(&self) -> &str {
        (**self).episode_id()
    }

    fn home(&self) -> &str {
        (**self).home()
    }

    fn goal(&self) -> Category {
        (**self).goal()
    }

    fn success(&self) -> bool {
        (**self).success()
    }

    fn shortest_path_length(&self) -> f64 {
        (**self).shortest_path_length()
    }

    fn agent_path_length(&self) -> f64 {
        (**self).agent_path_length()
    }
}
