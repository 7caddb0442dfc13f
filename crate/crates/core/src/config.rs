//! Run configuration read from TOML, with a provenance hash.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agentloop::{AgentConfig, EpisodeSpec};
use crate::gridworld::GenParams;
use crate::sensors::{NoiseError, NoiseProfile};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("parallelism must be at least 1")]
    Parallelism,
    #[error("budget {0} must be positive")]
    Budget(&'static str),
    #[error("referenced path {0} does not exist")]
    MissingFile(PathBuf),
}

/// Optional per-run budget overrides applied to every episode.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub max_steps: Option<usize>,
    pub max_collisions: Option<usize>,
    pub success_radius: Option<f64>,
}

impl Budgets {
    pub fn apply(&self, spec: &mut EpisodeSpec) {
        if let Some(v) = self.max_steps {
            spec.max_steps = v;
        }
        if let Some(v) = self.max_collisions {
            spec.max_collisions = v;
        }
        if let Some(v) = self.success_radius {
            spec.success_radius = v;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Scene files; relative paths resolve against the config file.
    pub scenes: Vec<PathBuf>,
    /// Parameters for generated homes.
    pub generator: GenParams,
    /// Name of a built-in noise profile: oracle, simlike or reallike.
    pub noise: String,
    pub budgets: Budgets,
    pub agent: AgentConfig,
    pub output_dir: PathBuf,
    pub parallelism: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scenes: Vec::new(),
            generator: GenParams::default(),
            noise: "simlike".into(),
            budgets: Budgets::default(),
            agent: AgentConfig::default(),
            output_dir: PathBuf::from("out"),
            parallelism: 1,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, validates and resolves scene paths relative to the file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for s in &mut cfg.scenes {
            if s.is_relative() {
                *s = base.join(&*s);
            }
        }
        for s in &cfg.scenes {
            if !s.exists() {
                return Err(ConfigError::MissingFile(s.clone()));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.noise_profile()?;
        if self.parallelism == 0 {
            return Err(ConfigError::Parallelism);
        }
        let b = &self.budgets;
        if b.max_steps == Some(0) {
            return Err(ConfigError::Budget("max_steps"));
        }
        if b.max_collisions == Some(0) {
            return Err(ConfigError::Budget("max_collisions"));
        }
        if b.success_radius.is_some_and(|r| !(r > 0.0)) {
            return Err(ConfigError::Budget("success_radius"));
        }
        Ok(())
    }

    pub fn noise_profile(&self) -> Result<NoiseProfile, NoiseError> {
        NoiseProfile::builtin(&self.noise)
    }

    /// SHA-256 over the canonical JSON of every field that can change a result.
    /// Output location and worker count are left out.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let map = v.as_object_mut().expect("struct");
        map.remove("output_dir");
        map.remove("parallelism");
        // serde_json maps are key-sorted, so this text is canonical.
        let text = serde_json::to_string(&v).expect("value serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
