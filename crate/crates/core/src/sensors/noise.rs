//! Sensor and actuation noise profiles.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::category::Category;

const C: usize = Category::COUNT;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NoiseError {
    #[error("noise profile field {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("unknown noise profile {0:?}")]
    UnknownProfile(String),
}

/// Depth, segmentation and actuation corruption applied by the simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseProfile {
    /// Std of the multiplicative depth speckle: `d ← d·(1 + N(0, σ))`.
    pub depth_sigma: f64,
    /// Per-ray probability that depth is lost.
    pub depth_dropout: f64,
    pub reflections_enabled: bool,
    /// Per-category probability that an object instance goes undetected in a frame.
    pub seg_miss: [f64; C],
    /// Row-stochastic: `seg_confusion[true][reported]`.
    pub seg_confusion: [[f64; C]; C],
    pub actuation_trans_sigma: f64,
    pub actuation_rot_sigma: f64,
}

impl Default for NoiseProfile {
    fn default() -> Self {
        Self::oracle()
    }
}

fn identity() -> [[f64; C]; C] {
    let mut m = [[0.0; C]; C];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

/// Confusion matrix keeping `keep` on the diagonal and spreading the rest uniformly.
pub fn diagonal_confusion(keep: f64) -> [[f64; C]; C] {
    let off = (1.0 - keep) / (C as f64 - 1.0);
    let mut m = [[off; C]; C];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = keep;
    }
    m
}

impl NoiseProfile {
    /// Perfect sensing and actuation.
    pub fn oracle() -> Self {
        Self {
            depth_sigma: 0.0,
            depth_dropout: 0.0,
            reflections_enabled: false,
            seg_miss: [0.0; C],
            seg_confusion: identity(),
            actuation_trans_sigma: 0.0,
            actuation_rot_sigma: 0.0,
        }
    }

    /// Perfect depth, imperfect segmentation.
    pub fn simlike() -> Self {
        Self {
            seg_miss: [0.15; C],
            seg_confusion: diagonal_confusion(0.9),
            ..Self::oracle()
        }
    }

    /// Speckled depth with dropouts and reflections, mostly reliable segmentation.
    pub fn reallike() -> Self {
        Self {
            depth_sigma: 0.02,
            depth_dropout: 0.01,
            reflections_enabled: true,
            seg_miss: [0.05; C],
            seg_confusion: diagonal_confusion(0.99),
            ..Self::oracle()
        }
    }

    pub fn builtin(name: &str) -> Result<Self, NoiseError> {
        match name {
            "oracle" | "none" => Ok(Self::oracle()),
            "simlike" => Ok(Self::simlike()),
            "reallike" => Ok(Self::reallike()),
            other => Err(NoiseError::UnknownProfile(other.to_string())),
        }
    }

    /// Same profile with segmentation replaced by ground truth.
    pub fn with_oracle_segmentation(&self) -> Self {
        Self {
            seg_miss: [0.0; C],
            seg_confusion: identity(),
            ..self.clone()
        }
    }

    pub fn has_segmentation_noise(&self) -> bool {
        self.seg_miss.iter().any(|&p| p > 0.0) || self.seg_confusion != identity()
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        let prob = |field: String, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(NoiseError::Invalid {
                    field,
                    message: format!("probability {p} outside [0, 1]"),
                })
            }
        };
        let sigma = |field: &str, s: f64| {
            if s >= 0.0 && s.is_finite() {
                Ok(())
            } else {
                Err(NoiseError::Invalid {
                    field: field.to_string(),
                    message: format!("sigma {s} must be finite and >= 0"),
                })
            }
        };
        sigma("depth_sigma", self.depth_sigma)?;
        sigma("actuation_trans_sigma", self.actuation_trans_sigma)?;
        sigma("actuation_rot_sigma", self.actuation_rot_sigma)?;
        prob("depth_dropout".into(), self.depth_dropout)?;
        for (i, &p) in self.seg_miss.iter().enumerate() {
            prob(format!("seg_miss[{i}]"), p)?;
        }
        for (i, row) in self.seg_confusion.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                prob(format!("seg_confusion[{i}][{j}]"), p)?;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(NoiseError::Invalid {
                    field: format!("seg_confusion[{i}]"),
                    message: format!("row sums to {sum}, expected 1"),
                });
            }
        }
        Ok(())
    }

    /// Segmentation outcome for one detected instance: miss, then confusion.
    ///
    /// Draws exactly one uniform for the miss test and one for the confusion row
    /// whenever the respective noise is active, so streams stay aligned.
    pub fn corrupt_category<R: Rng + ?Sized>(
        &self,
        truth: Category,
        rng: &mut R,
    ) -> Option<Category> {
        let i = truth.index();
        let miss = self.seg_miss[i];
        if miss > 0.0 && rng.random::<f64>() < miss {
            return None;
        }
        let row = &self.seg_confusion[i];
        if row[i] >= 1.0 {
            return Some(truth);
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (j, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return Category::from_index(j);
            }
        }
        // Rounding left u above the cumulative sum; take the last nonzero entry.
        row.iter()
            .rposition(|&p| p > 0.0)
            .and_then(Category::from_index)
    }
}
