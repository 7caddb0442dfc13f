use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::category::Category;
use crate::gridworld::DEFAULT_AFFINITY;

const C: usize = Category::COUNT;

pub const DEFAULT_LAMBDA: f64 = 2.0;
pub const DEFAULT_BETA: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PriorsError {
    #[error("unknown category {0:?} in affinity table")]
    UnknownCategory(String),
    #[error("affinity[{goal}][{seen}] = {value} must be finite and >= 0")]
    BadWeight {
        goal: String,
        seen: String,
        value: f64,
    },
    #[error("{0} must be positive and finite")]
    BadScale(&'static str),
}

/// Weights linking a goal category to categories already on the map, plus the
/// distance scales of the prior score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPriors", into = "RawPriors")]
pub struct CategoryPriors {
    affinity: [[f64; C]; C],
    /// Decay length of the object bonus, meters.
    pub lambda: f64,
    /// Cost per meter of geodesic distance to the frontier.
    pub beta: f64,
}

impl Default for CategoryPriors {
    fn default() -> Self {
        Self::from_room_lift(&DEFAULT_AFFINITY, DEFAULT_LAMBDA, DEFAULT_BETA)
            .expect("default table is valid")
    }
}

impl CategoryPriors {
    pub fn new(affinity: [[f64; C]; C], lambda: f64, beta: f64) -> Result<Self, PriorsError> {
        for (g, row) in affinity.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(PriorsError::BadWeight {
                        goal: Category::ALL[g].name().into(),
                        seen: Category::ALL[c].name().into(),
                        value: v,
                    });
                }
            }
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(PriorsError::BadScale("lambda"));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(PriorsError::BadScale("beta"));
        }
        Ok(Self {
            affinity,
            lambda,
            beta,
        })
    }

    /// All-zero affinities: the score reduces to `−β·d_geo`.
    pub fn zero(beta: f64) -> Self {
        Self {
            affinity: [[0.0; C]; C],
            lambda: 2.0,
            beta,
        }
    }

    /// Weights from a room-type placement table (rows: room types, equally likely;
    /// entries: probability a room of that type holds the category). The weight for
    /// `(goal, seen)` is how much seeing `seen` in a room raises the probability that
    /// `goal` is in the same room, clipped at zero. The diagonal is 1.
    pub fn from_room_lift(rooms: &[[f64; C]], lambda: f64, beta: f64) -> Result<Self, PriorsError> {
        let n = rooms.len().max(1) as f64;
        let mut a = [[0.0; C]; C];
        for g in 0..C {
            let base: f64 = rooms.iter().map(|r| r[g]).sum::<f64>() / n;
            for c in 0..C {
                let seen: f64 = rooms.iter().map(|r| r[c]).sum();
                let joint: f64 = rooms.iter().map(|r| r[g] * r[c]).sum();
                if seen > 0.0 {
                    a[g][c] = (joint / seen - base).max(0.0);
                }
            }
            a[g][g] = 1.0;
        }
        Self::new(a, lambda, beta)
    }

    pub fn affinity(&self, goal: Category, seen: Category) -> f64 {
        self.affinity[goal.index()][seen.index()]
    }

    pub fn matrix(&self) -> &[[f64; C]; C] {
        &self.affinity
    }

    /// Affinities and β multiplied by `k`; λ unchanged.
    pub fn scaled(&self, k: f64) -> Self {
        let mut s = self.clone();
        for row in s.affinity.iter_mut() {
            for v in row.iter_mut() {
                *v *= k;
            }
        }
        s.beta *= k;
        s
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPriors {
    #[serde(default)]
    affinity: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default = "default_lambda")]
    lambda: f64,
    #[serde(default = "default_beta")]
    beta: f64,
}

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

impl TryFrom<RawPriors> for CategoryPriors {
    type Error = PriorsError;

    fn try_from(raw: RawPriors) -> Result<Self, Self::Error> {
        // Rows absent from the table keep the shipped defaults.
        let mut a = *CategoryPriors::default().matrix();
        for (g, row) in &raw.affinity {
            let gi: Category = g
                .parse()
                .map_err(|_| PriorsError::UnknownCategory(g.clone()))?;
            a[gi.index()] = [0.0; C];
            for (c, &v) in row {
                let ci: Category = c
                    .parse()
                    .map_err(|_| PriorsError::UnknownCategory(c.clone()))?;
                a[gi.index()][ci.index()] = v;
            }
        }
        CategoryPriors::new(a, raw.lambda, raw.beta)
    }
}

impl From<CategoryPriors> for RawPriors {
    fn from(p: CategoryPriors) -> Self {
        let mut affinity = BTreeMap::new();
        for g in Category::ALL {
            let mut row = BTreeMap::new();
            for c in Category::ALL {
                let v = p.affinity(g, c);
                if v != 0.0 {
                    row.insert(c.name().to_string(), v);
                }
            }
            affinity.insert(g.name().to_string(), row);
        }
        RawPriors {
            affinity,
            lambda: p.lambda,
            beta: p.beta,
        }
    }
}
