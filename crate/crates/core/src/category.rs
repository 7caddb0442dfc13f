//! The closed set of goal object categories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Goal object category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Chair,
    Couch,
    PottedPlant,
    Toilet,
    Tv,
    Bed,
}

impl Category {
    pub const COUNT: usize = 6;

    pub const ALL: [Category; Category::COUNT] = [
        Category::Chair,
        Category::Couch,
        Category::PottedPlant,
        Category::Toilet,
        Category::Tv,
        Category::Bed,
    ];

    /// Dense index in `0..COUNT`, used for map channels and matrices.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Category> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Chair => "chair",
            Category::Couch => "couch",
            Category::PottedPlant => "potted plant",
            Category::Toilet => "toilet",
            Category::Tv => "tv",
            Category::Bed => "bed",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown category {0:?} (expected one of: chair, couch, potted plant, toilet, tv, bed)")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace(['_', '-'], " ");
        match norm.as_str() {
            "chair" => Ok(Category::Chair),
            "couch" | "sofa" => Ok(Category::Couch),
            "potted plant" | "plant" => Ok(Category::PottedPlant),
            "toilet" => Ok(Category::Toilet),
            "tv" | "tv monitor" => Ok(Category::Tv),
            "bed" => Ok(Category::Bed),
            _ => Err(UnknownCategory(s.to_string())),
        }
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
