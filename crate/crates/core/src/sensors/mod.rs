//! Simulated depth and segmentation sensing, noise, and discrete actuation.

mod camera;
mod motion;
mod noise;
pub mod raycast;

pub use camera::{observe, CameraError, CameraModel, Observation, SENTINEL_FAR};
pub use motion::{apply_action, ActionCommand, Motion, FORWARD_STEP, TURN_ANGLE};
pub use noise::{diagonal_confusion, NoiseError, NoiseProfile};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::category::Category;
use crate::gridworld::Scene;

/// Independent random streams for one episode.
///
/// Each consumer draws from its own stream, so turning one noise source on or off
/// never shifts the draws seen by another.
#[derive(Clone, Debug)]
pub struct SensorRng {
    pub depth: ChaCha8Rng,
    pub seg: ChaCha8Rng,
    pub actuation: ChaCha8Rng,
    pub policy: ChaCha8Rng,
}

impl SensorRng {
    pub fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(k);
            r
        };
        Self {
            depth: stream(1),
            seg: stream(2),
            actuation: stream(3),
            policy: stream(4),
        }
    }
}

/// Monte-Carlo estimate of P(reported category is correct | instance visible), per
/// category present in `scene`. Absent categories are `None`.
pub fn segmentation_quality(
    noise: &NoiseProfile,
    scene: &Scene,
    n_frames: usize,
    rng: &mut SensorRng,
) -> [Option<f64>; Category::COUNT] {
    let mut hits = [0usize; Category::COUNT];
    let mut trials = [0usize; Category::COUNT];
    for _ in 0..n_frames.max(1) {
        for obj in scene.objects() {
            let i = obj.category.index();
            trials[i] += 1;
            if noise.corrupt_category(obj.category, &mut rng.seg) == Some(obj.category) {
                hits[i] += 1;
            }
        }
    }
    std::array::from_fn(|i| (trials[i] > 0).then(|| hits[i] as f64 / trials[i] as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, Grid};
    use crate::gridworld::ObjectInstance;

    fn scene() -> Scene {
        let objects = Category::ALL
            .iter()
            .enumerate()
            .map(|(k, &c)| ObjectInstance {
                instance_id: k as u32,
                category: c,
                cells: vec![Cell::new(2 * k + 1, 3)],
            })
            .collect();
        Scene::new("q", 0.05, Grid::new(20, 8, false), objects, vec![]).unwrap()
    }

    #[test]
    fn perfect_segmentation_scores_one() {
        let q = segmentation_quality(
            &NoiseProfile::oracle(),
            &scene(),
            10,
            &mut SensorRng::new(1),
        );
        assert!(q.iter().all(|r| *r == Some(1.0)));
    }

    #[test]
    fn half_miss_rate() {
        let mut p = NoiseProfile::oracle();
        p.seg_miss = [0.5; Category::COUNT];
        let q = segmentation_quality(&p, &scene(), 10_000, &mut SensorRng::new(7));
        for r in q {
            assert!((r.unwrap() - 0.5).abs() <= 0.05);
        }
    }

    #[test]
    fn uniform_confusion_is_one_in_six() {
        let mut p = NoiseProfile::oracle();
        p.seg_confusion = diagonal_confusion(1.0 / 6.0);
        p.validate().unwrap();
        let q = segmentation_quality(&p, &scene(), 10_000, &mut SensorRng::new(7));
        for r in q {
            assert!((r.unwrap() - 1.0 / 6.0).abs() <= 0.02);
        }
    }

    #[test]
    fn streams_differ() {
        use rand::Rng;
        let mut r = SensorRng::new(5);
        let a: u64 = r.depth.random();
        let b: u64 = r.seg.random();
        assert_ne!(a, b);
        let mut r2 = SensorRng::new(5);
        assert_eq!(a, r2.depth.random::<u64>());
    }
}
