use serde::{Deserialize, Serialize};

use super::noise::NoiseProfile;
use super::raycast::{cast_ray, reflect, Hit};
use super::SensorRng;
use crate::category::Category;
use crate::gridworld::{Pose, ReflectionMode, Scene};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Depth value for rays that returned nothing within range.
pub const SENTINEL_FAR: f64 = f64::INFINITY;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraModel {
    /// Horizontal field of view in degrees.
    pub hfov: f64,
    pub n_rays: usize,
    /// Meters; depth beyond this is reported as [`SENTINEL_FAR`].
    pub max_range: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            hfov: 42.0,
            n_rays: 64,
            max_range: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid camera: {0}")]
pub struct CameraError(pub String);

impl CameraModel {
    pub fn validate(&self) -> Result<(), CameraError> {
        if !(self.hfov > 0.0 && self.hfov < 180.0) {
            return Err(CameraError(format!("hfov {} outside (0, 180)", self.hfov)));
        }
        if self.n_rays < 2 {
            return Err(CameraError(format!("n_rays {} < 2", self.n_rays)));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(CameraError(format!(
                "max_range {} must be positive",
                self.max_range
            )));
        }
        Ok(())
    }

    /// Bearing of ray `i` in world radians (not normalized).
    pub fn ray_bearing(&self, heading: f64, i: usize) -> f64 {
        if self.n_rays < 2 {
            return heading;
        }
        let fov = self.hfov.to_radians();
        heading - fov / 2.0 + i as f64 * fov / (self.n_rays as f64 - 1.0)
    }
}

/// One egocentric frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Per ray, in meters, or [`SENTINEL_FAR`].
    pub depth: Vec<f64>,
    pub category: Vec<Option<Category>>,
    pub pose: Pose,
    pub step_index: usize,
    pub camera: CameraModel,
    /// The previous action ended in a collision (bump sensor).
    #[serde(default)]
    pub collided: bool,
}

impl Observation {
    pub fn bearing(&self, i: usize) -> f64 {
        self.camera.ray_bearing(self.pose.heading, i)
    }
}

/// Ray result before depth and segmentation noise.
struct RawRay {
    depth: f64,
    instance: Option<usize>,
}

fn trace(scene: &Scene, pose: &Pose, bearing: f64, cam: &CameraModel, reflections: bool) -> RawRay {
    let dir = (bearing.cos(), bearing.sin());
    let far = RawRay {
        depth: SENTINEL_FAR,
        instance: None,
    };
    let Hit { dist, cell } = match cast_ray(scene, (pose.x, pose.y), dir, cam.max_range, None) {
        Some(h) => h,
        None => return far,
    };
    let Some(cell) = cell else {
        return RawRay {
            depth: dist,
            instance: None,
        };
    };
    let instance_of = |c| scene.object_index_at(c);
    if reflections {
        if let Some(surface) = scene.reflective_at(cell) {
            match (surface.mode, surface.axis) {
                (ReflectionMode::BeyondRange, _) => return far,
                (ReflectionMode::Mirror, Some(axis)) => {
                    let hit_pt = (pose.x + dir.0 * dist, pose.y + dir.1 * dist);
                    let new_dir =
                        reflect(dir, scene.cell_center(axis.0), scene.cell_center(axis.1));
                    let rest = cam.max_range - dist;
                    // Single bounce: whatever the reflected ray meets is reported as is.
                    return match cast_ray(scene, hit_pt, new_dir, rest, Some(cell)) {
                        Some(Hit { dist: d2, cell: c2 }) => RawRay {
                            depth: dist + d2,
                            instance: c2.and_then(instance_of),
                        },
                        None => far,
                    };
                }
                (ReflectionMode::Mirror, None) => {}
            }
        }
    }
    RawRay {
        depth: dist,
        instance: instance_of(cell),
    }
}

/// Renders one frame and applies the noise profile.
///
/// Noise order is reflection, speckle, dropout, segmentation miss, confusion.
/// Segmentation noise is drawn once per visible instance, so every ray on an
/// instance reports the same outcome within a frame.
pub fn observe(
    scene: &Scene,
    pose: &Pose,
    camera: &CameraModel,
    noise: &NoiseProfile,
    rng: &mut SensorRng,
    step_index: usize,
) -> Observation {
    let n = camera.n_rays;
    let mut rays: Vec<RawRay> = (0..n)
        .map(|i| {
            trace(
                scene,
                pose,
                camera.ray_bearing(pose.heading, i),
                camera,
                noise.reflections_enabled,
            )
        })
        .collect();

    if noise.depth_sigma > 0.0 {
        let normal = Normal::new(0.0, noise.depth_sigma).expect("validated sigma");
        for r in rays.iter_mut().filter(|r| r.depth.is_finite()) {
            let d = r.depth * (1.0 + normal.sample(&mut rng.depth));
            r.depth = d.max(1e-3);
        }
    }
    if noise.depth_dropout > 0.0 {
        for r in rays.iter_mut() {
            if rng.depth.random::<f64>() < noise.depth_dropout {
                r.depth = SENTINEL_FAR;
            }
        }
    }
    for r in rays.iter_mut() {
        if r.depth > camera.max_range {
            r.depth = SENTINEL_FAR;
        }
        if !r.depth.is_finite() {
            r.instance = None;
        }
    }

    let mut visible: Vec<usize> = rays.iter().filter_map(|r| r.instance).collect();
    visible.sort_by_key(|&k| scene.objects()[k].instance_id);
    visible.dedup();
    let mut reported = vec![None; scene.objects().len()];
    for &k in &visible {
        reported[k] = noise.corrupt_category(scene.objects()[k].category, &mut rng.seg);
    }

    Observation {
        category: rays
            .iter()
            .map(|r| r.instance.and_then(|k| reported[k]))
            .collect(),
        depth: rays.into_iter().map(|r| r.depth).collect(),
        pose: *pose,
        step_index,
        camera: *camera,
        collided: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, Grid};
    use crate::gridworld::{ObjectInstance, ReflectiveSurface};

    fn room(w: usize, h: usize) -> Grid<bool> {
        Grid::from_fn(w, h, |c| {
            c.x == 0 || c.y == 0 || c.x == w - 1 || c.y == h - 1
        })
    }

    #[test]
    fn wall_two_meters_ahead() {
        // Inner x span 1..=60; agent at cell 19 center (0.975 m), wall face at x = 3.05 m.
        let scene = Scene::new("r", 0.05, room(62, 40), vec![], vec![]).unwrap();
        let pose = Pose::at_cell(Cell::new(19, 20), 0.05, 0.0);
        let mut rng = SensorRng::new(1);
        let obs = observe(
            &scene,
            &pose,
            &CameraModel::default(),
            &NoiseProfile::oracle(),
            &mut rng,
            0,
        );
        for i in [31, 32] {
            assert!(
                (obs.depth[i] - 2.0).abs() <= 0.1,
                "ray {i}: {}",
                obs.depth[i]
            );
            assert_eq!(obs.category[i], None);
        }
    }

    #[test]
    fn far_wall_is_sentinel() {
        let scene = Scene::new("r", 0.05, room(140, 40), vec![], vec![]).unwrap();
        let pose = Pose::at_cell(Cell::new(20, 20), 0.05, 0.0);
        let mut rng = SensorRng::new(1);
        let obs = observe(
            &scene,
            &pose,
            &CameraModel::default(),
            &NoiseProfile::oracle(),
            &mut rng,
            0,
        );
        assert_eq!(obs.depth[32], SENTINEL_FAR);
    }

    #[test]
    fn beyond_range_tv_vanishes() {
        let walls = room(60, 40);
        let tv = ObjectInstance {
            instance_id: 0,
            category: Category::Tv,
            cells: (15..25).map(|y| Cell::new(40, y)).collect(),
        };
        let surf = ReflectiveSurface {
            cells: tv.cells.clone(),
            mode: ReflectionMode::BeyondRange,
            axis: None,
        };
        let scene = Scene::new("r", 0.05, walls, vec![tv], vec![surf]).unwrap();
        let pose = Pose::at_cell(Cell::new(20, 20), 0.05, 0.0);
        let mut rng = SensorRng::new(1);
        let clean = observe(
            &scene,
            &pose,
            &CameraModel::default(),
            &NoiseProfile::oracle(),
            &mut rng,
            0,
        );
        assert_eq!(clean.category[32], Some(Category::Tv));
        let mut noisy = NoiseProfile::oracle();
        noisy.reflections_enabled = true;
        let obs = observe(&scene, &pose, &CameraModel::default(), &noisy, &mut rng, 0);
        assert_eq!(obs.depth[32], SENTINEL_FAR);
        assert!(obs.category.iter().all(|c| c.is_none()));
    }

    #[test]
    fn mirror_duplicates_object() {
        // Mirror wall at x = 40 facing the agent; a bed behind the agent at x = 5..7.
        let mut walls = room(60, 40);
        for y in 1..39 {
            walls.set(Cell::new(40, y), true);
        }
        let bed = ObjectInstance {
            instance_id: 3,
            category: Category::Bed,
            cells: (10..30)
                .flat_map(|y| (5..8).map(move |x| Cell::new(x, y)))
                .collect(),
        };
        let cells: Vec<Cell> = (1..39).map(|y| Cell::new(40, y)).collect();
        let surf = ReflectiveSurface {
            axis: Some((cells[0], *cells.last().unwrap())),
            cells,
            mode: ReflectionMode::Mirror,
        };
        let scene = Scene::new("m", 0.05, walls, vec![bed], vec![surf]).unwrap();
        let pose = Pose::at_cell(Cell::new(30, 20), 0.05, 0.0);
        let mut noise = NoiseProfile::oracle();
        noise.reflections_enabled = true;
        let mut rng = SensorRng::new(2);
        let obs = observe(&scene, &pose, &CameraModel::default(), &noise, &mut rng, 0);
        // 0.475 m to the mirror, then 1.6 m back to the bed face at x = 0.40 m.
        assert_eq!(obs.category[32], Some(Category::Bed));
        assert!(
            (obs.depth[32] - (0.475 + 1.6)).abs() < 0.06,
            "{}",
            obs.depth[32]
        );
    }

    #[test]
    fn zero_noise_is_repeatable() {
        let scene = Scene::new("r", 0.05, room(60, 40), vec![], vec![]).unwrap();
        let pose = Pose::new(1.23, 0.98, 0.7);
        let a = observe(
            &scene,
            &pose,
            &CameraModel::default(),
            &NoiseProfile::oracle(),
            &mut SensorRng::new(1),
            4,
        );
        let b = observe(
            &scene,
            &pose,
            &CameraModel::default(),
            &NoiseProfile::oracle(),
            &mut SensorRng::new(99),
            4,
        );
        assert_eq!(a, b);
        assert_eq!(a.step_index, 4);
    }
}
