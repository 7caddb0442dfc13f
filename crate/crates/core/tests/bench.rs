use std::fs::File;

use objnav::agentloop::{AgentConfig, EpisodeSpec};
use objnav::bench::{
    attribute_failures, compare_domains, generate_episodes, import_table, ladder_rerun, run_batch,
    spl, srcc, success_rate, AttributionClass, BatchOptions, Domain, EpisodeSetParams, SceneIndex,
    TableEpisode,
};
use objnav::grid::Cell;
use objnav::gridworld::{generate_home, load_scene, GenParams, Pose, Scene};
use objnav::sensors::NoiseProfile;
use objnav::Category;

fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> Scene {
    load_scene(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

fn table() -> Vec<TableEpisode> {
    import_table(
        File::open(fixture_path("episode_table.csv")).unwrap(),
        "episode_table.csv",
    )
    .unwrap()
}

fn rows(home: &str, method: &str) -> Vec<TableEpisode> {
    table()
        .into_iter()
        .filter(|r| r.home == home && r.method == method)
        .collect()
}

#[test]
fn table_covers_sixty_episodes_per_method() {
    let t = table();
    assert_eq!(t.len(), 180);
    for m in ["classical", "modular", "end_to_end"] {
        assert_eq!(t.iter().filter(|r| r.method == m).count(), 60);
    }
}

#[test]
fn home1_and_home6_modular() {
    let h1 = rows("1", "modular");
    assert_eq!(h1.len(), 10);
    assert!((success_rate(&h1).unwrap() - 0.90).abs() < 0.005);
    assert!((spl(&h1).unwrap() - 0.63).abs() < 0.005);
    let h6 = rows("6", "modular");
    let terms: Vec<f64> = h6.iter().map(|r| r.spl).collect();
    assert_eq!(
        terms,
        [0.90, 0.92, 0.94, 0.36, 0.61, 0.79, 0.83, 0.53, 0.59, 0.45]
    );
    assert_eq!(success_rate(&h6).unwrap(), 1.0);
    assert!((spl(&h6).unwrap() - 0.69).abs() < 0.005);
}

/// Paired outcome vectors of length `n` with `na` and `nb` successes, `both` shared.
fn paired(n: usize, na: usize, nb: usize, both: usize) -> (Vec<bool>, Vec<bool>) {
    let a = (0..n).map(|i| i < na).collect();
    let b = (0..n)
        .map(|i| i < both || (i >= na && i < na + nb - both))
        .collect();
    (a, b)
}

/// Pearson = (n·both − na·nb) / sqrt(na(n−na)·nb(n−nb)).
/// 15 episodes, 5/5/4: 35 / 50. 125 episodes at SR 0.80 both sides, 94 shared: 1750 / 2500.
#[test]
fn constructed_srcc_070() {
    for (n, na, nb, both) in [(15, 5, 5, 4), (125, 100, 100, 94)] {
        let (a, b) = paired(n, na, nb, both);
        assert_eq!(b.iter().filter(|&&x| x).count(), nb);
        assert_eq!(a.iter().zip(&b).filter(|(x, y)| **x && **y).count(), both);
        assert!((srcc(&a, &b).unwrap() - 0.70).abs() < 1e-9);
    }
}

fn door_spec(seed: u64) -> EpisodeSpec {
    EpisodeSpec::new(
        format!("door_{seed:03}"),
        "door_block",
        Pose::at_cell(Cell::new(20, 85), 0.05, 0.0),
        Category::Bed,
        seed,
    )
}

#[test]
fn door_blocking_failures_attribute_to_map_noise() {
    let scenes = SceneIndex::new([fixture("door_block.scene")]).unwrap();
    let episodes: Vec<EpisodeSpec> = [1, 10].into_iter().map(door_spec).collect();
    let mut cfg = AgentConfig::default();
    cfg.denoise = false;
    let noise = NoiseProfile::reallike();
    let results = run_batch(&scenes, &episodes, &cfg, &noise, &BatchOptions::default()).unwrap();
    assert!(results.iter().all(|r| !r.success));
    let rep = attribute_failures(&results, ladder_rerun(&scenes, &episodes, &cfg, &noise)).unwrap();
    assert_eq!(
        rep.count(AttributionClass::MapNoiseError),
        2,
        "{:?}",
        rep.episodes
    );
    assert_eq!(rep.counts.values().sum::<usize>(), rep.failures);
}

#[test]
fn simlike_against_reallike() {
    let scenes: Vec<Scene> = (0..3)
        .map(|s| generate_home(100 + s, &GenParams::default()).unwrap())
        .collect();
    let params = EpisodeSetParams {
        max_steps: 120,
        ..Default::default()
    };
    let set = generate_episodes(&scenes, 50, &params, 5).unwrap();
    let index = SceneIndex::new(scenes).unwrap();
    let cfg = AgentConfig::default();
    let (sim, real) = (NoiseProfile::simlike(), NoiseProfile::reallike());
    let (a, b, rep) = compare_domains(
        &index,
        &set.episodes,
        Domain {
            config: &cfg,
            noise: &sim,
        },
        Domain {
            config: &cfg,
            noise: &real,
        },
        &BatchOptions::default(),
    )
    .unwrap();
    assert_eq!((a.len(), b.len(), rep.n), (50, 50, 50));
    assert!((-1.0..=1.0).contains(&rep.srcc));
    assert!(rep.spl_a <= rep.sr_a && rep.spl_b <= rep.sr_b);
}
