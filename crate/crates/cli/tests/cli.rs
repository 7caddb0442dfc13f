use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use objnav::agentloop::{EpisodeResult, EpisodeSpec};
use objnav::bench::{write_episodes, write_results};
use objnav::config::RunConfig;
use objnav::grid::Cell;
use objnav::gridworld::{load_scene, Pose};
use objnav::Category;

fn objnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_objnav"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = objnav(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixtures() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Every file under `dir`, relative path and contents, sorted.
fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn gen_is_deterministic_and_reloads() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("deep/nested/a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        ok(&[
            "gen",
            "--seed",
            "7",
            "--homes",
            "3",
            "--episodes",
            "30",
            "--out",
            s(dir),
        ]);
    }
    let (ta, tb) = (tree(&a), tree(&b));
    assert_eq!(ta, tb);
    let scenes: Vec<_> = ta.iter().filter(|(p, _)| p.ends_with(".scene")).collect();
    assert_eq!(scenes.len(), 3);
    for (_, bytes) in scenes {
        load_scene(std::str::from_utf8(bytes).unwrap()).unwrap();
    }
    let episodes = fs::read_to_string(a.join("episodes.jsonl")).unwrap();
    assert_eq!(episodes.lines().count(), 30);
}

#[test]
fn run_is_independent_of_parallelism() {
    let tmp = tempfile::tempdir().unwrap();
    let g = tmp.path().join("g");
    ok(&[
        "gen",
        "--seed",
        "3",
        "--homes",
        "2",
        "--episodes",
        "6",
        "--out",
        s(&g),
    ]);
    let eps = g.join("episodes.jsonl");
    let scenes = g.join("scenes");
    let run = |dir: &str, par: &str, extra: &[&str]| {
        let out = tmp.path().join(dir);
        let mut args = vec![
            "run",
            "--episodes",
            s(&eps),
            "--scenes",
            s(&scenes),
            "--max-steps",
            "100",
        ];
        args.extend(["--parallel", par, "--out", s(&out)]);
        args.extend(extra);
        ok(&args);
        out
    };
    let one = run("p1", "1", &[]);
    let four = run("p4", "4", &["--trace"]);
    let read = |d: &Path| fs::read(d.join("results.jsonl")).unwrap();
    assert_eq!(read(&one), read(&four));
    assert_eq!(fs::read_dir(four.join("traces")).unwrap().count(), 6);
    assert!(!one.join("traces").exists());
    for f in ["by_home.csv", "by_goal.csv", "summary.json", "config.toml"] {
        assert!(one.join(f).is_file(), "{f}");
    }
    // Replay the first traced episode.
    let trace = fs::read_dir(four.join("traces"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let snaps = tmp.path().join("snaps");
    let cfg = four.join("config.toml");
    ok(&[
        "replay",
        "--config",
        s(&cfg),
        "--trace",
        s(&trace),
        "--episodes",
        s(&eps),
        "--scenes",
        s(&scenes),
        "--out",
        s(&snaps),
    ]);
    let n = fs::read_dir(&snaps).unwrap().count();
    let steps = fs::read_to_string(&trace).unwrap().lines().count();
    assert_eq!(n, steps);
    let first = fs::read(snaps.join("step_0000.ppm")).unwrap();
    assert!(first.starts_with(b"P6\n"));
}

fn outcome(id: &str, success: bool) -> EpisodeResult {
    let spec = EpisodeSpec::new(id, "h", Pose::new(0.0, 0.0, 0.0), Category::Chair, 0);
    let mut r = EpisodeResult::errored(&spec, &"synthetic");
    r.success = success;
    r.shortest_path_length = 2.0;
    r.agent_path_length = 2.0;
    r
}

fn results_file(
    dir: &Path,
    name: &str,
    outcomes: &[(&str, bool)],
    hash: &str,
) -> std::path::PathBuf {
    let rs: Vec<EpisodeResult> = outcomes.iter().map(|(id, s)| outcome(id, *s)).collect();
    let p = dir.join(name);
    write_results(&rs, hash, fs::File::create(&p).unwrap()).unwrap();
    p
}

#[test]
fn compare_reports_srcc_and_unpaired_ids() {
    let tmp = tempfile::tempdir().unwrap();
    let a = results_file(
        tmp.path(),
        "a.jsonl",
        &[("e1", true), ("e2", true), ("e3", false)],
        "x",
    );
    let b = results_file(
        tmp.path(),
        "b.jsonl",
        &[("e1", true), ("e2", false), ("e3", false)],
        "x",
    );
    assert!(ok(&["compare", s(&a), s(&a)]).contains("SRCC 1.000"));
    let rep = tmp.path().join("rep.json");
    assert!(ok(&["compare", s(&a), s(&b), "--out", s(&rep)]).contains("SRCC 0.500"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert!((v["srcc"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let c = results_file(tmp.path(), "c.jsonl", &[("e1", true), ("e4", true)], "x");
    let out = objnav(&["compare", s(&a), s(&c)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("e2") && err.contains("e3") && err.contains("e4"),
        "{err}"
    );
}

#[test]
fn attribute_without_failures_is_empty() {
    let tmp = tempfile::tempdir().unwrap();
    let hash = RunConfig::default().hash();
    let r = results_file(tmp.path(), "r.jsonl", &[("e1", true), ("e2", true)], &hash);
    let eps = tmp.path().join("eps.jsonl");
    fs::write(&eps, "").unwrap();
    let out = tmp.path().join("attr.json");
    let text = ok(&[
        "attribute",
        "--results",
        s(&r),
        "--episodes",
        s(&eps),
        "--out",
        s(&out),
    ]);
    assert!(text.contains("0 failures"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["report"]["failures"], 0);

    // Results from another configuration are refused.
    let other = results_file(tmp.path(), "o.jsonl", &[("e1", false)], "deadbeef");
    let out = objnav(&["attribute", "--results", s(&other), "--episodes", s(&eps)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn door_batch_attributes_map_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let eps: Vec<EpisodeSpec> = [1u64, 10]
        .iter()
        .map(|&seed| {
            EpisodeSpec::new(
                format!("door_{seed:03}"),
                "door_block",
                Pose::at_cell(Cell::new(20, 85), 0.05, 0.0),
                Category::Bed,
                seed,
            )
        })
        .collect();
    let ep_file = tmp.path().join("door.jsonl");
    write_episodes(&eps, fs::File::create(&ep_file).unwrap()).unwrap();
    let scene = fixtures().join("door_block.scene");
    let out = tmp.path().join("run");
    ok(&[
        "run",
        "--episodes",
        s(&ep_file),
        "--scenes",
        s(&scene),
        "--noise",
        "reallike",
        "--denoise",
        "false",
        "--out",
        s(&out),
    ]);
    let report = tmp.path().join("attr.json");
    let cfg = out.join("config.toml");
    ok(&[
        "attribute",
        "--config",
        s(&cfg),
        "--results",
        s(&out.join("results.jsonl")),
        "--episodes",
        s(&ep_file),
        "--scenes",
        s(&scene),
        "--out",
        s(&report),
    ]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(
        v["report"]["counts"]["map_noise_error"].as_u64().unwrap() > 0,
        "{v}"
    );
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "parallelism = 0\n").unwrap();
    let eps = tmp.path().join("e.jsonl");
    fs::write(&eps, "").unwrap();
    assert_eq!(
        objnav(&["run", "--config", s(&bad), "--episodes", s(&eps)])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        objnav(&["run", "--noise", "foggy", "--episodes", s(&eps)])
            .status
            .code(),
        Some(1)
    );
    let missing = tmp.path().join("nope.jsonl");
    assert_eq!(
        objnav(&["run", "--episodes", s(&missing)]).status.code(),
        Some(2)
    );
}
