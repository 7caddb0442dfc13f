use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use objnav::agentloop::{Episode, EpisodeSpec};
use objnav::bench::{
    attribute_failures, generate_episodes, ladder_rerun, metrics_report, paired_report,
    read_episodes, read_results, read_trace, run_batch, write_episodes, write_group_csv,
    write_results, write_summary, write_trace, BatchOptions, DistanceBin, EpisodeSetParams,
    SceneIndex,
};
use objnav::config::RunConfig;
use objnav::explore::PolicyKind;
use objnav::grid::Rect;
use objnav::gridworld::{generate_home, load_scene, save_scene, Scene};
use objnav::semmap::{write_color_ppm, EXPLORED};

#[derive(Parser)]
#[command(
    name = "objnav",
    version,
    about = "Object-goal navigation simulator and benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate homes and an episode set.
    Gen(GenArgs),
    /// Run an episode set and write results and reports.
    Run(RunArgs),
    /// Pair two results files and report SR, SPL and SRCC.
    Compare(CompareArgs),
    /// Attribute the failures in a results file by counterfactual reruns.
    Attribute(AttributeArgs),
    /// Re-simulate a traced episode and write a map snapshot per step.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    policy: Option<Policy>,
    /// Noise profile: oracle, simlike or reallike.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    denoise: Option<bool>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Frontier,
    Prior,
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    homes: usize,
    #[arg(long, default_value_t = 30)]
    episodes: usize,
    /// Distance bins in meters, e.g. `1-5,5-10,10-15`.
    #[arg(long)]
    bins: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Episode file.
    #[arg(long)]
    episodes: PathBuf,
    /// Scene files or directories of `.scene` files.
    #[arg(long, num_args = 1..)]
    scenes: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    parallel: Option<usize>,
    /// Write per-step traces under `traces/`.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttributeArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    episodes: PathBuf,
    #[arg(long, num_args = 1..)]
    scenes: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Trace file written by `run --trace`.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    episodes: PathBuf,
    #[arg(long, num_args = 1..)]
    scenes: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Write every k-th step.
    #[arg(long, default_value_t = 1)]
    every: usize,
}

/// Exit status classes.
enum Failure {
    Config(anyhow::Error),
    Data(anyhow::Error),
}

trait Classify<T> {
    fn config(self) -> Result<T, Failure>;
    fn data(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Data(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Attribute(a) => cmd_attribute(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(a: &ConfigArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p).config()?,
        None => RunConfig::default(),
    };
    if let Some(p) = a.policy {
        cfg.agent.policy.kind = match p {
            Policy::Frontier => PolicyKind::Frontier,
            Policy::Prior => PolicyKind::Prior,
            Policy::Random => PolicyKind::Random,
        };
    }
    if let Some(n) = &a.noise {
        cfg.noise = n.clone();
    }
    if let Some(d) = a.denoise {
        cfg.agent.denoise = d;
    }
    if a.max_steps.is_some() {
        cfg.budgets.max_steps = a.max_steps;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate().config()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .data()?;
    }
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .data()
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("opening {}", path.display()))
        .data()
}

/// Loads scene files and every `.scene` file in the given directories.
fn load_scenes(paths: &[PathBuf]) -> Result<SceneIndex, Failure> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))
                .data()?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "scene"))
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    let mut scenes = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f)
            .with_context(|| format!("reading {}", f.display()))
            .data()?;
        scenes.push(
            load_scene(&text)
                .with_context(|| format!("loading {}", f.display()))
                .data()?,
        );
    }
    SceneIndex::new(scenes).data()
}

fn load_episodes(path: &Path, cfg: &RunConfig) -> Result<Vec<EpisodeSpec>, Failure> {
    let mut eps = read_episodes(open(path)?, &path.display().to_string()).data()?;
    for e in &mut eps {
        cfg.budgets.apply(e);
    }
    Ok(eps)
}

fn parse_bins(s: &str) -> anyhow::Result<Vec<DistanceBin>> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once('-')
                .ok_or_else(|| anyhow!("bin {part:?} is not of the form lo-hi"))?;
            Ok(DistanceBin::new(lo.trim().parse()?, hi.trim().parse()?))
        })
        .collect()
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let cfg = load_config(&a.cfg)?;
    let mut params = EpisodeSetParams::default();
    if let Some(b) = &a.bins {
        params.bins = parse_bins(b).config()?;
    }
    if let Some(v) = cfg.budgets.max_steps {
        params.max_steps = v;
    }
    if let Some(v) = cfg.budgets.max_collisions {
        params.max_collisions = v;
    }
    if let Some(v) = cfg.budgets.success_radius {
        params.success_radius = v;
    }
    let hash = cfg.hash();
    let mut scenes: Vec<Scene> = Vec::new();
    for i in 0..a.homes {
        let seed = cfg.seed.wrapping_mul(1000).wrapping_add(i as u64);
        let scene = generate_home(seed, &cfg.generator).data()?;
        scenes.push(scene.with_provenance(format!("generated, home seed {seed}, config {hash}")));
    }
    let set = generate_episodes(&scenes, a.episodes, &params, cfg.seed).data()?;
    for s in &scenes {
        let path = a.out.join("scenes").join(format!("{}.scene", s.id()));
        let mut w = create(&path)?;
        w.write_all(save_scene(s).as_bytes()).data()?;
        w.flush().data()?;
    }
    let mut w = create(&a.out.join("episodes.jsonl"))?;
    write_episodes(&set.episodes, &mut w).data()?;
    w.flush().data()?;
    let summary = serde_json::json!({
        "config_hash": hash,
        "homes": scenes.iter().map(|s| s.id()).collect::<Vec<_>>(),
        "episodes": set.episodes.len(),
        "bins": set.bins,
        "targets": set.targets,
        "achieved": set.achieved,
        "category_counts": objnav::Category::ALL
            .iter()
            .map(|c| (c.name(), set.category_counts[c.index()]))
            .collect::<std::collections::BTreeMap<_, _>>(),
    });
    let mut w = create(&a.out.join("gen_summary.json"))?;
    serde_json::to_writer_pretty(&mut w, &summary).data()?;
    writeln!(w).data()?;
    w.flush().data()?;
    println!("{} homes, {} episodes", scenes.len(), set.episodes.len());
    for (b, (t, got)) in set.bins.iter().zip(set.targets.iter().zip(&set.achieved)) {
        println!("  [{}, {}) m: {got}/{t}", b.lo, b.hi);
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let mut cfg = load_config(&a.cfg)?;
    if let Some(p) = a.parallel {
        cfg.parallelism = p;
    }
    if let Some(o) = &a.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate().config()?;
    let noise = cfg.noise_profile().config()?;
    let mut scene_paths = cfg.scenes.clone();
    scene_paths.extend(a.scenes.iter().cloned());
    let scenes = load_scenes(&scene_paths)?;
    let episodes = load_episodes(&a.episodes, &cfg)?;
    let opts = BatchOptions {
        parallelism: cfg.parallelism,
        trace: a.trace,
    };
    let results = run_batch(&scenes, &episodes, &cfg.agent, &noise, &opts).data()?;
    let hash = cfg.hash();
    let out = &cfg.output_dir;
    let mut w = create(&out.join("results.jsonl"))?;
    write_results(&results, &hash, &mut w).data()?;
    w.flush().data()?;
    let report = metrics_report(&results).data()?;
    write_group_csv(
        "home",
        &report.by_home,
        &hash,
        create(&out.join("by_home.csv"))?,
    )
    .data()?;
    write_group_csv(
        "goal",
        &report.by_goal,
        &hash,
        create(&out.join("by_goal.csv"))?,
    )
    .data()?;
    let mut w = create(&out.join("summary.json"))?;
    write_summary(&report, &hash, &mut w).data()?;
    w.flush().data()?;
    let mut w = create(&out.join("config.toml"))?;
    w.write_all(cfg.to_toml().as_bytes()).data()?;
    w.flush().data()?;
    if a.trace {
        for r in &results {
            let mut w = create(&out.join("traces").join(format!("{}.jsonl", r.episode_id)))?;
            write_trace(r, &hash, &mut w).data()?;
            w.flush().data()?;
        }
    }
    let errors = results
        .iter()
        .filter(|r| r.diagnostics.error.is_some())
        .count();
    println!(
        "{} episodes: SR {:.3}, SPL {:.3}{}",
        report.n,
        report.sr,
        report.spl,
        if errors > 0 {
            format!(" ({errors} could not be run)")
        } else {
            String::new()
        }
    );
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let load = |p: &Path| -> Result<Vec<_>, Failure> {
        let recs = read_results(open(p)?, &p.display().to_string()).data()?;
        Ok(recs.into_iter().map(|r| r.result).collect())
    };
    let (ra, rb) = (load(&a.a)?, load(&a.b)?);
    let rep = paired_report(&ra, &rb).data()?;
    println!("episodes {}", rep.n);
    println!("SR   {:.3}  {:.3}", rep.sr_a, rep.sr_b);
    println!("SPL  {:.3}  {:.3}", rep.spl_a, rep.spl_b);
    println!("SRCC {:.3}", rep.srcc);
    if let Some(o) = &a.out {
        let mut w = create(o)?;
        serde_json::to_writer_pretty(&mut w, &rep).data()?;
        writeln!(w).data()?;
        w.flush().data()?;
    }
    Ok(())
}

fn cmd_attribute(a: AttributeArgs) -> Result<(), Failure> {
    let cfg = load_config(&a.cfg)?;
    let noise = cfg.noise_profile().config()?;
    let hash = cfg.hash();
    let records = read_results(open(&a.results)?, &a.results.display().to_string()).data()?;
    if let Some(r) = records.iter().find(|r| r.config_hash != hash) {
        return Err(Failure::Config(anyhow!(
            "episode {} was produced by config {}, not {hash}",
            r.result.episode_id,
            r.config_hash
        )));
    }
    let results: Vec<_> = records.into_iter().map(|r| r.result).collect();
    let mut scene_paths = cfg.scenes.clone();
    scene_paths.extend(a.scenes.iter().cloned());
    let scenes = load_scenes(&scene_paths)?;
    let episodes = load_episodes(&a.episodes, &cfg)?;
    let report = attribute_failures(
        &results,
        ladder_rerun(&scenes, &episodes, &cfg.agent, &noise),
    )
    .data()?;
    println!("{} episodes, {} failures", report.total, report.failures);
    for (class, n) in &report.counts {
        println!(
            "  {:<20} {n:>5}  {:5.1}%",
            class.name(),
            100.0 * report.proportion(*class)
        );
    }
    if let Some(o) = &a.out {
        let mut w = create(o)?;
        let doc = serde_json::json!({ "config_hash": hash, "report": report });
        serde_json::to_writer_pretty(&mut w, &doc).data()?;
        writeln!(w).data()?;
        w.flush().data()?;
    }
    Ok(())
}

fn cmd_replay(a: ReplayArgs) -> Result<(), Failure> {
    let cfg = load_config(&a.cfg)?;
    let noise = cfg.noise_profile().config()?;
    let trace = read_trace(open(&a.trace)?, &a.trace.display().to_string()).data()?;
    let first = trace
        .first()
        .ok_or_else(|| anyhow!("{} is empty", a.trace.display()))
        .data()?;
    let id = first.episode_id.clone();
    if first.config_hash != cfg.hash() {
        return Err(Failure::Config(anyhow!(
            "trace was produced by config {}, not {}",
            first.config_hash,
            cfg.hash()
        )));
    }
    let mut scene_paths = cfg.scenes.clone();
    scene_paths.extend(a.scenes.iter().cloned());
    let scenes = load_scenes(&scene_paths)?;
    let episodes = load_episodes(&a.episodes, &cfg)?;
    let spec = episodes
        .iter()
        .find(|e| e.episode_id == id)
        .ok_or_else(|| anyhow!("episode {id} not in {}", a.episodes.display()))
        .data()?;
    let scene = scenes
        .get(&spec.scene_id)
        .ok_or_else(|| anyhow!("scene {:?} not loaded", spec.scene_id))
        .data()?;

    // First pass checks the trace and finds the explored extent.
    let mut ep = Episode::modular(scene, spec, &cfg.agent, &noise, false).data()?;
    let mut k = 0;
    while let Some((action, _)) = ep.step().data()? {
        let rec = trace.get(k).map(|t| &t.record);
        if rec.is_none_or(|r| r.action != action || r.pose != ep.pose()) {
            return Err(Failure::Data(anyhow!(
                "replay of {id} diverges from the trace at step {k}"
            )));
        }
        k += 1;
    }
    if k != trace.len() {
        return Err(Failure::Data(anyhow!(
            "trace has {} steps, replay ended after {k}",
            trace.len()
        )));
    }
    let map = &ep.agent.map;
    let explored = map.channel(EXPLORED);
    let mut window: Option<Rect> = None;
    for c in explored.bounds().cells().filter(|&c| explored[c]) {
        match &mut window {
            Some(w) => w.include(c),
            None => window = Some(Rect::of_cell(c)),
        }
    }
    let window = window
        .unwrap_or_else(|| Rect::of_cell(map.center()))
        .expand(10, explored.width(), explored.height());

    fs::create_dir_all(&a.out)
        .with_context(|| format!("creating {}", a.out.display()))
        .data()?;
    let every = a.every.max(1);
    let mut ep = Episode::modular(scene, spec, &cfg.agent, &noise, false).data()?;
    let mut step = 0;
    let mut written = 0;
    while ep.step().data()?.is_some() {
        if step % every == 0 || ep.is_done() {
            let w = create(&a.out.join(format!("step_{step:04}.ppm")))?;
            write_color_ppm(&ep.agent.map, window, w).data()?;
            written += 1;
        }
        step += 1;
    }
    println!(
        "{id}: {step} steps, {written} snapshots in {}",
        a.out.display()
    );
    Ok(())
}
