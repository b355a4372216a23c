use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use epiprofile::degree_laws::LawSummary;
use epiprofile::export::{
    self, emit_report, profile_comparisons, read_json, read_sample, write_csv, write_excursion, write_json,
    write_marks, GraphRun, LimitRun, Report, GRAPH_HEADER, LIMIT_HEADER, PROFILE_HEADER,
};
use epiprofile::harness::{
    compare_distributions, run_graph_experiment_with, run_limit_experiment, stream, Purpose, TiltMode,
};
use epiprofile::stable::{poisson_marks, ExcursionSampler};
use epiprofile::{CriticalDegreeLaw, ExperimentConfig};

#[derive(Parser)]
#[command(name = "epiprofile", version, about = "Epidemic profiles on critical heavy-tailed configuration graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the critical degree law and print it as JSON.
    SolveLaw(LawArgs),
    /// Simulate graphs and record the largest components.
    SimulateGraph(GraphArgs),
    /// Sample tilted limit excursions.
    SimulateLimit(LimitArgs),
    /// Two-sample KS test between two CSV samples.
    Compare(CompareArgs),
    /// Build CSV tables, summary.json and profiles.svg from simulation output.
    Report(ReportArgs),
}

#[derive(Args)]
struct LawArgs {
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    #[arg(long, default_value_t = 1000)]
    table_size: u64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 100)]
    replicas: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, env = "EPIPROFILE_OUT", default_value = "epiprofile-out")]
    out: PathBuf,
    /// JSON experiment config; its fields override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    law: LawArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "10000")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    components: usize,
}

#[derive(Args)]
struct LimitArgs {
    #[command(flatten)]
    law: LawArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 1e-3)]
    grid: f64,
    #[arg(long, default_value_t = 1000)]
    excursion_length: usize,
    #[arg(long, default_value_t = 0.05)]
    window: f64,
    /// `none`, `exp` or `poly:K`.
    #[arg(long, default_value = "exp", value_parser = parse_tilt)]
    tilt: TiltMode,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// Keep only rows with this `functional` value.
    #[arg(long)]
    functional: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding graph.json and/or limit.json.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, env = "EPIPROFILE_OUT", default_value = "epiprofile-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
}

fn parse_tilt(s: &str) -> Result<TiltMode, String> {
    match s {
        "none" => Ok(TiltMode::None),
        "exp" => Ok(TiltMode::Exp),
        _ => s
            .strip_prefix("poly:")
            .and_then(|k| k.parse().ok())
            .map(TiltMode::Poly)
            .ok_or_else(|| format!("unknown tilt `{s}`")),
    }
}

#[derive(Serialize)]
struct LawOutput {
    #[serde(flatten)]
    law: LawSummary,
    stable_constant: f64,
}

/// Overlay the JSON file's fields on `base`.
fn merge_config(base: ExperimentConfig, file: Option<&Path>) -> Result<ExperimentConfig> {
    let Some(path) = file else { return Ok(base) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let overlay: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut value = serde_json::to_value(&base)?;
    merge_value(&mut value, overlay);
    Ok(serde_json::from_value(value)?)
}

fn merge_value(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                merge_value(b.entry(k).or_insert(serde_json::Value::Null), v);
            }
        }
        (b, o) => *b = o,
    }
}

fn base_config(law: &LawArgs, run: &RunArgs) -> ExperimentConfig {
    ExperimentConfig {
        alpha: law.alpha,
        c: law.c,
        table_size: law.table_size,
        replicas: run.replicas,
        seed: run.seed,
        ..ExperimentConfig::default()
    }
}

fn out_dir(cfg: &ExperimentConfig, run: &RunArgs) -> Result<PathBuf> {
    let dir = cfg.out_dir.clone().unwrap_or_else(|| run.out.clone());
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn solve_law(args: LawArgs) -> Result<()> {
    let law = CriticalDegreeLaw::solve(args.alpha, args.c, args.table_size)?;
    let out = LawOutput { law: law.summary(), stable_constant: law.stable_constant() };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn simulate_graph(args: GraphArgs) -> Result<()> {
    let mut cfg = base_config(&args.law, &args.run);
    cfg.sizes = args.sizes;
    cfg.components = args.components;
    let cfg = merge_config(cfg, args.run.config.as_deref())?;
    cfg.validate()?;
    let dir = out_dir(&cfg, &args.run)?;
    let mut graph = csv::WriterBuilder::new().has_headers(false).from_path(dir.join("graph.csv"))?;
    let mut profiles = csv::WriterBuilder::new().has_headers(false).from_path(dir.join("profiles.csv"))?;
    graph.write_record(GRAPH_HEADER)?;
    profiles.write_record(PROFILE_HEADER)?;
    graph.flush()?;
    profiles.flush()?;
    let results = run_graph_experiment_with(&cfg, |batch| {
        for r in export::graph_rows(batch) {
            graph.serialize(r)?;
        }
        for r in export::profile_rows(batch) {
            profiles.serialize(r)?;
        }
        graph.flush()?;
        profiles.flush()?;
        if let Some(first) = batch.first() {
            eprintln!("n={} done ({} replicas)", first.n, batch.len());
        }
        Ok(())
    })?;
    write_json(&dir.join("graph.json"), &GraphRun { config: cfg, results })?;
    println!("{}", dir.display());
    Ok(())
}

fn simulate_limit(args: LimitArgs) -> Result<()> {
    let mut cfg = base_config(&args.law, &args.run);
    cfg.limit.grid = args.grid;
    cfg.limit.excursion_length = args.excursion_length;
    cfg.limit.window = args.window;
    cfg.limit.tilt = args.tilt;
    let cfg = merge_config(cfg, args.run.config.as_deref())?;
    cfg.validate()?;
    let dir = out_dir(&cfg, &args.run)?;
    let rows = run_limit_experiment(&cfg)?;
    let n = cfg.limit.excursion_length;
    write_csv(&dir.join("limit.csv"), &LIMIT_HEADER, &export::limit_rows(n, &rows))?;

    // Replica 0 again from its own streams, for the path and mark files.
    let law = cfg.law()?;
    let sampler = ExcursionSampler::new(&law).with_budget(cfg.limit.budget);
    let mut rng = stream(cfg.seed, n as u64, 0, Purpose::Limit);
    let e = sampler.sample(n, cfg.limit.window, &mut rng)?;
    let mut marks_rng = stream(cfg.seed, n as u64, 0, Purpose::Marks);
    let marks = poisson_marks(&e.path, law.delta(), &mut marks_rng)?;
    write_excursion(&dir.join("excursion.csv"), &e.path, rows[0].weight)?;
    write_marks(&dir.join("marks.csv"), &marks)?;

    write_json(&dir.join("limit.json"), &LimitRun { config: cfg, rows })?;
    println!("{}", dir.display());
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let f = args.functional.as_deref();
    let (a, _) = read_sample(&args.a, f).with_context(|| format!("reading {}", args.a.display()))?;
    let (b, wb) = read_sample(&args.b, f).with_context(|| format!("reading {}", args.b.display()))?;
    let outcome = compare_distributions(&a, &b, wb.as_deref(), args.level)?;
    println!("{}", serde_json::to_string_pretty(&outcome)?);
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let graph_path = args.input.join("graph.json");
    let limit_path = args.input.join("limit.json");
    let graph: Option<GraphRun> = graph_path.exists().then(|| read_json(&graph_path)).transpose()?;
    let limit: Option<LimitRun> = limit_path.exists().then(|| read_json(&limit_path)).transpose()?;
    let mut report = Report::default();
    match (graph, limit) {
        (None, None) => bail!("{} holds neither graph.json nor limit.json", args.input.display()),
        (g, l) => {
            if let Some(l) = l {
                report.config = l.config;
                report.limit = l.rows;
            }
            if let Some(g) = g {
                let limit_cfg = report.config.limit.clone();
                report.config = g.config;
                if !report.limit.is_empty() {
                    report.config.limit = limit_cfg;
                }
                report.graph = g.results;
            }
        }
    }
    report.comparisons = profile_comparisons(&report, args.level)?;
    let files = emit_report(&report, &args.out)?;
    println!("{}", files.summary_json.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::SolveLaw(a) => solve_law(a),
        Command::SimulateGraph(a) => simulate_graph(a),
        Command::SimulateLimit(a) => simulate_limit(a),
        Command::Compare(a) => compare(a),
        Command::Report(a) => report(a),
    }
}
