//! File formats: CSV tables, the JSON summary and SVG profile overlays.
//!
//! CSV schemas (header rows are always written):
//!
//! | file | columns |
//! |------|---------|
//! | `graph.csv` | `n,replica,rank,functional,raw,rescaled` |
//! | `profiles.csv` | `n,replica,rank,index,time,value` |
//! | `limit.csv` | `n,replica,rank,functional,raw,rescaled,weight` |
//! | excursion | `grid_time,value,weight` |
//! | marks | `s,y,t` |
//! | edge list | `u,v` |
//! | forest | `child,parent,is_new_leaf,pair_id` |
//!
//! In `limit.csv`, `n` is the target excursion length and `rank` is always 1.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config_model::{ExplorationLog, ExploredForest, ForestNode, MultiGraph};
use crate::error::{Error, Result};
use crate::harness::{quantile, ExperimentConfig, Functional, KsOutcome, LimitRow, ReplicaResult};
use crate::paths::GridPath;
use crate::stable::PoissonMarks;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRow {
    pub n: usize,
    pub replica: usize,
    pub rank: usize,
    pub functional: String,
    pub raw: f64,
    pub rescaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCsvRow {
    pub n: usize,
    pub replica: usize,
    pub rank: usize,
    pub functional: String,
    pub raw: f64,
    pub rescaled: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub n: usize,
    pub replica: usize,
    pub rank: usize,
    pub index: usize,
    pub time: f64,
    pub value: f64,
}

/// Long-format rows, one per replica, component and scalar functional.
pub fn graph_rows(results: &[ReplicaResult]) -> Vec<GraphRow> {
    let mut out = Vec::new();
    for r in results {
        for c in &r.components {
            let values = [
                (Functional::Size, c.size as f64, c.rescaled.size),
                (Functional::Width, c.width as f64, c.rescaled.width),
                (Functional::Radius, c.radius as f64, c.rescaled.radius),
                (Functional::PeakDay, c.peak_day as f64, c.rescaled.peak_day),
                (Functional::Surplus, c.surplus as f64, c.surplus as f64),
                (Functional::Area, c.area as f64, c.rescaled.area),
            ];
            for (f, raw, rescaled) in values {
                out.push(GraphRow { n: r.n, replica: r.replica, rank: c.rank, functional: f.name().into(), raw, rescaled });
            }
        }
    }
    out
}

pub fn profile_rows(results: &[ReplicaResult]) -> Vec<ProfileRow> {
    let mut out = Vec::new();
    for r in results {
        for c in &r.components {
            let last = c.profile.len().saturating_sub(1).max(1) as f64;
            for (i, &v) in c.profile.iter().enumerate() {
                out.push(ProfileRow {
                    n: r.n,
                    replica: r.replica,
                    rank: c.rank,
                    index: i,
                    time: c.profile_horizon * i as f64 / last,
                    value: v,
                });
            }
        }
    }
    out
}

pub fn limit_rows(n: usize, rows: &[LimitRow]) -> Vec<LimitCsvRow> {
    let mut out = Vec::new();
    for r in rows {
        let values = [
            ("width", r.width),
            ("radius", r.radius),
            ("peak_day", r.peak_day),
            ("area", r.area),
            ("marks", r.marks as f64),
            ("depth_q25", r.depth_quartiles[0]),
            ("depth_q50", r.depth_quartiles[1]),
            ("depth_q75", r.depth_quartiles[2]),
        ];
        for (name, v) in values {
            out.push(LimitCsvRow { n, replica: r.replica, rank: 1, functional: name.into(), raw: v, rescaled: v, weight: r.weight });
        }
    }
    out
}

/// Write serialisable rows as CSV; with no rows only the header is written.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const GRAPH_HEADER: [&str; 6] = ["n", "replica", "rank", "functional", "raw", "rescaled"];
pub const PROFILE_HEADER: [&str; 6] = ["n", "replica", "rank", "index", "time", "value"];
pub const LIMIT_HEADER: [&str; 7] = ["n", "replica", "rank", "functional", "raw", "rescaled", "weight"];

/// Excursion as `grid_time,value,weight`.
pub fn write_excursion(path: &Path, e: &GridPath, weight: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["grid_time", "value", "weight"])?;
    let dt = e.time_scale();
    for (k, v) in e.scaled_values().into_iter().enumerate() {
        w.serialize((k as f64 * dt, v, weight))?;
    }
    w.flush()?;
    Ok(())
}

/// Marks as `s,y,t`.
pub fn write_marks(path: &Path, marks: &PoissonMarks) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["s", "y", "t"])?;
    for m in &marks.marks {
        w.serialize((m.s, m.y, m.t))?;
    }
    w.flush()?;
    Ok(())
}

/// Edges as `u,v` graph vertex ids, earlier-discovered endpoint first, sorted by
/// discovery position of both endpoints.
pub fn write_edge_list(path: &Path, g: &MultiGraph, log: &ExplorationLog) -> Result<()> {
    let pos = log.positions();
    let mut edges: Vec<(usize, usize)> = g
        .edges()
        .map(|(a, b)| if pos[a] <= pos[b] { (pos[a], pos[b]) } else { (pos[b], pos[a]) })
        .collect();
    edges.sort_unstable();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["u", "v"])?;
    for (a, b) in edges {
        w.serialize((log.order[a], log.order[b]))?;
    }
    w.flush()?;
    Ok(())
}

/// Forest vertices in exploration order as `child,parent,is_new_leaf,pair_id`;
/// indices are exploration positions, `parent` is empty for roots and `pair_id`
/// for vertices that are not new leaves.
pub fn write_forest(path: &Path, forest: &ExploredForest) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["child", "parent", "is_new_leaf", "pair_id"])?;
    for (u, node) in forest.nodes.iter().enumerate() {
        let pair = match node {
            ForestNode::NewLeaf(i) => Some(*i),
            _ => None,
        };
        w.serialize((u, forest.parent[u], pair.is_some(), pair))?;
    }
    w.flush()?;
    Ok(())
}

/// A one-dimensional sample with optional weights, read from a CSV file.
///
/// Accepts the long tables above (filtered by `functional`, reading `rescaled`
/// and `weight`) or any file with a `value` column and an optional `weight` column.
pub fn read_sample(path: &Path, functional: Option<&str>) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let value_col = col("rescaled")
        .or_else(|| col("value"))
        .ok_or_else(|| Error::Domain(format!("{}: no `rescaled` or `value` column", path.display())))?;
    let weight_col = col("weight");
    let functional_col = col("functional");
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if let (Some(f), Some(c)) = (functional, functional_col) {
            if &rec[c] != f {
                continue;
            }
        }
        let parse = |i: usize| -> Result<f64> {
            rec[i].trim().parse::<f64>().map_err(|e| Error::Domain(format!("{}: {e}", path.display())))
        };
        values.push(parse(value_col)?);
        if let Some(w) = weight_col {
            weights.push(parse(w)?);
        }
    }
    Ok((values, weight_col.map(|_| weights)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        v.sort_by(f64::total_cmp);
        if v.is_empty() {
            return Self { count: 0, median: 0.0, q1: 0.0, q3: 0.0, iqr: 0.0 };
        }
        let (q1, q3) = (quantile(&v, 0.25), quantile(&v, 0.75));
        Self { count: v.len(), median: quantile(&v, 0.5), q1, q3, iqr: q3 - q1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalStats {
    pub n: usize,
    pub rank: usize,
    pub functional: String,
    pub rescaled: Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedComparison {
    pub name: String,
    pub outcome: KsOutcome,
}

/// Everything a report is built from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub graph: Vec<ReplicaResult>,
    pub limit: Vec<LimitRow>,
    pub comparisons: Vec<NamedComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub generated_at: u64,
    pub config: ExperimentConfig,
    pub graph_replicas: usize,
    pub limit_samples: usize,
    pub graph: Vec<FunctionalStats>,
    pub limit: Vec<FunctionalStats>,
    pub comparisons: Vec<NamedComparison>,
}

pub fn summarize(report: &Report, generated_at: u64) -> Summary {
    let rows = graph_rows(&report.graph);
    let mut keys: Vec<(usize, usize, String)> = rows.iter().map(|r| (r.n, r.rank, r.functional.clone())).collect();
    keys.sort();
    keys.dedup();
    let graph = keys
        .into_iter()
        .map(|(n, rank, f)| {
            let v: Vec<f64> =
                rows.iter().filter(|r| r.n == n && r.rank == rank && r.functional == f).map(|r| r.rescaled).collect();
            FunctionalStats { n, rank, functional: f, rescaled: Stats::of(&v) }
        })
        .collect();
    let n = report.config.limit.excursion_length;
    let lrows = limit_rows(n, &report.limit);
    let mut names: Vec<String> = lrows.iter().map(|r| r.functional.clone()).collect();
    names.sort();
    names.dedup();
    let limit = names
        .into_iter()
        .map(|f| {
            let v: Vec<f64> = lrows.iter().filter(|r| r.functional == f).map(|r| r.rescaled).collect();
            FunctionalStats { n, rank: 1, functional: f, rescaled: Stats::of(&v) }
        })
        .collect();
    Summary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        generated_at,
        config: report.config.clone(),
        graph_replicas: report.graph.len(),
        limit_samples: report.limit.len(),
        graph,
        limit,
        comparisons: report.comparisons.clone(),
    }
}

/// KS comparisons of largest-component width and radius against the limit rows,
/// each row rescaled to every component's mass and tilt-weighted per component.
pub fn profile_comparisons(report: &Report, level: f64) -> Result<Vec<NamedComparison>> {
    use crate::harness::{compare_distributions, scale_pool, UnitSummary};
    if report.limit.is_empty() || report.graph.is_empty() {
        return Ok(Vec::new());
    }
    let cfg = &report.config;
    let law = cfg.law()?;
    let norm = cfg.normalization();
    let pool: Vec<UnitSummary> = report
        .limit
        .iter()
        .map(|r| UnitSummary { raw_length: r.raw_length, sup: r.width, iota: r.radius, area: r.area })
        .collect();
    let mut sizes: Vec<usize> = report.graph.iter().map(|r| r.n).collect();
    sizes.dedup();
    let mut out = Vec::new();
    for n in sizes {
        let comps: Vec<_> = report.graph.iter().filter(|r| r.n == n).filter_map(|r| r.components.first()).collect();
        let (mut gw, mut gr, mut lw, mut lr, mut w) = (vec![], vec![], vec![], vec![], vec![]);
        for c in comps {
            gw.push(c.rescaled.width);
            gr.push(c.rescaled.radius);
            let x = c.walk_length as f64 / norm.mass(n);
            for s in scale_pool(&pool, x, cfg.alpha, law.delta(), cfg.limit.tilt) {
                lw.push(s.width);
                lr.push(s.radius);
                w.push(s.weight);
            }
        }
        out.push(NamedComparison { name: format!("width n={n}"), outcome: compare_distributions(&gw, &lw, Some(&w), level)? });
        out.push(NamedComparison { name: format!("radius n={n}"), outcome: compare_distributions(&gr, &lr, Some(&w), level)? });
    }
    Ok(out)
}

/// Graph results as stored by the command line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRun {
    pub config: ExperimentConfig,
    pub results: Vec<ReplicaResult>,
}

/// Limit results as stored by the command line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRun {
    pub config: ExperimentConfig,
    pub rows: Vec<LimitRow>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(fs::File::open(path)?))?)
}

/// Overlay of rescaled discrete profiles (grey) and limit profiles (blue).
pub fn profile_svg(report: &Report) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 40.0;
    let discrete: Vec<(f64, &[f64])> = report
        .graph
        .iter()
        .flat_map(|r| r.components.iter().filter(|c| c.rank == 1 && !c.profile.is_empty()))
        .map(|c| (c.profile_horizon, c.profile.as_slice()))
        .collect();
    let limit: Vec<(f64, &[f64])> =
        report.limit.iter().filter(|r| !r.profile.is_empty()).map(|r| (r.profile_horizon, r.profile.as_slice())).collect();
    let all = discrete.iter().chain(&limit);
    let tmax = all.clone().map(|p| p.0).fold(0.0, f64::max).max(1e-12);
    let ymax = all.flat_map(|p| p.1.iter().copied()).fold(0.0, f64::max).max(1e-12);
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str("<title>rescaled height profiles</title>\n");
    s.push_str(&format!(
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * M,
        H - 2.0 * M
    ));
    let mut line = |horizon: f64, values: &[f64], colour: &str| {
        let last = values.len().saturating_sub(1).max(1) as f64;
        let pts: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let x = M + (W - 2.0 * M) * horizon * i as f64 / last / tmax;
                let y = H - M - (H - 2.0 * M) * v / ymax;
                format!("{x:.2},{y:.2}")
            })
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-opacity=\"0.4\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
    };
    for (h, v) in &discrete {
        line(*h, v, "grey");
    }
    for (h, v) in &limit {
        line(*h, v, "steelblue");
    }
    s.push_str(&format!("<text x=\"{M}\" y=\"{}\" font-size=\"12\">time / n^((a-1)/(a+1))</text>\n", H - 10.0));
    s.push_str("</svg>\n");
    s
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub graph_csv: PathBuf,
    pub profiles_csv: PathBuf,
    pub limit_csv: PathBuf,
    pub summary_json: PathBuf,
    pub profiles_svg: PathBuf,
}

/// Write CSV tables, the JSON summary and the SVG overlay into `dir`.
pub fn emit_report(report: &Report, dir: &Path) -> Result<ReportFiles> {
    fs::create_dir_all(dir)?;
    let files = ReportFiles {
        graph_csv: dir.join("graph.csv"),
        profiles_csv: dir.join("profiles.csv"),
        limit_csv: dir.join("limit.csv"),
        summary_json: dir.join("summary.json"),
        profiles_svg: dir.join("profiles.svg"),
    };
    write_csv(&files.graph_csv, &GRAPH_HEADER, &graph_rows(&report.graph))?;
    write_csv(&files.profiles_csv, &PROFILE_HEADER, &profile_rows(&report.graph))?;
    write_csv(&files.limit_csv, &LIMIT_HEADER, &limit_rows(report.config.limit.excursion_length, &report.limit))?;
    let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut f = fs::File::create(&files.summary_json)?;
    serde_json::to_writer_pretty(&mut f, &summarize(report, now))?;
    writeln!(f)?;
    fs::write(&files.profiles_svg, profile_svg(report))?;
    Ok(files)
}
