//! Seeded, parallel Monte Carlo experiments on the graph and limit sides.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config_model::{construct, split_backedges, ExplorationMode};
use crate::degree_laws::{sample_degrees, CriticalDegreeLaw};
use crate::error::{Error, Result};
use crate::exploration_stats::{component_walk, height_profile, peak_level, x_walk};
use crate::lamperti::{StepFn, StepLamperti};
use crate::paths::GridPath;
use crate::stable::{log_tilt_weight, poisson_marks, ExcursionSampler, Tilt};

/// Number of rescaled times at which profiles are stored.
pub const SNAPSHOTS: usize = 64;

/// Rescaling exponents for a given `alpha`; the only place they are written down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub alpha: f64,
}

impl Normalization {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    /// Exponent of `n` for profile time (graph distance).
    pub fn time_exponent(&self) -> f64 {
        (self.alpha - 1.0) / (self.alpha + 1.0)
    }

    /// Exponent of `n` for profile height (vertices per level).
    pub fn height_exponent(&self) -> f64 {
        1.0 / (self.alpha + 1.0)
    }

    /// Exponent of `n` for component mass.
    pub fn mass_exponent(&self) -> f64 {
        self.alpha / (self.alpha + 1.0)
    }

    pub fn time(&self, n: usize) -> f64 {
        (n as f64).powf(self.time_exponent())
    }

    pub fn height(&self, n: usize) -> f64 {
        (n as f64).powf(self.height_exponent())
    }

    pub fn mass(&self, n: usize) -> f64 {
        (n as f64).powf(self.mass_exponent())
    }
}

/// Functionals recorded per component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Size,
    Width,
    Radius,
    PeakDay,
    Surplus,
    Area,
    Profile,
}

impl Functional {
    pub const SCALAR: [Functional; 6] =
        [Functional::Size, Functional::Width, Functional::Radius, Functional::PeakDay, Functional::Surplus, Functional::Area];

    pub fn name(&self) -> &'static str {
        match self {
            Functional::Size => "size",
            Functional::Width => "width",
            Functional::Radius => "radius",
            Functional::PeakDay => "peak_day",
            Functional::Surplus => "surplus",
            Functional::Area => "area",
            Functional::Profile => "profile",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::SCALAR.into_iter().chain([Functional::Profile]).find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimitConfig {
    /// Target walk length `N` of sampled excursions.
    pub excursion_length: usize,
    /// Relative window `eta`: lengths in `[N, (1 + eta) N]` are accepted.
    pub window: f64,
    /// Grid step for stable path sampling.
    pub grid: f64,
    /// Tilting applied to unit excursions.
    pub tilt: TiltMode,
    /// Excursions drawn per graph component when mass matching.
    pub per_component: usize,
    /// Rejection budget per excursion.
    pub budget: u64,
    /// Walk length of mass-matched excursions; `None` uses each component's own walk length.
    pub matched_length: Option<usize>,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self { excursion_length: 1000, window: 0.05, grid: 1e-3, tilt: TiltMode::Exp, per_component: 8, budget: crate::stable::DEFAULT_BUDGET, matched_length: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltMode {
    None,
    /// `exp(delta^-1 int e)` with the law's `delta`.
    Exp,
    /// `(int e)^k`.
    Poly(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub c: f64,
    pub table_size: u64,
    pub sizes: Vec<usize>,
    pub replicas: usize,
    /// Number of largest components tracked per replica.
    pub components: usize,
    pub seed: u64,
    pub functionals: Vec<Functional>,
    pub out_dir: Option<PathBuf>,
    pub limit: LimitConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            c: 0.5,
            table_size: 1000,
            sizes: vec![10_000],
            replicas: 100,
            components: 1,
            seed: 1,
            functionals: Functional::SCALAR.into_iter().chain([Functional::Profile]).collect(),
            out_dir: None,
            limit: LimitConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.iter().any(|&n| n == 0) {
            return Err(Error::Domain("all sizes must be at least 1".into()));
        }
        if self.replicas == 0 || self.components == 0 {
            return Err(Error::Domain("replicas and components must be at least 1".into()));
        }
        if self.limit.excursion_length == 0 || !(self.limit.window > 0.0 && self.limit.window < 1.0) {
            return Err(Error::Domain("excursion length must be positive and window in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn law(&self) -> Result<CriticalDegreeLaw> {
        CriticalDegreeLaw::solve(self.alpha, self.c, self.table_size)
    }

    pub fn normalization(&self) -> Normalization {
        Normalization::new(self.alpha)
    }

    fn wants(&self, f: Functional) -> bool {
        self.functionals.contains(&f)
    }
}

/// What a random stream is used for; part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Graph = 1,
    Limit = 2,
    Matched = 3,
    Marks = 4,
}

/// Independent stream keyed by `(master, n, replica, purpose)`.
///
/// The four words form the ChaCha key, so distinct tuples never share a stream
/// and the stream does not depend on scheduling.
pub fn stream(master: u64, n: u64, replica: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (i, w) in [master, n, replica, purpose as u64].into_iter().enumerate() {
        key[8 * i..8 * i + 8].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// One tracked component of one graph replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentResult {
    /// 1 for the largest component.
    pub rank: usize,
    /// Graph vertices.
    pub size: usize,
    /// Forest vertices (graph vertices plus two per surplus edge).
    pub walk_length: usize,
    pub surplus: usize,
    /// `max_h Z(h)`.
    pub width: u64,
    /// Largest graph distance from the root.
    pub radius: usize,
    /// First maximiser of `Z`.
    pub peak_day: usize,
    /// `sum_{k < walk_length} (x(k) + 1)` over the component walk.
    pub area: u64,
    pub rescaled: Rescaled,
    /// `Z / n^(1/(alpha+1))` at [`SNAPSHOTS`] evenly spaced rescaled times in `[0, profile_horizon]`.
    pub profile: Vec<f64>,
    pub profile_horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescaled {
    pub size: f64,
    pub width: f64,
    pub radius: f64,
    pub peak_day: f64,
    /// Area of the rescaled walk excursion, `area / n`.
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaResult {
    pub n: usize,
    pub replica: usize,
    pub component_count: usize,
    pub components: Vec<ComponentResult>,
}

/// One replica on the graph side.
pub fn run_graph_replica(cfg: &ExperimentConfig, law: &CriticalDegreeLaw, n: usize, replica: usize) -> Result<ReplicaResult> {
    let mut rng = stream(cfg.seed, n as u64, replica as u64, Purpose::Graph);
    let degrees = sample_degrees(law, n, &mut rng)?;
    let (g, log) = construct(&degrees, ExplorationMode::BreadthFirst, &mut rng)?;
    let forest = split_backedges(&g, &log);
    let x = x_walk(&forest);
    let graph_ranges = log.component_ranges();
    let forest_ranges = forest.component_ranges();
    let mut by_size: Vec<usize> = (0..graph_ranges.len()).collect();
    by_size.sort_by(|&a, &b| graph_ranges[b].len().cmp(&graph_ranges[a].len()).then(a.cmp(&b)));

    let norm = cfg.normalization();
    let (tn, hn, mn) = (norm.time(n), norm.height(n), norm.mass(n));
    let mut components = Vec::new();
    for (i, &c) in by_size.iter().take(cfg.components).enumerate() {
        let range = graph_ranges[c].clone();
        let frange = forest_ranges[c].clone();
        let root = log.order[range.start];
        let (z, _) = height_profile(&g, root);
        let zs = z.values();
        let width = *zs.iter().max().unwrap() as u64;
        let radius = zs.len() - 1;
        let peak = peak_level(&z);
        let surplus = forest.pairs_in(frange.clone()).len();
        let walk = component_walk(&x, frange.clone());
        let steps = walk.steps();
        let area: u64 = walk.values()[..steps].iter().map(|&v| (v + 1) as u64).sum();
        let horizon = zs.len() as f64 / tn;
        let profile = if cfg.wants(Functional::Profile) {
            (0..SNAPSHOTS)
                .map(|j| {
                    let t = horizon * j as f64 / (SNAPSHOTS - 1) as f64;
                    let h = (t * tn).floor() as usize;
                    zs.get(h).copied().unwrap_or(0) as f64 / hn
                })
                .collect()
        } else {
            Vec::new()
        };
        components.push(ComponentResult {
            rank: i + 1,
            size: range.len(),
            walk_length: frange.len(),
            surplus,
            width,
            radius,
            peak_day: peak,
            area,
            rescaled: Rescaled {
                size: range.len() as f64 / mn,
                width: width as f64 / hn,
                radius: radius as f64 / tn,
                peak_day: peak as f64 / tn,
                area: area as f64 / n as f64,
            },
            profile,
            profile_horizon: horizon,
        });
    }
    Ok(ReplicaResult { n, replica, component_count: graph_ranges.len(), components })
}

/// All graph replicas, ordered by `(n, replica)`.
///
/// `on_size` sees each size's replicas as soon as they finish, so callers can
/// flush partial results.
pub fn run_graph_experiment_with(
    cfg: &ExperimentConfig,
    mut on_size: impl FnMut(&[ReplicaResult]) -> Result<()>,
) -> Result<Vec<ReplicaResult>> {
    cfg.validate()?;
    let law = cfg.law()?;
    let mut out = Vec::new();
    for &n in &cfg.sizes {
        let batch: Vec<ReplicaResult> =
            (0..cfg.replicas).into_par_iter().map(|r| run_graph_replica(cfg, &law, n, r)).collect::<Result<_>>()?;
        on_size(&batch)?;
        out.extend(batch);
    }
    Ok(out)
}

pub fn run_graph_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReplicaResult>> {
    run_graph_experiment_with(cfg, |_| Ok(()))
}

/// Functionals of one weighted limit excursion of mass `mass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub replica: usize,
    /// Walk length the excursion was built from.
    pub raw_length: usize,
    pub mass: f64,
    pub log_weight: f64,
    /// Self-normalised weight within its batch.
    pub weight: f64,
    pub width: f64,
    pub radius: f64,
    pub peak_day: f64,
    pub area: f64,
    /// `iota(u zeta)` at `u = 1/4, 1/2, 3/4`.
    pub depth_quartiles: [f64; 3],
    pub marks: usize,
    pub profile: Vec<f64>,
    pub profile_horizon: f64,
}

/// Functionals of an excursion given as a step path, at mass 1.
pub fn limit_row(e: &GridPath, tilt: Tilt, delta: f64, rng: &mut ChaCha8Rng) -> Result<LimitRow> {
    let f = StepFn::from_path(e)?;
    let pair = f.lamperti_pair()?;
    let radius = pair.iota_at_zeta_minus.to_f64();
    let depth_quartiles = [0.25, 0.5, 0.75].map(|u| f.iota(u * f.zeta()).map(|v| v.to_f64()).unwrap_or(f64::INFINITY));
    let marks = poisson_marks(e, delta, rng)?.len();
    let (peak_day, profile, horizon) = profile_snapshots(&pair);
    Ok(LimitRow {
        replica: 0,
        raw_length: e.steps(),
        mass: 1.0,
        log_weight: log_tilt_weight(e, tilt),
        weight: 1.0,
        width: f.sup(),
        radius,
        peak_day,
        area: e.integral(),
        depth_quartiles,
        marks,
        profile,
        profile_horizon: horizon,
    })
}

/// Peak time of `h0` and its values at [`SNAPSHOTS`] times in `[0, radius]`.
fn profile_snapshots(pair: &StepLamperti<f64>) -> (f64, Vec<f64>, f64) {
    let Some(h0) = &pair.h0 else {
        return (0.0, vec![0.0; SNAPSHOTS], 0.0);
    };
    let mut best = 0;
    for (i, &v) in h0.values().iter().enumerate() {
        if v > h0.values()[best] {
            best = i;
        }
    }
    let peak = h0.breaks()[best];
    let horizon = h0.zeta();
    let profile = (0..SNAPSHOTS).map(|j| h0.value_at(horizon * j as f64 / (SNAPSHOTS - 1) as f64)).collect();
    (peak, profile, horizon)
}

/// Normalise log-weights to weights summing to one.
pub fn self_normalize(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return vec![1.0 / log_weights.len() as f64; log_weights.len()];
    }
    let w: Vec<f64> = log_weights.iter().map(|&l| (l - max).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

fn tilt_for(mode: TiltMode, law: &CriticalDegreeLaw) -> Tilt {
    match mode {
        TiltMode::None => Tilt::None,
        TiltMode::Exp => Tilt::Exp { delta: law.delta() },
        TiltMode::Poly(k) => Tilt::Poly { k },
    }
}

/// Unit-mass weighted excursions: `replicas` draws of length about `limit.excursion_length`.
pub fn run_limit_experiment(cfg: &ExperimentConfig) -> Result<Vec<LimitRow>> {
    cfg.validate()?;
    let law = cfg.law()?;
    let sampler = ExcursionSampler::new(&law).with_budget(cfg.limit.budget);
    let tilt = tilt_for(cfg.limit.tilt, &law);
    let n = cfg.limit.excursion_length;
    let mut rows: Vec<LimitRow> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(cfg.seed, n as u64, r as u64, Purpose::Limit);
            let e = sampler.sample(n, cfg.limit.window, &mut rng)?;
            let mut marks_rng = stream(cfg.seed, n as u64, r as u64, Purpose::Marks);
            let mut row = limit_row(&e.path, tilt, law.delta(), &mut marks_rng)?;
            row.replica = r;
            row.raw_length = e.raw_length;
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let w = self_normalize(&rows.iter().map(|r| r.log_weight).collect::<Vec<_>>());
    for (row, w) in rows.iter_mut().zip(w) {
        row.weight = w;
    }
    Ok(rows)
}

/// A weighted limit sample matched to one graph component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedSample {
    pub mass: f64,
    pub width: f64,
    pub radius: f64,
    /// Sums to one over the samples matched to the same component.
    pub weight: f64,
}

/// Limit-side samples matched to the rescaled mass of each component.
///
/// For a component with walk length `m` the excursions are drawn with length in
/// `[N, (1 + eta) N]` (`N = m` unless `limit.matched_length` is set), rescaled to unit length and then to mass
/// `x = m / n^(alpha/(alpha+1))`; the exponential tilt uses `int e_x = x^(1+1/alpha) int e`.
pub fn mass_matched_limit(
    cfg: &ExperimentConfig,
    law: &CriticalDegreeLaw,
    n: usize,
    components: &[ComponentResult],
) -> Result<Vec<Vec<MatchedSample>>> {
    let sampler = ExcursionSampler::new(law).with_budget(cfg.limit.budget);
    let norm = cfg.normalization();
    let alpha = cfg.alpha;
    let k = cfg.limit.per_component.max(1);
    components
        .par_iter()
        .enumerate()
        .map(|(j, comp)| {
            let m = comp.walk_length.max(1);
            let x = m as f64 / norm.mass(n);
            let len = cfg.limit.matched_length.unwrap_or(m);
            let mut rng = stream(cfg.seed, n as u64, j as u64, Purpose::Matched);
            let mut raw = Vec::with_capacity(k);
            for _ in 0..k {
                let e = sampler.sample(len, cfg.limit.window, &mut rng)?.path;
                let f = StepFn::from_path(&e)?;
                let iota = f.lamperti_pair()?.iota_at_zeta_minus.to_f64();
                let log_w = match cfg.limit.tilt {
                    TiltMode::None => 0.0,
                    TiltMode::Exp => x.powf(1.0 + 1.0 / alpha) * e.integral() / law.delta(),
                    TiltMode::Poly(p) => p as f64 * (x.powf(1.0 + 1.0 / alpha) * e.integral()).ln(),
                };
                raw.push((x.powf(1.0 / alpha) * f.sup(), x.powf(1.0 - 1.0 / alpha) * iota, log_w));
            }
            let w = self_normalize(&raw.iter().map(|r| r.2).collect::<Vec<_>>());
            Ok(raw.iter().zip(w).map(|(&(width, radius, _), weight)| MatchedSample { mass: x, width, radius, weight }).collect())
        })
        .collect()
}

/// Functionals of one unit-length excursion, enough to rebuild them at any mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSummary {
    pub raw_length: usize,
    pub sup: f64,
    /// `iota(1-)`.
    pub iota: f64,
    pub area: f64,
}

/// `size` unit excursions of walk length in `[N, (1 + eta) N]`, `N = limit.excursion_length`.
pub fn unit_pool(cfg: &ExperimentConfig, law: &CriticalDegreeLaw, size: usize) -> Result<Vec<UnitSummary>> {
    let sampler = ExcursionSampler::new(law).with_budget(cfg.limit.budget);
    let n = cfg.limit.excursion_length;
    (0..size)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(cfg.seed, n as u64, r as u64, Purpose::Limit);
            let e = sampler.sample(n, cfg.limit.window, &mut rng)?;
            let f = StepFn::from_path(&e.path)?;
            let iota = f.lamperti_pair()?.iota_at_zeta_minus.to_f64();
            Ok(UnitSummary { raw_length: e.raw_length, sup: f.sup(), iota, area: e.path.integral() })
        })
        .collect()
}

/// The pool scaled to mass `x`, with tilt weights normalised to sum to one.
///
/// `width = x^(1/alpha) sup e`, `radius = x^(1-1/alpha) iota(1-)`, `int e_x = x^(1+1/alpha) int e`.
pub fn scale_pool(pool: &[UnitSummary], x: f64, alpha: f64, delta: f64, tilt: TiltMode) -> Vec<MatchedSample> {
    let area_scale = x.powf(1.0 + 1.0 / alpha);
    let logw: Vec<f64> = pool
        .iter()
        .map(|u| match tilt {
            TiltMode::None => 0.0,
            TiltMode::Exp => area_scale * u.area / delta,
            TiltMode::Poly(k) => k as f64 * (area_scale * u.area).ln(),
        })
        .collect();
    let (ws, rs) = (x.powf(1.0 / alpha), x.powf(1.0 - 1.0 / alpha));
    pool.iter()
        .zip(self_normalize(&logw))
        .map(|(u, weight)| MatchedSample { mass: x, width: ws * u.sup, radius: rs * u.iota, weight })
        .collect()
}

/// Outcome of a two-sample Kolmogorov-Smirnov comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub level: f64,
    pub n_a: usize,
    /// Kish effective size of the (possibly weighted) second sample.
    pub n_b_effective: f64,
    pub pass: bool,
}

/// Kish effective sample size `(sum w)^2 / sum w^2`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 > 0.0 {
        s * s / s2
    } else {
        0.0
    }
}

/// Two-sample KS statistic; `weights_b` gives a weighted empirical CDF for `b`.
///
/// The critical value is the asymptotic `sqrt(-ln(level/2)/2) sqrt((n + m)/(n m))`
/// with `m` the effective size of `b`.
pub fn compare_distributions(a: &[f64], b: &[f64], weights_b: Option<&[f64]>, level: f64) -> Result<KsOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(w) = weights_b {
        if w.len() != b.len() || w.iter().any(|&v| !(v >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Domain("weights must match the sample, be nonnegative and not all zero".into()));
        }
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("level {level} outside (0, 1)")));
    }
    let mut xa = a.to_vec();
    xa.sort_by(f64::total_cmp);
    let ones = vec![1.0; b.len()];
    let wb = weights_b.unwrap_or(&ones);
    let mut xb: Vec<(f64, f64)> = b.iter().copied().zip(wb.iter().copied()).collect();
    xb.sort_by(|p, q| p.0.total_cmp(&q.0));
    let total_b: f64 = wb.iter().sum();
    let na = xa.len() as f64;

    let (mut i, mut j) = (0, 0);
    let mut fb = 0.0f64;
    let mut d = 0.0f64;
    while i < xa.len() || j < xb.len() {
        let v = match (xa.get(i), xb.get(j)) {
            (Some(&p), Some(&(q, _))) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&(q, _))) => q,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i] <= v {
            i += 1;
        }
        while j < xb.len() && xb[j].0 <= v {
            fb += xb[j].1;
            j += 1;
        }
        d = d.max((i as f64 / na - fb / total_b).abs());
    }
    let m = if weights_b.is_some() { effective_sample_size(wb) } else { b.len() as f64 };
    let critical = (-(level / 2.0).ln() / 2.0).sqrt() * ((na + m) / (na * m)).sqrt();
    Ok(KsOutcome { statistic: d, critical, level, n_a: a.len(), n_b_effective: m, pass: d < critical })
}

/// Outcome of a two-sample chi-square homogeneity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square test that two count vectors over the same bins share one law.
///
/// Bins empty in both samples are dropped.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquareOutcome> {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    if a.len() != b.len() {
        return Err(Error::Domain("count vectors differ in length".into()));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::EmptySample);
    }
    let mut stat = 0.0;
    let mut bins = 0;
    for (&x, &y) in a.iter().zip(b) {
        let tot = (x + y) as f64;
        if tot == 0.0 {
            continue;
        }
        bins += 1;
        let (ea, eb) = (tot * na / (na + nb), tot * nb / (na + nb));
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let dof = bins.max(2) - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(ChiSquareOutcome { statistic: stat, dof, p_value: 1.0 - dist.cdf(stat) })
}

/// Bin edges at pooled quantiles, merged until every bin holds at least `min_count` pooled values.
pub fn pooled_bins(values: &[f64], bins: usize, min_count: usize) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut edges: Vec<f64> = (1..bins).map(|i| v[i * v.len() / bins]).collect();
    edges.dedup();
    let count = |lo: f64, hi: f64| v.iter().filter(|&&x| x >= lo && x < hi).count();
    let mut out: Vec<f64> = Vec::new();
    let mut lo = f64::NEG_INFINITY;
    for e in edges {
        if count(lo, e) >= min_count {
            out.push(e);
            lo = e;
        }
    }
    if let Some(&last) = out.last() {
        if count(last, f64::INFINITY) < min_count {
            out.pop();
        }
    }
    out
}

/// Counts of `values` in the bins delimited by `edges` (left-closed).
pub fn bin_counts(values: &[f64], edges: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; edges.len() + 1];
    for &x in values {
        counts[edges.partition_point(|&e| e <= x)] += 1;
    }
    counts
}

/// Median and interquartile range of a sample (linear interpolation).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
