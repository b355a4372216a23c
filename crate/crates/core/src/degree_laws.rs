//! Critical heavy-tailed degree distributions.
//!
//! The family used throughout is
//!
//! ```text
//! nu(1) = p1,  nu(2) = p2,  nu(k) = c * k^-(alpha + 2)  for k >= 3
//! ```
//!
//! with `(p1, p2)` solved from normalisation and the criticality constraint
//! `E[d^2] = 2 E[d]`. The power tail holds exactly, not only asymptotically.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terms summed explicitly before the Euler-Maclaurin remainder takes over.
pub const SERIES_CUTOFF: u64 = 1_000_000;

/// Default number of degrees covered by the inverse-CDF table.
pub const DEFAULT_TABLE_SIZE: u64 = 100_000;

/// `sum_{k >= from} k^-s` for `s > 1`.
///
/// Terms below [`SERIES_CUTOFF`] are summed directly (smallest first, with
/// compensation); the remainder is the Euler-Maclaurin expansion of the tail
/// through the `B_4` term, whose truncation error is below `K^-(s+5)`.
pub fn power_tail_sum(s: f64, from: u64) -> f64 {
    debug_assert!(s > 1.0 && from >= 1);
    let cutoff = SERIES_CUTOFF.max(from);
    let k = cutoff as f64;
    let tail = k.powf(1.0 - s) / (s - 1.0) + 0.5 * k.powf(-s) + s / 12.0 * k.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * k.powf(-s - 3.0);

    let mut sum = tail;
    let mut comp = 0.0;
    for j in (from..cutoff).rev() {
        let term = (j as f64).powf(-s);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean, second moment and criticality parameter of a degree law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub delta: f64,
    pub second_moment: f64,
    /// `E[d(d-1)] / E[d]`.
    pub theta: f64,
}

impl Moments {
    pub fn is_critical(&self) -> bool {
        (self.theta - 1.0).abs() <= 1e-12
    }
}

/// Anything with a probability mass function on `{1, 2, ...}` and known moments.
pub trait DegreeLaw {
    fn pmf(&self, k: u64) -> f64;
    fn moments(&self) -> Moments;
}

/// Free-function form of [`DegreeLaw::moments`].
pub fn moments<L: DegreeLaw + ?Sized>(law: &L) -> Moments {
    law.moments()
}

/// A law with finite support, used for checks and small experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDegreeLaw {
    masses: Vec<(u64, f64)>,
}

impl FiniteDegreeLaw {
    pub fn new(masses: Vec<(u64, f64)>) -> Result<Self> {
        let total: f64 = masses.iter().map(|&(_, p)| p).sum();
        if masses.iter().any(|&(k, p)| k == 0 || p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "finite law must put nonnegative mass on k >= 1 summing to one (got {total})"
            )));
        }
        Ok(Self { masses })
    }
}

impl DegreeLaw for FiniteDegreeLaw {
    fn pmf(&self, k: u64) -> f64 {
        self.masses.iter().filter(|&&(j, _)| j == k).map(|&(_, p)| p).sum()
    }

    fn moments(&self) -> Moments {
        let delta: f64 = self.masses.iter().map(|&(k, p)| k as f64 * p).sum();
        let second: f64 = self.masses.iter().map(|&(k, p)| (k * k) as f64 * p).sum();
        Moments { delta, second_moment: second, theta: (second - delta) / delta }
    }
}

/// The critical power-tail family, with a precomputed sampling table.
#[derive(Debug, Clone)]
pub struct CriticalDegreeLaw {
    alpha: f64,
    c: f64,
    p1: f64,
    p2: f64,
    delta: f64,
    second_moment: f64,
    table_size: u64,
    /// `body_cdf[i] = P(d <= i + 1 | d <= table_size)`
    body_cdf: Vec<f64>,
    /// `P(d > table_size)`
    tail_mass: f64,
}

/// JSON form of a law: `{alpha, c, p1, p2, delta, table_size}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawSummary {
    pub alpha: f64,
    pub c: f64,
    pub p1: f64,
    pub p2: f64,
    pub delta: f64,
    pub table_size: u64,
}

/// Solve the critical family for `(alpha, c)` with the default table size.
pub fn solve_critical_family(alpha: f64, c: f64) -> Result<CriticalDegreeLaw> {
    CriticalDegreeLaw::solve(alpha, c, DEFAULT_TABLE_SIZE)
}

impl CriticalDegreeLaw {
    pub fn solve(alpha: f64, c: f64, table_size: u64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::Domain(format!("alpha = {alpha} must lie in (1, 2)")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("c = {c} must be positive")));
        }
        if table_size < 3 {
            return Err(Error::Domain(format!("table size {table_size} must be at least 3")));
        }

        // sum_{k>=3} k^-(a+2), k^-(a+1), k^-a
        let s_mass = power_tail_sum(alpha + 2.0, 3);
        let s_mean = power_tail_sum(alpha + 1.0, 3);
        let s_second = power_tail_sum(alpha, 3);

        // criticality: sum k(k-2) nu(k) = 0, and only k = 1 contributes negatively
        let p1 = c * (s_second - 2.0 * s_mean);
        let p2 = 1.0 - p1 - c * s_mass;
        if p1 < 0.0 || p2 < 0.0 {
            return Err(Error::InfeasibleTail { alpha, c, p1, p2 });
        }
        let delta = p1 + 2.0 * p2 + c * s_mean;
        let second_moment = p1 + 4.0 * p2 + c * s_second;
        if !(delta > 1.0 && delta < 2.0) {
            return Err(Error::Domain(format!("solved mean {delta} is outside (1, 2)")));
        }

        let tail_mass = c * power_tail_sum(alpha + 2.0, table_size + 1);
        let body_mass = 1.0 - tail_mass;
        let mut body_cdf = Vec::with_capacity(table_size as usize);
        let mut acc = 0.0;
        for k in 1..=table_size {
            acc += match k {
                1 => p1,
                2 => p2,
                _ => c * (k as f64).powf(-(alpha + 2.0)),
            };
            body_cdf.push(acc / body_mass);
        }
        if let Some(last) = body_cdf.last_mut() {
            *last = 1.0;
        }

        Ok(Self { alpha, c, p1, p2, delta, second_moment, table_size, body_cdf, tail_mass })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn table_size(&self) -> u64 {
        self.table_size
    }

    /// `P(d > table_size)`, the mass handled by the tail sampler.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `P(d >= k)`.
    pub fn survival(&self, k: u64) -> f64 {
        match k {
            0 | 1 => 1.0,
            2 => 1.0 - self.p1,
            _ => self.c * power_tail_sum(self.alpha + 2.0, k),
        }
    }

    /// Stable-limit constant `A = c Gamma(2 - alpha) / (delta alpha (alpha - 1))`.
    pub fn stable_constant(&self) -> f64 {
        let a = self.alpha;
        self.c * statrs::function::gamma::gamma(2.0 - a) / (self.delta * a * (a - 1.0))
    }

    pub fn summary(&self) -> LawSummary {
        LawSummary {
            alpha: self.alpha,
            c: self.c,
            p1: self.p1,
            p2: self.p2,
            delta: self.delta,
            table_size: self.table_size,
        }
    }

    pub fn from_summary(summary: &LawSummary) -> Result<Self> {
        Self::solve(summary.alpha, summary.c, summary.table_size)
    }

    /// One draw from the law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        if u < self.tail_mass {
            return self.sample_tail(rng);
        }
        let v = (u - self.tail_mass) / (1.0 - self.tail_mass);
        let idx = self.body_cdf.partition_point(|&p| p <= v);
        (idx as u64 + 1).min(self.table_size)
    }

    pub fn size_biased(&self) -> SizeBiasedLaw {
        SizeBiasedLaw::new(self)
    }

    /// Exact draw from `nu` conditioned on `d > table_size`.
    pub fn sample_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        sample_power_tail(self.alpha + 2.0, self.table_size + 1, rng)
    }
}

/// Draw `k >= kmin` with `P(k) proportional to k^-s`, exactly.
///
/// Proposes `floor(Y)` for a continuous Pareto `Y` on `[kmin, inf)` and
/// accepts with probability `k^-s / (M * int_k^{k+1} y^-s dy)`, where
/// `M = (1 + 1/kmin)^s` bounds the ratio.
pub fn sample_power_tail<R: Rng + ?Sized>(s: f64, kmin: u64, rng: &mut R) -> u64 {
    let k0 = kmin as f64;
    let bound = (1.0 + 1.0 / k0).powf(s);
    loop {
        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        let y = k0 * u.powf(-1.0 / (s - 1.0));
        if !(y < 1.8e19) {
            continue;
        }
        let k = y.floor();
        // int_k^{k+1} y^-s dy, written to avoid cancellation for large k
        let cell = -k.powf(1.0 - s) * ((1.0 - s) * (1.0 / k).ln_1p()).exp_m1() / (s - 1.0);
        let accept = k.powf(-s) / (bound * cell);
        if rng.random::<f64>() < accept {
            return k as u64;
        }
    }
}

/// The size-biased law `k nu(k) / delta`: degrees of vertices reached along an edge.
///
/// Increments `d* - 2` have mean zero exactly at criticality.
#[derive(Debug, Clone)]
pub struct SizeBiasedLaw {
    alpha: f64,
    table_size: u64,
    body_cdf: Vec<f64>,
    tail_mass: f64,
}

impl SizeBiasedLaw {
    pub fn new(law: &CriticalDegreeLaw) -> Self {
        let (alpha, c, delta, table_size) = (law.alpha, law.c, law.delta, law.table_size);
        let tail_mass = c * power_tail_sum(alpha + 1.0, table_size + 1) / delta;
        let body_mass = 1.0 - tail_mass;
        let mut body_cdf = Vec::with_capacity(table_size as usize);
        let mut acc = 0.0;
        for k in 1..=table_size {
            acc += k as f64 * law.pmf(k) / delta;
            body_cdf.push(acc / body_mass);
        }
        if let Some(last) = body_cdf.last_mut() {
            *last = 1.0;
        }
        Self { alpha, table_size, body_cdf, tail_mass }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        if u < self.tail_mass {
            return sample_power_tail(self.alpha + 1.0, self.table_size + 1, rng);
        }
        let v = (u - self.tail_mass) / (1.0 - self.tail_mass);
        let idx = self.body_cdf.partition_point(|&p| p <= v);
        (idx as u64 + 1).min(self.table_size)
    }

    /// `P(d* = k)` from the table, for tests.
    pub fn body_pmf(&self, k: u64) -> f64 {
        let k = k as usize;
        let hi = self.body_cdf[k - 1];
        let lo = if k >= 2 { self.body_cdf[k - 2] } else { 0.0 };
        (hi - lo) * (1.0 - self.tail_mass)
    }
}

impl DegreeLaw for CriticalDegreeLaw {
    fn pmf(&self, k: u64) -> f64 {
        match k {
            0 => 0.0,
            1 => self.p1,
            2 => self.p2,
            _ => self.c * (k as f64).powf(-(self.alpha + 2.0)),
        }
    }

    fn moments(&self) -> Moments {
        Moments {
            delta: self.delta,
            second_moment: self.second_moment,
            theta: (self.second_moment - self.delta) / self.delta,
        }
    }
}

/// The limiting probability that the configuration multigraph is simple,
/// `exp(-theta/2 - theta^2/4)`.
pub fn simple_probability_limit(theta: f64) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(Error::Domain(format!("theta = {theta} must be nonnegative")));
    }
    Ok((-theta / 2.0 - theta * theta / 4.0).exp())
}

/// A degree sequence `d_1..d_n` with even sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequence {
    degrees: Vec<u64>,
    parity_adjusted: bool,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<u64>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::Domain("degree sequence must be nonempty".into()));
        }
        if degrees.iter().any(|&d| d == 0) {
            return Err(Error::Domain("all degrees must be at least 1".into()));
        }
        let sum: u64 = degrees.iter().sum();
        if sum % 2 == 1 {
            return Err(Error::Parity(sum));
        }
        Ok(Self { degrees, parity_adjusted: false })
    }

    /// Fix the parity by incrementing the last degree when the sum is odd.
    pub fn with_parity_fix(mut degrees: Vec<u64>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::Domain("degree sequence must be nonempty".into()));
        }
        let odd = degrees.iter().sum::<u64>() % 2 == 1;
        if odd {
            *degrees.last_mut().unwrap() += 1;
        }
        let mut seq = Self::new(degrees)?;
        seq.parity_adjusted = odd;
        Ok(seq)
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn parity_adjusted(&self) -> bool {
        self.parity_adjusted
    }

    pub fn total(&self) -> u64 {
        self.degrees.iter().sum()
    }

    /// `sum d(d-1) / sum d` of the realised sequence.
    pub fn empirical_theta(&self) -> f64 {
        let s1: f64 = self.degrees.iter().map(|&d| d as f64).sum();
        let s2: f64 = self.degrees.iter().map(|&d| (d * d.saturating_sub(1)) as f64).sum();
        s2 / s1
    }
}

/// `n` i.i.d. draws from `law`, parity-fixed on the last entry.
pub fn sample_degrees<R: Rng + ?Sized>(
    law: &CriticalDegreeLaw,
    n: usize,
    rng: &mut R,
) -> Result<DegreeSequence> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let degrees = (0..n).map(|_| law.sample(rng)).collect();
    DegreeSequence::with_parity_fix(degrees)
}
