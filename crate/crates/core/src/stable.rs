//! Spectrally positive stable paths, their excursions, tiltings and Poisson marks.
//!
//! The Laplace exponent is `Psi(lambda) = A lambda^alpha`, so that
//! `E[exp(-lambda X(t))] = exp(t A lambda^alpha)` for `alpha in (1, 2)`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::degree_laws::{CriticalDegreeLaw, SizeBiasedLaw};
use crate::error::{Error, Result};
use crate::lamperti::{StepFn, StepLamperti};
use crate::paths::{GridPath, PathKind, StepPath};

/// Default relative width of the excursion length window.
pub const DEFAULT_WINDOW: f64 = 0.05;

/// Default number of walk excursions tried before giving up.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableConfig {
    pub alpha: f64,
    pub a: f64,
    pub delta: f64,
    pub dt: f64,
}

impl StableConfig {
    pub fn new(alpha: f64, a: f64, delta: f64, dt: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(Error::Domain(format!("alpha = {alpha} must lie in (1, 2)")));
        }
        if !(a > 0.0 && delta > 0.0 && dt > 0.0) {
            return Err(Error::Domain(format!("need A > 0, delta > 0, dt > 0 (got {a}, {delta}, {dt})")));
        }
        Ok(Self { alpha, a, delta, dt })
    }

    /// `A = c Gamma(2 - alpha) / (delta alpha (alpha - 1))` from the degree law.
    pub fn from_law(law: &CriticalDegreeLaw, dt: f64) -> Result<Self> {
        Self::new(law.alpha(), law.stable_constant(), law.delta(), dt)
    }

    /// `E[exp(-lambda X(t))]`.
    pub fn laplace(&self, lambda: f64, t: f64) -> f64 {
        (t * self.a * lambda.powf(self.alpha)).exp()
    }

    /// Scale of the totally skewed stable law of an increment over `dt`.
    ///
    /// With `S_alpha(sigma, 1, 0)`, `E[exp(-lambda Y)] = exp(sigma^alpha lambda^alpha / |cos(pi alpha / 2)|)`.
    pub fn increment_scale(&self, dt: f64) -> f64 {
        (self.a * dt * (FRAC_PI_2 * self.alpha).cos().abs()).powf(1.0 / self.alpha)
    }
}

/// One draw from `S_alpha(1, 1, 0)` by the Chambers-Mallows-Stuck method.
pub fn standard_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = (rng.random::<f64>() - 0.5) * std::f64::consts::PI;
    let w: f64 = Exp1.sample(rng);
    let t = (FRAC_PI_2 * alpha).tan();
    let b = t.atan() / alpha;
    let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
    let va = alpha * (v + b);
    s * va.sin() / v.cos().powf(1.0 / alpha) * ((v - va).cos() / w).powf((1.0 - alpha) / alpha)
}

/// `X` on the grid `0, dt, ..., T` (last step shortened to end at `T`).
pub fn sample_stable_path<R: Rng + ?Sized>(cfg: &StableConfig, t_end: f64, rng: &mut R) -> Result<GridPath> {
    StableConfig::new(cfg.alpha, cfg.a, cfg.delta, cfg.dt)?;
    if !(t_end > 0.0) || cfg.dt > t_end {
        return Err(Error::Domain(format!("need 0 < dt <= T (dt = {}, T = {t_end})", cfg.dt)));
    }
    let steps = (t_end / cfg.dt).round().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let sigma = cfg.increment_scale(dt);
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = 0.0;
    values.push(x);
    for _ in 0..steps {
        x += sigma * standard_stable(cfg.alpha, rng);
        values.push(x);
    }
    Ok(StepPath::new(values, PathKind::Walk).with_scales(dt, 1.0))
}

/// Radon-Nikodym weight of the exponentially tilted process on `[0, t]`:
/// `exp(-delta^-1 sum s_i dX_i - A t^(alpha+1) / ((alpha + 1) delta^alpha))`, left endpoints.
pub fn tilted_path_weight(path: &GridPath, cfg: &StableConfig) -> f64 {
    log_tilted_path_weight(path, cfg).exp()
}

pub fn log_tilted_path_weight(path: &GridPath, cfg: &StableConfig) -> f64 {
    let v = path.values();
    let dt = path.time_scale();
    let scale = path.space_scale();
    let mut integral = 0.0;
    for i in 0..path.steps() {
        integral += i as f64 * dt * (v[i + 1] - v[i]) * scale;
    }
    let t = path.duration();
    let a = cfg.alpha;
    -integral / cfg.delta - cfg.a * t.powf(a + 1.0) / ((a + 1.0) * cfg.delta.powf(a))
}

/// Which tilting produced a [`WeightedPath`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tilt {
    None,
    /// `exp(delta^-1 int e)`.
    Exp { delta: f64 },
    /// `(int e)^k`.
    Poly { k: u32 },
    /// The process-level tilt of the stable path.
    Process,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPath {
    pub path: GridPath,
    pub weight: f64,
    pub meta: Tilt,
}

/// Stable path over `[0, t]` together with its process-tilt weight.
pub fn sample_tilted_path<R: Rng + ?Sized>(cfg: &StableConfig, t_end: f64, rng: &mut R) -> Result<WeightedPath> {
    let path = sample_stable_path(cfg, t_end, rng)?;
    let weight = tilted_path_weight(&path, cfg);
    Ok(WeightedPath { path, weight, meta: Tilt::Process })
}

/// Weight of an excursion under a tilting, from the step integral of `e`.
pub fn tilt_weights(e: &GridPath, tilt: Tilt) -> f64 {
    log_tilt_weight(e, tilt).exp()
}

pub fn log_tilt_weight(e: &GridPath, tilt: Tilt) -> f64 {
    match tilt {
        Tilt::None | Tilt::Poly { k: 0 } => 0.0,
        Tilt::Exp { delta } => e.integral() / delta,
        Tilt::Poly { k } => k as f64 * e.integral().ln(),
        Tilt::Process => 0.0,
    }
}

/// `e_x(t) = x^(1/alpha) e(t / x)`.
pub fn scale_excursion(e: &GridPath, x: f64, alpha: f64) -> GridPath {
    e.clone().with_scales(e.time_scale() * x, e.space_scale() * x.powf(1.0 / alpha))
}

/// Which construction produced an excursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExcursionRoute {
    WalkRejection,
    Chaumont,
}

/// A unit-length excursion and the raw length it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledExcursion {
    pub path: GridPath,
    pub raw_length: usize,
    pub route: ExcursionRoute,
}

/// Excursions of the critical Lukasiewicz walk with increments `d* - 2`, `d*` size-biased.
#[derive(Debug, Clone)]
pub struct ExcursionSampler {
    alpha: f64,
    steps: SizeBiasedLaw,
    budget: u64,
}

impl ExcursionSampler {
    pub fn new(law: &CriticalDegreeLaw) -> Self {
        Self { alpha: law.alpha(), steps: law.size_biased(), budget: DEFAULT_BUDGET }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Walk from 0 until it first hits -1, abandoning it after `max_len` steps.
    fn try_walk<R: Rng + ?Sized>(&self, max_len: usize, rng: &mut R, buf: &mut Vec<i64>) -> Option<usize> {
        buf.clear();
        let mut x = 0i64;
        buf.push(x);
        loop {
            x += self.steps.sample(rng) as i64 - 2;
            buf.push(x);
            if x < 0 {
                return Some(buf.len() - 1);
            }
            if buf.len() > max_len {
                return None;
            }
        }
    }

    /// Raw walk excursion `x(0..=L)` with `L` in `[n, (1 + eta) n]`; `x(L) = -1`.
    pub fn sample_raw<R: Rng + ?Sized>(&self, n: usize, eta: f64, rng: &mut R) -> Result<Vec<i64>> {
        if n == 0 || !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Domain(format!("need n >= 1 and eta in (0, 1) (got {n}, {eta})")));
        }
        let max_len = ((1.0 + eta) * n as f64).floor() as usize;
        let mut buf = Vec::new();
        let mut longest = 0;
        for _ in 0..self.budget {
            match self.try_walk(max_len, rng, &mut buf) {
                Some(len) if len >= n => return Ok(buf),
                Some(len) => longest = longest.max(len),
                None => {}
            }
        }
        Err(Error::RejectionBudgetExceeded { budget: self.budget, accepted: 0, longest })
    }

    /// Unit-length excursion: values `(x(k) + 1) L^(-1/alpha)` at times `k / L`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, eta: f64, rng: &mut R) -> Result<SampledExcursion> {
        let raw = self.sample_raw(n, eta, rng)?;
        let len = raw.len() - 1;
        Ok(SampledExcursion { path: rescale_walk_excursion(&raw, self.alpha), raw_length: len, route: ExcursionRoute::WalkRejection })
    }
}

/// Shift a walk excursion ending at -1 up by one and normalise it to unit length.
pub fn rescale_walk_excursion(raw: &[i64], alpha: f64) -> GridPath {
    let len = raw.len() - 1;
    let values = raw.iter().map(|&v| (v + 1) as f64).collect();
    StepPath::new(values, PathKind::Excursion).with_scales(1.0 / len as f64, (len as f64).powf(-1.0 / alpha))
}

/// Sample one unit excursion by the walk-rejection route.
pub fn sample_excursion<R: Rng + ?Sized>(
    law: &CriticalDegreeLaw,
    n: usize,
    eta: f64,
    rng: &mut R,
) -> Result<SampledExcursion> {
    ExcursionSampler::new(law).sample(n, eta, rng)
}

/// Excursion straddling time 1 of a grid stable path, normalised to unit length.
///
/// `g` is the last grid time in `[0, 1]` where the path attains its running
/// infimum, `d` the first grid time after 1 where it drops below that level.
pub fn sample_excursion_chaumont<R: Rng + ?Sized>(
    cfg: &StableConfig,
    rng: &mut R,
    max_steps: usize,
) -> Result<SampledExcursion> {
    let path = sample_stable_path(cfg, 1.0, rng)?;
    let dt = path.time_scale();
    let mut v = path.into_values();
    let m = v.len() - 1;
    let mut g = 0;
    for k in 0..=m {
        if v[k] <= v[g] {
            g = k;
        }
    }
    let level = v[g];
    let sigma = cfg.increment_scale(dt);
    let mut x = v[m];
    while x >= level {
        if v.len() > m + max_steps {
            return Err(Error::RejectionBudgetExceeded { budget: max_steps as u64, accepted: 0, longest: v.len() - g });
        }
        x += sigma * standard_stable(cfg.alpha, rng);
        v.push(x);
    }
    let d = v.len() - 1;
    let zeta = (d - g) as f64 * dt;
    let mut values: Vec<f64> = v[g..=d].iter().map(|&y| y - level).collect();
    *values.last_mut().unwrap() = 0.0;
    let path = StepPath::new(values, PathKind::Excursion).with_scales(dt / zeta, zeta.powf(-1.0 / cfg.alpha));
    Ok(SampledExcursion { path, raw_length: d - g, route: ExcursionRoute::Chaumont })
}

/// A Poisson point under the excursion and its completion time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub s: f64,
    pub y: f64,
    /// `inf{u >= s : e(u) <= y}`.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PoissonMarks {
    pub marks: Vec<Mark>,
}

impl PoissonMarks {
    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }
}

/// First time at or after `s` where the step path drops to `y` or below.
pub fn completion_time(e: &GridPath, s: f64, y: f64) -> f64 {
    let dt = e.time_scale();
    let vals = e.scaled_values();
    let start = e.index_at(s);
    if vals[start] <= y {
        return s;
    }
    for (k, &v) in vals.iter().enumerate().skip(start + 1) {
        if v <= y {
            return k as f64 * dt;
        }
    }
    e.duration()
}

/// Poisson points of intensity `1/delta` under the graph of `e`, by thinning
/// a Poisson process on the bounding box.
pub fn poisson_marks<R: Rng + ?Sized>(e: &GridPath, delta: f64, rng: &mut R) -> Result<PoissonMarks> {
    let zeta = e.duration();
    let top = e.sup().max(0.0);
    let mean = zeta * top / delta;
    if !(mean > 0.0) {
        return Ok(PoissonMarks::default());
    }
    let count = Poisson::new(mean).map_err(|err| Error::Domain(err.to_string()))?.sample(rng) as usize;
    let mut marks = Vec::new();
    for _ in 0..count {
        let s = rng.random::<f64>() * zeta;
        let y = rng.random::<f64>() * top;
        if y < e.at(s) {
            marks.push(Mark { s, y, t: completion_time(e, s, y) });
        }
    }
    marks.sort_by(|a, b| a.s.total_cmp(&b.s));
    Ok(PoissonMarks { marks })
}

/// Limit height profile and ball mass: the Lamperti pair of `e` as a step function.
pub fn limit_profile(e: &GridPath) -> Result<StepLamperti<f64>> {
    StepFn::from_path(e)?.lamperti_pair()
}
