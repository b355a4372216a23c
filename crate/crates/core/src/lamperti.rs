//! Lamperti transform of nonnegative excursion-like functions.
//!
//! For `f >= 0` let `iota(t) = int_0^t ds / f(s)` and `c0(t) = inf{s : iota(s) > t}`
//! (with `inf {} = inf{t > 0 : f(t) = 0}`); the Lamperti pair is `(h0, c0)` with
//! `h0 = f o c0`. Step functions are handled exactly over any [`Scalar`], so the
//! identities can be checked with rationals; analytic inputs use
//! double-exponential quadrature.

use std::fmt::Debug;

use num_traits::{Num, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::{GridPath, IntPath, PathKind, StepPath};

/// Absolute tolerance for quadrature on analytic inputs.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Number types the exact step-function algorithms run over (`f64`, rationals).
pub trait Scalar: Copy + PartialOrd + Num + Debug {}

impl<T: Copy + PartialOrd + Num + Debug> Scalar for T {}

/// A value in `[0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar + ToPrimitive> Extended<T> {
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(v) => v.to_f64().unwrap_or(f64::NAN),
            Extended::Infinite => f64::INFINITY,
        }
    }
}

impl<T> Extended<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }
}

/// Right-continuous step function: `values[i]` on `[breaks[i], breaks[i + 1])`, zero from `breaks[m]` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFn<T> {
    breaks: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> StepFn<T> {
    /// `breaks` must start at 0 and increase strictly; `values` are nonnegative, one per piece.
    pub fn new(breaks: Vec<T>, values: Vec<T>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::Domain(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                values.len()
            )));
        }
        if breaks[0] != T::zero() {
            return Err(Error::Domain("first breakpoint must be 0".into()));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("breakpoints must increase strictly".into()));
        }
        if values.iter().any(|&v| v < T::zero()) {
            return Err(Error::Domain("negative value".into()));
        }
        Ok(Self { breaks, values })
    }

    /// Build from `(width, value)` pieces.
    pub fn from_pieces(pieces: &[(T, T)]) -> Result<Self> {
        let mut breaks = vec![T::zero()];
        let mut t = T::zero();
        for &(w, _) in pieces {
            t = t + w;
            breaks.push(t);
        }
        Self::new(breaks, pieces.iter().map(|&(_, v)| v).collect())
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn zeta(&self) -> T {
        *self.breaks.last().unwrap()
    }

    fn piece(&self, t: T) -> Option<usize> {
        if t < T::zero() || !(t < self.zeta()) {
            return None;
        }
        // last i with breaks[i] <= t
        let i = self.breaks.partition_point(|&b| !(t < b));
        Some(i - 1)
    }

    /// `f(t)` (right-continuous; 0 outside `[0, zeta)`).
    pub fn value_at(&self, t: T) -> T {
        self.piece(t).map_or(T::zero(), |i| self.values[i])
    }

    /// `f(t)` under the excursion reading `f(0) = 0`.
    pub fn excursion_value_at(&self, t: T) -> T {
        if t == T::zero() {
            T::zero()
        } else {
            self.value_at(t)
        }
    }

    pub fn sup(&self) -> T {
        self.values.iter().copied().fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn integral(&self) -> T {
        self.values
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &v)| acc + v * (self.breaks[i + 1] - self.breaks[i]))
    }

    /// Start of the first zero piece, or `zeta`.
    fn first_zero(&self) -> usize {
        self.values.iter().position(|&v| v == T::zero()).unwrap_or(self.values.len())
    }

    /// `iota(t) = sum of widths / values` up to `t`; infinite once `t` passes into a zero piece.
    pub fn iota(&self, t: T) -> Result<Extended<T>> {
        if t < T::zero() || t > self.zeta() {
            return Err(Error::Domain(format!("time {t:?} outside [0, zeta]")));
        }
        let mut acc = T::zero();
        for i in 0..self.values.len() {
            let (a, b) = (self.breaks[i], self.breaks[i + 1]);
            if !(a < t) {
                break;
            }
            let v = self.values[i];
            if v == T::zero() {
                return Ok(Extended::Infinite);
            }
            let end = if t < b { t } else { b };
            acc = acc + (end - a) / v;
        }
        Ok(Extended::Finite(acc))
    }

    /// Exact Lamperti pair. Each piece of width `w` and height `v` contributes a
    /// linear segment of `c0` with slope `v` lasting `w / v`.
    pub fn lamperti_pair(&self) -> Result<StepLamperti<T>> {
        if self.values.iter().all(|&v| v == T::zero()) {
            return Err(Error::ZeroFunction);
        }
        let stop = self.first_zero();
        let mut knots = vec![T::zero()];
        let mut levels = vec![T::zero()];
        let mut slopes = Vec::with_capacity(stop);
        for i in 0..stop {
            let w = self.breaks[i + 1] - self.breaks[i];
            let v = self.values[i];
            knots.push(*knots.last().unwrap() + w / v);
            levels.push(self.breaks[i + 1]);
            slopes.push(v);
        }
        if stop == 0 {
            // iota diverges immediately: the trivial pair
            return Ok(StepLamperti {
                c0: PiecewiseLinear { knots: vec![T::zero()], levels: vec![T::zero()], slopes: Vec::new() },
                h0: None,
                iota_at_zeta_minus: Extended::Infinite,
            });
        }
        let h0 = StepFn::new(knots.clone(), slopes.clone())?;
        let total = *knots.last().unwrap();
        Ok(StepLamperti {
            c0: PiecewiseLinear { knots, levels, slopes },
            h0: Some(h0),
            iota_at_zeta_minus: if stop == self.values.len() { Extended::Finite(total) } else { Extended::Infinite },
        })
    }

    /// `t -> b * f(t / a)`: stretch time by `a`, space by `b`.
    pub fn rescale(&self, a: T, b: T) -> Result<Self> {
        Self::new(self.breaks.iter().map(|&t| t * a).collect(), self.values.iter().map(|&v| v * b).collect())
    }

    /// `(breakpoint, value)` pairs; the final pair carries value 0.
    pub fn to_pairs(&self) -> Vec<(T, T)> {
        let mut out: Vec<(T, T)> = self.breaks.iter().copied().zip(self.values.iter().copied()).collect();
        out.push((self.zeta(), T::zero()));
        out
    }

    pub fn from_pairs(pairs: &[(T, T)]) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::Domain("need at least two (breakpoint, value) pairs".into()));
        }
        let breaks = pairs.iter().map(|p| p.0).collect();
        let values = pairs[..pairs.len() - 1].iter().map(|p| p.1).collect();
        Self::new(breaks, values)
    }
}

impl StepFn<f64> {
    /// The excursion path read as a step function of its scaled time and values.
    ///
    /// The final stored value (the endpoint) is dropped; trailing zero pieces are kept.
    pub fn from_path<T: num_traits::AsPrimitive<f64>>(path: &StepPath<T>) -> Result<Self> {
        let v = path.scaled_values();
        let m = path.steps();
        if m == 0 {
            return Err(Error::Domain("path has no steps".into()));
        }
        let dt = path.time_scale();
        let breaks = (0..=m).map(|k| k as f64 * dt).collect();
        Self::new(breaks, v[..m].iter().map(|&x| x.max(0.0)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_pairs())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let pairs: Vec<(f64, f64)> = serde_json::from_str(s)?;
        Self::from_pairs(&pairs)
    }
}

/// Continuous piecewise-linear nondecreasing function, constant after the last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear<T> {
    pub knots: Vec<T>,
    pub levels: Vec<T>,
    pub slopes: Vec<T>,
}

impl<T: Scalar> PiecewiseLinear<T> {
    pub fn eval(&self, t: T) -> T {
        if !(t > T::zero()) {
            return self.levels[0];
        }
        let i = self.knots.partition_point(|&k| !(t < k));
        if i >= self.knots.len() {
            return *self.levels.last().unwrap();
        }
        let j = i - 1;
        self.levels[j] + self.slopes[j] * (t - self.knots[j])
    }

    /// Right derivative at `t`.
    pub fn right_derivative(&self, t: T) -> T {
        if t < T::zero() {
            return T::zero();
        }
        let i = self.knots.partition_point(|&k| !(t < k));
        if i >= self.knots.len() {
            T::zero()
        } else {
            self.slopes[i - 1]
        }
    }

    /// `t -> c((t - lambda)_+)`.
    pub fn shifted(&self, lambda: T) -> Self {
        let mut knots = vec![T::zero()];
        let mut levels = vec![T::zero()];
        let mut slopes = Vec::new();
        if lambda > T::zero() {
            knots.push(lambda);
            levels.push(T::zero());
            slopes.push(T::zero());
        }
        for (i, &k) in self.knots.iter().enumerate().skip(1) {
            knots.push(k + lambda);
            levels.push(self.levels[i]);
            slopes.push(self.slopes[i - 1]);
        }
        Self { knots, levels, slopes }
    }
}

/// Lamperti pair of a step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepLamperti<T> {
    pub c0: PiecewiseLinear<T>,
    /// `None` for the trivial pair.
    pub h0: Option<StepFn<T>>,
    pub iota_at_zeta_minus: Extended<T>,
}

impl<T: Scalar> StepLamperti<T> {
    pub fn h0_at(&self, t: T) -> T {
        self.h0.as_ref().map_or(T::zero(), |h| h.value_at(t))
    }
}

/// `f(s) = coef * s^p * (zeta - s)^q` on `(0, zeta)`, zero elsewhere.
///
/// Covers the constant (`p = q = 0`), `sqrt(s)`, `s`, and `sqrt(s (zeta - s))` fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBridge {
    pub coef: f64,
    pub p: f64,
    pub q: f64,
    pub zeta: f64,
}

impl PowerBridge {
    pub fn constant(level: f64, zeta: f64) -> Self {
        Self { coef: level, p: 0.0, q: 0.0, zeta }
    }

    pub fn sqrt(zeta: f64) -> Self {
        Self { coef: 1.0, p: 0.5, q: 0.0, zeta }
    }

    pub fn linear(zeta: f64) -> Self {
        Self { coef: 1.0, p: 1.0, q: 0.0, zeta }
    }

    pub fn sqrt_bridge(zeta: f64) -> Self {
        Self { coef: 1.0, p: 0.5, q: 0.5, zeta }
    }

    pub fn value_at(&self, s: f64) -> f64 {
        if s <= 0.0 && self.p > 0.0 || s < 0.0 || s >= self.zeta {
            return 0.0;
        }
        self.coef * s.powf(self.p) * (self.zeta - s).powf(self.q)
    }

    fn diverges_at_start(&self) -> bool {
        self.p >= 1.0
    }

    fn diverges_at_end(&self) -> bool {
        self.q >= 1.0
    }

    fn validate(&self) -> Result<()> {
        if !(self.coef > 0.0 && self.zeta > 0.0 && self.p >= 0.0 && self.q >= 0.0) {
            return Err(Error::Domain(format!("invalid analytic function {self:?}")));
        }
        Ok(())
    }

    /// `iota(t)` by quadrature; closed-form divergence at either end.
    pub fn iota(&self, t: f64) -> Result<f64> {
        self.validate()?;
        if !(0.0..=self.zeta).contains(&t) {
            return Err(Error::Domain(format!("time {t} outside [0, {}]", self.zeta)));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if self.diverges_at_start() || (t == self.zeta && self.diverges_at_end()) {
            return Ok(f64::INFINITY);
        }
        let g = |s: f64| 1.0 / (self.coef * s.powf(self.p) * (self.zeta - s).powf(self.q));
        Ok(quadrature::double_exponential::integrate(g, 0.0, t, QUADRATURE_TOL).integral)
    }

    /// `c0(t)` by bisection on `iota`.
    pub fn c0(&self, t: f64) -> Result<f64> {
        if t <= 0.0 || self.diverges_at_start() {
            return Ok(0.0);
        }
        let total = self.iota(self.zeta)?;
        if t >= total {
            return Ok(self.zeta);
        }
        let (mut lo, mut hi) = (0.0, self.zeta);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.iota(mid)? > t {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-13 * self.zeta {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// A nonnegative cadlag function vanishing from `zeta` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CadlagExcursionFn {
    Step(StepFn<f64>),
    Analytic(PowerBridge),
}

impl CadlagExcursionFn {
    pub fn zeta(&self) -> f64 {
        match self {
            Self::Step(f) => f.zeta(),
            Self::Analytic(f) => f.zeta,
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Self::Step(f) => f.value_at(t),
            Self::Analytic(f) => f.value_at(t),
        }
    }
}

/// `int_0^t ds / f(s)`, `+inf` when divergent.
pub fn iota(f: &CadlagExcursionFn, t: f64) -> Result<f64> {
    match f {
        CadlagExcursionFn::Step(s) => Ok(s.iota(t)?.to_f64()),
        CadlagExcursionFn::Analytic(a) => a.iota(t),
    }
}

/// Lamperti pair in evaluable form.
#[derive(Debug, Clone, PartialEq)]
pub enum LampertiPair {
    Step(StepLamperti<f64>),
    Analytic { f: PowerBridge, iota_at_zeta_minus: f64 },
}

impl LampertiPair {
    pub fn c0(&self, t: f64) -> Result<f64> {
        match self {
            Self::Step(p) => Ok(p.c0.eval(t)),
            Self::Analytic { f, .. } => f.c0(t),
        }
    }

    pub fn h0(&self, t: f64) -> Result<f64> {
        match self {
            Self::Step(p) => Ok(p.h0_at(t)),
            Self::Analytic { f, .. } => Ok(f.value_at(f.c0(t)?)),
        }
    }

    pub fn iota_at_zeta_minus(&self) -> f64 {
        match self {
            Self::Step(p) => p.iota_at_zeta_minus.to_f64(),
            Self::Analytic { iota_at_zeta_minus, .. } => *iota_at_zeta_minus,
        }
    }
}

pub fn lamperti_pair(f: &CadlagExcursionFn) -> Result<LampertiPair> {
    match f {
        CadlagExcursionFn::Step(s) => Ok(LampertiPair::Step(s.lamperti_pair()?)),
        CadlagExcursionFn::Analytic(a) => {
            a.validate()?;
            let total = if a.diverges_at_start() { f64::INFINITY } else { a.iota(a.zeta)? };
            Ok(LampertiPair::Analytic { f: *a, iota_at_zeta_minus: total })
        }
    }
}

/// Behaviour of `iota` at the end of the excursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Terminal {
    /// `iota(zeta-) = inf`: `c0` increases strictly towards `zeta`.
    Infinite,
    /// `iota(zeta-) < inf`: `c0` reaches `zeta` at that time.
    Finite(f64),
}

/// Solution structure of `c(0) = 0, D+c = f o c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SolutionCase {
    /// `int_0+ 1/f = inf`: `c = 0` is the only solution.
    UniqueZero,
    /// `int_0+ 1/f < inf`: the family `c0((t - lambda)_+)`, `lambda in [0, inf]`.
    Family(Terminal),
}

/// Classify with `f` read as positive exactly on `(0, zeta)`.
///
/// Step inputs have a positive first piece, so `iota` converges at `0+`.
pub fn classify_solutions(f: &CadlagExcursionFn) -> Result<SolutionCase> {
    let (start_divergent, end) = match f {
        CadlagExcursionFn::Step(s) => {
            if s.values().iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroFunction);
            }
            (s.values()[0] == 0.0, s.iota(s.zeta())?.to_f64())
        }
        CadlagExcursionFn::Analytic(a) => {
            a.validate()?;
            (a.diverges_at_start(), if a.diverges_at_start() { f64::INFINITY } else { a.iota(a.zeta)? })
        }
    };
    if start_divergent {
        return Ok(SolutionCase::UniqueZero);
    }
    Ok(SolutionCase::Family(if end.is_finite() { Terminal::Finite(end) } else { Terminal::Infinite }))
}

/// `iota(zeta-)`: the limit radius functional.
pub fn radius(f: &CadlagExcursionFn) -> Result<f64> {
    iota(f, f.zeta())
}

/// `sup f`: the limit width functional.
pub fn width(f: &CadlagExcursionFn) -> f64 {
    match f {
        CadlagExcursionFn::Step(s) => s.sup(),
        CadlagExcursionFn::Analytic(a) => {
            // maximiser of s^p (zeta - s)^q; endpoints give the one-sided limit
            let s = if a.p + a.q > 0.0 { a.zeta * a.p / (a.p + a.q) } else { 0.0 };
            a.coef * s.powf(a.p) * (a.zeta - s).powf(a.q)
        }
    }
}

/// `iota(u * zeta)`: depth of a vertex at mass fraction `u`.
pub fn depth_quantile(f: &CadlagExcursionFn, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("quantile level {u} outside (0, 1)")));
    }
    iota(f, u * f.zeta())
}

/// Depths at sorted mass fractions; the output is nondecreasing.
pub fn order_statistics_depths(f: &CadlagExcursionFn, u_sorted: &[f64]) -> Result<Vec<f64>> {
    if u_sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("quantile levels must be sorted".into()));
    }
    u_sorted.iter().map(|&u| depth_quantile(f, u)).collect()
}

/// Profile `Z` as a function of mass: `Z(h)` on `[C(h - 1), C(h))`.
///
/// Its Lamperti pair satisfies `c0(h + 1) = C(h)` and `h0(h) = Z(h)` at integer times.
pub fn mass_indexed_profile<T: Scalar>(z: &IntPath, convert: impl Fn(i64) -> T) -> Result<StepFn<T>> {
    let pieces: Vec<(T, T)> = z.values().iter().take_while(|&&v| v > 0).map(|&v| (convert(v), convert(v))).collect();
    if pieces.is_empty() {
        return Err(Error::ZeroFunction);
    }
    StepFn::from_pieces(&pieces)
}

/// `1 + x(floor(t))` on `[0, m)` truncated at the first zero, as a unit-step function.
pub fn embedded_walk(x: &IntPath, z0: i64) -> Result<StepFn<f64>> {
    let vals: Vec<f64> = x.values().iter().map(|&v| (z0 + v) as f64).take_while(|&v| v > 0.0).collect();
    if vals.is_empty() {
        return Err(Error::ZeroFunction);
    }
    StepFn::from_pieces(&vals.iter().map(|&v| (1.0, v)).collect::<Vec<_>>())
}

/// Sample `(c0, h0)` of a step pair on a uniform grid of `points` times over `[0, horizon]`.
pub fn sample_pair(pair: &StepLamperti<f64>, horizon: f64, points: usize) -> (GridPath, GridPath) {
    let dt = horizon / (points.max(2) - 1) as f64;
    let c: Vec<f64> = (0..points).map(|i| pair.c0.eval(i as f64 * dt)).collect();
    let h: Vec<f64> = (0..points).map(|i| pair.h0_at(i as f64 * dt)).collect();
    (
        StepPath::new(c, PathKind::Cumulative).with_scales(dt, 1.0),
        StepPath::new(h, PathKind::Profile).with_scales(dt, 1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_one() {
        let f = CadlagExcursionFn::Step(StepFn::from_pieces(&[(1.0, 1.0)]).unwrap());
        assert_eq!(iota(&f, 0.5).unwrap(), 0.5);
        let p = lamperti_pair(&f).unwrap();
        assert_eq!(p.c0(0.3).unwrap(), 0.3);
        assert_eq!(p.c0(7.0).unwrap(), 1.0);
        assert_eq!(p.h0(0.99).unwrap(), 1.0);
        assert_eq!(p.h0(1.0).unwrap(), 0.0);
        assert_eq!(radius(&f).unwrap(), 1.0);
        assert_eq!(width(&f), 1.0);
        assert_eq!(depth_quantile(&f, 0.25).unwrap(), 0.25);
        assert_eq!(order_statistics_depths(&f, &[0.1, 0.9]).unwrap(), vec![0.1, 0.9]);
        assert_eq!(classify_solutions(&f).unwrap(), SolutionCase::Family(Terminal::Finite(1.0)));
    }

    #[test]
    fn zero_function_rejected() {
        let f = StepFn::from_pieces(&[(1.0, 0.0)]).unwrap();
        assert!(matches!(f.lamperti_pair(), Err(Error::ZeroFunction)));
    }

    #[test]
    fn interior_zero_stops_c0() {
        let f = StepFn::from_pieces(&[(1.0, 2.0), (1.0, 0.0), (1.0, 1.0)]).unwrap();
        let p = f.lamperti_pair().unwrap();
        assert_eq!(p.c0.eval(100.0), 1.0);
        assert_eq!(p.iota_at_zeta_minus, Extended::Infinite);
        assert_eq!(f.iota(1.0).unwrap(), Extended::Finite(0.5));
        assert_eq!(f.iota(1.5).unwrap(), Extended::Infinite);
    }

    #[test]
    fn domain_errors() {
        let f = CadlagExcursionFn::Step(StepFn::from_pieces(&[(1.0, 1.0)]).unwrap());
        assert!(iota(&f, 1.5).is_err());
        assert!(depth_quantile(&f, 1.0).is_err());
        assert!(StepFn::new(vec![0.0, 1.0], vec![-1.0]).is_err());
        assert!(StepFn::new(vec![0.0, 1.0, 1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = StepFn::from_pieces(&[(1.0, 2.0), (1.0, 1.0)]).unwrap();
        let s = f.to_json().unwrap();
        assert_eq!(s, "[[0.0,2.0],[1.0,1.0],[2.0,0.0]]");
        assert_eq!(StepFn::from_json(&s).unwrap(), f);
    }
}
