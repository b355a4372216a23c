//! Step paths, excursion lists and mark sets shared by the graph and limit sides.

use num_traits::AsPrimitive;
use serde::{Deserialize, Serialize};

/// How the values of a [`StepPath`] are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathKind {
    Walk,
    Profile,
    Cumulative,
    Height,
    Excursion,
}

/// Values at integer steps `0..=m`, with optional time and space scale factors.
///
/// The path is read as the step function `t -> space_scale * values[floor(t / time_scale)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepPath<T> {
    values: Vec<T>,
    kind: PathKind,
    time_scale: f64,
    space_scale: f64,
}

pub type IntPath = StepPath<i64>;
pub type GridPath = StepPath<f64>;

impl<T> StepPath<T> {
    pub fn new(values: Vec<T>, kind: PathKind) -> Self {
        Self { values, kind, time_scale: 1.0, space_scale: 1.0 }
    }

    pub fn with_scales(mut self, time_scale: f64, space_scale: f64) -> Self {
        self.time_scale = time_scale;
        self.space_scale = space_scale;
        self
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn space_scale(&self) -> f64 {
        self.space_scale
    }

    /// Number of stored values (`m + 1`).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of steps `m`.
    pub fn steps(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Total duration in scaled time.
    pub fn duration(&self) -> f64 {
        self.steps() as f64 * self.time_scale
    }
}

impl<T: AsPrimitive<f64>> StepPath<T> {
    /// Scaled value at scaled time `t` (right-continuous step reading).
    pub fn at(&self, t: f64) -> f64 {
        self.values[self.index_at(t)].as_() * self.space_scale
    }

    /// Index of the step containing `t`; times within rounding of a grid point snap to it.
    pub fn index_at(&self, t: f64) -> usize {
        let x = t / self.time_scale;
        let r = x.round();
        let k = if (x - r).abs() <= 1e-9 * r.abs().max(1.0) { r } else { x.floor() };
        (k.max(0.0) as usize).min(self.values.len() - 1)
    }

    /// Values multiplied by the space scale.
    pub fn scaled_values(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v.as_() * self.space_scale).collect()
    }

    /// Forget the integer structure, keeping the scales.
    pub fn to_grid(&self) -> GridPath {
        StepPath {
            values: self.values.iter().map(|&v| v.as_()).collect(),
            kind: self.kind,
            time_scale: self.time_scale,
            space_scale: self.space_scale,
        }
    }

    /// Step integral `sum_{k < m} v_k * time_scale * space_scale`.
    pub fn integral(&self) -> f64 {
        let n = self.steps();
        self.values[..n].iter().map(|&v| v.as_()).sum::<f64>() * self.time_scale * self.space_scale
    }

    /// Supremum of the scaled values.
    pub fn sup(&self) -> f64 {
        self.values.iter().map(|&v| v.as_()).fold(f64::NEG_INFINITY, f64::max) * self.space_scale
    }
}

impl IntPath {
    /// Running sums `C(h) = sum_{j <= h} Z(j)`.
    pub fn cumulative(&self) -> IntPath {
        let mut acc = 0i64;
        let values = self
            .values
            .iter()
            .map(|&v| {
                acc += v;
                acc
            })
            .collect();
        StepPath { values, kind: PathKind::Cumulative, time_scale: self.time_scale, space_scale: self.space_scale }
    }

    /// Running infimum `inf_{j <= k} x(j)`.
    pub fn running_inf(&self) -> Vec<i64> {
        let mut m = i64::MAX;
        self.values
            .iter()
            .map(|&v| {
                m = m.min(v);
                m
            })
            .collect()
    }
}

/// One excursion above the running infimum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excursion {
    /// Index `g_i` where the excursion starts.
    pub start: usize,
    /// Number of steps `zeta_i`.
    pub len: usize,
    /// Values shifted to start at 0, `len + 1` entries ending at -1 when complete.
    pub values: Vec<i64>,
    /// False when the walk ends before the excursion returns below its start.
    pub complete: bool,
}

/// Excursions sorted by decreasing length, ties by start index.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExcursionList {
    pub excursions: Vec<Excursion>,
}

impl ExcursionList {
    pub fn len(&self) -> usize {
        self.excursions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excursions.is_empty()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.excursions.iter().map(|e| e.len).collect()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Excursion> {
        self.excursions.iter()
    }
}

/// Disjoint index pairs `(l_i, r_i)`, `l_i < r_i`, with optional rescaled coordinates.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MarkSet {
    pub pairs: Vec<(usize, usize)>,
    pub scaled: Option<Vec<(f64, f64)>>,
}

impl MarkSet {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs, scaled: None }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn rescaled(mut self, time_scale: f64) -> Self {
        self.scaled = Some(self.pairs.iter().map(|&(l, r)| (l as f64 * time_scale, r as f64 * time_scale)).collect());
        self
    }
}
