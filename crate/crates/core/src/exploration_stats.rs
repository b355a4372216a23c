//! Walks, height profiles, discrete Lamperti solutions, excursions, heights and marks.

use std::collections::VecDeque;

use crate::config_model::{ExplorationLog, ExploredForest, MultiGraph};
use crate::error::{Error, Result};
use crate::paths::{Excursion, ExcursionList, IntPath, MarkSet, PathKind};

/// `S(k) = sum_{j <= k} (deg(v_j) - 2)` along the discovery order, `S(0) = 0`.
pub fn s_walk(log: &ExplorationLog, degrees: &[u64]) -> IntPath {
    let mut values = Vec::with_capacity(log.order.len() + 1);
    let mut s = 0i64;
    values.push(0);
    for &v in &log.order {
        s += degrees[v] as i64 - 2;
        values.push(s);
    }
    IntPath::new(values, PathKind::Walk)
}

/// Degrees listed in discovery order, as consumed by [`crate::config_model::rebuild_x_from_s`].
pub fn degrees_in_order(log: &ExplorationLog, degrees: &[u64]) -> Vec<u64> {
    log.order.iter().map(|&v| degrees[v]).collect()
}

/// `X(k) = sum_{j <= k} (chi(u_j) - 1)`, `X(0) = 0`.
pub fn x_walk(forest: &ExploredForest) -> IntPath {
    let mut values = Vec::with_capacity(forest.len() + 1);
    let mut x = 0i64;
    values.push(0);
    for &chi in &forest.children {
        x += chi as i64 - 1;
        values.push(x);
    }
    IntPath::new(values, PathKind::Walk)
}

/// Graph-distance profile `Z(h)` of the component of `root` and its running sum `C`.
///
/// Loops and multiple edges do not change distances.
pub fn height_profile(g: &MultiGraph, root: usize) -> (IntPath, IntPath) {
    let adj = g.adjacency();
    let mut dist = vec![usize::MAX; g.vertex_count()];
    let mut queue = VecDeque::new();
    let mut z: Vec<i64> = vec![1];
    dist[root] = 0;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        for &w in adj.neighbours(v) {
            if dist[w] == usize::MAX {
                let d = dist[v] + 1;
                dist[w] = d;
                if z.len() <= d {
                    z.push(0);
                }
                z[d] += 1;
                queue.push_back(w);
            }
        }
    }
    let z = IntPath::new(z, PathKind::Profile);
    let c = z.cumulative();
    (z, c)
}

/// Solve `Z(h + 1) = z0 + x(C(h))`, `C(h) = sum_{j <= h} Z(j)`, `Z(0) = z0`, until `Z` hits 0.
///
/// `Z` ends with its first nonpositive value, recorded as 0; `C` covers the nonzero levels.
pub fn discrete_lamperti(x: &IntPath, z0: i64) -> Result<(IntPath, IntPath)> {
    let xs = x.values();
    if xs.first() != Some(&0) {
        return Err(Error::Domain("walk must start at 0".into()));
    }
    if z0 < 0 {
        return Err(Error::Domain(format!("negative initial value {z0}")));
    }
    let mut z = vec![z0];
    let mut c = Vec::new();
    let mut acc = 0i64;
    while *z.last().unwrap() > 0 {
        acc += *z.last().unwrap();
        c.push(acc);
        let idx = acc as usize;
        let Some(&xv) = xs.get(idx) else {
            return Err(Error::Index { index: idx, len: xs.len() });
        };
        z.push((z0 + xv).max(0));
    }
    Ok((IntPath::new(z, PathKind::Profile), IntPath::new(c, PathKind::Cumulative)))
}

/// Decompose `x` into excursions above its running infimum.
///
/// Excursion `i` runs from `sigma(i-1)` to `sigma(i) = inf{j : x(j) = -i}`.
/// Values are shifted to start at 0 and include the terminal step (value -1).
/// A trailing piece that never reaches a new minimum is kept and flagged incomplete.
pub fn excursions_above_min(x: &IntPath) -> ExcursionList {
    let xs = x.values();
    let mut out = Vec::new();
    if xs.is_empty() {
        return ExcursionList::default();
    }
    let mut start = 0usize;
    let mut level = xs[0];
    for k in 1..xs.len() {
        if xs[k] < level {
            out.push(Excursion {
                start,
                len: k - start,
                values: xs[start..=k].iter().map(|&v| v - level).collect(),
                complete: true,
            });
            start = k;
            level = xs[k];
        }
    }
    if start + 1 < xs.len() {
        out.push(Excursion {
            start,
            len: xs.len() - 1 - start,
            values: xs[start..].iter().map(|&v| v - level).collect(),
            complete: false,
        });
    }
    out.sort_by(|a, b| b.len.cmp(&a.len).then(a.start.cmp(&b.start)));
    ExcursionList { excursions: out }
}

/// `H(k) = #{j < k : x(j) = inf_{j <= l <= k} x(l)}`, via a monotone stack.
pub fn discrete_height(x: &IntPath) -> IntPath {
    let xs = x.values();
    let mut stack: Vec<i64> = Vec::new();
    let mut h = Vec::with_capacity(xs.len());
    for &v in xs {
        while stack.last().is_some_and(|&top| top > v) {
            stack.pop();
        }
        h.push(stack.len() as i64);
        stack.push(v);
    }
    IntPath::new(h, PathKind::Height)
}

/// New-leaf pairs of `forest` and their number (the surplus).
///
/// With `scale = Some((time, height))` the pairs also carry coordinates `(l * time, r * time)`.
pub fn marks_and_surplus(forest: &ExploredForest, scale: Option<(f64, f64)>) -> (MarkSet, usize) {
    let marks = MarkSet::new(forest.new_leaf_pairs.clone());
    let surplus = marks.len();
    let marks = match scale {
        Some((time, _)) => marks.rescaled(time),
        None => marks,
    };
    (marks, surplus)
}

/// `sum_h |Z_graph(h) - Z_forest(h)|`, missing levels read as 0.
pub fn profile_discrepancy(z_graph: &IntPath, z_forest: &IntPath) -> u64 {
    let (a, b) = (z_graph.values(), z_forest.values());
    (0..a.len().max(b.len()))
        .map(|h| (a.get(h).copied().unwrap_or(0) - b.get(h).copied().unwrap_or(0)).unsigned_abs())
        .sum()
}

/// The walk of one component, shifted to start at 0 (it ends at -1).
pub fn component_walk(x: &IntPath, range: std::ops::Range<usize>) -> IntPath {
    let base = x.values()[range.start];
    let values = x.values()[range.start..=range.end].iter().map(|&v| v - base).collect();
    IntPath::new(values, PathKind::Walk)
}

/// First maximiser of a profile.
pub fn peak_level(z: &IntPath) -> usize {
    let zs = z.values();
    let mut best = 0;
    for (h, &v) in zs.iter().enumerate() {
        if v > zs[best] {
            best = h;
        }
    }
    best
}
