//! Reconstruction of the forest walk `X` from the degree walk `S`.
//!
//! Runs the exploration on the forest directly: at each step the next forest
//! vertex is either a new root, the closing leaf of an open backedge, a fresh
//! new leaf (probability = active half-edges over living half-edges), or the
//! next graph vertex in the given order.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::paths::{IntPath, MarkSet, PathKind};

/// Output of [`rebuild_x_from_s`].
#[derive(Debug, Clone, PartialEq)]
pub struct RebuiltWalk {
    pub x_walk: IntPath,
    /// New-leaf pairs as 1-based forest labels.
    pub marks: MarkSet,
    /// Running count of backedges `N(k)`.
    pub backedge_count: IntPath,
}

pub fn rebuild_x_from_s<R: Rng + ?Sized>(s_walk: &IntPath, degrees: &[u64], rng: &mut R) -> Result<RebuiltWalk> {
    let s = s_walk.values();
    let n = degrees.len();
    if s.len() != n + 1 || s[0] != 0 {
        return Err(Error::Domain(format!(
            "S-walk has {} entries, expected {} starting at 0",
            s.len(),
            n + 1
        )));
    }
    for j in 0..n {
        if s[j + 1] - s[j] != degrees[j] as i64 - 2 {
            return Err(Error::State {
                step: j,
                detail: format!("S increment {} does not match degree {}", s[j + 1] - s[j], degrees[j]),
            });
        }
    }
    // half-edges on vertices not yet reached: remaining[t] = sum_{j >= t} D_j
    let mut remaining = vec![0i64; n + 1];
    for j in (0..n).rev() {
        remaining[j] = remaining[j + 1] + degrees[j] as i64;
    }

    let mut x = vec![0i64];
    let mut count = vec![0i64];
    let mut tau = 0usize;
    let mut min_before = i64::MAX; // min over X(0..k-1)
    let mut open: BTreeMap<i64, usize> = BTreeMap::new(); // mark level -> label of first leaf
    let mut pairs: Vec<(usize, usize)> = Vec::new();

    let mut k = 0usize;
    loop {
        let xk = x[k];
        let backedges = *count.last().unwrap();
        let new_component = k == 0 || xk == min_before - 1;
        if new_component {
            if !open.is_empty() {
                return Err(Error::State { step: k, detail: "component closed with open marks".into() });
            }
            if tau == n {
                break;
            }
            x.push(xk + s[tau + 1] - s[tau] + 1);
            count.push(backedges);
            tau += 1;
        } else if let Some(first) = open.remove(&xk) {
            x.push(xk - 1);
            count.push(backedges);
            pairs.push((first, k + 1));
        } else {
            let floor = min_before.min(xk);
            let active = xk - floor - open.len() as i64;
            if active < 0 {
                return Err(Error::State { step: k, detail: format!("negative active count {active}") });
            }
            let total = active + remaining[tau];
            if total == 0 {
                return Err(Error::State { step: k, detail: "no living half-edge to pair with".into() });
            }
            if rng.random_range(0..total) < active {
                // new leaf; its partner sits at a uniformly chosen unmarked level
                let mut level = floor + rng.random_range(0..active);
                for (&m, _) in open.range(floor..) {
                    if m <= level {
                        level += 1;
                    } else {
                        break;
                    }
                }
                debug_assert!(level < xk);
                open.insert(level, k + 1);
                x.push(xk - 1);
                count.push(backedges + 1);
            } else {
                if tau == n {
                    return Err(Error::State { step: k, detail: "degree sequence exhausted".into() });
                }
                x.push(xk + s[tau + 1] - s[tau]);
                count.push(backedges);
                tau += 1;
            }
        }
        min_before = min_before.min(xk);
        k += 1;
    }

    pairs.sort_unstable();
    Ok(RebuiltWalk {
        x_walk: IntPath::new(x, PathKind::Walk),
        marks: MarkSet::new(pairs),
        backedge_count: IntPath::new(count, PathKind::Walk),
    })
}
