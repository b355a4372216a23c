use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::degree_laws::DegreeSequence;
use crate::error::{Error, Result};

/// A half-edge identified by its vertex and its rank among that vertex's half-edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfEdge {
    pub vertex: usize,
    pub rank: usize,
}

/// Flat half-edge indexing: vertex `v` owns ids `offsets[v]..offsets[v + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfEdgeIndex {
    offsets: Vec<usize>,
    owner: Vec<usize>,
}

impl HalfEdgeIndex {
    pub fn new(degrees: &[u64]) -> Self {
        let mut offsets = Vec::with_capacity(degrees.len() + 1);
        let mut owner = Vec::with_capacity(degrees.iter().sum::<u64>() as usize);
        offsets.push(0);
        for (v, &d) in degrees.iter().enumerate() {
            owner.extend(std::iter::repeat_n(v, d as usize));
            offsets.push(owner.len());
        }
        Self { offsets, owner }
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn owner(&self, h: usize) -> usize {
        self.owner[h]
    }

    #[inline]
    pub fn range(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn id(&self, h: HalfEdge) -> usize {
        debug_assert!(h.rank < self.degree(h.vertex));
        self.offsets[h.vertex] + h.rank
    }

    pub fn half_edge(&self, id: usize) -> HalfEdge {
        let vertex = self.owner[id];
        HalfEdge { vertex, rank: id - self.offsets[vertex] }
    }
}

/// A multigraph produced by pairing half-edges. Loops and multiple edges are kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    index: HalfEdgeIndex,
    partner: Vec<usize>,
    /// Edges as half-edge pairs, in creation order.
    edges: Vec<(usize, usize)>,
}

impl MultiGraph {
    /// Build from an explicit perfect matching of half-edges given as pairs.
    pub fn from_pairing(degrees: &[u64], pairs: &[(HalfEdge, HalfEdge)]) -> Result<Self> {
        let index = HalfEdgeIndex::new(degrees);
        let mut partner = vec![usize::MAX; index.len()];
        let mut edges = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            for h in [a, b] {
                if h.vertex >= index.vertex_count() || h.rank >= index.degree(h.vertex) {
                    return Err(Error::Domain(format!("half-edge {h:?} does not exist")));
                }
            }
            let (ia, ib) = (index.id(a), index.id(b));
            if ia == ib || partner[ia] != usize::MAX || partner[ib] != usize::MAX {
                return Err(Error::Domain(format!("half-edges {a:?}, {b:?} paired twice")));
            }
            partner[ia] = ib;
            partner[ib] = ia;
            edges.push((ia, ib));
        }
        if partner.iter().any(|&p| p == usize::MAX) {
            return Err(Error::Domain("pairing leaves half-edges unmatched".into()));
        }
        Ok(Self { index, partner, edges })
    }

    pub(crate) fn from_parts(index: HalfEdgeIndex, partner: Vec<usize>, edges: Vec<(usize, usize)>) -> Self {
        Self { index, partner, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.index.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn half_edges(&self) -> &HalfEdgeIndex {
        &self.index
    }

    pub fn degree(&self, v: usize) -> usize {
        self.index.degree(v)
    }

    pub fn degrees(&self) -> Vec<u64> {
        (0..self.vertex_count()).map(|v| self.degree(v) as u64).collect()
    }

    #[inline]
    pub fn partner(&self, h: usize) -> usize {
        self.partner[h]
    }

    /// Edges as vertex pairs in creation order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(a, b)| (self.index.owner(a), self.index.owner(b)))
    }

    pub fn loop_count(&self, v: usize) -> usize {
        self.edges().filter(|&(a, b)| a == v && b == v).count()
    }

    pub fn mult(&self, u: usize, v: usize) -> usize {
        self.edges().filter(|&(a, b)| (a == u && b == v) || (a == v && b == u)).count()
    }

    /// Edge multiplicities keyed by the sorted vertex pair; loops appear as `(v, v)`.
    pub fn edge_multiset(&self) -> BTreeMap<(usize, usize), usize> {
        let mut out = BTreeMap::new();
        for (a, b) in self.edges() {
            *out.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        out
    }

    pub fn is_simple(&self) -> bool {
        self.edge_multiset().iter().all(|(&(a, b), &m)| a != b && m == 1)
    }

    /// Neighbour lists (multiplicity kept) in compressed form.
    pub fn adjacency(&self) -> Adjacency {
        let n = self.vertex_count();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        let mut targets = Vec::with_capacity(self.index.len());
        for v in 0..n {
            for h in self.index.range(v) {
                targets.push(self.index.owner(self.partner[h]));
            }
            start.push(targets.len());
        }
        Adjacency { start, targets }
    }
}

/// Compressed adjacency lists.
#[derive(Debug, Clone)]
pub struct Adjacency {
    start: Vec<usize>,
    targets: Vec<usize>,
}

impl Adjacency {
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.targets[self.start[v]..self.start[v + 1]]
    }
}

fn ln_factorial(k: u64) -> f64 {
    statrs::function::factorial::ln_factorial(k)
}

/// `ln (2m - 1)!!` for `2m` half-edges.
fn ln_double_factorial_odd(total: u64) -> f64 {
    // (2m-1)!! = (2m)! / (2^m m!)
    let m = total / 2;
    ln_factorial(2 * m) - m as f64 * std::f64::consts::LN_2 - ln_factorial(m)
}

/// Probability that the configuration model on `degrees` produces `g`:
///
/// ```text
/// prod d_j! / ((sum d - 1)!! * prod_i 2^loop(i) loop(i)! * prod_{i<j} mult(i,j)!)
/// ```
pub fn multigraph_probability(degrees: &DegreeSequence, g: &MultiGraph) -> Result<f64> {
    let d = degrees.degrees();
    if d.len() != g.vertex_count() {
        return Err(Error::Domain(format!(
            "graph has {} vertices, sequence has {}",
            g.vertex_count(),
            d.len()
        )));
    }
    for (v, &expected) in d.iter().enumerate() {
        let found = g.degree(v) as u64;
        if found != expected {
            return Err(Error::DegreeMismatch { vertex: v, expected, found });
        }
    }
    let mut log_p = d.iter().map(|&k| ln_factorial(k)).sum::<f64>();
    log_p -= ln_double_factorial_odd(degrees.total());
    for (&(a, b), &m) in &g.edge_multiset() {
        if a == b {
            log_p -= m as f64 * std::f64::consts::LN_2 + ln_factorial(m as u64);
        } else {
            log_p -= ln_factorial(m as u64);
        }
    }
    Ok(log_p.exp())
}

/// Every perfect matching of the half-edges, grouped by the multigraph it yields.
///
/// Maps each edge multiset to the number of matchings producing it; the counts
/// sum to `(sum d - 1)!!`. Exponential in `sum d`, meant for small oracles.
pub fn enumerate_multigraphs(degrees: &[u64]) -> Result<BTreeMap<Vec<((usize, usize), usize)>, u64>> {
    let index = HalfEdgeIndex::new(degrees);
    let total = index.len();
    if total % 2 == 1 {
        return Err(Error::Parity(total as u64));
    }
    let mut out = BTreeMap::new();
    let mut partner = vec![usize::MAX; total];
    fn rec(
        index: &HalfEdgeIndex,
        partner: &mut Vec<usize>,
        out: &mut BTreeMap<Vec<((usize, usize), usize)>, u64>,
    ) {
        let Some(a) = partner.iter().position(|&p| p == usize::MAX) else {
            let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
            for (h, &p) in partner.iter().enumerate() {
                if h < p {
                    let (u, v) = (index.owner(h), index.owner(p));
                    *edges.entry((u.min(v), u.max(v))).or_default() += 1;
                }
            }
            *out.entry(edges.into_iter().collect()).or_default() += 1;
            return;
        };
        for b in a + 1..partner.len() {
            if partner[b] == usize::MAX {
                partner[a] = b;
                partner[b] = a;
                rec(index, partner, out);
                partner[a] = usize::MAX;
                partner[b] = usize::MAX;
            }
        }
    }
    rec(&index, &mut partner, &mut out);
    Ok(out)
}
