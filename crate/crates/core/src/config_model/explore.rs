//! Breadth-first and depth-first construction of the configuration multigraph.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::multigraph::{HalfEdge, HalfEdgeIndex, MultiGraph};
use crate::degree_laws::DegreeSequence;
use crate::error::{Error, Result};

/// Which active vertex is explored next: the earliest discovered (BF) or the latest (DF).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExplorationMode {
    BreadthFirst,
    DepthFirst,
}

/// Ordered record of a construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplorationLog {
    pub mode: ExplorationMode,
    /// Vertices in discovery order `v_1, ..., v_n`.
    pub order: Vec<usize>,
    /// The half-edge through which each vertex was discovered; `None` for roots.
    pub discovered_via: Vec<Option<usize>>,
    /// Half-edge pairs `(l, r)` matched while `r` was already active.
    pub backedges: Vec<(HalfEdge, HalfEdge)>,
    /// Positions in `order` where a component starts.
    pub component_starts: Vec<usize>,
    /// The sleeping half-edge picked to start each component.
    pub root_choices: Vec<HalfEdge>,
}

impl ExplorationLog {
    /// Index of the first vertex of each component in `order`, plus the end.
    pub fn component_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.component_starts.len());
        for (i, &s) in self.component_starts.iter().enumerate() {
            let e = self.component_starts.get(i + 1).copied().unwrap_or(self.order.len());
            out.push(s..e);
        }
        out
    }

    /// Discovery position of every vertex.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }
}

/// The two random choices made during construction.
pub trait PairingRule {
    /// Index into `sleeping` of the half-edge that starts a new component.
    fn root(&mut self, sleeping: &[usize]) -> usize;
    /// Partner for `l` among the living half-edges (`l` is already dead).
    fn partner(&mut self, l: usize, living: &[usize]) -> usize;
}

/// Uniform choices: yields the configuration model.
pub struct UniformPairing<'a, R: Rng + ?Sized>(pub &'a mut R);

impl<R: Rng + ?Sized> PairingRule for UniformPairing<'_, R> {
    fn root(&mut self, sleeping: &[usize]) -> usize {
        self.0.random_range(0..sleeping.len())
    }

    fn partner(&mut self, _l: usize, living: &[usize]) -> usize {
        living[self.0.random_range(0..living.len())]
    }
}

/// Replays a fixed matching, turning construction into exploration of a given graph.
///
/// Roots are taken from `roots` (vertices) in order, then the smallest sleeping
/// half-edge id.
pub struct FixedPairing<'a> {
    graph: &'a MultiGraph,
    roots: std::vec::IntoIter<usize>,
}

impl<'a> FixedPairing<'a> {
    pub fn new(graph: &'a MultiGraph, roots: Vec<usize>) -> Self {
        Self { graph, roots: roots.into_iter() }
    }
}

impl PairingRule for FixedPairing<'_> {
    fn root(&mut self, sleeping: &[usize]) -> usize {
        let idx = self.graph.half_edges();
        for v in self.roots.by_ref() {
            if let Some(pos) = sleeping.iter().position(|&h| idx.owner(h) == v) {
                let first = idx.range(v).start;
                return sleeping.iter().position(|&h| h == first).unwrap_or(pos);
            }
        }
        let (pos, _) = sleeping.iter().enumerate().min_by_key(|&(_, &h)| h).unwrap();
        pos
    }

    fn partner(&mut self, l: usize, _living: &[usize]) -> usize {
        self.graph.partner(l)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Sleeping,
    Active,
    Dead,
}

/// A set of ids with O(1) insertion-free removal and uniform indexing.
struct SwapSet {
    items: Vec<usize>,
    pos: Vec<usize>,
}

impl SwapSet {
    fn full(n: usize) -> Self {
        Self { items: (0..n).collect(), pos: (0..n).collect() }
    }

    fn remove(&mut self, h: usize) {
        let p = self.pos[h];
        let last = *self.items.last().unwrap();
        self.items.swap_remove(p);
        if last != h {
            self.pos[last] = p;
        }
        self.pos[h] = usize::MAX;
    }
}

/// Run the construction with the given choice rule.
pub fn construct_with<P: PairingRule>(
    degrees: &DegreeSequence,
    mode: ExplorationMode,
    rule: &mut P,
) -> Result<(MultiGraph, ExplorationLog)> {
    let total = degrees.total();
    if total % 2 == 1 {
        return Err(Error::Parity(total));
    }
    let index = HalfEdgeIndex::new(degrees.degrees());
    let n = index.vertex_count();
    let m = index.len();

    let mut state = vec![State::Sleeping; m];
    let mut living = SwapSet::full(m);
    let mut sleeping = SwapSet::full(m);
    let mut partner = vec![usize::MAX; m];
    let mut edges = Vec::with_capacity(m / 2);

    let mut active_count = vec![0usize; n];
    let mut cursor = vec![0usize; n]; // least possibly-active rank
    let mut order = Vec::with_capacity(n);
    let mut discovered_via = vec![None; n];
    let mut discovered = vec![false; n];
    let mut backedges = Vec::new();
    let mut component_starts = Vec::new();
    let mut root_choices = Vec::new();

    let mut bf_front = 0usize; // BF: smallest discovery index that may hold actives
    let mut df_stack: Vec<usize> = Vec::new(); // DF: discovery indices, top = latest

    let discover = |w: usize,
                        via: Option<usize>,
                        order: &mut Vec<usize>,
                        state: &mut [State],
                        sleeping: &mut SwapSet,
                        active_count: &mut [usize],
                        discovered: &mut [bool],
                        discovered_via: &mut [Option<usize>],
                        df_stack: &mut Vec<usize>| {
        discovered[w] = true;
        discovered_via[w] = via;
        for h in index.range(w) {
            state[h] = State::Active;
            sleeping.remove(h);
        }
        active_count[w] = index.degree(w);
        df_stack.push(order.len());
        order.push(w);
    };

    // vertices never touch more than n times; at most m/2 pairings
    loop {
        // locate the frontier vertex, if any
        let frontier = match mode {
            ExplorationMode::BreadthFirst => {
                while bf_front < order.len() && active_count[order[bf_front]] == 0 {
                    bf_front += 1;
                }
                (bf_front < order.len()).then(|| order[bf_front])
            }
            ExplorationMode::DepthFirst => {
                while let Some(&top) = df_stack.last() {
                    if active_count[order[top]] == 0 {
                        df_stack.pop();
                    } else {
                        break;
                    }
                }
                df_stack.last().map(|&top| order[top])
            }
        };

        let Some(vi) = frontier else {
            if sleeping.items.is_empty() {
                break;
            }
            // new component from a uniformly chosen sleeping half-edge
            let h = sleeping.items[rule.root(&sleeping.items)];
            let w = index.owner(h);
            component_starts.push(order.len());
            root_choices.push(index.half_edge(h));
            discover(
                w,
                None,
                &mut order,
                &mut state,
                &mut sleeping,
                &mut active_count,
                &mut discovered,
                &mut discovered_via,
                &mut df_stack,
            );
            continue;
        };

        // least active half-edge of the frontier vertex
        let base = index.range(vi).start;
        while state[base + cursor[vi]] != State::Active {
            cursor[vi] += 1;
        }
        let l = base + cursor[vi];
        state[l] = State::Dead;
        living.remove(l);
        active_count[vi] -= 1;

        let r = rule.partner(l, &living.items);
        let w = index.owner(r);
        match state[r] {
            State::Sleeping => {
                debug_assert!(!discovered[w]);
                discover(
                    w,
                    Some(r),
                    &mut order,
                    &mut state,
                    &mut sleeping,
                    &mut active_count,
                    &mut discovered,
                    &mut discovered_via,
                    &mut df_stack,
                );
            }
            State::Active => backedges.push((index.half_edge(l), index.half_edge(r))),
            State::Dead => {
                return Err(Error::State { step: edges.len(), detail: format!("partner {r} is dead") })
            }
        }
        state[r] = State::Dead;
        living.remove(r);
        active_count[w] -= 1;
        partner[l] = r;
        partner[r] = l;
        edges.push((l, r));
    }

    let graph = MultiGraph::from_parts(index, partner, edges);
    let log = ExplorationLog { mode, order, discovered_via, backedges, component_starts, root_choices };
    Ok((graph, log))
}

/// Uniform configuration-model construction in the given exploration order.
pub fn construct<R: Rng + ?Sized>(
    degrees: &DegreeSequence,
    mode: ExplorationMode,
    rng: &mut R,
) -> Result<(MultiGraph, ExplorationLog)> {
    construct_with(degrees, mode, &mut UniformPairing(rng))
}

/// Explore an existing multigraph from the given roots.
pub fn explore(graph: &MultiGraph, mode: ExplorationMode, roots: Vec<usize>) -> Result<ExplorationLog> {
    let seq = DegreeSequence::new(graph.degrees())?;
    let (rebuilt, log) = construct_with(&seq, mode, &mut FixedPairing::new(graph, roots))?;
    debug_assert_eq!(rebuilt.edge_multiset(), graph.edge_multiset());
    Ok(log)
}
