use std::collections::{HashMap, VecDeque};

use super::explore::{ExplorationLog, ExplorationMode};
use super::multigraph::MultiGraph;
use crate::error::{Error, Result};
use crate::paths::IntPath;

/// What a forest vertex stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForestNode {
    /// A vertex of the original graph.
    Graph(usize),
    /// One of the two leaves replacing a backedge; the payload is the pair id.
    NewLeaf(usize),
    /// A vertex reconstructed from a walk, with no graph counterpart.
    Anonymous,
}

/// A spanning forest with every backedge split into two new leaves.
///
/// Vertices are labelled `u_1..u_p` in exploration order (stored 0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploredForest {
    pub mode: ExplorationMode,
    pub nodes: Vec<ForestNode>,
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
    /// Number of children of each forest vertex.
    pub children: Vec<usize>,
    /// 1-based label pairs `(l_i, r_i)` with `l_i < r_i`, indexed by pair id.
    pub new_leaf_pairs: Vec<(usize, usize)>,
    /// Index of the first vertex of each component.
    pub component_starts: Vec<usize>,
}

impl ExploredForest {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_new_leaf(&self, u: usize) -> bool {
        matches!(self.nodes[u], ForestNode::NewLeaf(_))
    }

    pub fn component_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.component_starts.len());
        for (i, &s) in self.component_starts.iter().enumerate() {
            let e = self.component_starts.get(i + 1).copied().unwrap_or(self.nodes.len());
            out.push(s..e);
        }
        out
    }

    /// Level sizes of the component occupying `range`, by direct count.
    pub fn level_sizes(&self, range: std::ops::Range<usize>) -> Vec<i64> {
        let mut levels = Vec::new();
        for u in range {
            let d = self.depth[u];
            if levels.len() <= d {
                levels.resize(d + 1, 0);
            }
            levels[d] += 1;
        }
        levels
    }

    /// Number of new-leaf pairs whose first leaf falls in `range`.
    pub fn pairs_in(&self, range: std::ops::Range<usize>) -> Vec<(usize, usize)> {
        self.new_leaf_pairs
            .iter()
            .copied()
            .filter(|&(l, _)| range.contains(&(l - 1)))
            .collect()
    }
}

enum Child {
    Tree(usize),
    Leaf(usize),
}

/// Assign labels by traversing the given child lists from each root in order.
fn label(
    mode: ExplorationMode,
    roots: &[usize],
    kids: &[Vec<Child>],
) -> (Vec<ForestNode>, Vec<Option<usize>>, Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut nodes = Vec::new();
    let mut parent = Vec::new();
    let mut depth = Vec::new();
    let mut children = Vec::new();
    let mut starts = Vec::new();

    for &root in roots {
        starts.push(nodes.len());
        // (node, parent label, depth)
        let mut frontier: VecDeque<(ForestNode, Option<usize>, usize)> = VecDeque::new();
        frontier.push_back((ForestNode::Graph(root), None, 0));
        while let Some((node, par, d)) = match mode {
            ExplorationMode::BreadthFirst => frontier.pop_front(),
            ExplorationMode::DepthFirst => frontier.pop_back(),
        } {
            let me = nodes.len();
            nodes.push(node);
            parent.push(par);
            depth.push(d);
            let list: Vec<ForestNode> = match node {
                ForestNode::Graph(v) => kids[v]
                    .iter()
                    .map(|c| match *c {
                        Child::Tree(w) => ForestNode::Graph(w),
                        Child::Leaf(id) => ForestNode::NewLeaf(id),
                    })
                    .collect(),
                _ => Vec::new(),
            };
            children.push(list.len());
            match mode {
                ExplorationMode::BreadthFirst => {
                    frontier.extend(list.into_iter().map(|c| (c, Some(me), d + 1)))
                }
                ExplorationMode::DepthFirst => {
                    frontier.extend(list.into_iter().rev().map(|c| (c, Some(me), d + 1)))
                }
            }
        }
    }
    (nodes, parent, depth, children, starts)
}

/// Replace every backedge by two new leaves and label the forest in the log's order.
///
/// Children of a vertex are its half-edges in rank order, skipping the one
/// it was discovered through.
pub fn split_backedges(g: &MultiGraph, log: &ExplorationLog) -> ExploredForest {
    let idx = g.half_edges();
    let mut pair_of: HashMap<usize, usize> = HashMap::with_capacity(2 * log.backedges.len());
    for (id, &(l, r)) in log.backedges.iter().enumerate() {
        pair_of.insert(idx.id(l), id);
        pair_of.insert(idx.id(r), id);
    }

    let n = g.vertex_count();
    let mut kids: Vec<Vec<Child>> = (0..n).map(|_| Vec::new()).collect();
    for (v, list) in kids.iter_mut().enumerate() {
        for h in idx.range(v) {
            if log.discovered_via[v] == Some(h) {
                continue;
            }
            if let Some(&id) = pair_of.get(&h) {
                list.push(Child::Leaf(id));
            } else {
                list.push(Child::Tree(idx.owner(g.partner(h))));
            }
        }
    }

    let roots: Vec<usize> = log.component_starts.iter().map(|&s| log.order[s]).collect();
    let (nodes, parent, depth, children, component_starts) = label(log.mode, &roots, &kids);

    let mut firsts = vec![usize::MAX; log.backedges.len()];
    let mut new_leaf_pairs = vec![(0, 0); log.backedges.len()];
    for (u, node) in nodes.iter().enumerate() {
        if let ForestNode::NewLeaf(id) = *node {
            if firsts[id] == usize::MAX {
                firsts[id] = u + 1;
            } else {
                new_leaf_pairs[id] = (firsts[id], u + 1);
            }
        }
    }
    // number pairs by the position of their first leaf
    let mut ids: Vec<usize> = (0..new_leaf_pairs.len()).collect();
    ids.sort_by_key(|&i| new_leaf_pairs[i].0);
    let mut renumber = vec![0; ids.len()];
    for (new, &old) in ids.iter().enumerate() {
        renumber[old] = new;
    }
    let nodes = nodes
        .into_iter()
        .map(|node| match node {
            ForestNode::NewLeaf(id) => ForestNode::NewLeaf(renumber[id]),
            other => other,
        })
        .collect();
    let new_leaf_pairs = ids.iter().map(|&i| new_leaf_pairs[i]).collect();

    ExploredForest { mode: log.mode, nodes, parent, depth, children, new_leaf_pairs, component_starts }
}

/// Rebuild a plane forest from its Lukasiewicz walk, read in BF or DF order.
///
/// Vertex `u_{k+1}` gets `x(k+1) - x(k) + 1` children. `pairs` are attached
/// as new-leaf pairs (1-based labels).
pub fn forest_from_walk(x: &IntPath, pairs: &[(usize, usize)], mode: ExplorationMode) -> Result<ExploredForest> {
    let v = x.values();
    if v.first() != Some(&0) {
        return Err(Error::Domain("walk must start at 0".into()));
    }
    let p = v.len() - 1;
    let mut nodes = vec![ForestNode::Anonymous; p];
    for (id, &(l, r)) in pairs.iter().enumerate() {
        if l == 0 || r > p || l >= r {
            return Err(Error::Domain(format!("pair ({l}, {r}) outside 1..={p}")));
        }
        nodes[l - 1] = ForestNode::NewLeaf(id);
        nodes[r - 1] = ForestNode::NewLeaf(id);
    }
    let mut parent = vec![None; p];
    let mut depth = vec![0; p];
    let mut children = vec![0; p];
    let mut component_starts = Vec::new();

    // pending child slots: BF queue of parents, DF stack of (parent, remaining)
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for k in 0..p {
        let step = v[k + 1] - v[k];
        if step < -1 {
            return Err(Error::State { step: k, detail: format!("walk step {step} below -1") });
        }
        let chi = (step + 1) as usize;
        let par = match mode {
            ExplorationMode::BreadthFirst => queue.pop_front(),
            ExplorationMode::DepthFirst => loop {
                match stack.last_mut() {
                    Some((_, 0)) => {
                        stack.pop();
                    }
                    Some((q, rem)) => {
                        *rem -= 1;
                        break Some(*q);
                    }
                    None => break None,
                }
            },
        };
        match par {
            Some(q) => {
                parent[k] = Some(q);
                depth[k] = depth[q] + 1;
            }
            None => component_starts.push(k),
        }
        children[k] = chi;
        match mode {
            ExplorationMode::BreadthFirst => queue.extend(std::iter::repeat_n(k, chi)),
            ExplorationMode::DepthFirst => stack.push((k, chi)),
        }
    }
    Ok(ExploredForest { mode, nodes, parent, depth, children, new_leaf_pairs: pairs.to_vec(), component_starts })
}
