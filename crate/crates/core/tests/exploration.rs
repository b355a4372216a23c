use epiprofile::config_model::{
    construct, explore, forest_from_walk, rebuild_x_from_s, split_backedges, ExplorationMode, ForestNode, HalfEdge,
    MultiGraph,
};
use epiprofile::degree_laws::DegreeSequence;
use epiprofile::exploration_stats::{
    component_walk, degrees_in_order, discrete_height, discrete_lamperti, excursions_above_min, height_profile,
    marks_and_surplus, profile_discrepancy, s_walk, x_walk,
};
use epiprofile::paths::{IntPath, PathKind};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn he(vertex: usize, rank: usize) -> HalfEdge {
    HalfEdge { vertex, rank }
}

/// The labelled component with three backedges: v1..v9 are vertices 0..8.
fn backedge_figure() -> MultiGraph {
    let degrees = [3, 4, 2, 4, 2, 1, 2, 2, 2];
    let pairs = [
        (he(0, 0), he(1, 0)),
        (he(0, 1), he(2, 0)),
        (he(0, 2), he(3, 0)),
        (he(1, 1), he(4, 0)),
        (he(1, 2), he(5, 0)),
        (he(1, 3), he(6, 0)),
        (he(2, 1), he(3, 3)),
        (he(3, 1), he(7, 1)),
        (he(3, 2), he(6, 1)),
        (he(4, 1), he(8, 1)),
        (he(7, 0), he(8, 0)),
    ];
    MultiGraph::from_pairing(&degrees, &pairs).unwrap()
}

#[test]
fn figure_forest_labels() {
    let g = backedge_figure();
    let log = explore(&g, ExplorationMode::BreadthFirst, vec![0]).unwrap();
    assert_eq!(log.order, (0..9).collect::<Vec<_>>());
    assert_eq!(log.backedges.len(), 3);

    let f = split_backedges(&g, &log);
    assert_eq!(f.len(), 15);
    let leaves: Vec<usize> = (0..f.len()).filter(|&u| f.is_new_leaf(u)).map(|u| u + 1).collect();
    assert_eq!(leaves, vec![8, 10, 11, 13, 14, 15]);
    assert_eq!(f.new_leaf_pairs, vec![(8, 11), (10, 13), (14, 15)]);
    assert_eq!(f.children, vec![3, 3, 1, 3, 1, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0]);

    let x = x_walk(&f);
    assert_eq!(x.values().last(), Some(&-1));
    assert!(x.values()[..15].iter().all(|&v| v >= 0));
    let ex = excursions_above_min(&x);
    assert_eq!(ex.lengths(), vec![15]);

    let (marks, surplus) = marks_and_surplus(&f, None);
    assert_eq!(marks.pairs, vec![(8, 11), (10, 13), (14, 15)]);
    assert_eq!(surplus, 3);

    let (zg, cg) = height_profile(&g, 0);
    assert_eq!(zg.values(), &[1, 3, 4, 1]);
    assert_eq!(cg.values().last(), Some(&9));
    let zf = IntPath::new(f.level_sizes(0..15), PathKind::Profile);
    assert_eq!(zf.values(), &[1, 3, 7, 3, 1]);
    let d = profile_discrepancy(&zg, &zf);
    assert!(d <= 6, "discrepancy {d}");

    let (z, _) = discrete_lamperti(&x, 1).unwrap();
    assert_eq!(&z.values()[..5], zf.values());
}

#[test]
fn outbreak_profile_one_three_five() {
    // 1 infects 2, 3, 4 on day 1; they infect 5..9 on day 2, with one extra contact
    let edges = [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 6), (3, 7), (3, 8), (5, 6)];
    let mut deg = vec![0u64; 9];
    let mut next = vec![0usize; 9];
    for &(a, b) in &edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    let pairs: Vec<_> = edges
        .iter()
        .map(|&(a, b)| {
            let p = (he(a, next[a]), he(b, next[b]));
            next[a] += 1;
            next[b] += 1;
            p
        })
        .collect();
    let g = MultiGraph::from_pairing(&deg, &pairs).unwrap();
    let (z, c) = height_profile(&g, 0);
    assert_eq!(z.values(), &[1, 3, 5]);
    assert_eq!(c.values(), &[1, 4, 9]);
}

#[test]
fn trivial_constructions() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (g, log) = construct(&DegreeSequence::new(vec![2]).unwrap(), ExplorationMode::BreadthFirst, &mut rng).unwrap();
    assert_eq!(g.loop_count(0), 1);
    // the loop closes onto an active half-edge, so it is a backedge
    assert_eq!(log.backedges.len(), 1);
    assert_eq!(split_backedges(&g, &log).len(), 3);
    assert_eq!(log.component_starts.len(), 1);

    let (g, log) = construct(&DegreeSequence::new(vec![1, 1]).unwrap(), ExplorationMode::DepthFirst, &mut rng).unwrap();
    assert_eq!(g.edge_count(), 1);
    assert!(log.backedges.is_empty());
}

#[test]
fn path_and_loop_frequencies() {
    let seq = DegreeSequence::new(vec![1, 1, 2]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trials = 100_000;
    let mut paths = 0;
    for _ in 0..trials {
        let (g, _) = construct(&seq, ExplorationMode::BreadthFirst, &mut rng).unwrap();
        if g.is_simple() {
            paths += 1;
        }
    }
    let phat = paths as f64 / trials as f64;
    let sd = (2.0 / 9.0 / trials as f64).sqrt();
    assert!((phat - 2.0 / 3.0).abs() < 3.0 * sd, "phat {phat}");
}

#[test]
fn rebuild_on_forced_tree_is_deterministic() {
    // a path explored from an end: no other active half-edge at any decision
    let s = IntPath::new(vec![0, -1, -1, -2], PathKind::Walk);
    let degrees = [1, 2, 1];
    for seed in 0..20 {
        let r = rebuild_x_from_s(&s, &degrees, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(r.x_walk.values(), &[0, 0, 0, -1]);
        assert!(r.marks.is_empty());
    }
}

#[test]
fn rebuild_rejects_inconsistent_walk() {
    let s = IntPath::new(vec![0, 1], PathKind::Walk);
    assert!(rebuild_x_from_s(&s, &[2], &mut ChaCha8Rng::seed_from_u64(0)).is_err());
}

/// Degrees (2, 1, 1): the number of backedges produced by the state machine
/// matches direct construction.
#[test]
fn rebuild_matches_construction_on_small_degrees() {
    let seq = DegreeSequence::new(vec![2, 1, 1]).unwrap();
    let trials = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut direct = [0u32; 3];
    let mut rebuilt = [0u32; 3];
    for _ in 0..trials {
        let (g, log) = construct(&seq, ExplorationMode::BreadthFirst, &mut rng).unwrap();
        direct[log.backedges.len()] += 1;
        let s = s_walk(&log, &g.degrees());
        let r = rebuild_x_from_s(&s, &degrees_in_order(&log, &g.degrees()), &mut rng).unwrap();
        rebuilt[r.marks.len()] += 1;
    }
    for k in 0..3 {
        let p = direct[k] as f64 / trials as f64;
        let q = rebuilt[k] as f64 / trials as f64;
        let sd = ((p * (1.0 - p) + q * (1.0 - q)) / trials as f64).sqrt().max(1e-9);
        assert!((p - q).abs() < 3.0 * sd + 1e-12, "k={k}: {p} vs {q}");
    }
}

fn small_degrees() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(prop_oneof![4 => Just(1u64), 3 => Just(2u64), 2 => Just(3u64), 1 => 4u64..8], 1..60)
}

proptest! {
    #[test]
    fn forest_accounting(degrees in small_degrees(), seed in any::<u64>(), df in any::<bool>()) {
        let mode = if df { ExplorationMode::DepthFirst } else { ExplorationMode::BreadthFirst };
        let seq = DegreeSequence::with_parity_fix(degrees).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, log) = construct(&seq, mode, &mut rng).unwrap();
        let f = split_backedges(&g, &log);
        let n = g.vertex_count();
        prop_assert_eq!(f.len(), n + 2 * log.backedges.len());
        prop_assert_eq!(g.edges().count() * 2, seq.total() as usize);

        // child counts: deg for roots, deg - 1 otherwise; new leaves have none
        let real: Vec<usize> = f.nodes.iter().filter_map(|u| match u { ForestNode::Graph(v) => Some(*v), _ => None }).collect();
        prop_assert_eq!(&real, &log.order);
        for (u, node) in f.nodes.iter().enumerate() {
            match node {
                ForestNode::Graph(v) => {
                    let expect = if f.parent[u].is_none() { g.degree(*v) } else { g.degree(*v) - 1 };
                    prop_assert_eq!(f.children[u], expect);
                }
                _ => prop_assert_eq!(f.children[u], 0),
            }
        }

        let x = x_walk(&f);
        let mut paired = vec![false; f.len()];
        for &(l, r) in &f.new_leaf_pairs {
            prop_assert!(l < r);
            prop_assert!(!paired[l - 1] && !paired[r - 1]);
            paired[l - 1] = true;
            paired[r - 1] = true;
        }
        prop_assert_eq!(paired.iter().filter(|&&b| b).count(), f.len() - n);

        for range in f.component_ranges() {
            let w = component_walk(&x, range.clone());
            prop_assert_eq!(*w.values().last().unwrap(), -1);
            prop_assert!(w.values()[..w.len() - 1].iter().all(|&v| v >= 0));
            // Lamperti recursion on the BF walk gives the level sizes exactly
            if mode == ExplorationMode::BreadthFirst {
                let (z, c) = discrete_lamperti(&w, 1).unwrap();
                let mut levels = f.level_sizes(range.clone());
                levels.push(0);
                prop_assert_eq!(z.values(), &levels[..]);
                prop_assert_eq!(*c.values().last().unwrap() as usize, range.len());

                let root = match f.nodes[range.start] { ForestNode::Graph(v) => v, _ => unreachable!() };
                let (zg, _) = height_profile(&g, root);
                let surplus = f.pairs_in(range.clone()).len() as u64;
                prop_assert!(profile_discrepancy(&zg, &IntPath::new(f.level_sizes(range), PathKind::Profile)) <= 2 * surplus);
            }
        }

        // depth-first heights are forest depths
        if mode == ExplorationMode::DepthFirst {
            let h = discrete_height(&x);
            for u in 0..f.len() {
                prop_assert_eq!(h.values()[u] as usize, f.depth[u]);
            }
        }

        // the walk alone determines the plane forest
        let back = forest_from_walk(&x, &f.new_leaf_pairs, mode).unwrap();
        prop_assert_eq!(&back.parent, &f.parent);
        prop_assert_eq!(&back.depth, &f.depth);

        let ex = excursions_above_min(&x);
        prop_assert_eq!(ex.lengths().iter().sum::<usize>(), f.len());
        prop_assert_eq!(ex.len(), f.component_starts.len());
        prop_assert!(ex.lengths().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rebuilt_walk_is_a_forest_walk(degrees in small_degrees(), seed in any::<u64>()) {
        let seq = DegreeSequence::with_parity_fix(degrees).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, log) = construct(&seq, ExplorationMode::DepthFirst, &mut rng).unwrap();
        let s = s_walk(&log, &g.degrees());
        let ordered = degrees_in_order(&log, &g.degrees());
        let a = rebuild_x_from_s(&s, &ordered, &mut ChaCha8Rng::seed_from_u64(seed ^ 1)).unwrap();
        let b = rebuild_x_from_s(&s, &ordered, &mut ChaCha8Rng::seed_from_u64(seed ^ 1)).unwrap();
        prop_assert_eq!(a.x_walk.len(), g.vertex_count() + 2 * a.marks.len() + 1);

        let bf = forest_from_walk(&a.x_walk, &a.marks.pairs, ExplorationMode::BreadthFirst).unwrap();
        let df = forest_from_walk(&b.x_walk, &b.marks.pairs, ExplorationMode::DepthFirst).unwrap();
        prop_assert_eq!(x_walk(&bf).running_inf(), x_walk(&df).running_inf());
        // the closing leaf sits strictly below the level where its partner was opened
        let xs = a.x_walk.values();
        for &(l, r) in &a.marks.pairs {
            prop_assert!(l < r);
            prop_assert!(xs[r - 1] < xs[l - 1]);
            prop_assert_eq!(xs[r], xs[r - 1] - 1);
        }
    }
}
