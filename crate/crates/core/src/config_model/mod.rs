//! Configuration-model multigraphs built by half-edge pairing in BF or DF order.

mod explore;
mod forest;
mod multigraph;
mod rebuild;

pub use explore::{construct, construct_with, explore, ExplorationLog, ExplorationMode, FixedPairing, PairingRule, UniformPairing};
pub use forest::{forest_from_walk, split_backedges, ExploredForest, ForestNode};
pub use multigraph::{enumerate_multigraphs, multigraph_probability, Adjacency, HalfEdge, HalfEdgeIndex, MultiGraph};
pub use rebuild::{rebuild_x_from_s, RebuiltWalk};
