//! Critical configuration-model graphs with heavy-tailed degrees: exact
//! exploration objects (walks, height profiles, Lamperti pairs, marks) and
//! samplers for their spectrally positive stable limits.

pub mod config_model;
pub mod degree_laws;
pub mod error;
pub mod exploration_stats;
pub mod export;
pub mod harness;
pub mod lamperti;
pub mod paths;
pub mod stable;

pub use config_model::{ExplorationLog, ExplorationMode, ExploredForest, HalfEdge, MultiGraph};
pub use degree_laws::{CriticalDegreeLaw, DegreeSequence};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ReplicaResult};
pub use paths::{ExcursionList, GridPath, IntPath, MarkSet, PathKind, StepPath};
pub use stable::{StableConfig, WeightedPath};
