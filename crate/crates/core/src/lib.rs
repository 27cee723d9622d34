//! Generalized lazy search: shortest paths on graphs whose edges are
//! expensive to validate, with pluggable rules for when to stop growing the
//! search tree and which edge to check next.

pub mod analysis;
pub mod engine;
pub mod format;
pub mod graph;
pub mod instance;
pub mod sampling;
pub mod search;
pub mod stats;
pub mod toggles;
pub mod tree;
pub mod world;

pub use engine::{cost_total, gls_run, oracle_shortest, verify_certificate, CostModel, EngineError, RunResult};
pub use graph::{EdgeId, EdgeRecord, EdgeSpec, Graph, GraphError, Path, VertexId, VertexRecord};
pub use toggles::{preset, Event, EventKind, Selector, SelectorKind};
pub use tree::{EdgeStatus, Heuristic, LazyTree, RewireLog};
pub use world::{AnyWorld, BitmapWorld, EnvKind, ExplicitWorld, PriorModel, World, WorldError};
