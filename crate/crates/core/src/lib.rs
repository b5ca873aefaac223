//! Budget-limited single-vertex intervention design over Markov equivalence
//! classes of DAGs.

pub mod designer;
pub mod error;
pub mod essential;
pub mod estimators;
pub mod graph;
pub mod mec;
pub mod meek;
pub mod rng;
pub mod workbench;

pub use error::{Error, Result};
pub use graph::{DirectedEdgeSet, InterventionSet, PairState, Pdag, PdagBuilder, VertexId};
