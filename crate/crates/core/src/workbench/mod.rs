//! Experiment layer: random chordal DAGs, the discovered-edge ratio, the
//! benchmark runner, gene-network ingestion, and the graph text format.

pub mod bench;
pub mod dream3;
pub mod format;
pub mod generator;
pub mod metrics;

pub use bench::{run_benchmark, BenchRow, BenchSpec};
pub use dream3::{ingest_dream3, parse_dream3};
pub use format::{parse_graph, read_graph, write_graph, write_graph_file};
pub use generator::{random_chordal_dag, GeneratorConfig};
pub use metrics::{discovered_edge_ratio, EvalReport};
