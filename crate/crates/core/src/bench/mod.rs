//! Experiment harness: sweeps, collapse analysis, edge-list ingestion, the
//! overlapping-copies protocol for given graphs, and CSV/SVG output.

pub mod accuracy;
pub mod collapse;
pub mod config;
pub mod ingest;
pub mod output;
pub mod real;
pub mod sweep;

pub use accuracy::accuracy;
pub use collapse::{collapse_analysis, CollapseReport, Curve, Rescale};
pub use config::{ExperimentConfig, PSpec};
pub use ingest::{ingest_edge_list, EdgeList};
pub use real::{real_protocol, RealParams, RealTrial};
pub use sweep::{run_sweep, SweepResult, TrialResult};
