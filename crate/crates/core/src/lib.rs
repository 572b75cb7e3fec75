//! Seeded graph matching with partially correct seeds.

pub mod bench;
pub mod error;
pub mod graph;
pub mod matcher;
pub mod rng;
pub mod synth;
pub mod theory;
pub mod witness;

pub use error::{Error, Result};
pub use graph::{Graph, Vertex, VertexMapping};
pub use matcher::{Algorithm, MatchResult};
