//! Graph loading, normalization, and structural statistics.

mod csr;
pub mod io;
mod labeled;
mod normalize;
pub mod stats;

pub use csr::CsrGraph;
pub use labeled::{LabeledGraph, Splits};
pub use normalize::{normalize, NormalizedAdjacency};
pub use stats::{degree_histogram, degree_stats, homophily_score, DegreeStats, HomophilyStats};
