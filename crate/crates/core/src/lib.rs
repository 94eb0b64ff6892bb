//! Spectral graph filtering engine.
//!
//! Polynomial graph filters evaluated as sparse propagation recurrences over
//! a degree-normalized operator, verified against a dense spectral oracle,
//! fitted to target frequency responses, and driven through a decoupled
//! precompute-then-train node-classification pipeline with timing and
//! working-buffer instrumentation.

pub mod error;
pub mod filter;
pub mod graph;
pub mod oracle;
pub mod regress;
pub mod synth;
pub mod matrix;

pub use error::{Result, SgfError};
pub use matrix::SignalMatrix;
