//! The filter engine: specs, coefficients, sparse recurrences, per-hop basis
//! export, and scalar frequency responses.

pub mod basis;
pub mod coeffs;
pub mod engine;
pub mod response;
pub mod spec;
pub mod workspace;

pub use basis::{export_basis, BasisStack};
pub use coeffs::{chebinterp_weights, fixed_coefficients};
pub use engine::{
    apply_filter, apply_filter_tracked, buffer_budget, chebyshev_step, jacobi_step, legendre_step,
    ApplyOutcome, ApplyReport,
};
pub use response::{frequency_response, spectral_form, ResponseFn, SpectralForm};
pub use spec::{FilterKind, FilterSpec, Fusion, Taxonomy, DEFAULT_HOPS};
pub use workspace::{BufferBudget, BufferReport, Workspace};
