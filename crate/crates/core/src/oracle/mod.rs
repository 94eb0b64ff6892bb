//! Dense-arithmetic ground truth for small graphs: eigendecomposition,
//! Fourier-domain filtering, and dense recurrence evaluation.

pub mod dense;
pub mod eigen;
pub mod matpoly;
pub mod spectral;

pub use dense::{dense_adjacency, dense_laplacian, DenseMatrix, DENSE_CAP};
pub use eigen::{eigendecompose, EigenSystem};
pub use matpoly::matrix_polynomial_oracle;
pub use spectral::{general_spectrum, spectral_filter_oracle, GeneralSpectrum};
