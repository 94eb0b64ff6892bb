//! Degree normalization and the sparse propagation primitive.
//!
//! The normalized operator is `A_rho = D^{rho-1} A_bar D^{-rho}` over the
//! self-looped adjacency, stored as two diagonal scale vectors; entry (i, j)
//! is `left[i] * right[j]`. One propagation hop multiplies this operator into
//! an `n x F` signal in O(nnz * F).

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Result, SgfError};
use crate::graph::CsrGraph;
use crate::matrix::SignalMatrix;

/// Row count below which spmv stays single-threaded.
const PAR_ROW_THRESHOLD: usize = 512;

#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    graph: Arc<CsrGraph>,
    rho: f64,
    left_scale: Vec<f64>,
    right_scale: Vec<f64>,
}

/// Build the normalized operator for `rho` in [0, 1]. The graph must already
/// carry self-loops so every degree is at least one.
pub fn normalize(graph: Arc<CsrGraph>, rho: f64) -> Result<NormalizedAdjacency> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(SgfError::Domain(format!(
            "normalization coefficient rho={rho} outside [0, 1]"
        )));
    }
    if !graph.has_self_loops() {
        return Err(SgfError::Validation(
            "normalize requires a self-looped graph".into(),
        ));
    }
    let degrees = graph.degrees_stored();
    let left_scale: Vec<f64> = degrees.iter().map(|&d| (d as f64).powf(rho - 1.0)).collect();
    let right_scale: Vec<f64> = degrees.iter().map(|&d| (d as f64).powf(-rho)).collect();
    Ok(NormalizedAdjacency {
        graph,
        rho,
        left_scale,
        right_scale,
    })
}

impl NormalizedAdjacency {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn nnz(&self) -> usize {
        self.graph.nnz()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn graph(&self) -> &CsrGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> Arc<CsrGraph> {
        Arc::clone(&self.graph)
    }

    pub fn left_scale(&self) -> &[f64] {
        &self.left_scale
    }

    pub fn right_scale(&self) -> &[f64] {
        &self.right_scale
    }

    /// Entry (i, j) of the operator, zero when the edge is absent.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if self.graph.neighbors(i).binary_search(&j).is_ok() {
            self.left_scale[i] * self.right_scale[j]
        } else {
            0.0
        }
    }

    /// Transposed operator; swapping the scale vectors is exact because the
    /// sparsity pattern is symmetric.
    pub fn transpose(&self) -> NormalizedAdjacency {
        NormalizedAdjacency {
            graph: Arc::clone(&self.graph),
            rho: 1.0 - self.rho,
            left_scale: self.right_scale.clone(),
            right_scale: self.left_scale.clone(),
        }
    }

    fn check_rows(&self, x: &SignalMatrix) -> Result<()> {
        if x.rows() != self.n() {
            return Err(SgfError::Shape(format!(
                "signal has {} rows, graph has {} nodes",
                x.rows(),
                self.n()
            )));
        }
        Ok(())
    }

    /// `out = a*x + b*(A_rho x)`, the affine propagation kernel every filter
    /// recurrence reduces to. `out` must be a distinct buffer from `x`.
    pub fn affine_spmv_into(&self, x: &SignalMatrix, a: f64, b: f64, out: &mut SignalMatrix) {
        let n = self.n();
        let cols = x.cols();
        debug_assert_eq!(out.rows(), n);
        debug_assert_eq!(out.cols(), cols);
        let indptr = self.graph.indptr();
        let indices = self.graph.indices();
        let left = &self.left_scale;
        let right = &self.right_scale;

        let row_kernel = |i: usize, out_row: &mut [f64]| {
            out_row.fill(0.0);
            for &j in &indices[indptr[i]..indptr[i + 1]] {
                let w = right[j];
                let xr = x.row(j);
                for (o, v) in out_row.iter_mut().zip(xr.iter()) {
                    *o += w * v;
                }
            }
            let li = left[i];
            let xr = x.row(i);
            for (o, v) in out_row.iter_mut().zip(xr.iter()) {
                *o = a * v + b * li * *o;
            }
        };

        if n >= PAR_ROW_THRESHOLD {
            out.data_mut()
                .par_chunks_mut(cols)
                .enumerate()
                .for_each(|(i, row)| row_kernel(i, row));
        } else {
            for i in 0..n {
                let row = &mut out.data_mut()[i * cols..(i + 1) * cols];
                row_kernel(i, row);
            }
        }
    }

    /// `A_rho x` into a freshly allocated matrix.
    pub fn spmv(&self, x: &SignalMatrix) -> Result<SignalMatrix> {
        self.check_rows(x)?;
        let mut out = SignalMatrix::zeros(self.n(), x.cols());
        self.affine_spmv_into(x, 0.0, 1.0, &mut out);
        Ok(out)
    }

    /// `(I - A_rho) x`.
    pub fn apply_laplacian(&self, x: &SignalMatrix) -> Result<SignalMatrix> {
        self.check_rows(x)?;
        let mut out = SignalMatrix::zeros(self.n(), x.cols());
        self.affine_spmv_into(x, 1.0, -1.0, &mut out);
        Ok(out)
    }

    /// Propagation over a single contiguous column.
    pub fn spmv_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        debug_assert_eq!(x.len(), n);
        let indptr = self.graph.indptr();
        let indices = self.graph.indices();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for &j in &indices[indptr[i]..indptr[i + 1]] {
                acc += self.right_scale[j] * x[j];
            }
            out[i] = self.left_scale[i] * acc;
        }
        out
    }
}
