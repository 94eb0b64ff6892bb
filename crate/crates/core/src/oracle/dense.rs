//! Dense square matrices for the ground-truth path. Plain O(n^3) arithmetic;
//! the oracle is a test fixture, not a performance path.

use crate::error::{Result, SgfError};
use crate::graph::NormalizedAdjacency;
use crate::matrix::SignalMatrix;

/// Largest graph the dense oracle will materialise.
pub const DENSE_CAP: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> DenseMatrix {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> DenseMatrix {
        let n = rows.len();
        let mut m = DenseMatrix::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &DenseMatrix) {
        for (s, v) in self.data.iter_mut().zip(other.data.iter()) {
            *s += a * v;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    /// `self * x` for an n x F signal.
    pub fn apply(&self, x: &SignalMatrix) -> SignalMatrix {
        let n = self.n;
        let f = x.cols();
        let mut out = SignalMatrix::zeros(n, f);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let xr = x.row(k);
                let or = out.row_mut(i);
                for c in 0..f {
                    or[c] += a * xr[c];
                }
            }
        }
        out
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Materialise the normalized operator densely.
pub fn dense_adjacency(adj: &NormalizedAdjacency) -> Result<DenseMatrix> {
    let n = adj.n();
    if n > DENSE_CAP {
        return Err(SgfError::Validation(format!(
            "dense oracle capped at n = {DENSE_CAP}, graph has {n} nodes"
        )));
    }
    let mut m = DenseMatrix::zeros(n);
    let g = adj.graph();
    for i in 0..n {
        for &j in g.neighbors(i) {
            m.set(i, j, adj.left_scale()[i] * adj.right_scale()[j]);
        }
    }
    Ok(m)
}

/// `I - A` materialised exactly.
pub fn dense_laplacian(adj: &NormalizedAdjacency) -> Result<DenseMatrix> {
    let mut m = dense_adjacency(adj)?;
    m.scale(-1.0);
    for i in 0..m.n() {
        let v = m.get(i, i);
        m.set(i, i, v + 1.0);
    }
    Ok(m)
}
