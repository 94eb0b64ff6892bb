//! Dense row-major `n x F` signal matrices.
//!
//! All engine arithmetic is 64-bit; the optional 32-bit mode only affects
//! on-disk storage. The layout is one contiguous `Vec<f64>` so buffers can be
//! sized and accounted exactly.

use crate::error::{Result, SgfError};

#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SignalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SignalMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(SgfError::Shape(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(SignalMatrix { rows, cols, data })
    }

    /// Single-column matrix from a vector.
    pub fn column_vector(data: Vec<f64>) -> Self {
        SignalMatrix {
            rows: data.len(),
            cols: 1,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        for i in 0..self.rows {
            self.set(i, j, v[i]);
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn copy_from(&mut self, other: &SignalMatrix) {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data.copy_from_slice(&other.data);
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &SignalMatrix) {
        debug_assert_eq!(self.data.len(), x.data.len());
        for (s, v) in self.data.iter_mut().zip(x.data.iter()) {
            *s += a * v;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|x| *x *= a);
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &SignalMatrix) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SignalMatrix) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Max abs difference scaled by the other matrix's magnitude (floor 1),
    /// so unit-scale comparisons behave like absolute error.
    pub fn rel_max_diff(&self, other: &SignalMatrix) -> f64 {
        self.max_abs_diff(other) / other.max_abs().max(1.0)
    }

    pub fn has_nan(&self) -> bool {
        self.data.iter().any(|v| v.is_nan())
    }

    /// Horizontal concatenation of equally tall blocks.
    pub fn hcat(blocks: &[&SignalMatrix]) -> Result<SignalMatrix> {
        let rows = blocks
            .first()
            .ok_or_else(|| SgfError::Shape("hcat of zero blocks".into()))?
            .rows;
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(SgfError::Shape("hcat blocks differ in row count".into()));
        }
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = SignalMatrix::zeros(rows, cols);
        for i in 0..rows {
            let mut off = 0;
            for b in blocks {
                out.row_mut(i)[off..off + b.cols].copy_from_slice(b.row(i));
                off += b.cols;
            }
        }
        Ok(out)
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axpy_and_norms() {
        let mut a = SignalMatrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = SignalMatrix::from_vec(2, 2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        a.axpy(-1.0, &b);
        assert_eq!(a.data(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(a.max_abs(), 3.0);
    }

    #[test]
    fn hcat_blocks() {
        let a = SignalMatrix::from_vec(2, 1, vec![1.0, 2.0]).unwrap();
        let b = SignalMatrix::from_vec(2, 2, vec![3.0, 4.0, 5.0, 6.0]).unwrap();
        let c = SignalMatrix::hcat(&[&a, &b]).unwrap();
        assert_eq!(c.row(0), &[1.0, 3.0, 4.0]);
        assert_eq!(c.row(1), &[2.0, 5.0, 6.0]);
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(SignalMatrix::from_vec(2, 2, vec![0.0; 3]).is_err());
    }
}
