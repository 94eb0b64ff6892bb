//! Attributed, labelled graph with train/val/test splits.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SgfError};
use crate::graph::CsrGraph;
use crate::matrix::SignalMatrix;

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Splits {
    /// Splits must be pairwise disjoint subsets of [0, n).
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for idx in [&self.train, &self.val, &self.test] {
            for &i in idx {
                if i >= n {
                    return Err(SgfError::Bounds(format!("split index {i} >= n = {n}")));
                }
                if seen[i] {
                    return Err(SgfError::Validation(format!(
                        "index {i} appears in more than one split"
                    )));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: Arc<CsrGraph>,
    pub features: SignalMatrix,
    pub labels: Vec<usize>,
    pub splits: Splits,
}

impl LabeledGraph {
    pub fn new(
        graph: Arc<CsrGraph>,
        features: SignalMatrix,
        labels: Vec<usize>,
        splits: Splits,
    ) -> Result<Self> {
        let n = graph.n();
        if features.rows() != n {
            return Err(SgfError::Shape(format!(
                "feature matrix has {} rows for {} nodes",
                features.rows(),
                n
            )));
        }
        if labels.len() != n {
            return Err(SgfError::Shape(format!(
                "{} labels for {} nodes",
                labels.len(),
                n
            )));
        }
        splits.validate(n)?;
        Ok(LabeledGraph {
            graph,
            features,
            labels,
            splits,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().copied().max().map_or(0, |m| m + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlapping_splits_rejected() {
        let s = Splits {
            train: vec![0, 1],
            val: vec![1],
            test: vec![2],
        };
        assert!(s.validate(3).is_err());
    }

    #[test]
    fn partial_cover_allowed() {
        let s = Splits {
            train: vec![0],
            val: vec![],
            test: vec![2],
        };
        assert!(s.validate(4).is_ok());
    }
}
