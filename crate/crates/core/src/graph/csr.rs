//! Immutable CSR graph storage.
//!
//! Graphs are undirected and stored with both directions materialised, so an
//! undirected edge contributes two stored entries. Self-loops are added
//! explicitly (one per row) before normalization; `nnz` counts every stored
//! entry including loops.

use crate::error::{Result, SgfError};

#[derive(Debug, Clone)]
pub struct CsrGraph {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
}

impl CsrGraph {
    /// Build a symmetric CSR from an undirected edge list. Both directions are
    /// materialised and duplicates removed; self-loops in the input are kept
    /// as a single entry. Column ids must lie in `[0, n)`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<CsrGraph> {
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(SgfError::Bounds(format!(
                    "edge ({u}, {v}) outside node range [0, {n})"
                )));
            }
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u].push(v);
            if u != v {
                adj[v].push(u);
            }
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        indptr.push(0);
        for row in adj.iter_mut() {
            row.sort_unstable();
            row.dedup();
            indices.extend_from_slice(row);
            indptr.push(indices.len());
        }
        Ok(CsrGraph { n, indptr, indices })
    }

    /// Return a copy with exactly one self-loop per row. Idempotent.
    pub fn with_self_loops(&self) -> CsrGraph {
        let mut indptr = Vec::with_capacity(self.n + 1);
        let mut indices = Vec::with_capacity(self.indices.len() + self.n);
        indptr.push(0);
        for i in 0..self.n {
            let row = self.neighbors(i);
            if row.binary_search(&i).is_ok() {
                indices.extend_from_slice(row);
            } else {
                let split = row.partition_point(|&c| c < i);
                indices.extend_from_slice(&row[..split]);
                indices.push(i);
                indices.extend_from_slice(&row[split..]);
            }
            indptr.push(indices.len());
        }
        CsrGraph {
            n: self.n,
            indptr,
            indices,
        }
    }

    pub fn from_parts(n: usize, indptr: Vec<usize>, indices: Vec<usize>) -> Result<CsrGraph> {
        if indptr.len() != n + 1 || indptr[0] != 0 || indptr[n] != indices.len() {
            return Err(SgfError::Shape(
                "indptr must have length n+1 with indptr[0]=0 and indptr[n]=nnz".into(),
            ));
        }
        if indptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(SgfError::Shape("indptr must be non-decreasing".into()));
        }
        if indices.iter().any(|&c| c >= n) {
            return Err(SgfError::Bounds("column id outside [0, n)".into()));
        }
        Ok(CsrGraph { n, indptr, indices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored directed entries, self-loops included once added.
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.indices[self.indptr[u]..self.indptr[u + 1]]
    }

    pub fn has_self_loops(&self) -> bool {
        (0..self.n).all(|i| self.neighbors(i).binary_search(&i).is_ok())
    }

    /// Row degrees counting every stored entry (self-loop included).
    pub fn degrees_stored(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| self.indptr[i + 1] - self.indptr[i])
            .collect()
    }

    /// Structural degrees with the artificial self-loop excluded.
    pub fn degrees_no_loop(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| {
                let row = self.neighbors(i);
                row.len() - usize::from(row.binary_search(&i).is_ok())
            })
            .collect()
    }

    /// True when edge (u,v) present iff (v,u) present.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|u| {
            self.neighbors(u)
                .iter()
                .all(|&v| self.neighbors(v).binary_search(&u).is_ok())
        })
    }

    /// Relabel nodes by `perm`, where new id of node `i` is `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<CsrGraph> {
        if perm.len() != self.n {
            return Err(SgfError::Shape("permutation length mismatch".into()));
        }
        let mut edges = Vec::with_capacity(self.nnz());
        for u in 0..self.n {
            for &v in self.neighbors(u) {
                edges.push((perm[u], perm[v]));
            }
        }
        CsrGraph::from_edges(self.n, &edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_with_loops() {
        let g = CsrGraph::from_edges(2, &[(0, 1)]).unwrap().with_self_loops();
        assert_eq!(g.n(), 2);
        assert_eq!(g.nnz(), 4);
        assert_eq!(g.neighbors(0), &[0, 1]);
        assert_eq!(g.neighbors(1), &[0, 1]);
    }

    #[test]
    fn isolated_nodes_get_loops() {
        let g = CsrGraph::from_edges(3, &[]).unwrap().with_self_loops();
        assert_eq!(g.nnz(), 3);
        for i in 0..3 {
            assert_eq!(g.neighbors(i), &[i]);
        }
    }

    #[test]
    fn self_loop_idempotent() {
        let g = CsrGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)])
            .unwrap()
            .with_self_loops();
        let g2 = g.with_self_loops();
        assert_eq!(g.indptr(), g2.indptr());
        assert_eq!(g.indices(), g2.indices());
    }

    #[test]
    fn dedup_and_symmetry() {
        let g = CsrGraph::from_edges(3, &[(0, 1), (1, 0), (0, 1), (1, 2)]).unwrap();
        assert_eq!(g.nnz(), 4);
        assert!(g.is_symmetric());
        assert_eq!(g.degrees_no_loop(), vec![1, 2, 1]);
    }

    #[test]
    fn out_of_range_edge_rejected() {
        assert!(CsrGraph::from_edges(2, &[(0, 2)]).is_err());
    }
}
