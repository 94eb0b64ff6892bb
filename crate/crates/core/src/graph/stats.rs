//! Structural statistics: homophily score and degree summaries.

use crate::error::{Result, SgfError};
use crate::graph::CsrGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct HomophilyStats {
    /// Mean fraction of same-label neighbors per node, self-loops excluded.
    pub score: f64,
    /// Nodes whose only neighbor is the artificial self-loop; they contribute
    /// zero to the mean.
    pub isolated: usize,
}

/// Node homophily: (1/n) sum_u |{v in N(u) : y(v) = y(u)}| / |N(u)|, with the
/// self-loop excluded from N(u). In [0, 1]; high on citation-style graphs.
pub fn homophily_score(graph: &CsrGraph, labels: &[usize]) -> Result<HomophilyStats> {
    let n = graph.n();
    if labels.len() != n {
        return Err(SgfError::Shape(format!(
            "{} labels for {} nodes",
            labels.len(),
            n
        )));
    }
    if n == 0 {
        return Ok(HomophilyStats {
            score: 0.0,
            isolated: 0,
        });
    }
    let mut total = 0.0;
    let mut isolated = 0;
    for u in 0..n {
        let mut deg = 0usize;
        let mut same = 0usize;
        for &v in graph.neighbors(u) {
            if v == u {
                continue;
            }
            deg += 1;
            if labels[v] == labels[u] {
                same += 1;
            }
        }
        if deg == 0 {
            isolated += 1;
        } else {
            total += same as f64 / deg as f64;
        }
    }
    Ok(HomophilyStats {
        score: total / n as f64,
        isolated,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    /// Per-node degree, self-loop excluded.
    pub degrees: Vec<usize>,
    /// Lower-median of the degree sequence.
    pub median: usize,
}

pub fn degree_stats(graph: &CsrGraph) -> DegreeStats {
    let degrees = graph.degrees_no_loop();
    let median = lower_median(&degrees);
    DegreeStats { degrees, median }
}

/// Lower median: element at index (len-1)/2 of the sorted sequence.
pub fn lower_median(values: &[usize]) -> usize {
    if values.is_empty() {
        return 0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    sorted[(sorted.len() - 1) / 2]
}

/// Histogram of degrees as (degree, count) pairs sorted by degree.
pub fn degree_histogram(degrees: &[usize]) -> Vec<(usize, usize)> {
    let mut counts = std::collections::BTreeMap::new();
    for &d in degrees {
        *counts.entry(d).or_insert(0usize) += 1;
    }
    counts.into_iter().collect()
}
