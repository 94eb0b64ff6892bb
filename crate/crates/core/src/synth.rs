//! Seeded synthetic graphs and signals for benchmarks, sweeps, and tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::graph::CsrGraph;
use crate::matrix::SignalMatrix;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Erdos-Renyi style graph with expected average degree `avg_degree`.
pub fn random_graph(n: usize, avg_degree: f64, seed: u64) -> CsrGraph {
    let mut r = rng(seed);
    let p = (avg_degree / (n.max(2) - 1) as f64).min(1.0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if r.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    CsrGraph::from_edges(n, &edges)
        .expect("ids in range")
        .with_self_loops()
}

/// Near-d-regular graph by configuration-model pairing; collisions are
/// dropped, so degrees are d up to a small deficit.
pub fn random_regular(n: usize, d: usize, seed: u64) -> CsrGraph {
    let mut r = rng(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|u| std::iter::repeat(u).take(d)).collect();
    stubs.shuffle(&mut r);
    let mut edges = Vec::with_capacity(stubs.len() / 2);
    for pair in stubs.chunks(2) {
        if pair.len() == 2 && pair[0] != pair[1] {
            edges.push((pair[0], pair[1]));
        }
    }
    CsrGraph::from_edges(n, &edges)
        .expect("ids in range")
        .with_self_loops()
}

/// Planted-partition graph: `classes` equal communities, within-class edge
/// probability `p_in`, across-class `p_out`. Returns the graph and labels.
pub fn planted_partition(
    n: usize,
    classes: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> (CsrGraph, Vec<usize>) {
    let mut r = rng(seed);
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if r.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let g = CsrGraph::from_edges(n, &edges)
        .expect("ids in range")
        .with_self_loops();
    (g, labels)
}

/// Homophilous planted partition with two degree tiers: a `hub_fraction` of
/// nodes gets `hub_boost` times the base connection probability, giving a
/// wide degree spread at fixed community structure.
pub fn heterogeneous_partition(
    n: usize,
    classes: usize,
    p_in: f64,
    p_out: f64,
    hub_fraction: f64,
    hub_boost: f64,
    seed: u64,
) -> (CsrGraph, Vec<usize>) {
    let mut r = rng(seed);
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let weight: Vec<f64> = (0..n)
        .map(|_| {
            if r.gen::<f64>() < hub_fraction {
                hub_boost.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let base = if labels[u] == labels[v] { p_in } else { p_out };
            let p = (base * weight[u] * weight[v]).min(1.0);
            if r.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let g = CsrGraph::from_edges(n, &edges)
        .expect("ids in range")
        .with_self_loops();
    (g, labels)
}

/// Unit-variance Gaussian noise matrix (Box-Muller over the seeded stream).
pub fn white_noise(n: usize, f: usize, seed: u64) -> SignalMatrix {
    let mut r = rng(seed);
    let mut data = Vec::with_capacity(n * f);
    while data.len() < n * f {
        let u1: f64 = r.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = r.gen::<f64>();
        let mag = (-2.0 * u1.ln()).sqrt();
        data.push(mag * (2.0 * std::f64::consts::PI * u2).cos());
        if data.len() < n * f {
            data.push(mag * (2.0 * std::f64::consts::PI * u2).sin());
        }
    }
    SignalMatrix::from_vec(n, f, data).expect("sized correctly")
}

/// Class-indicator features with additive Gaussian noise: column `label` is
/// 1 + noise, the rest noise only. `dim` must be at least the class count.
pub fn class_features(labels: &[usize], dim: usize, noise: f64, seed: u64) -> SignalMatrix {
    let n = labels.len();
    let mut m = white_noise(n, dim, seed);
    m.scale(noise);
    for (i, &l) in labels.iter().enumerate() {
        let v = m.get(i, l % dim) + 1.0;
        m.set(i, l % dim, v);
    }
    m
}
