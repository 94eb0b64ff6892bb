//! Shared helpers for integration tests: seeded random graphs, signals, and
//! per-filter random parameter draws.

#![allow(dead_code)]

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use sgf_core::filter::{FilterKind, FilterSpec};
use sgf_core::graph::{normalize, NormalizedAdjacency};
use sgf_core::matrix::SignalMatrix;
use sgf_core::synth;

pub fn random_adj(n: usize, rho: f64, seed: u64) -> NormalizedAdjacency {
    let g = synth::random_graph(n, 4.0, seed);
    normalize(Arc::new(g.clone()), rho).expect("valid rho")
}

pub fn signal(n: usize, f: usize, seed: u64) -> SignalMatrix {
    synth::white_noise(n, f, seed)
}

fn theta_row(r: &mut ChaCha12Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| r.gen_range(-1.0..1.0)).collect()
}

/// Draw a valid random parameterisation of the given filter.
pub fn random_spec(kind: FilterKind, k: usize, r: &mut ChaCha12Rng) -> FilterSpec {
    let mut spec = FilterSpec::new(kind);
    spec.k = k;
    match kind {
        FilterKind::Identity | FilterKind::Linear | FilterKind::Impulse | FilterKind::Monomial => {
        }
        FilterKind::Ppr => spec.alpha = vec![r.gen_range(0.05..1.0)],
        FilterKind::Hk | FilterKind::Gaussian => spec.alpha = vec![r.gen_range(0.1..2.0)],
        FilterKind::VarLinear => spec.theta = vec![theta_row(r, k)],
        FilterKind::VarMonomial
        | FilterKind::Horner
        | FilterKind::Chebyshev
        | FilterKind::ChebInterp
        | FilterKind::Clenshaw
        | FilterKind::Bernstein
        | FilterKind::Legendre
        | FilterKind::OptBasis => spec.theta = vec![theta_row(r, k + 1)],
        FilterKind::Jacobi => {
            spec.theta = vec![theta_row(r, k + 1)];
            spec.alpha = vec![r.gen_range(0.0..2.0)];
            spec.beta = vec![r.gen_range(0.0..2.0)];
        }
        FilterKind::Favard => {
            spec.theta = vec![theta_row(r, k + 1)];
            spec.favard_alpha = (0..=k).map(|_| r.gen_range(0.3..2.0)).collect();
            spec.favard_beta = (0..=k).map(|_| r.gen_range(-0.5..0.5)).collect();
        }
        FilterKind::AdaGnn => {
            spec.gamma = (0..k).map(|_| vec![r.gen_range(0.0..1.0)]).collect();
        }
        FilterKind::Fbgnn => {
            spec.gamma = (0..k)
                .map(|_| vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)])
                .collect();
        }
        FilterKind::Acmgnn => {
            spec.gamma = (0..k)
                .map(|_| {
                    vec![
                        r.gen_range(0.0..1.0),
                        r.gen_range(0.0..1.0),
                        r.gen_range(0.0..1.0),
                    ]
                })
                .collect();
        }
        FilterKind::Fagnn => {
            let g1: f64 = r.gen_range(0.0..1.0);
            spec.beta = vec![r.gen_range(0.0..1.0)];
            spec.gamma = vec![vec![g1, 1.0 - g1]];
        }
        FilterKind::G2cn => {
            spec.alpha = vec![r.gen_range(0.1..1.0), r.gen_range(0.1..1.0)];
            spec.beta = vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)];
            spec.gamma = vec![vec![r.gen_range(0.1..1.0), r.gen_range(0.1..1.0)]];
        }
        FilterKind::GnnLfHf => {
            spec.alpha = vec![r.gen_range(0.1..1.0), r.gen_range(0.1..1.0)];
            spec.beta = vec![r.gen_range(0.0..0.5), r.gen_range(0.1..2.0)];
            spec.gamma = vec![vec![r.gen_range(0.1..1.0), r.gen_range(0.1..1.0)]];
        }
        FilterKind::Figure => {
            spec.gamma = vec![(0..4).map(|_| r.gen_range(0.1..1.0)).collect()];
            spec.theta = (0..4).map(|_| theta_row(r, k + 1)).collect();
        }
    }
    spec.fill_defaults();
    spec.validate().expect("random spec must validate");
    spec
}

/// Per-feature AdaGnn parameterisation (gamma width = F).
pub fn random_adagnn_per_feature(k: usize, f: usize, r: &mut ChaCha12Rng) -> FilterSpec {
    let mut spec = FilterSpec::new(FilterKind::AdaGnn);
    spec.k = k;
    spec.gamma = (0..k)
        .map(|_| (0..f).map(|_| r.gen_range(0.0..1.0)).collect())
        .collect();
    spec.validate().expect("valid");
    spec
}
