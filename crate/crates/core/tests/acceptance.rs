//! Acceptance suite: every release criterion as one test with a pass line.
//!
//! Run with `cargo test -p sgf-core --test acceptance -- --nocapture` to see
//! the per-criterion lines.

mod common;

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use sgf_core::filter::{
    apply_filter, apply_filter_tracked, buffer_budget, chebinterp_weights, fixed_coefficients,
    spectral_form, FilterKind, FilterSpec,
};
use sgf_core::graph::normalize;
use sgf_core::matrix::SignalMatrix;
use sgf_core::oracle::{general_spectrum, matrix_polynomial_oracle};
use sgf_core::synth;

fn pass(name: &str, detail: String) {
    println!("PASS {name}: {detail}");
}

/// All 27 filters against the dense matrix-polynomial oracle on 20 random
/// graphs spanning n in {8, 32, 64} and rho in {0.3, 0.5, 1.0}; relative
/// max-abs difference <= 1e-10, total runtime under 30 s.
#[test]
fn oracle_equivalence_all_filters() {
    let t0 = Instant::now();
    let combos: Vec<(usize, f64)> = [8usize, 32, 64]
        .iter()
        .flat_map(|&n| [0.3, 0.5, 1.0].iter().map(move |&r| (n, r)))
        .collect();
    let mut rng = synth::rng(42);
    let mut worst: (f64, String) = (0.0, String::new());
    for graph_idx in 0..20u64 {
        let (n, rho) = combos[graph_idx as usize % combos.len()];
        let adj = common::random_adj(n, rho, 1000 + graph_idx);
        let x = common::signal(n, 4, 2000 + graph_idx);
        for name in FilterKind::all_names() {
            let kind = FilterKind::from_name(name).unwrap();
            let spec = common::random_spec(kind, 10, &mut rng);
            let engine = apply_filter(&spec, &adj, &x).unwrap();
            let oracle = matrix_polynomial_oracle(&spec, &adj, &x).unwrap();
            let diff = engine.rel_max_diff(&oracle);
            if diff > worst.0 {
                worst = (diff, format!("{name} on n={n} rho={rho}"));
            }
            assert!(
                diff <= 1e-10,
                "{name} deviates from dense oracle by {diff:.3e} (n={n}, rho={rho})"
            );
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 30.0, "oracle sweep took {secs:.1}s");
    pass(
        "oracle-equivalence",
        format!("27 filters x 20 graphs, worst {:.3e} ({}) in {secs:.1}s", worst.0, worst.1),
    );
}

/// Every signal-independent filter matches `U g(Lambda) U^T x` at rho = 0.5
/// on graphs up to n = 64 within 1e-8, including feature-wise and concat
/// spectral structures.
#[test]
fn fourier_identity_signal_independent() {
    let mut rng = synth::rng(7);
    let mut worst: (f64, String) = (0.0, String::new());
    for (gi, &n) in [16usize, 48, 64].iter().enumerate() {
        let adj = common::random_adj(n, 0.5, 300 + gi as u64);
        let gs = general_spectrum(&adj).unwrap();
        let x = common::signal(n, 3, 400 + gi as u64);
        for name in FilterKind::all_names() {
            let kind = FilterKind::from_name(name).unwrap();
            if kind == FilterKind::OptBasis {
                continue;
            }
            let spec = common::random_spec(kind, 8, &mut rng);
            let engine = apply_filter(&spec, &adj, &x).unwrap();
            let form = spectral_form(&spec, x.cols()).unwrap();
            let expect = gs.apply_form(&form, &x);
            let diff = engine.rel_max_diff(&expect);
            if diff > worst.0 {
                worst = (diff, format!("{name} n={n}"));
            }
            assert!(diff <= 1e-8, "{name}: Fourier mismatch {diff:.3e} at n={n}");
        }
        // Feature-wise and concat structures explicitly.
        let ada = common::random_adagnn_per_feature(6, x.cols(), &mut rng);
        let engine = apply_filter(&ada, &adj, &x).unwrap();
        let form = spectral_form(&ada, x.cols()).unwrap();
        let diff = engine.rel_max_diff(&gs.apply_form(&form, &x));
        assert!(diff <= 1e-8, "feature-wise bank Fourier mismatch {diff:.3e}");
        let mut cat = common::random_spec(FilterKind::G2cn, 8, &mut rng);
        cat.fusion = sgf_core::filter::Fusion::Concat;
        let engine = apply_filter(&cat, &adj, &x).unwrap();
        let form = spectral_form(&cat, x.cols()).unwrap();
        let diff = engine.rel_max_diff(&gs.apply_form(&form, &x));
        assert!(diff <= 1e-8, "concat bank Fourier mismatch {diff:.3e}");
    }
    pass(
        "fourier-identity",
        format!("26 signal-independent filters, worst {:.3e} ({})", worst.0, worst.1),
    );
}

/// Closed-form fixed coefficients against direct factorial/power arithmetic
/// at 10 random (alpha, K) points, relative error <= 1e-12.
#[test]
fn fixed_coefficient_formulas() {
    let mut rng = synth::rng(99);
    let factorial = |k: usize| -> f64 { (1..=k).map(|i| i as f64).product::<f64>().max(1.0) };
    for point in 0..10 {
        let alpha: f64 = rng.gen_range(0.05..0.95);
        let k: usize = rng.gen_range(1..=15);
        let ppr = fixed_coefficients(FilterKind::Ppr, k, Some(alpha)).unwrap();
        let hk = fixed_coefficients(FilterKind::Hk, k, Some(alpha)).unwrap();
        let gauss = fixed_coefficients(FilterKind::Gaussian, k, Some(alpha)).unwrap();
        let mono = fixed_coefficients(FilterKind::Monomial, k, None).unwrap();
        for i in 0..=k {
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            assert!(rel(ppr[i], alpha * (1.0 - alpha).powi(i as i32)) <= 1e-12);
            assert!(rel(hk[i], (-alpha).exp() * alpha.powi(i as i32) / factorial(i)) <= 1e-12);
            assert!(rel(gauss[i], alpha.powi(i as i32) / factorial(i)) <= 1e-12);
            assert!(rel(mono[i], 1.0 / (k + 1) as f64) <= 1e-12);
        }
        let _ = point;
    }
    pass(
        "coefficient-formulas",
        "ppr/hk/gaussian/monomial at 10 random (alpha, K) points, rel <= 1e-12".into(),
    );
}

/// Collapsed interpolation weights reproduce the direct double-sum evaluation
/// to 1e-12 for K <= 12.
#[test]
fn chebinterp_collapse() {
    let mut rng = synth::rng(5);
    let mut worst = 0.0_f64;
    for k in 0..=12usize {
        let n = 24;
        let adj = common::random_adj(n, 0.5, 70 + k as u64);
        let x = common::signal(n, 3, 80 + k as u64);
        let theta: Vec<f64> = (0..=k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let spec = FilterSpec::variable(FilterKind::ChebInterp, theta.clone());
        // Engine path: collapse then one Chebyshev pass.
        let collapsed = apply_filter(&spec, &adj, &x).unwrap();
        // Reference: dense double sum over (order, node) without collapsing.
        let direct = matrix_polynomial_oracle(&spec, &adj, &x).unwrap();
        let diff = collapsed.rel_max_diff(&direct);
        worst = worst.max(diff);
        assert!(diff <= 1e-12, "K={k}: collapse deviates {diff:.3e}");
        // Scalar sanity: collapse of the K=0 case doubles theta0.
        if k == 0 {
            let w = chebinterp_weights(&theta);
            assert!((w[0] - 2.0 * theta[0]).abs() < 1e-15);
        }
    }
    pass("chebinterp-collapse", format!("K=0..12, worst {worst:.3e}"));
}

/// First min(K+1, 8) signal-dependent basis vectors per column have a Gram
/// matrix within 1e-8 of identity on random n = 64 graphs.
#[test]
fn optbasis_orthonormality() {
    let mut worst = 0.0_f64;
    for seed in 0..3u64 {
        let n = 64;
        let k = 7;
        let adj = common::random_adj(n, 0.5, 500 + seed);
        let x = common::signal(n, 4, 600 + seed);
        let mut spec = FilterSpec::new(FilterKind::OptBasis);
        spec.k = k;
        spec.theta = vec![vec![0.0; k + 1]];
        spec.fill_defaults();
        let stack = sgf_core::filter::export_basis(&spec, &adj, &x).unwrap();
        assert!(stack.early_stops.is_empty(), "unexpected Krylov breakdown");
        let orders = (k + 1).min(8);
        for c in 0..x.cols() {
            for a in 0..orders {
                for b in 0..orders {
                    let va = stack.mats[a].col(c);
                    let vb = stack.mats[b].col(c);
                    let dot: f64 = va.iter().zip(vb.iter()).map(|(p, q)| p * q).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    let err = (dot - expect).abs();
                    worst = worst.max(err);
                    assert!(
                        err <= 1e-8,
                        "Gram[{a}][{b}] col {c} off by {err:.3e} (seed {seed})"
                    );
                }
            }
        }
    }
    pass(
        "optbasis-orthonormality",
        format!("8x8 Gram vs identity on n=64, worst {worst:.3e}"),
    );
}

/// Accounted working buffers match the analytic class counts exactly:
/// fixed(1) < two-term(2) <= residual second kind(3); a two-channel lockstep
/// bank doubles its per-channel budget.
#[test]
fn memory_class_ordering() {
    let n = 40;
    let adj = common::random_adj(n, 0.5, 31);
    let x = common::signal(n, 3, 32);
    let mut rng = synth::rng(17);

    let mut measured = std::collections::BTreeMap::new();
    for name in FilterKind::all_names() {
        let kind = FilterKind::from_name(name).unwrap();
        let spec = common::random_spec(kind, 10, &mut rng);
        let outcome = apply_filter_tracked(&spec, &adj, &x).unwrap();
        let budget = buffer_budget(&spec);
        assert_eq!(
            outcome.report.buffers.state_peak, budget.state,
            "{name}: measured state buffers != analytic budget"
        );
        assert_eq!(
            outcome.report.buffers.scratch_peak, budget.scratch,
            "{name}: measured scratch buffers != analytic budget"
        );
        measured.insert(name, outcome.report.buffers.state_peak);
    }

    let fixed = ["identity", "linear", "impulse", "monomial", "ppr", "hk", "gaussian"];
    for f in fixed {
        assert_eq!(measured[f], 1, "{f} must hold exactly one state buffer");
    }
    let two_term = ["chebyshev", "chebinterp", "legendre", "jacobi", "favard", "optbasis"];
    for t in two_term {
        assert_eq!(measured[t], 2, "{t} must hold exactly two state buffers");
    }
    assert_eq!(measured["clenshaw"], 3);
    assert!(measured["ppr"] < measured["chebyshev"]);
    assert!(measured["chebyshev"] <= measured["clenshaw"]);

    // Q = 2 lockstep banks double their per-channel budget: the squared
    // Gaussian bank doubles the single fixed chain (1 -> 2); the decaying
    // low/high bank doubles its chain + accumulator channel (2 -> 4).
    assert_eq!(measured["g2cn"], 2 * measured["gaussian"]);
    assert_eq!(measured["gnnlfhf"], 4);

    pass(
        "memory-class-ordering",
        format!(
            "fixed=1 < two-term=2 <= clenshaw=3; g2cn={}, gnnlfhf={}; budgets exact for all 27",
            measured["g2cn"], measured["gnnlfhf"]
        ),
    );
}
