//! Signal regression: fit filter coefficients so `g(L; theta) x` matches a
//! target response applied in the
//! Fourier domain, and report R-squared.
//!
//! Coefficient fitting is exact least squares (the filters are linear in
//! theta), with light Tikhonov damping for ill-conditioned bases; scalar
//! hyperparameters of fixed filters go through grid search.

use serde::Serialize;

use crate::error::{Result, SgfError};
use crate::filter::{apply_filter, export_basis, FilterKind, FilterSpec, Taxonomy};
use crate::graph::NormalizedAdjacency;
use crate::matrix::SignalMatrix;
use crate::oracle::{eigendecompose, spectral_filter_oracle, DenseMatrix, EigenSystem};

/// Diagonal damping added to the Gram matrix before solving.
pub const GRAM_DAMPING: f64 = 1e-10;

/// Built-in target responses over the spectrum [0, 2].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetSignal {
    Band,
    Combine,
    High,
    Low,
    Reject,
}

impl TargetSignal {
    pub fn response(self, l: f64) -> f64 {
        match self {
            TargetSignal::Band => (-10.0 * (l - 1.0) * (l - 1.0)).exp(),
            TargetSignal::Combine => (std::f64::consts::PI * l).sin().abs(),
            TargetSignal::High => 1.0 - (-10.0 * l * l).exp(),
            TargetSignal::Low => (-10.0 * l * l).exp(),
            TargetSignal::Reject => 1.0 - (-10.0 * (l - 1.0) * (l - 1.0)).exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TargetSignal::Band => "band",
            TargetSignal::Combine => "combine",
            TargetSignal::High => "high",
            TargetSignal::Low => "low",
            TargetSignal::Reject => "reject",
        }
    }

    pub fn from_name(name: &str) -> Result<TargetSignal> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "band" => TargetSignal::Band,
            "combine" => TargetSignal::Combine,
            "high" => TargetSignal::High,
            "low" => TargetSignal::Low,
            "reject" => TargetSignal::Reject,
            other => {
                return Err(SgfError::Validation(format!("unknown signal '{other}'")));
            }
        })
    }

    pub fn all() -> [TargetSignal; 5] {
        [
            TargetSignal::Band,
            TargetSignal::Combine,
            TargetSignal::High,
            TargetSignal::Low,
            TargetSignal::Reject,
        ]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionReport {
    pub theta_fit: Vec<f64>,
    pub hyper_fit: Option<f64>,
    pub r2: f64,
    pub residual_norm: f64,
    /// Spectral condition estimate of the basis Gram matrix (1.0 for grid
    /// searches, which solve no system).
    pub condition: f64,
    /// Set when the Gram system stayed rank-deficient despite damping.
    pub rank_deficient: bool,
}

/// `z = g*(L) x` through the Fourier oracle.
pub fn make_target(
    signal: TargetSignal,
    es: &EigenSystem,
    x: &SignalMatrix,
) -> SignalMatrix {
    spectral_filter_oracle(es, &|l| signal.response(l), x)
}

/// Coefficient of determination averaged over columns, each against its own
/// mean.
pub fn r2_score(pred: &SignalMatrix, target: &SignalMatrix) -> f64 {
    let cols = target.cols();
    let rows = target.rows();
    let mut total = 0.0;
    for c in 0..cols {
        let mean: f64 = (0..rows).map(|i| target.get(i, c)).sum::<f64>() / rows as f64;
        let mut ss_res = 0.0;
        let mut ss_tot = 0.0;
        for i in 0..rows {
            let r = pred.get(i, c) - target.get(i, c);
            let t = target.get(i, c) - mean;
            ss_res += r * r;
            ss_tot += t * t;
        }
        total += if ss_res <= 1e-300 {
            1.0
        } else {
            1.0 - ss_res / ss_tot.max(1e-300)
        };
    }
    total / cols as f64
}

/// Exact least squares over a theta-linear basis: builds the per-order images
/// `b_k = T^(k) x`, solves the damped normal equations, and reports fit
/// quality. The basis spec's theta is ignored except for its length.
pub fn fit_linear(
    basis: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    z: &SignalMatrix,
) -> Result<RegressionReport> {
    if basis.taxonomy() != Taxonomy::Variable {
        return Err(SgfError::Validation(format!(
            "{}: least-squares fitting needs a theta-linear variable basis",
            basis.kind.name()
        )));
    }
    if basis.kind == FilterKind::VarLinear {
        return Err(SgfError::Validation(
            "varlinear: composed layers are not linear in theta".into(),
        ));
    }
    let stack = export_basis(basis, adj, x)?;
    let m = stack.mats.len();
    let mut gram = DenseMatrix::zeros(m);
    let mut rhs = vec![0.0; m];
    for a in 0..m {
        for b in a..m {
            let v = stack.mats[a].dot(&stack.mats[b]);
            gram.set(a, b, v);
            gram.set(b, a, v);
        }
        rhs[a] = stack.mats[a].dot(z);
    }
    let mut damped = gram.clone();
    for i in 0..m {
        let v = damped.get(i, i);
        damped.set(i, i, v + GRAM_DAMPING);
    }

    let (theta, rank_deficient) = match cholesky_solve(&damped, &rhs) {
        Some(t) => (t, false),
        None => (eigen_pseudo_solve(&damped, &rhs)?, true),
    };

    let condition = {
        let es = eigendecompose(&damped)?;
        let max = es.lambda[m - 1].abs().max(1e-300);
        let min = es.lambda[0].abs().max(GRAM_DAMPING);
        max / min
    };

    let mut fitted = basis.clone();
    fitted.theta = vec![theta.clone()];
    fitted.theta_is_default = false;
    let pred = apply_filter(&fitted, adj, x)?;
    let mut resid = pred.clone();
    resid.axpy(-1.0, z);
    Ok(RegressionReport {
        theta_fit: theta,
        hyper_fit: None,
        r2: r2_score(&pred, z),
        residual_norm: resid.norm(),
        condition,
        rank_deficient,
    })
}

/// Grid search over a fixed filter's scalar hyperparameter; ties resolve to
/// the smallest value.
pub fn fit_hyper(
    kind: FilterKind,
    k: usize,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    z: &SignalMatrix,
    grid: &[f64],
) -> Result<RegressionReport> {
    if kind.taxonomy() != Taxonomy::Fixed {
        return Err(SgfError::Validation(format!(
            "{}: grid search applies to fixed filters",
            kind.name()
        )));
    }
    if grid.is_empty() {
        return Err(SgfError::Validation("empty hyperparameter grid".into()));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for &alpha in &sorted {
        let takes_alpha = matches!(kind, FilterKind::Ppr | FilterKind::Hk | FilterKind::Gaussian);
        let spec = FilterSpec::fixed(kind, k, takes_alpha.then_some(alpha));
        spec.validate()?;
        let pred = apply_filter(&spec, adj, x)?;
        let r2 = r2_score(&pred, z);
        let better = match &best {
            None => true,
            Some((best_r2, _, _)) => r2 > *best_r2,
        };
        if better {
            let theta =
                crate::filter::fixed_coefficients(kind, k, takes_alpha.then_some(alpha))?;
            best = Some((r2, alpha, theta));
        }
        if !takes_alpha {
            break;
        }
    }
    let (r2, alpha, theta) = best.expect("non-empty grid");
    let takes_alpha = matches!(kind, FilterKind::Ppr | FilterKind::Hk | FilterKind::Gaussian);
    let spec = FilterSpec::fixed(kind, k, takes_alpha.then_some(alpha));
    let pred = apply_filter(&spec, adj, x)?;
    let mut resid = pred;
    resid.axpy(-1.0, z);
    Ok(RegressionReport {
        theta_fit: theta,
        hyper_fit: takes_alpha.then_some(alpha),
        r2,
        residual_norm: resid.norm(),
        condition: 1.0,
        rank_deficient: false,
    })
}

/// Dense Cholesky solve for the small SPD Gram system; None when the matrix
/// is not positive definite.
fn cholesky_solve(a: &DenseMatrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.n();
    let mut l = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    // forward then backward substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l.get(i, k) * y[k];
        }
        y[i] = sum / l.get(i, i);
    }
    let mut xsol = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l.get(k, i) * xsol[k];
        }
        xsol[i] = sum / l.get(i, i);
    }
    Some(xsol)
}

/// Spectral pseudo-inverse fallback for Gram systems beyond damping rescue.
fn eigen_pseudo_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let es = eigendecompose(a)?;
    let n = a.n();
    let proj = es.u.transpose().apply_vec(b);
    let mut scaled = vec![0.0; n];
    for i in 0..n {
        if es.lambda[i].abs() > GRAM_DAMPING {
            scaled[i] = proj[i] / es.lambda[i];
        }
    }
    Ok(es.u.apply_vec(&scaled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalize, CsrGraph};
    use crate::oracle::dense_laplacian;
    use crate::synth;
    use std::sync::Arc;

    fn setup(n: usize, seed: u64) -> (NormalizedAdjacency, EigenSystem, SignalMatrix) {
        let g = synth::random_graph(n, 4.0, seed);
        let adj = normalize(Arc::new(g), 0.5).unwrap();
        let es = eigendecompose(&dense_laplacian(&adj).unwrap()).unwrap();
        let x = synth::white_noise(n, 1, seed + 7);
        (adj, es, x)
    }

    #[test]
    fn r2_trivial_cases() {
        let t = SignalMatrix::from_vec(2, 1, vec![1.0, -1.0]).unwrap();
        assert_eq!(r2_score(&t, &t), 1.0);
        let means = SignalMatrix::from_vec(2, 1, vec![0.0, 0.0]).unwrap();
        assert_eq!(r2_score(&means, &t), 0.0);
    }

    #[test]
    fn target_responses_pinned() {
        assert!((TargetSignal::Low.response(0.0) - 1.0).abs() < 1e-15);
        assert!((TargetSignal::Band.response(1.0) - 1.0).abs() < 1e-15);
        assert!((TargetSignal::Reject.response(1.0)).abs() < 1e-15);
        assert!((TargetSignal::High.response(0.0)).abs() < 1e-15);
        assert!((TargetSignal::Combine.response(0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_target_is_input() {
        let (_, es, x) = setup(16, 3);
        let z = spectral_filter_oracle(&es, &|_| 1.0, &x);
        assert!(z.max_abs_diff(&x) < 1e-10);
    }

    #[test]
    fn recovers_known_theta() {
        let (adj, _, x) = setup(64, 11);
        let truth: Vec<f64> = vec![0.6, -0.3, 0.2, 0.1, -0.05, 0.02];
        let gen = FilterSpec::variable(FilterKind::Chebyshev, truth.clone());
        let z = apply_filter(&gen, &adj, &x).unwrap();
        let basis = FilterSpec::variable(FilterKind::Chebyshev, vec![0.0; truth.len()]);
        let report = fit_linear(&basis, &adj, &x, &z).unwrap();
        for (got, want) in report.theta_fit.iter().zip(truth.iter()) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!(report.r2 > 1.0 - 1e-9);
        assert!(report.r2 <= 1.0 + 1e-12);
    }

    #[test]
    fn identity_target_yields_e0() {
        let (adj, _, x) = setup(32, 13);
        let basis = FilterSpec::variable(FilterKind::VarMonomial, vec![0.0; 5]);
        let report = fit_linear(&basis, &adj, &x, &x).unwrap();
        assert!((report.theta_fit[0] - 1.0).abs() < 1e-6);
        for t in &report.theta_fit[1..] {
            assert!(t.abs() < 1e-6);
        }
        assert!(report.r2 > 1.0 - 1e-9);
        assert!(report.residual_norm < 1e-5);
    }

    #[test]
    fn interpolation_at_full_degree() {
        // K = n-1 with distinct eigenvalues interpolates any target.
        let (adj, es, x) = setup(8, 17);
        let z = make_target(TargetSignal::Band, &es, &x);
        let basis = FilterSpec::variable(FilterKind::Chebyshev, vec![0.0; 8]);
        let report = fit_linear(&basis, &adj, &x, &z).unwrap();
        assert!(report.r2 >= 1.0 - 1e-6, "r2 = {}", report.r2);
    }

    #[test]
    fn hyper_grid_recovers_alpha() {
        let (adj, _, x) = setup(48, 19);
        let gen = FilterSpec::fixed(FilterKind::Ppr, 10, Some(0.3));
        let z = apply_filter(&gen, &adj, &x).unwrap();
        let grid: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
        let report = fit_hyper(FilterKind::Ppr, 10, &adj, &x, &z, &grid).unwrap();
        assert!((report.hyper_fit.unwrap() - 0.3).abs() < 1e-12);
        assert!(report.r2 > 1.0 - 1e-9);
    }

    #[test]
    fn single_point_grid_returned() {
        let (adj, es, x) = setup(16, 23);
        let z = make_target(TargetSignal::Low, &es, &x);
        let report = fit_hyper(FilterKind::Hk, 6, &adj, &x, &z, &[0.7]).unwrap();
        assert_eq!(report.hyper_fit, Some(0.7));
    }

    #[test]
    fn empty_grid_rejected() {
        let (adj, es, x) = setup(16, 29);
        let z = make_target(TargetSignal::Low, &es, &x);
        assert!(fit_hyper(FilterKind::Ppr, 6, &adj, &x, &z, &[]).is_err());
    }

    #[test]
    fn monotone_r2_in_nested_order() {
        let (adj, es, x) = setup(48, 31);
        let z = make_target(TargetSignal::Combine, &es, &x);
        let mut last = f64::NEG_INFINITY;
        for k in [2usize, 4, 6, 8, 10] {
            let basis = FilterSpec::variable(FilterKind::Chebyshev, vec![0.0; k + 1]);
            let report = fit_linear(&basis, &adj, &x, &z).unwrap();
            assert!(
                report.r2 >= last - 1e-9,
                "r2 dropped from {last} to {} at K={k}",
                report.r2
            );
            last = report.r2;
        }
    }
}
