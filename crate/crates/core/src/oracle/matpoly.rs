//! Dense evaluation of every filter recurrence: builds the full polynomial
//! matrix (or runs the per-column recurrence) in plain dense arithmetic and
//! serves as the reference the sparse engine is measured against.

use crate::error::{Result, SgfError};
use crate::filter::coeffs::{bernstein_weight, cheb_first, cheb_nodes, fixed_coefficients};
use crate::filter::engine::jacobi_multipliers;
use crate::filter::spec::{FilterKind, FilterSpec, Fusion, FIGURE_CHANNELS};
use crate::graph::NormalizedAdjacency;
use crate::matrix::SignalMatrix;
use crate::oracle::dense::{dense_adjacency, DenseMatrix};

/// `g(L) x` computed densely; wholly separate from the sparse path, including
/// signal-dependent and channel-structured filters.
pub fn matrix_polynomial_oracle(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
) -> Result<SignalMatrix> {
    use FilterKind::*;
    spec.validate()?;
    let a = dense_adjacency(adj)?;
    let n = a.n();
    if x.rows() != n {
        return Err(SgfError::Shape("signal row count != node count".into()));
    }
    let lap = laplacian_of(&a);

    let out = match spec.kind {
        Identity | Linear | Impulse | Monomial | Ppr | Hk => {
            let theta = fixed_coefficients(spec.kind, spec.k, spec.alpha.first().copied())?;
            polynomial_matrix(&a, &theta).apply(x)
        }
        Gaussian => {
            let theta = fixed_coefficients(spec.kind, spec.k, spec.alpha.first().copied())?;
            let mut two_i_minus_l = lap.clone();
            two_i_minus_l.scale(-1.0);
            add_diag(&mut two_i_minus_l, 2.0);
            polynomial_matrix(&two_i_minus_l, &theta).apply(x)
        }
        VarMonomial | Horner => polynomial_matrix(&a, spec.theta_row()).apply(x),
        VarLinear => {
            let mut g = DenseMatrix::identity(n);
            for &t in spec.theta_row() {
                let mut layer = lap.clone();
                layer.scale(-1.0);
                add_diag(&mut layer, 1.0 + t);
                g = layer.matmul(&g);
            }
            g.apply(x)
        }
        Chebyshev => cheb_matrix(&lap, spec.theta_row()).apply(x),
        ChebInterp => {
            // Direct double sum over orders and nodes, no collapsed weights.
            let nodes = cheb_nodes(spec.k);
            let scale = 2.0 / (spec.k + 1) as f64;
            let mut g = DenseMatrix::zeros(n);
            let basis = cheb_basis_matrices(&lap, spec.k);
            for (kappa, &node) in nodes.iter().enumerate() {
                for (k, t_mat) in basis.iter().enumerate() {
                    g.axpy(scale * spec.theta_row()[kappa] * cheb_first(k, node), t_mat);
                }
            }
            g.apply(x)
        }
        Clenshaw => {
            // Second-kind basis built forward: U_0 = I, U_1 = 2L.
            let mut g = DenseMatrix::zeros(n);
            let mut prev2 = DenseMatrix::identity(n);
            g.axpy(spec.theta_row()[0], &prev2);
            if spec.k >= 1 {
                let mut prev = lap.clone();
                prev.scale(2.0);
                g.axpy(spec.theta_row()[1], &prev);
                for k in 2..=spec.k {
                    let mut next = lap.matmul(&prev);
                    next.scale(2.0);
                    next.axpy(-1.0, &prev2);
                    prev2 = prev;
                    prev = next;
                    g.axpy(spec.theta_row()[k], &prev);
                }
            }
            g.apply(x)
        }
        Bernstein => {
            let mut two_i_minus_l = lap.clone();
            two_i_minus_l.scale(-1.0);
            add_diag(&mut two_i_minus_l, 2.0);
            let mut g = DenseMatrix::zeros(n);
            for (k, &t) in spec.theta_row().iter().enumerate() {
                let mut term = matrix_power(&two_i_minus_l, spec.k - k);
                term = term.matmul(&matrix_power(&lap, k));
                g.axpy(t * bernstein_weight(spec.k, k), &term);
            }
            g.apply(x)
        }
        Legendre => {
            let mut g = DenseMatrix::zeros(n);
            let mut prev2 = DenseMatrix::identity(n);
            g.axpy(spec.theta_row()[0], &prev2);
            if spec.k >= 1 {
                let mut prev = lap.clone();
                g.axpy(spec.theta_row()[1], &prev);
                for k in 2..=spec.k {
                    let kf = k as f64;
                    let mut next = lap.matmul(&prev);
                    next.scale((2.0 * kf - 1.0) / kf);
                    next.axpy(-(kf - 1.0) / kf, &prev2);
                    prev2 = prev;
                    prev = next;
                    g.axpy(spec.theta_row()[k], &prev);
                }
            }
            g.apply(x)
        }
        Jacobi => {
            let (al, be) = (spec.alpha[0], spec.beta[0]);
            let mut g = DenseMatrix::zeros(n);
            let mut prev2 = DenseMatrix::identity(n);
            g.axpy(spec.theta_row()[0], &prev2);
            if spec.k >= 1 {
                let mut prev = a.clone();
                prev.scale((al + be + 2.0) / 2.0);
                add_diag(&mut prev, (al - be) / 2.0);
                g.axpy(spec.theta_row()[1], &prev);
                for k in 2..=spec.k {
                    let (d, d1, d2) = jacobi_multipliers(k, al, be);
                    let mut next = a.matmul(&prev);
                    next.scale(d);
                    next.axpy(d1, &prev);
                    next.axpy(-d2, &prev2);
                    prev2 = prev;
                    prev = next;
                    g.axpy(spec.theta_row()[k], &prev);
                }
            }
            g.apply(x)
        }
        Favard => {
            let fa = &spec.favard_alpha;
            let fb = &spec.favard_beta;
            let mut g = DenseMatrix::zeros(n);
            let mut prev2 = DenseMatrix::identity(n);
            prev2.scale(1.0 / fa[0].sqrt());
            g.axpy(spec.theta_row()[0], &prev2);
            if spec.k >= 1 {
                let mut prev = a.matmul(&prev2);
                prev.axpy(-fb[1], &prev2);
                prev.scale(1.0 / fa[1].sqrt());
                g.axpy(spec.theta_row()[1], &prev);
                for k in 2..=spec.k {
                    let mut next = a.matmul(&prev);
                    next.axpy(-fb[k], &prev);
                    next.axpy(-fa[k - 1].sqrt(), &prev2);
                    next.scale(1.0 / fa[k].sqrt());
                    prev2 = prev;
                    prev = next;
                    g.axpy(spec.theta_row()[k], &prev);
                }
            }
            g.apply(x)
        }
        OptBasis => opt_basis_dense(&a, spec.theta_row(), x)?,
        AdaGnn => {
            let mut h = x.clone();
            for layer in 0..spec.k {
                let g = spec.layer_gamma(layer);
                if g.len() != 1 && g.len() != x.cols() {
                    return Err(SgfError::Validation(
                        "adagnn: gamma width must be 1 or F".into(),
                    ));
                }
                let lh = lap.apply(&h);
                for i in 0..h.rows() {
                    for c in 0..h.cols() {
                        let gc = if g.len() == 1 { g[0] } else { g[c] };
                        let v = h.get(i, c) - gc * lh.get(i, c);
                        h.set(i, c, v);
                    }
                }
            }
            h
        }
        Fbgnn | Acmgnn | Fagnn => {
            let mut g = DenseMatrix::identity(n);
            for layer in 0..spec.k {
                let w = spec.layer_gamma(layer);
                let mut m = DenseMatrix::zeros(n);
                match spec.kind {
                    Fbgnn => {
                        m.axpy(w[0], &a);
                        m.axpy(w[1], &lap);
                    }
                    Acmgnn => {
                        m.axpy(w[0], &a);
                        m.axpy(w[1], &lap);
                        add_diag(&mut m, w[2]);
                    }
                    Fagnn => {
                        let b = spec.beta[0];
                        // gamma1 ((b+1)I - L) + gamma2 ((b-1)I + L)
                        m.axpy(-w[0], &lap);
                        m.axpy(w[1], &lap);
                        add_diag(&mut m, w[0] * (b + 1.0) + w[1] * (b - 1.0));
                    }
                    _ => unreachable!(),
                }
                g = m.matmul(&g);
            }
            g.apply(x)
        }
        G2cn => {
            let terms = spec.k / 2;
            let blocks: Vec<SignalMatrix> = (0..2)
                .map(|q| {
                    let shift = if q == 0 { 1.0 + spec.beta[0] } else { 1.0 - spec.beta[1] };
                    let mut factor = lap.clone();
                    factor.scale(-1.0);
                    add_diag(&mut factor, shift);
                    let sq = factor.matmul(&factor);
                    let mut g = DenseMatrix::zeros(n);
                    let mut coeff = 1.0;
                    let mut power = DenseMatrix::identity(n);
                    for k in 0..=terms {
                        if k > 0 {
                            coeff *= spec.alpha[q] / k as f64;
                            power = sq.matmul(&power);
                        }
                        g.axpy(coeff, &power);
                    }
                    g.apply(x)
                })
                .collect();
            fuse_blocks(spec, blocks)?
        }
        GnnLfHf => {
            let blocks: Vec<SignalMatrix> = (0..2)
                .map(|q| {
                    let mut theta = Vec::with_capacity(spec.k + 1);
                    let mut c = spec.alpha[q];
                    for k in 0..=spec.k {
                        if k > 0 {
                            c *= 1.0 - spec.alpha[q];
                        }
                        theta.push(c);
                    }
                    let series = polynomial_matrix(&a, &theta);
                    let sign = if q == 0 { -1.0 } else { 1.0 };
                    let mut factor = lap.clone();
                    factor.scale(sign * spec.beta[q]);
                    add_diag(&mut factor, 1.0);
                    factor.matmul(&series).apply(x)
                })
                .collect();
            fuse_blocks(spec, blocks)?
        }
        Figure => {
            let q_count = spec.channel_weights().len();
            let blocks: Vec<SignalMatrix> = (0..q_count)
                .map(|q| {
                    let theta = &spec.theta[q];
                    match FIGURE_CHANNELS[q] {
                        Identity => {
                            let mut m = x.clone();
                            m.scale(theta.iter().sum());
                            m
                        }
                        VarMonomial => polynomial_matrix(&a, theta).apply(x),
                        Chebyshev => cheb_matrix(&lap, theta).apply(x),
                        Bernstein => {
                            let mut two_i_minus_l = lap.clone();
                            two_i_minus_l.scale(-1.0);
                            add_diag(&mut two_i_minus_l, 2.0);
                            let mut g = DenseMatrix::zeros(n);
                            for (k, &t) in theta.iter().enumerate() {
                                let term = matrix_power(&two_i_minus_l, spec.k - k)
                                    .matmul(&matrix_power(&lap, k));
                                g.axpy(t * bernstein_weight(spec.k, k), &term);
                            }
                            g.apply(x)
                        }
                        _ => unreachable!(),
                    }
                })
                .collect();
            fuse_blocks(spec, blocks)?
        }
    };
    Ok(out)
}

fn laplacian_of(a: &DenseMatrix) -> DenseMatrix {
    let mut l = a.clone();
    l.scale(-1.0);
    add_diag(&mut l, 1.0);
    l
}

fn add_diag(m: &mut DenseMatrix, v: f64) {
    for i in 0..m.n() {
        let d = m.get(i, i);
        m.set(i, i, d + v);
    }
}

/// `sum_k theta_k B^k` by explicit matrix powers.
fn polynomial_matrix(base: &DenseMatrix, theta: &[f64]) -> DenseMatrix {
    let n = base.n();
    let mut g = DenseMatrix::zeros(n);
    let mut power = DenseMatrix::identity(n);
    for (k, &t) in theta.iter().enumerate() {
        if k > 0 {
            power = base.matmul(&power);
        }
        g.axpy(t, &power);
    }
    g
}

fn matrix_power(base: &DenseMatrix, k: usize) -> DenseMatrix {
    let mut p = DenseMatrix::identity(base.n());
    for _ in 0..k {
        p = base.matmul(&p);
    }
    p
}

fn cheb_basis_matrices(lap: &DenseMatrix, k_max: usize) -> Vec<DenseMatrix> {
    let n = lap.n();
    let mut basis = vec![DenseMatrix::identity(n)];
    if k_max >= 1 {
        basis.push(lap.clone());
        for k in 2..=k_max {
            let mut next = lap.matmul(&basis[k - 1]);
            next.scale(2.0);
            next.axpy(-1.0, &basis[k - 2]);
            basis.push(next);
        }
    }
    basis
}

fn cheb_matrix(lap: &DenseMatrix, theta: &[f64]) -> DenseMatrix {
    let mut g = DenseMatrix::zeros(lap.n());
    for (k, t_mat) in cheb_basis_matrices(lap, theta.len() - 1).iter().enumerate() {
        g.axpy(theta[k], t_mat);
    }
    g
}

fn opt_basis_dense(a: &DenseMatrix, theta: &[f64], x: &SignalMatrix) -> Result<SignalMatrix> {
    const BREAKDOWN_TOL: f64 = 1e-10;
    let n = a.n();
    let mut out = SignalMatrix::zeros(n, x.cols());
    for c in 0..x.cols() {
        let xc = x.col(c);
        let nrm = norm(&xc);
        if nrm <= f64::MIN_POSITIVE {
            return Err(SgfError::Domain(format!("signal column {c} has zero norm")));
        }
        let mut prev2: Vec<f64> = xc.iter().map(|v| v / nrm).collect();
        let mut acc: Vec<f64> = prev2.iter().map(|v| theta[0] * v).collect();
        let mut prev: Vec<f64> = Vec::new();
        let mut sigma = 0.0;
        for (k, &t) in theta.iter().enumerate().skip(1) {
            let src = if k == 1 { &prev2 } else { &prev };
            let mut w = a.apply_vec(src);
            let beta: f64 = w.iter().zip(src.iter()).map(|(p, q)| p * q).sum();
            for (wi, si) in w.iter_mut().zip(src.iter()) {
                *wi -= beta * si;
            }
            if k >= 2 {
                for (wi, oi) in w.iter_mut().zip(prev2.iter()) {
                    *wi -= sigma * oi;
                }
            }
            let nw = norm(&w);
            if nw <= BREAKDOWN_TOL {
                break;
            }
            w.iter_mut().for_each(|v| *v /= nw);
            if k == 1 {
                prev = w;
            } else {
                prev2 = std::mem::replace(&mut prev, w);
            }
            sigma = nw;
            for (ai, hi) in acc.iter_mut().zip(prev.iter()) {
                *ai += t * hi;
            }
        }
        out.set_col(c, &acc);
    }
    Ok(out)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fuse_blocks(spec: &FilterSpec, blocks: Vec<SignalMatrix>) -> Result<SignalMatrix> {
    let gamma = spec.channel_weights();
    match spec.fusion {
        Fusion::Sum => {
            let mut out = SignalMatrix::zeros(blocks[0].rows(), blocks[0].cols());
            for (b, &g) in blocks.iter().zip(gamma.iter()) {
                out.axpy(g, b);
            }
            Ok(out)
        }
        Fusion::Concat => {
            let scaled: Vec<SignalMatrix> = blocks
                .into_iter()
                .zip(gamma.iter())
                .map(|(mut b, &g)| {
                    b.scale(g);
                    b
                })
                .collect();
            let refs: Vec<&SignalMatrix> = scaled.iter().collect();
            SignalMatrix::hcat(&refs)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalize, CsrGraph};
    use std::sync::Arc;

    #[test]
    fn impulse_two_node_hand_value() {
        let g = CsrGraph::from_edges(2, &[(0, 1)]).unwrap().with_self_loops();
        let adj = normalize(Arc::new(g), 0.5).unwrap();
        let spec = FilterSpec::parse("impulse:K=2").unwrap();
        let x = SignalMatrix::from_vec(2, 1, vec![1.0, 0.0]).unwrap();
        let y = matrix_polynomial_oracle(&spec, &adj, &x).unwrap();
        assert!((y.get(0, 0) - 0.5).abs() < 1e-14);
        assert!((y.get(1, 0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn identity_passthrough() {
        let g = CsrGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap().with_self_loops();
        let adj = normalize(Arc::new(g), 0.5).unwrap();
        let spec = FilterSpec::parse("identity").unwrap();
        let x = SignalMatrix::from_vec(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let y = matrix_polynomial_oracle(&spec, &adj, &x).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn clenshaw_first_order_hand_value() {
        // theta = e_1: output is 2 L x.
        let g = CsrGraph::from_edges(2, &[(0, 1)]).unwrap().with_self_loops();
        let adj = normalize(Arc::new(g), 0.5).unwrap();
        let spec = FilterSpec::parse("clenshaw:K=1:theta=0,1").unwrap();
        let x = SignalMatrix::from_vec(2, 1, vec![1.0, 0.0]).unwrap();
        let y = matrix_polynomial_oracle(&spec, &adj, &x).unwrap();
        assert!((y.get(0, 0) - 1.0).abs() < 1e-14);
        assert!((y.get(1, 0) + 1.0).abs() < 1e-14);
    }
}
