//! Sparse evaluation of every filter as a propagation recurrence.
//!
//! Each filter reduces to repeated applications of the affine kernel
//! `a*x + b*(A x)` over the normalized operator, so no dense `n x n` matrix is
//! ever formed. State buffers held across hops go through the [`Workspace`]
//! accountant; the class counts are 1 for coefficient chains, 2 for two-term
//! recurrences, 3 for the residual second-kind recurrence, and lockstep banks
//! scale with their channel count.

use rayon::prelude::*;

use crate::error::{Result, SgfError};
use crate::filter::coeffs::{bernstein_weight, chebinterp_weights, fixed_coefficients};
use crate::filter::spec::{FilterKind, FilterSpec, Fusion, FIGURE_CHANNELS};
use crate::filter::workspace::{BufferBudget, BufferReport, Workspace};
use crate::graph::NormalizedAdjacency;
use crate::matrix::SignalMatrix;

/// Columns whose signal-dependent basis expansion stopped before order K,
/// as (column, last valid order).
pub type EarlyStops = Vec<(usize, usize)>;

#[derive(Debug, Clone, Default)]
pub struct ApplyReport {
    pub buffers: BufferReport,
    /// Input contained NaN; it propagates through the output.
    pub nan_input: bool,
    pub early_stops: EarlyStops,
}

#[derive(Debug)]
pub struct ApplyOutcome {
    pub output: SignalMatrix,
    pub report: ApplyReport,
}

/// Accumulation target: a column window of the output with a fixed scale,
/// so bank channels can fold straight into their sum or concat block.
struct Sink<'a> {
    out: &'a mut SignalMatrix,
    col_offset: usize,
    scale: f64,
}

impl<'a> Sink<'a> {
    fn whole(out: &'a mut SignalMatrix) -> Sink<'a> {
        Sink {
            out,
            col_offset: 0,
            scale: 1.0,
        }
    }

    /// `out[:, offset..offset+m.cols] += scale * coeff * m`
    fn add(&mut self, coeff: f64, m: &SignalMatrix) {
        let a = self.scale * coeff;
        if a == 0.0 {
            return;
        }
        let cols = m.cols();
        for i in 0..m.rows() {
            let dst = &mut self.out.row_mut(i)[self.col_offset..self.col_offset + cols];
            for (d, v) in dst.iter_mut().zip(m.row(i)) {
                *d += a * v;
            }
        }
    }

    /// Column-masked accumulation for per-column recurrences.
    fn add_masked(&mut self, coeff: f64, m: &SignalMatrix, active: &[bool]) {
        let a = self.scale * coeff;
        if a == 0.0 {
            return;
        }
        let cols = m.cols();
        for i in 0..m.rows() {
            let dst = &mut self.out.row_mut(i)[self.col_offset..self.col_offset + cols];
            let src = m.row(i);
            for c in 0..cols {
                if active[c] {
                    dst[c] += a * src[c];
                }
            }
        }
    }
}

/// Fused three-term update, written row-wise so the oldest buffer is
/// overwritten in place:
/// `prev2 <- p*(A prev) + q*prev + r*prev2 [+ s*residual]`.
fn three_term_step(
    adj: &NormalizedAdjacency,
    prev: &SignalMatrix,
    prev2: &mut SignalMatrix,
    p: f64,
    q: f64,
    r: f64,
    residual: Option<(f64, &SignalMatrix)>,
) {
    let n = prev.rows();
    let cols = prev.cols();
    let indptr = adj.graph().indptr();
    let indices = adj.graph().indices();
    let left = adj.left_scale();
    let right = adj.right_scale();

    let row_kernel = |i: usize, out_row: &mut [f64]| {
        let prow = prev.row(i);
        match residual {
            Some((s, res)) => {
                let rrow = res.row(i);
                for c in 0..cols {
                    out_row[c] = q * prow[c] + r * out_row[c] + s * rrow[c];
                }
            }
            None => {
                for c in 0..cols {
                    out_row[c] = q * prow[c] + r * out_row[c];
                }
            }
        }
        for &j in &indices[indptr[i]..indptr[i + 1]] {
            let w = p * left[i] * right[j];
            let xr = prev.row(j);
            for (o, v) in out_row.iter_mut().zip(xr.iter()) {
                *o += w * v;
            }
        }
    };

    if n >= 512 {
        prev2
            .data_mut()
            .par_chunks_mut(cols)
            .enumerate()
            .for_each(|(i, row)| row_kernel(i, row));
    } else {
        for i in 0..n {
            let row = &mut prev2.data_mut()[i * cols..(i + 1) * cols];
            row_kernel(i, row);
        }
    }
}

/// One first-kind Chebyshev step `2 L prev - prev2` as a standalone call.
pub fn chebyshev_step(
    adj: &NormalizedAdjacency,
    prev: &SignalMatrix,
    prev2: &SignalMatrix,
) -> SignalMatrix {
    let mut next = prev2.clone();
    three_term_step(adj, prev, &mut next, -2.0, 2.0, -1.0, None);
    next
}

/// One Legendre step `(2k-1)/k * L prev - (k-1)/k * prev2`.
pub fn legendre_step(
    adj: &NormalizedAdjacency,
    prev: &SignalMatrix,
    prev2: &SignalMatrix,
    k: usize,
) -> SignalMatrix {
    let kf = k as f64;
    let c = (2.0 * kf - 1.0) / kf;
    let mut next = prev2.clone();
    three_term_step(adj, prev, &mut next, -c, c, -(kf - 1.0) / kf, None);
    next
}

/// Jacobi recurrence multipliers for order k >= 2, as coefficients of
/// `(A prev, prev, prev2)`.
pub fn jacobi_multipliers(k: usize, alpha: f64, beta: f64) -> (f64, f64, f64) {
    let kf = k as f64;
    let d = (2.0 * kf + alpha + beta) * (2.0 * kf + alpha + beta - 1.0)
        / (2.0 * kf * (kf + alpha + beta));
    let d1 = (2.0 * kf + alpha + beta - 1.0) * (alpha * alpha - beta * beta)
        / (2.0 * kf * (kf + alpha + beta) * (2.0 * kf + alpha + beta - 2.0));
    let d2 = (kf + alpha - 1.0) * (kf + beta - 1.0) * (2.0 * kf + alpha + beta)
        / (kf * (kf + alpha + beta) * (2.0 * kf + alpha + beta - 2.0));
    (d, d1, d2)
}

/// One Jacobi step with hyperparameters (alpha, beta).
pub fn jacobi_step(
    adj: &NormalizedAdjacency,
    prev: &SignalMatrix,
    prev2: &SignalMatrix,
    k: usize,
    alpha: f64,
    beta: f64,
) -> SignalMatrix {
    let (d, d1, d2) = jacobi_multipliers(k, alpha, beta);
    let mut next = prev2.clone();
    three_term_step(adj, prev, &mut next, d, d1, -d2, None);
    next
}

/// Apply a validated filter: returns `g(L) x` (or the `n x QF` concat).
pub fn apply_filter(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
) -> Result<SignalMatrix> {
    apply_filter_tracked(spec, adj, x).map(|o| o.output)
}

/// As [`apply_filter`], also reporting buffer accounting and diagnostics.
pub fn apply_filter_tracked(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
) -> Result<ApplyOutcome> {
    spec.validate()?;
    if x.rows() != adj.n() {
        return Err(SgfError::Shape(format!(
            "signal has {} rows, graph has {} nodes",
            x.rows(),
            adj.n()
        )));
    }
    let nan_input = x.has_nan();
    let q = output_channels(spec);
    let mut out = SignalMatrix::zeros(x.rows(), q * x.cols());
    let mut ws = Workspace::new(x.rows());
    let mut early_stops = Vec::new();

    {
        let mut sink = Sink::whole(&mut out);
        dispatch(spec, adj, x, &mut sink, &mut ws, &mut early_stops)?;
    }
    ws.assert_drained();
    Ok(ApplyOutcome {
        output: out,
        report: ApplyReport {
            buffers: ws.report(),
            nan_input,
            early_stops,
        },
    })
}

/// Output width multiplier: Q blocks under concat fusion, 1 otherwise.
pub fn output_channels(spec: &FilterSpec) -> usize {
    match spec.fusion {
        Fusion::Concat => spec.channel_weights().len(),
        Fusion::Sum => 1,
    }
}

fn dispatch(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    sink: &mut Sink,
    ws: &mut Workspace,
    early_stops: &mut EarlyStops,
) -> Result<()> {
    use FilterKind::*;
    match spec.kind {
        Identity | Linear | Impulse | Monomial | Ppr | Hk => {
            let theta = fixed_coefficients(spec.kind, spec.k, spec.alpha.first().copied())?;
            coeff_chain(adj, x, &theta, 0.0, 1.0, sink, ws);
        }
        Gaussian => {
            let theta = fixed_coefficients(spec.kind, spec.k, spec.alpha.first().copied())?;
            coeff_chain(adj, x, &theta, 1.0, 1.0, sink, ws);
        }
        VarMonomial => coeff_chain(adj, x, spec.theta_row(), 0.0, 1.0, sink, ws),
        VarLinear => var_linear(adj, x, spec.theta_row(), sink, ws),
        Horner => horner(adj, x, spec.theta_row(), sink, ws),
        Chebyshev => three_term_series(adj, x, spec.theta_row(), Recurrence::Chebyshev, sink, ws),
        ChebInterp => {
            let w = chebinterp_weights(spec.theta_row());
            three_term_series(adj, x, &w, Recurrence::Chebyshev, sink, ws);
        }
        Legendre => three_term_series(adj, x, spec.theta_row(), Recurrence::Legendre, sink, ws),
        Jacobi => {
            let rec = Recurrence::Jacobi {
                alpha: spec.alpha[0],
                beta: spec.beta[0],
            };
            three_term_series(adj, x, spec.theta_row(), rec, sink, ws);
        }
        Favard => {
            let rec = Recurrence::Favard {
                alpha: &spec.favard_alpha,
                beta: &spec.favard_beta,
            };
            three_term_series(adj, x, spec.theta_row(), rec, sink, ws);
        }
        Clenshaw => clenshaw(adj, x, spec.theta_row(), sink, ws),
        Bernstein => bernstein(adj, x, spec.theta_row(), spec.k, sink, ws),
        OptBasis => opt_basis(adj, x, spec.theta_row(), sink, ws, early_stops)?,
        AdaGnn | Fbgnn | Acmgnn | Fagnn => composed_bank(spec, adj, x, sink, ws)?,
        G2cn => g2cn(spec, adj, x, sink, ws),
        GnnLfHf => gnn_lf_hf(spec, adj, x, sink, ws),
        Figure => figure(spec, adj, x, sink, ws),
    }
    Ok(())
}

/// `sum_k theta_k (aI + bA)^k x` with one running power.
fn coeff_chain(
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    theta: &[f64],
    a: f64,
    b: f64,
    sink: &mut Sink,
    ws: &mut Workspace,
) {
    let cols = x.cols();
    let mut chain = ws.state_copy_of(x);
    sink.add(theta[0], &chain);
    if theta.len() > 1 {
        let mut flip = ws.scratch(cols);
        for &t in &theta[1..] {
            adj.affine_spmv_into(&chain, a, b, &mut flip);
            std::mem::swap(&mut chain, &mut flip);
            sink.add(t, &chain);
        }
        ws.release_scratch(flip);
    }
    ws.release_state(chain);
}

/// K compositions of `(1 + theta_j) I - L`.
fn var_linear(
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    theta: &[f64],
    sink: &mut Sink,
    ws: &mut Workspace,
) {
    let cols = x.cols();
    let mut h = ws.state_copy_of(x);
    if !theta.is_empty() {
        let mut flip = ws.scratch(cols);
        for &t in theta {
            adj.affine_spmv_into(&h, t, 1.0, &mut flip);
            std::mem::swap(&mut h, &mut flip);
        }
        ws.release_scratch(flip);
    }
    sink.add(1.0, &h);
    ws.release_state(h);
}

/// Nested evaluation `h <- A h + theta_{K-j} x`, result after K steps.
fn horner(
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    theta: &[f64],
    sink: &mut Sink,
    ws: &mut Workspace,
) {
    let k = theta.len() - 1;
    let cols = x.cols();
    let residual = ws.state_copy_of(x);
    let mut h = ws.state_copy_of(x);
    h.scale(theta[k]);
    if k > 0 {
        let mut flip = ws.scratch(cols);
        for j in 1..=k {
            adj.affine_spmv_into(&h, 0.0, 1.0, &mut flip);
            flip.axpy(theta[k - j], &residual);
            std::mem::swap(&mut h, &mut flip);
        }
        ws.release_scratch(flip);
    }
    sink.add(1.0, &h);
    ws.release_state(h);
    ws.release_state(residual);
}

/// Two-history recurrences sharing the fused in-place step.
enum Recurrence<'a> {
    Chebyshev,
    Legendre,
    Jacobi { alpha: f64, beta: f64 },
    Favard { alpha: &'a [f64], beta: &'a [f64] },
}

impl Recurrence<'_> {
    /// Scale applied to x for the order-0 image.
    fn order0_scale(&self) -> f64 {
        match self {
            Recurrence::Favard { alpha, .. } => 1.0 / alpha[0].sqrt(),
            _ => 1.0,
        }
    }

    /// Order-1 image as an affine map (a, b) of the order-0 image.
    fn order1_affine(&self) -> (f64, f64) {
        match self {
            Recurrence::Chebyshev | Recurrence::Legendre => (1.0, -1.0),
            Recurrence::Jacobi { alpha, beta } => {
                ((alpha - beta) / 2.0, (alpha + beta + 2.0) / 2.0)
            }
            Recurrence::Favard { alpha, beta } => {
                let s = 1.0 / alpha[1].sqrt();
                (-beta[1] * s, s)
            }
        }
    }

    /// Step multipliers (p, q, r) of `(A prev, prev, prev2)` at order k >= 2.
    fn step(&self, k: usize) -> (f64, f64, f64) {
        match self {
            Recurrence::Chebyshev => (-2.0, 2.0, -1.0),
            Recurrence::Legendre => {
                let kf = k as f64;
                let c = (2.0 * kf - 1.0) / kf;
                (-c, c, -(kf - 1.0) / kf)
            }
            Recurrence::Jacobi { alpha, beta } => {
                let (d, d1, d2) = jacobi_multipliers(k, *alpha, *beta);
                (d, d1, -d2)
            }
            Recurrence::Favard { alpha, beta } => {
                let s = 1.0 / alpha[k].sqrt();
                (s, -beta[k] * s, -alpha[k - 1].sqrt() * s)
            }
        }
    }
}

fn three_term_series(
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    theta: &[f64],
    rec: Recurrence,
    sink: &mut Sink,
    ws: &mut Workspace,
) {
    let k_max = theta.len() - 1;
    let mut prev2 = ws.state_copy_of(x);
    let s0 = rec.order0_scale();
    if s0 != 1.0 {
        prev2.scale(s0);
    }
    sink.add(theta[0], &prev2);
    if k_max == 0 {
        ws.release_state(prev2);
        return;
    }
    let mut prev = ws.state(x.cols());
    let (a, b) = rec.order1_affine();
    adj.affine_spmv_into(&prev2, a, b, &mut prev);
    sink.add(theta[1], &prev);
    for (k, &t) in theta.iter().enumerate().skip(2) {
        let (p, q, r) = rec.step(k);
        three_term_step(adj, &prev, &mut prev2, p, q, r, None);
        std::mem::swap(&mut prev, &mut prev2);
        sink.add(t, &prev);
    }
    ws.release_state(prev);
    ws.release_state(prev2);
}

/// Second-kind series via the residual recurrence
/// `H_i = 2 L H_{i-1} - H_{i-2} + theta_{K-i} x`.
fn clenshaw(
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    theta: &[f64],
    sink: &mut Sink,
    ws: &mut Workspace,
) {
    let k_max = theta.len() - 1;
    let cols = x.cols();
    let residual = ws.state_copy_of(x);
    let mut prev = ws.state(cols);
    let mut prev2 = ws.state(cols);
    for i in 0..=k_max {
        three_term_step(
            adj,
            &prev,
            &mut prev2,
            -2.0,
            2.0,
            -1.0,
            Some((theta[k_max - i], &residual)),
        );
        std::mem::swap(&mut prev, &mut prev2);
    }
    sink.add(1.0, &prev);
    ws.release_state(prev2);
    ws.release_state(prev);
    ws.release_state(residual);
}

/// `sum_k theta_k/2^K binom(K,k) (2I-L)^{K-k} L^k x`, one power chain per
/// term: O(K^2) propagations by construction.
fn bernstein(
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    theta: &[f64],
    k_max: usize,
    sink: &mut Sink,
    ws: &mut Workspace,
) {
    let cols = x.cols();
    let mut chain = ws.state_copy_of(x);
    let mut work = ws.state(cols);
    let mut flip = if k_max > 0 { Some(ws.scratch(cols)) } else { None };
    for k in 0..=k_max {
        work.copy_from(&chain);
        if let Some(f) = flip.as_mut() {
            for _ in 0..(k_max - k) {
                adj.affine_spmv_into(&work, 1.0, 1.0, f);
                std::mem::swap(&mut work, f);
            }
        }
        sink.add(theta[k] * bernstein_weight(k_max, k), &work);
        if k < k_max {
            let f = flip.as_mut().expect("k_max > 0");
            adj.affine_spmv_into(&chain, 1.0, -1.0, f);
            std::mem::swap(&mut chain, f);
        }
    }
    if let Some(f) = flip {
        ws.release_scratch(f);
    }
    ws.release_state(work);
    ws.release_state(chain);
}

/// Signal-dependent orthonormal basis, one recurrence per column. Columns run
/// in lockstep over full-width history buffers; a column that exhausts its
/// expansion space stops early and its remaining theta are ignored.
fn opt_basis(
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    theta: &[f64],
    sink: &mut Sink,
    ws: &mut Workspace,
    early_stops: &mut EarlyStops,
) -> Result<()> {
    const BREAKDOWN_TOL: f64 = 1e-10;
    let cols = x.cols();
    let k_max = theta.len() - 1;
    let mut prev2 = ws.state_copy_of(x);
    let mut active = vec![true; cols];

    let norms0 = column_norms(&prev2);
    for (c, &nrm) in norms0.iter().enumerate() {
        if nrm <= f64::MIN_POSITIVE {
            ws.release_state(prev2);
            return Err(SgfError::Domain(format!(
                "signal column {c} has zero norm; orthonormal basis undefined"
            )));
        }
    }
    scale_columns(&mut prev2, &norms0.iter().map(|n| 1.0 / n).collect::<Vec<_>>(), &active);
    sink.add_masked(theta[0], &prev2, &active);
    if k_max == 0 {
        ws.release_state(prev2);
        return Ok(());
    }

    let mut prev = ws.state(cols);
    let mut s = ws.scratch(cols);
    // sigma[c] holds the pre-normalization norm from the previous order.
    let mut sigma = vec![0.0; cols];

    for k in 1..=k_max {
        let (src, older): (&SignalMatrix, Option<&SignalMatrix>) = if k == 1 {
            (&prev2, None)
        } else {
            (&prev, Some(&prev2))
        };
        adj.affine_spmv_into(src, 0.0, 1.0, &mut s);
        let betas = column_dots(&s, src);
        // s <- s - beta.col * src - sigma.col * older
        for i in 0..s.rows() {
            let srow_src = src.row(i);
            let orow = older.map(|m| m.row(i));
            let srow = s.row_mut(i);
            for c in 0..cols {
                if !active[c] {
                    continue;
                }
                srow[c] -= betas[c] * srow_src[c];
                if let Some(o) = orow {
                    srow[c] -= sigma[c] * o[c];
                }
            }
        }
        let new_norms = column_norms(&s);
        let mut inv = vec![0.0; cols];
        for c in 0..cols {
            if !active[c] {
                continue;
            }
            if new_norms[c] <= BREAKDOWN_TOL {
                active[c] = false;
                early_stops.push((c, k - 1));
            } else {
                inv[c] = 1.0 / new_norms[c];
            }
        }
        scale_columns(&mut s, &inv, &active);
        if k == 1 {
            prev.copy_from(&s);
        } else {
            std::mem::swap(&mut prev2, &mut prev);
            std::mem::swap(&mut prev, &mut s);
        }
        for c in 0..cols {
            if active[c] {
                sigma[c] = new_norms[c];
            }
        }
        sink.add_masked(theta[k], &prev, &active);
        if active.iter().all(|&a| !a) {
            break;
        }
    }

    ws.release_scratch(s);
    ws.release_state(prev);
    ws.release_state(prev2);
    Ok(())
}

fn column_norms(m: &SignalMatrix) -> Vec<f64> {
    column_dots(m, m).into_iter().map(f64::sqrt).collect()
}

fn column_dots(a: &SignalMatrix, b: &SignalMatrix) -> Vec<f64> {
    let mut dots = vec![0.0; a.cols()];
    for i in 0..a.rows() {
        for (d, (x, y)) in dots.iter_mut().zip(a.row(i).iter().zip(b.row(i))) {
            *d += x * y;
        }
    }
    dots
}

fn scale_columns(m: &mut SignalMatrix, scale: &[f64], active: &[bool]) {
    for i in 0..m.rows() {
        let row = m.row_mut(i);
        for (c, v) in row.iter_mut().enumerate() {
            if active[c] {
                *v *= scale[c];
            }
        }
    }
}

/// Banks realised as K compositions of a one-hop layer with per-layer
/// channel parameters.
fn composed_bank(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    sink: &mut Sink,
    ws: &mut Workspace,
) -> Result<()> {
    let cols = x.cols();
    let mut h = ws.state_copy_of(x);
    if spec.k > 0 {
        let mut s = ws.scratch(cols);
        for layer in 0..spec.k {
            let g = spec.layer_gamma(layer);
            if spec.kind == FilterKind::AdaGnn && g.len() != 1 && g.len() != cols {
                ws.release_scratch(s);
                ws.release_state(h);
                return Err(SgfError::Validation(format!(
                    "adagnn: gamma row has {} values, expected 1 or F={cols}",
                    g.len()
                )));
            }
            adj.affine_spmv_into(&h, 0.0, 1.0, &mut s);
            let layer_op = |hv: f64, sv: f64, c: usize| -> f64 {
                match spec.kind {
                    // (I - gamma L) per feature: (1-gamma) h + gamma A h
                    FilterKind::AdaGnn => {
                        let gc = if g.len() == 1 { g[0] } else { g[c] };
                        (1.0 - gc) * hv + gc * sv
                    }
                    // gamma1 (I-L) + gamma2 L
                    FilterKind::Fbgnn => g[0] * sv + g[1] * (hv - sv),
                    // gamma1 (I-L) + gamma2 L + gamma3 I
                    FilterKind::Acmgnn => g[0] * sv + g[1] * (hv - sv) + g[2] * hv,
                    // gamma1 ((beta+1)I - L) + gamma2 ((beta-1)I + L)
                    FilterKind::Fagnn => {
                        let beta = spec.beta[0];
                        beta * (g[0] + g[1]) * hv + (g[0] - g[1]) * sv
                    }
                    _ => unreachable!(),
                }
            };
            for i in 0..h.rows() {
                let srow = s.row(i);
                let hrow = h.row_mut(i);
                for c in 0..cols {
                    hrow[c] = layer_op(hrow[c], srow[c], c);
                }
            }
        }
        ws.release_scratch(s);
    }
    sink.add(1.0, &h);
    ws.release_state(h);
    Ok(())
}

/// Two Gaussian-family channels over squared factors `((1 +/- beta)I - L)^2k`,
/// advanced in lockstep with floor(K/2) terms per channel.
fn g2cn(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    sink: &mut Sink,
    ws: &mut Workspace,
) {
    let cols = x.cols();
    let terms = spec.k / 2;
    let gamma = spec.channel_weights().to_vec();
    // (1+beta)I - L = beta I + A ; (1-beta)I - L = -beta I + A
    let shifts = [spec.beta[0], -spec.beta[1]];
    let mut chains = vec![ws.state_copy_of(x), ws.state_copy_of(x)];
    let mut flip = if terms > 0 { Some(ws.scratch(cols)) } else { None };
    let mut coeff = [1.0, 1.0];
    for k in 0..=terms {
        for q in 0..2 {
            if k > 0 {
                coeff[q] *= spec.alpha[q] / k as f64;
                let f = flip.as_mut().expect("terms > 0");
                for _ in 0..2 {
                    adj.affine_spmv_into(&chains[q], shifts[q], 1.0, f);
                    std::mem::swap(&mut chains[q], f);
                }
            }
            channel_sink(sink, spec, q, cols).add(gamma[q] * coeff[q], &chains[q]);
        }
    }
    if let Some(f) = flip {
        ws.release_scratch(f);
    }
    for c in chains {
        ws.release_state(c);
    }
}

/// Decaying propagation with a low/high-frequency factor per channel:
/// `(I -/+ beta_q L) sum_k alpha_q (1-alpha_q)^k A^k x`.
fn gnn_lf_hf(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    sink: &mut Sink,
    ws: &mut Workspace,
) {
    let cols = x.cols();
    let gamma = spec.channel_weights().to_vec();
    let mut chains = vec![ws.state_copy_of(x), ws.state_copy_of(x)];
    let mut accs = vec![ws.state(cols), ws.state(cols)];
    let mut flip = ws.scratch(cols);
    let mut coeff = [spec.alpha[0], spec.alpha[1]];
    for k in 0..=spec.k {
        for q in 0..2 {
            if k > 0 {
                coeff[q] *= 1.0 - spec.alpha[q];
                adj.affine_spmv_into(&chains[q], 0.0, 1.0, &mut flip);
                std::mem::swap(&mut chains[q], &mut flip);
            }
            accs[q].axpy(coeff[q], &chains[q]);
        }
    }
    let signs = [-1.0, 1.0];
    for q in 0..2 {
        // flip <- L acc
        adj.affine_spmv_into(&accs[q], 1.0, -1.0, &mut flip);
        let mut ch = channel_sink(sink, spec, q, cols);
        ch.add(gamma[q], &accs[q]);
        ch.add(gamma[q] * signs[q] * spec.beta[q], &flip);
    }
    ws.release_scratch(flip);
    for a in accs {
        ws.release_state(a);
    }
    for c in chains {
        ws.release_state(c);
    }
}

/// Mixed-basis bank: channels evaluated one after another, each folding into
/// the shared output with its channel weight.
fn figure(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    sink: &mut Sink,
    ws: &mut Workspace,
) {
    let cols = x.cols();
    let q_count = spec.channel_weights().len();
    let gamma = spec.channel_weights().to_vec();
    for q in 0..q_count {
        let theta = &spec.theta[q];
        let mut ch = channel_sink(sink, spec, q, cols);
        ch.scale *= gamma[q];
        match FIGURE_CHANNELS[q] {
            // All-pass channel: every order's image is x itself.
            FilterKind::Identity => {
                let total: f64 = theta.iter().sum();
                coeff_chain(adj, x, &[total], 0.0, 1.0, &mut ch, ws);
            }
            FilterKind::VarMonomial => coeff_chain(adj, x, theta, 0.0, 1.0, &mut ch, ws),
            FilterKind::Chebyshev => {
                three_term_series(adj, x, theta, Recurrence::Chebyshev, &mut ch, ws)
            }
            FilterKind::Bernstein => bernstein(adj, x, theta, spec.k, &mut ch, ws),
            _ => unreachable!(),
        }
    }
}

fn channel_sink<'a>(
    sink: &'a mut Sink<'_>,
    spec: &FilterSpec,
    q: usize,
    cols: usize,
) -> Sink<'a> {
    let offset = match spec.fusion {
        Fusion::Sum => 0,
        Fusion::Concat => q * cols,
    };
    Sink {
        col_offset: sink.col_offset + offset,
        scale: sink.scale,
        out: &mut *sink.out,
    }
}

/// Analytic buffer-count formula per filter; the accountant must measure
/// exactly these numbers.
pub fn buffer_budget(spec: &FilterSpec) -> BufferBudget {
    use FilterKind::*;
    let hops = |k: usize| usize::from(k >= 1);
    match spec.kind {
        Identity => BufferBudget { state: 1, scratch: 0 },
        Linear => BufferBudget { state: 1, scratch: 1 },
        Impulse | Monomial | Ppr | Hk | Gaussian | VarMonomial => BufferBudget {
            state: 1,
            scratch: hops(spec.k),
        },
        VarLinear | AdaGnn | Fbgnn | Acmgnn | Fagnn => BufferBudget {
            state: 1,
            scratch: hops(spec.k),
        },
        Horner => BufferBudget {
            state: 2,
            scratch: hops(spec.k),
        },
        Chebyshev | ChebInterp | Legendre | Jacobi | Favard => BufferBudget {
            state: 1 + hops(spec.k),
            scratch: 0,
        },
        OptBasis => BufferBudget {
            state: 1 + hops(spec.k),
            scratch: hops(spec.k),
        },
        Clenshaw => BufferBudget { state: 3, scratch: 0 },
        Bernstein => BufferBudget {
            state: 2,
            scratch: hops(spec.k),
        },
        G2cn => BufferBudget {
            state: 2,
            scratch: hops(spec.k / 2),
        },
        GnnLfHf => BufferBudget { state: 4, scratch: 1 },
        Figure => {
            let channels = spec.figure_channels();
            let mut state = 0;
            let mut scratch = 0;
            for ch in channels {
                let (s, c) = match ch {
                    Identity => (1, 0),
                    VarMonomial => (1, hops(spec.k)),
                    Chebyshev => (1 + hops(spec.k), 0),
                    Bernstein => (2, hops(spec.k)),
                    _ => unreachable!(),
                };
                state = state.max(s);
                scratch = scratch.max(c);
            }
            BufferBudget { state, scratch }
        }
    }
}
