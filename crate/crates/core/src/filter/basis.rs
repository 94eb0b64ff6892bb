//! Per-hop basis stacks: the precompute artifact for decoupled training.
//!
//! A stack holds the order-k images of the input signal under a filter's
//! basis, grouped by channel for banks. `recombine` folds the stack back with
//! the filter's effective coefficients and must reproduce `apply_filter`.
//!
//! Disk format `SGB1`: u64 n, u64 F, u64 matrix count, u8 dtype, matrices
//! row-major, then a footer with one sha256 per matrix.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Result, SgfError};
use crate::filter::coeffs::{bernstein_weight, cheb_first, cheb_nodes, fixed_coefficients};
use crate::filter::engine::{apply_filter, EarlyStops};
use crate::filter::spec::{FilterKind, FilterSpec, Fusion, FIGURE_CHANNELS};
use crate::graph::io::Dtype;
use crate::graph::NormalizedAdjacency;
use crate::matrix::SignalMatrix;

pub const BASIS_MAGIC: &[u8; 4] = b"SGB1";

#[derive(Debug, Clone)]
pub struct BasisStack {
    pub n: usize,
    pub f: usize,
    /// Flat matrix list; `channel_sizes` partitions it per channel.
    pub mats: Vec<SignalMatrix>,
    pub channel_sizes: Vec<usize>,
    /// Per-channel coefficient rows aligned with `channel_sizes`; the
    /// recombination weights that reproduce the filter output.
    pub coeffs: Vec<Vec<f64>>,
    pub early_stops: EarlyStops,
}

/// Export the per-hop images `T^(k) x` for a filter. Fixed and variable
/// filters produce K+1 order images; decoupled banks produce one group per
/// channel; composed banks export their layer-composition prefixes (the
/// order-j partial products), whose recombination weight is the final prefix.
pub fn export_basis(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
) -> Result<BasisStack> {
    use FilterKind::*;
    spec.validate()?;
    if x.rows() != adj.n() {
        return Err(SgfError::Shape(format!(
            "signal has {} rows, graph has {} nodes",
            x.rows(),
            adj.n()
        )));
    }
    let mut early_stops = Vec::new();
    let (mats, channel_sizes, coeffs): (Vec<SignalMatrix>, Vec<usize>, Vec<Vec<f64>>) =
        match spec.kind {
            Identity | Linear | Impulse | Monomial | Ppr | Hk | Gaussian => {
                let theta = fixed_coefficients(spec.kind, spec.k, spec.alpha.first().copied())?;
                let shift = if spec.kind == Gaussian { 1.0 } else { 0.0 };
                let mats = power_images(adj, x, theta.len() - 1, shift, false);
                let len = mats.len();
                (mats, vec![len], vec![theta])
            }
            VarMonomial | Horner => {
                let theta = spec.theta_row().to_vec();
                let mats = power_images(adj, x, spec.k, 0.0, false);
                let len = mats.len();
                (mats, vec![len], vec![theta])
            }
            Chebyshev => {
                let mats = cheb_images(adj, x, spec.k);
                let len = mats.len();
                (mats, vec![len], vec![spec.theta_row().to_vec()])
            }
            ChebInterp => {
                // theta-dual images: S_kappa = 2/(K+1) sum_k T_k(x_kappa) T_k x,
                // so the raw interpolation coefficients recombine directly.
                let base = cheb_images(adj, x, spec.k);
                let nodes = cheb_nodes(spec.k);
                let scale = 2.0 / (spec.k + 1) as f64;
                let mats: Vec<SignalMatrix> = nodes
                    .iter()
                    .map(|&node| {
                        let mut m = SignalMatrix::zeros(x.rows(), x.cols());
                        for (k, img) in base.iter().enumerate() {
                            m.axpy(scale * cheb_first(k, node), img);
                        }
                        m
                    })
                    .collect();
                let len = mats.len();
                (mats, vec![len], vec![spec.theta_row().to_vec()])
            }
            Clenshaw => {
                // Second-kind images by the forward recurrence, U_1 = 2L.
                let mut mats = vec![x.clone()];
                if spec.k >= 1 {
                    let mut prev = adj.apply_laplacian(x)?;
                    prev.scale(2.0);
                    mats.push(prev);
                    for k in 2..=spec.k {
                        let next = crate::filter::engine::chebyshev_step(
                            adj,
                            &mats[k - 1],
                            &mats[k - 2],
                        );
                        mats.push(next);
                    }
                }
                let len = mats.len();
                (mats, vec![len], vec![spec.theta_row().to_vec()])
            }
            Bernstein => {
                let k_max = spec.k;
                let mut lap_powers = Vec::with_capacity(k_max + 1);
                lap_powers.push(x.clone());
                for k in 1..=k_max {
                    lap_powers.push(adj.apply_laplacian(&lap_powers[k - 1])?);
                }
                let mut mats = Vec::with_capacity(k_max + 1);
                for (k, base) in lap_powers.into_iter().enumerate() {
                    let mut img = base;
                    for _ in 0..(k_max - k) {
                        let mut next = SignalMatrix::zeros(x.rows(), x.cols());
                        adj.affine_spmv_into(&img, 1.0, 1.0, &mut next);
                        img = next;
                    }
                    img.scale(bernstein_weight(k_max, k));
                    mats.push(img);
                }
                let len = mats.len();
                (mats, vec![len], vec![spec.theta_row().to_vec()])
            }
            Legendre | Jacobi | Favard => {
                let mats = recurrence_images(spec, adj, x)?;
                let len = mats.len();
                (mats, vec![len], vec![spec.theta_row().to_vec()])
            }
            OptBasis => {
                let (mats, stops) = opt_basis_images(spec, adj, x)?;
                early_stops = stops;
                let len = mats.len();
                (mats, vec![len], vec![spec.theta_row().to_vec()])
            }
            VarLinear | AdaGnn | Fbgnn | Acmgnn | Fagnn => {
                // Layer prefixes: H^(j) after j composed layers.
                let mats = prefix_images(spec, adj, x)?;
                let mut coeff = vec![0.0; mats.len()];
                coeff[mats.len() - 1] = 1.0;
                let len = mats.len();
                (mats, vec![len], vec![coeff])
            }
            G2cn => {
                let terms = spec.k / 2;
                let gamma = spec.channel_weights();
                let mut mats = Vec::new();
                let mut coeffs = Vec::new();
                for q in 0..2 {
                    let shift = if q == 0 { spec.beta[0] } else { -spec.beta[1] };
                    let imgs = power_images(adj, x, terms, shift, true);
                    let mut row = Vec::with_capacity(terms + 1);
                    let mut c = 1.0;
                    for k in 0..=terms {
                        if k > 0 {
                            c *= spec.alpha[q] / k as f64;
                        }
                        row.push(gamma[q] * c);
                    }
                    mats.extend(imgs);
                    coeffs.push(row);
                }
                (mats, vec![terms + 1, terms + 1], coeffs)
            }
            GnnLfHf => {
                let gamma = spec.channel_weights();
                let chain = power_images(adj, x, spec.k, 0.0, false);
                let mut mats = Vec::new();
                let mut coeffs = Vec::new();
                for q in 0..2 {
                    let sign = if q == 0 { -1.0 } else { 1.0 };
                    let mut row = Vec::with_capacity(spec.k + 1);
                    let mut c = spec.alpha[q];
                    for (k, img) in chain.iter().enumerate() {
                        if k > 0 {
                            c *= 1.0 - spec.alpha[q];
                        }
                        // (I +/- beta L) folded into the image.
                        let lap = adj.apply_laplacian(img)?;
                        let mut m = img.clone();
                        m.axpy(sign * spec.beta[q], &lap);
                        mats.push(m);
                        row.push(gamma[q] * c);
                    }
                    coeffs.push(row);
                }
                (mats, vec![spec.k + 1, spec.k + 1], coeffs)
            }
            Figure => {
                let gamma = spec.channel_weights();
                let mut mats = Vec::new();
                let mut sizes = Vec::new();
                let mut coeffs = Vec::new();
                for (q, &g) in gamma.iter().enumerate() {
                    let theta = &spec.theta[q];
                    let row: Vec<f64>;
                    let imgs: Vec<SignalMatrix> = match FIGURE_CHANNELS[q] {
                        FilterKind::Identity => {
                            row = vec![g * theta.iter().sum::<f64>()];
                            vec![x.clone()]
                        }
                        FilterKind::VarMonomial => {
                            row = theta.iter().map(|t| g * t).collect();
                            power_images(adj, x, spec.k, 0.0, false)
                        }
                        FilterKind::Chebyshev => {
                            row = theta.iter().map(|t| g * t).collect();
                            cheb_images(adj, x, spec.k)
                        }
                        FilterKind::Bernstein => {
                            row = theta.iter().map(|t| g * t).collect();
                            let sub = FilterSpec::variable(FilterKind::Bernstein, theta.clone());
                            let stack = export_basis(&sub, adj, x)?;
                            stack.mats
                        }
                        _ => unreachable!(),
                    };
                    sizes.push(imgs.len());
                    mats.extend(imgs);
                    coeffs.push(row);
                }
                (mats, sizes, coeffs)
            }
        };

    Ok(BasisStack {
        n: x.rows(),
        f: x.cols(),
        mats,
        channel_sizes,
        coeffs,
        early_stops,
    })
}

/// Power images `(shift*I + A)^(sk) x` for k = 0..=k_max, where s is 1 or 2
/// (squared factors advance two applications per order). `shift = 0` is the
/// plain propagation chain, `shift = 1` the `2I - L` chain.
fn power_images(
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
    k_max: usize,
    shift: f64,
    squared: bool,
) -> Vec<SignalMatrix> {
    let mut mats = Vec::with_capacity(k_max + 1);
    mats.push(x.clone());
    for k in 1..=k_max {
        let mut next = SignalMatrix::zeros(x.rows(), x.cols());
        adj.affine_spmv_into(&mats[k - 1], shift, 1.0, &mut next);
        if squared {
            let mut again = SignalMatrix::zeros(x.rows(), x.cols());
            adj.affine_spmv_into(&next, shift, 1.0, &mut again);
            next = again;
        }
        mats.push(next);
    }
    mats
}

fn cheb_images(adj: &NormalizedAdjacency, x: &SignalMatrix, k_max: usize) -> Vec<SignalMatrix> {
    let mut mats = vec![x.clone()];
    if k_max >= 1 {
        mats.push(adj.apply_laplacian(x).expect("shape checked"));
        for k in 2..=k_max {
            let next = crate::filter::engine::chebyshev_step(adj, &mats[k - 1], &mats[k - 2]);
            mats.push(next);
        }
    }
    mats
}

fn recurrence_images(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
) -> Result<Vec<SignalMatrix>> {
    let mut order0 = x.clone();
    if spec.kind == FilterKind::Favard {
        order0.scale(1.0 / spec.favard_alpha[0].sqrt());
    }
    let mut mats = vec![order0];
    if spec.k >= 1 {
        let mut first = SignalMatrix::zeros(x.rows(), x.cols());
        match spec.kind {
            FilterKind::Legendre => adj.affine_spmv_into(&mats[0], 1.0, -1.0, &mut first),
            FilterKind::Jacobi => {
                let (a, b) = (spec.alpha[0], spec.beta[0]);
                adj.affine_spmv_into(&mats[0], (a - b) / 2.0, (a + b + 2.0) / 2.0, &mut first)
            }
            FilterKind::Favard => {
                let s = 1.0 / spec.favard_alpha[1].sqrt();
                adj.affine_spmv_into(&mats[0], -spec.favard_beta[1] * s, s, &mut first)
            }
            _ => unreachable!(),
        }
        mats.push(first);
        for k in 2..=spec.k {
            let next = match spec.kind {
                FilterKind::Legendre => {
                    crate::filter::engine::legendre_step(adj, &mats[k - 1], &mats[k - 2], k)
                }
                FilterKind::Jacobi => crate::filter::engine::jacobi_step(
                    adj,
                    &mats[k - 1],
                    &mats[k - 2],
                    k,
                    spec.alpha[0],
                    spec.beta[0],
                ),
                FilterKind::Favard => {
                    let s = 1.0 / spec.favard_alpha[k].sqrt();
                    let mut next = SignalMatrix::zeros(x.rows(), x.cols());
                    adj.affine_spmv_into(&mats[k - 1], -spec.favard_beta[k] * s, s, &mut next);
                    next.axpy(-spec.favard_alpha[k - 1].sqrt() * s, &mats[k - 2]);
                    next
                }
                _ => unreachable!(),
            };
            mats.push(next);
        }
    }
    Ok(mats)
}

fn opt_basis_images(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
) -> Result<(Vec<SignalMatrix>, EarlyStops)> {
    const BREAKDOWN_TOL: f64 = 1e-10;
    let cols = x.cols();
    let mut early = Vec::new();
    let mut h0 = x.clone();
    let mut active = vec![true; cols];
    for c in 0..cols {
        let nrm: f64 = h0.col(c).iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm <= f64::MIN_POSITIVE {
            return Err(SgfError::Domain(format!(
                "signal column {c} has zero norm; orthonormal basis undefined"
            )));
        }
        let col: Vec<f64> = h0.col(c).iter().map(|v| v / nrm).collect();
        h0.set_col(c, &col);
    }
    let mut mats = vec![h0];
    let mut sigma = vec![0.0; cols];
    for k in 1..=spec.k {
        let prev = &mats[k - 1];
        let older = if k >= 2 { Some(&mats[k - 2]) } else { None };
        let mut w = adj.spmv(prev)?;
        for c in 0..cols {
            if !active[c] {
                let zeros = vec![0.0; w.rows()];
                w.set_col(c, &zeros);
                continue;
            }
            let wc = w.col(c);
            let pc = prev.col(c);
            let beta: f64 = wc.iter().zip(pc.iter()).map(|(a, b)| a * b).sum();
            let mut col: Vec<f64> = wc
                .iter()
                .zip(pc.iter())
                .map(|(a, b)| a - beta * b)
                .collect();
            if let Some(o) = older {
                let oc = o.col(c);
                for (v, ov) in col.iter_mut().zip(oc.iter()) {
                    *v -= sigma[c] * ov;
                }
            }
            let nrm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nrm <= BREAKDOWN_TOL {
                active[c] = false;
                early.push((c, k - 1));
                col.iter_mut().for_each(|v| *v = 0.0);
            } else {
                col.iter_mut().for_each(|v| *v /= nrm);
                sigma[c] = nrm;
            }
            w.set_col(c, &col);
        }
        mats.push(w);
    }
    Ok((mats, early))
}

fn prefix_images(
    spec: &FilterSpec,
    adj: &NormalizedAdjacency,
    x: &SignalMatrix,
) -> Result<Vec<SignalMatrix>> {
    let mut mats = vec![x.clone()];
    let mut partial = spec.clone();
    for j in 1..=spec.k {
        partial.k = j;
        if spec.kind == FilterKind::VarLinear {
            partial.theta = vec![spec.theta_row()[..j].to_vec()];
        } else if spec.gamma.len() > 1 {
            partial.gamma = spec.gamma[..j].to_vec();
        }
        mats.push(apply_filter(&partial, adj, x)?);
    }
    Ok(mats)
}

impl BasisStack {
    /// Fold the stack with its effective coefficients; reproduces the filter
    /// output (sum fusion adds channels, concat lays them side by side).
    pub fn recombine(&self, fusion: Fusion) -> SignalMatrix {
        let q = self.channel_sizes.len();
        let out_cols = match fusion {
            Fusion::Sum => self.f,
            Fusion::Concat => q * self.f,
        };
        let mut out = SignalMatrix::zeros(self.n, out_cols);
        let mut idx = 0;
        for (qi, (&size, row)) in self.channel_sizes.iter().zip(self.coeffs.iter()).enumerate() {
            let offset = match fusion {
                Fusion::Sum => 0,
                Fusion::Concat => qi * self.f,
            };
            for k in 0..size {
                let c = row[k];
                if c != 0.0 {
                    for i in 0..self.n {
                        let dst = &mut out.row_mut(i)[offset..offset + self.f];
                        for (d, v) in dst.iter_mut().zip(self.mats[idx + k].row(i)) {
                            *d += c * v;
                        }
                    }
                }
            }
            idx += size;
        }
        out
    }

    pub fn save(&self, dtype: Dtype, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| SgfError::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| SgfError::io(path, e);
        w.write_all(BASIS_MAGIC).map_err(io)?;
        w.write_all(&(self.n as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&(self.f as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&(self.mats.len() as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&[dtype.flag()]).map_err(io)?;
        let mut checksums = Vec::with_capacity(self.mats.len());
        for m in &self.mats {
            let mut hasher = Sha256::new();
            match dtype {
                Dtype::F64 => {
                    for &v in m.data() {
                        let b = v.to_le_bytes();
                        hasher.update(b);
                        w.write_all(&b).map_err(io)?;
                    }
                }
                Dtype::F32 => {
                    for &v in m.data() {
                        let b = (v as f32).to_le_bytes();
                        hasher.update(b);
                        w.write_all(&b).map_err(io)?;
                    }
                }
            }
            checksums.push(hasher.finalize());
        }
        for c in checksums {
            w.write_all(&c).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Load matrices and verify the checksum footer. Channel layout and
    /// coefficients are re-derived from the spec by the caller.
    pub fn load(path: &Path) -> Result<(usize, usize, Vec<SignalMatrix>)> {
        let file = File::open(path).map_err(|e| SgfError::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|e| SgfError::io(path, e))?;
        if &magic != BASIS_MAGIC {
            return Err(SgfError::Format {
                path: path.display().to_string(),
                msg: "bad magic".into(),
            });
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8).map_err(|e| SgfError::io(path, e))?;
        let n = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8).map_err(|e| SgfError::io(path, e))?;
        let f = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8).map_err(|e| SgfError::io(path, e))?;
        let count = u64::from_le_bytes(b8) as usize;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag).map_err(|e| SgfError::io(path, e))?;
        let dtype = Dtype::from_flag(flag[0], path)?;
        let mut mats = Vec::with_capacity(count);
        let mut sums = Vec::with_capacity(count);
        for _ in 0..count {
            let mut data = Vec::with_capacity(n * f);
            let mut hasher = Sha256::new();
            match dtype {
                Dtype::F64 => {
                    let mut b = [0u8; 8];
                    for _ in 0..n * f {
                        r.read_exact(&mut b).map_err(|e| SgfError::io(path, e))?;
                        hasher.update(b);
                        data.push(f64::from_le_bytes(b));
                    }
                }
                Dtype::F32 => {
                    let mut b = [0u8; 4];
                    for _ in 0..n * f {
                        r.read_exact(&mut b).map_err(|e| SgfError::io(path, e))?;
                        hasher.update(b);
                        data.push(f32::from_le_bytes(b) as f64);
                    }
                }
            }
            sums.push(hasher.finalize());
            mats.push(SignalMatrix::from_vec(n, f, data)?);
        }
        for (i, expected) in sums.iter().enumerate() {
            let mut stored = [0u8; 32];
            r.read_exact(&mut stored).map_err(|e| SgfError::io(path, e))?;
            if stored != expected[..] {
                return Err(SgfError::Format {
                    path: path.display().to_string(),
                    msg: format!("checksum mismatch for matrix {i}"),
                });
            }
        }
        Ok((n, f, mats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{normalize, CsrGraph};
    use std::sync::Arc;

    fn small_adj() -> NormalizedAdjacency {
        let g = CsrGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)])
            .unwrap()
            .with_self_loops();
        normalize(Arc::new(g), 0.5).unwrap()
    }

    fn signal(n: usize, f: usize, seed: u64) -> SignalMatrix {
        let mut v = Vec::with_capacity(n * f);
        let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        for _ in 0..n * f {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            v.push((s as f64 / u64::MAX as f64) * 2.0 - 1.0);
        }
        SignalMatrix::from_vec(n, f, v).unwrap()
    }

    #[test]
    fn k0_stack_is_single_matrix() {
        let adj = small_adj();
        let x = signal(5, 2, 7);
        let spec = FilterSpec::parse("varmonomial:K=0:theta=1").unwrap();
        let stack = export_basis(&spec, &adj, &x).unwrap();
        assert_eq!(stack.mats.len(), 1);
        assert_eq!(stack.mats[0], x);
    }

    #[test]
    fn stack_rows_match_n() {
        let adj = small_adj();
        let x = signal(5, 3, 8);
        let spec = FilterSpec::parse("chebyshev:K=4:theta=0.2,0.2,0.2,0.2,0.2").unwrap();
        let stack = export_basis(&spec, &adj, &x).unwrap();
        assert_eq!(stack.mats.len(), 5);
        assert!(stack.mats.iter().all(|m| m.rows() == 5));
    }

    #[test]
    fn recombination_matches_apply() {
        let adj = small_adj();
        let x = signal(5, 2, 9);
        for text in [
            "ppr:K=5:alpha=0.4",
            "chebyshev:K=5:theta=0.4,-0.2,0.1,0.3,0.0,-0.5",
            "chebinterp:K=4:theta=0.3,0.1,-0.2,0.4,0.2",
            "clenshaw:K=4:theta=0.3,0.1,-0.2,0.4,0.2",
            "bernstein:K=4:theta=0.3,0.1,-0.2,0.4,0.2",
            "legendre:K=4:theta=0.3,0.1,-0.2,0.4,0.2",
            "g2cn:K=6",
            "gnnlfhf:K=4",
            "figure:K=3",
            "fagnn:K=3",
            "varlinear:K=3:theta=0.5,0.2,-0.1",
        ] {
            let spec = FilterSpec::parse(text).unwrap();
            let stack = export_basis(&spec, &adj, &x).unwrap();
            let rec = stack.recombine(spec.fusion);
            let direct = apply_filter(&spec, &adj, &x).unwrap();
            assert!(
                rec.rel_max_diff(&direct) < 1e-10,
                "{text}: {}",
                rec.rel_max_diff(&direct)
            );
        }
    }

    #[test]
    fn save_load_roundtrip_with_checksums() {
        let adj = small_adj();
        let x = signal(5, 2, 10);
        let spec = FilterSpec::parse("monomial:K=3").unwrap();
        let stack = export_basis(&spec, &adj, &x).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stack.sgb");
        stack.save(Dtype::F64, &p).unwrap();
        let (n, f, mats) = BasisStack::load(&p).unwrap();
        assert_eq!((n, f), (5, 2));
        assert_eq!(mats.len(), 4);
        for (a, b) in mats.iter().zip(stack.mats.iter()) {
            assert_eq!(a, b);
        }
        // Corrupt one payload byte: checksum must catch it.
        let mut bytes = std::fs::read(&p).unwrap();
        let off = 4 + 8 + 8 + 8 + 1 + 11;
        bytes[off] ^= 0xFF;
        std::fs::write(&p, bytes).unwrap();
        assert!(BasisStack::load(&p).is_err());
    }
}
