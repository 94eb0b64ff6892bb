//! Scalar frequency responses: each filter's recurrence with the operator
//! replaced by the eigenvalue argument (`L -> lambda`, `A -> 1 - lambda`).

use std::sync::Arc;

use crate::error::{Result, SgfError};
use crate::filter::coeffs::{bernstein_weight, cheb_first, chebinterp_weights, fixed_coefficients};
use crate::filter::spec::{FilterKind, FilterSpec, Fusion, FIGURE_CHANNELS};

pub type ResponseFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How a spec acts in the spectral domain.
pub enum SpectralForm {
    /// One response shared by every signal column.
    Scalar(ResponseFn),
    /// Feature-wise responses (one per input column).
    PerColumn(Vec<ResponseFn>),
    /// Concat fusion: one response per output block.
    ConcatBlocks(Vec<ResponseFn>),
}

/// Scalar response `g(lambda)`; errors for signal-dependent or non-scalar
/// (feature-wise, concat) specs.
pub fn frequency_response(spec: &FilterSpec, lambda: f64) -> Result<f64> {
    match spectral_form(spec, 1)? {
        SpectralForm::Scalar(f) => Ok(f(lambda)),
        _ => Err(SgfError::Validation(format!(
            "{}: response is not a single scalar function",
            spec.kind.name()
        ))),
    }
}

/// Build the spectral description of a validated spec. `num_features` is only
/// consulted for feature-wise banks.
pub fn spectral_form(spec: &FilterSpec, num_features: usize) -> Result<SpectralForm> {
    use FilterKind::*;
    spec.validate()?;
    if spec.kind == OptBasis {
        return Err(SgfError::Validation(
            "optbasis: basis depends on the input signal; no signal-independent response".into(),
        ));
    }

    let form = match spec.kind {
        Identity | Linear | Impulse | Monomial | Ppr | Hk | Gaussian => {
            let theta = fixed_coefficients(spec.kind, spec.k, spec.alpha.first().copied())?;
            let shift = if spec.kind == Gaussian { 2.0 } else { 1.0 };
            SpectralForm::Scalar(power_series(theta, shift))
        }
        VarMonomial | Horner => SpectralForm::Scalar(power_series(spec.theta_row().to_vec(), 1.0)),
        VarLinear => {
            let theta = spec.theta_row().to_vec();
            SpectralForm::Scalar(Arc::new(move |l| {
                theta.iter().map(|t| 1.0 + t - l).product()
            }))
        }
        Chebyshev => SpectralForm::Scalar(cheb_series(spec.theta_row().to_vec())),
        ChebInterp => SpectralForm::Scalar(cheb_series(chebinterp_weights(spec.theta_row()))),
        Clenshaw => {
            let theta = spec.theta_row().to_vec();
            SpectralForm::Scalar(Arc::new(move |l| {
                // U_k(l) via the second-kind recurrence, U_1 = 2l.
                let mut sum = 0.0;
                let mut prev2 = 0.0;
                let mut prev = 0.0;
                for (k, &t) in theta.iter().enumerate() {
                    let u = match k {
                        0 => 1.0,
                        1 => 2.0 * l,
                        _ => 2.0 * l * prev - prev2,
                    };
                    prev2 = prev;
                    prev = u;
                    sum += t * u;
                }
                sum
            }))
        }
        Bernstein => {
            let theta = spec.theta_row().to_vec();
            let big_k = spec.k;
            SpectralForm::Scalar(Arc::new(move |l| {
                theta
                    .iter()
                    .enumerate()
                    .map(|(k, &t)| {
                        t * bernstein_weight(big_k, k)
                            * (2.0 - l).powi((big_k - k) as i32)
                            * l.powi(k as i32)
                    })
                    .sum()
            }))
        }
        Legendre => {
            let theta = spec.theta_row().to_vec();
            SpectralForm::Scalar(Arc::new(move |l| {
                let mut sum = theta[0];
                if theta.len() > 1 {
                    let mut prev2 = 1.0;
                    let mut prev = l;
                    sum += theta[1] * prev;
                    for (k, &t) in theta.iter().enumerate().skip(2) {
                        let kf = k as f64;
                        let next = (2.0 * kf - 1.0) / kf * l * prev - (kf - 1.0) / kf * prev2;
                        prev2 = prev;
                        prev = next;
                        sum += t * next;
                    }
                }
                sum
            }))
        }
        Jacobi => {
            let theta = spec.theta_row().to_vec();
            let (a, b) = (spec.alpha[0], spec.beta[0]);
            SpectralForm::Scalar(Arc::new(move |l| {
                let arg = 1.0 - l;
                let mut sum = theta[0];
                if theta.len() > 1 {
                    let mut prev2 = 1.0;
                    let mut prev = (a - b) / 2.0 + (a + b + 2.0) / 2.0 * arg;
                    sum += theta[1] * prev;
                    for (k, &t) in theta.iter().enumerate().skip(2) {
                        let (d, d1, d2) = crate::filter::engine::jacobi_multipliers(k, a, b);
                        let next = d * arg * prev + d1 * prev - d2 * prev2;
                        prev2 = prev;
                        prev = next;
                        sum += t * next;
                    }
                }
                sum
            }))
        }
        Favard => {
            let theta = spec.theta_row().to_vec();
            let fa = spec.favard_alpha.clone();
            let fb = spec.favard_beta.clone();
            SpectralForm::Scalar(Arc::new(move |l| {
                let arg = 1.0 - l;
                let mut prev2 = 1.0 / fa[0].sqrt();
                let mut sum = theta[0] * prev2;
                if theta.len() > 1 {
                    let mut prev = (arg - fb[1]) * prev2 / fa[1].sqrt();
                    sum += theta[1] * prev;
                    for (k, &t) in theta.iter().enumerate().skip(2) {
                        let next =
                            ((arg - fb[k]) * prev - fa[k - 1].sqrt() * prev2) / fa[k].sqrt();
                        prev2 = prev;
                        prev = next;
                        sum += t * next;
                    }
                }
                sum
            }))
        }
        OptBasis => unreachable!(),
        AdaGnn => {
            // (1 - gamma l) per layer, feature-wise.
            let uniform = spec.gamma.iter().all(|row| row.len() == 1);
            if uniform {
                let layers = layer_values(spec, 0);
                SpectralForm::Scalar(Arc::new(move |l| {
                    layers.iter().map(|g| 1.0 - g * l).product()
                }))
            } else {
                let width = spec.gamma[0].len();
                if width != num_features {
                    return Err(SgfError::Validation(format!(
                        "adagnn: gamma rows have {width} values, expected {num_features} features"
                    )));
                }
                let per: Vec<ResponseFn> = (0..width)
                    .map(|c| {
                        let layers = layer_values(spec, c);
                        let f: ResponseFn = Arc::new(move |l| {
                            layers.iter().map(|g| 1.0 - g * l).product()
                        });
                        f
                    })
                    .collect();
                SpectralForm::PerColumn(per)
            }
        }
        Fbgnn | Acmgnn | Fagnn => {
            let kind = spec.kind;
            let beta = spec.beta.first().copied().unwrap_or(0.0);
            let rows: Vec<Vec<f64>> = (0..spec.k).map(|j| spec.layer_gamma(j).to_vec()).collect();
            SpectralForm::Scalar(Arc::new(move |l| {
                rows.iter()
                    .map(|g| match kind {
                        FilterKind::Fbgnn => g[0] * (1.0 - l) + g[1] * l,
                        FilterKind::Acmgnn => g[0] * (1.0 - l) + g[1] * l + g[2],
                        FilterKind::Fagnn => g[0] * (beta + 1.0 - l) + g[1] * (beta - 1.0 + l),
                        _ => unreachable!(),
                    })
                    .product()
            }))
        }
        G2cn => {
            let chans: Vec<ResponseFn> = (0..2)
                .map(|q| {
                    let alpha = spec.alpha[q];
                    let shift = if q == 0 { 1.0 + spec.beta[0] } else { 1.0 - spec.beta[1] };
                    let terms = spec.k / 2;
                    let f: ResponseFn = Arc::new(move |l| {
                        let base = (shift - l) * (shift - l);
                        let mut coeff = 1.0;
                        let mut pow = 1.0;
                        let mut sum = 0.0;
                        for k in 0..=terms {
                            if k > 0 {
                                coeff *= alpha / k as f64;
                                pow *= base;
                            }
                            sum += coeff * pow;
                        }
                        sum
                    });
                    f
                })
                .collect();
            fuse(spec, chans)
        }
        GnnLfHf => {
            let chans: Vec<ResponseFn> = (0..2)
                .map(|q| {
                    let alpha = spec.alpha[q];
                    let beta = spec.beta[q];
                    let sign = if q == 0 { -1.0 } else { 1.0 };
                    let k_max = spec.k;
                    let f: ResponseFn = Arc::new(move |l| {
                        let mut coeff = alpha;
                        let mut pow = 1.0;
                        let mut sum = 0.0;
                        for k in 0..=k_max {
                            if k > 0 {
                                coeff *= 1.0 - alpha;
                                pow *= 1.0 - l;
                            }
                            sum += coeff * pow;
                        }
                        (1.0 + sign * beta * l) * sum
                    });
                    f
                })
                .collect();
            fuse(spec, chans)
        }
        Figure => {
            let q_count = spec.channel_weights().len();
            let chans: Vec<ResponseFn> = (0..q_count)
                .map(|q| {
                    let theta = spec.theta[q].clone();
                    match FIGURE_CHANNELS[q] {
                        FilterKind::Identity => {
                            let total: f64 = theta.iter().sum();
                            let f: ResponseFn = Arc::new(move |_| total);
                            f
                        }
                        FilterKind::VarMonomial => power_series(theta, 1.0),
                        FilterKind::Chebyshev => cheb_series(theta),
                        FilterKind::Bernstein => {
                            let big_k = spec.k;
                            Arc::new(move |l: f64| -> f64 {
                                theta
                                    .iter()
                                    .enumerate()
                                    .map(|(k, &t)| {
                                        t * bernstein_weight(big_k, k)
                                            * (2.0 - l).powi((big_k - k) as i32)
                                            * l.powi(k as i32)
                                    })
                                    .sum()
                            })
                        }
                        _ => unreachable!(),
                    }
                })
                .collect();
            fuse(spec, chans)
        }
    };
    Ok(form)
}

/// `sum_k theta_k (shift - lambda)^k`.
fn power_series(theta: Vec<f64>, shift: f64) -> ResponseFn {
    Arc::new(move |l| {
        let base = shift - l;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for &t in &theta {
            sum += t * pow;
            pow *= base;
        }
        sum
    })
}

/// `sum_k theta_k T_k(lambda)`, first kind, argument unscaled.
fn cheb_series(theta: Vec<f64>) -> ResponseFn {
    Arc::new(move |l| {
        theta
            .iter()
            .enumerate()
            .map(|(k, &t)| t * cheb_first(k, l))
            .sum()
    })
}

fn fuse(spec: &FilterSpec, chans: Vec<ResponseFn>) -> SpectralForm {
    match spec.fusion {
        // Concat blocks carry their channel weight: block q is gamma_q g_q(x).
        Fusion::Concat => {
            let gamma = spec.channel_weights().to_vec();
            SpectralForm::ConcatBlocks(
                chans
                    .into_iter()
                    .zip(gamma)
                    .map(|(f, g)| {
                        let weighted: ResponseFn = Arc::new(move |l| g * f(l));
                        weighted
                    })
                    .collect(),
            )
        }
        Fusion::Sum => {
            let gamma = spec.channel_weights().to_vec();
            SpectralForm::Scalar(Arc::new(move |l| {
                chans
                    .iter()
                    .zip(gamma.iter())
                    .map(|(f, g)| g * f(l))
                    .sum()
            }))
        }
    }
}

fn layer_values(spec: &FilterSpec, feature: usize) -> Vec<f64> {
    (0..spec.k)
        .map(|j| {
            let row = spec.layer_gamma(j);
            if row.len() == 1 {
                row[0]
            } else {
                row[feature]
            }
        })
        .collect()
}
