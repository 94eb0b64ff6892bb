//! Closed-form coefficient generation for fixed filters and the collapsed
//! interpolation weights for the Chebyshev-node filter.

use crate::error::{Result, SgfError};
use crate::filter::spec::FilterKind;

/// Closed-form theta for a fixed filter over its natural basis.
///
/// Bases: self-looped propagation powers for linear/impulse/monomial/ppr/hk,
/// `(2I - L)^k` powers for the exponential-of-adjacency filter. The identity
/// filter is the degree-0 case and the first-order filter always has degree 1
/// regardless of K.
pub fn fixed_coefficients(kind: FilterKind, k: usize, alpha: Option<f64>) -> Result<Vec<f64>> {
    let need_alpha = || {
        alpha.ok_or_else(|| {
            SgfError::Validation(format!("{}: alpha required", kind.name()))
        })
    };
    match kind {
        FilterKind::Identity => Ok(vec![1.0]),
        FilterKind::Linear => Ok(vec![1.0, 1.0]),
        FilterKind::Impulse => {
            let mut theta = vec![0.0; k + 1];
            theta[k] = 1.0;
            Ok(theta)
        }
        FilterKind::Monomial => Ok(vec![1.0 / (k + 1) as f64; k + 1]),
        FilterKind::Ppr => {
            let a = need_alpha()?;
            if a == 0.0 {
                return Err(SgfError::Domain(
                    "ppr alpha=0 yields all-zero coefficients".into(),
                ));
            }
            if !(0.0..=1.0).contains(&a) {
                return Err(SgfError::Domain(format!("ppr alpha={a} outside [0, 1]")));
            }
            let mut theta = Vec::with_capacity(k + 1);
            let mut t = a;
            for _ in 0..=k {
                theta.push(t);
                t *= 1.0 - a;
            }
            Ok(theta)
        }
        FilterKind::Hk => {
            let a = need_alpha()?;
            if a <= 0.0 {
                return Err(SgfError::Domain(format!("hk alpha={a} must be positive")));
            }
            // Incremental factorial so large K never forms k! explicitly.
            let mut theta = Vec::with_capacity(k + 1);
            let mut t = (-a).exp();
            for i in 0..=k {
                if i > 0 {
                    t *= a / i as f64;
                }
                theta.push(t);
            }
            Ok(theta)
        }
        FilterKind::Gaussian => {
            let a = need_alpha()?;
            if a <= 0.0 {
                return Err(SgfError::Domain(format!(
                    "gaussian alpha={a} must be positive"
                )));
            }
            let mut theta = Vec::with_capacity(k + 1);
            let mut t = 1.0;
            for i in 0..=k {
                if i > 0 {
                    t *= a / i as f64;
                }
                theta.push(t);
            }
            Ok(theta)
        }
        other => Err(SgfError::Validation(format!(
            "{} has no closed-form coefficients",
            other.name()
        ))),
    }
}

/// Binomial coefficient as f64; exact products up to K = 40, log-space above.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 40 {
        let mut c = 1.0;
        for j in 0..k {
            c = c * (n - j) as f64 / (j + 1) as f64;
        }
        c
    } else {
        let mut log_c = 0.0;
        for j in 0..k {
            log_c += ((n - j) as f64).ln() - ((j + 1) as f64).ln();
        }
        log_c.exp()
    }
}

/// Scaled Bernstein weights `binom(K, k) / 2^K`, computed jointly in log
/// space for large K so neither factor overflows.
pub fn bernstein_weight(big_k: usize, k: usize) -> f64 {
    if big_k <= 40 {
        binomial(big_k, k) / 2f64.powi(big_k as i32)
    } else {
        let k = k.min(big_k - k);
        let mut log_w = -(big_k as f64) * std::f64::consts::LN_2;
        for j in 0..k {
            log_w += ((big_k - j) as f64).ln() - ((j + 1) as f64).ln();
        }
        log_w.exp()
    }
}

/// First-kind Chebyshev value T_k(x) by the three-term recurrence.
pub fn cheb_first(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev2 = 1.0;
            let mut prev = x;
            for _ in 2..=k {
                let next = 2.0 * x * prev - prev2;
                prev2 = prev;
                prev = next;
            }
            prev
        }
    }
}

/// Chebyshev nodes `x_kappa = cos((kappa + 1/2) pi / (K+1))`, the roots of
/// T_{K+1}.
pub fn cheb_nodes(k: usize) -> Vec<f64> {
    (0..=k)
        .map(|kappa| ((kappa as f64 + 0.5) * std::f64::consts::PI / (k + 1) as f64).cos())
        .collect()
}

/// Collapse interpolation coefficients into plain Chebyshev weights:
/// `w_k = 2/(K+1) * sum_kappa theta_kappa T_k(x_kappa)`. One O(K^2) scalar
/// pass replaces the double sum over basis images.
pub fn chebinterp_weights(theta: &[f64]) -> Vec<f64> {
    let k = theta.len() - 1;
    let nodes = cheb_nodes(k);
    let scale = 2.0 / (k + 1) as f64;
    (0..=k)
        .map(|ord| {
            scale
                * nodes
                    .iter()
                    .zip(theta.iter())
                    .map(|(&x, &t)| t * cheb_first(ord, x))
                    .sum::<f64>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_uniform() {
        let t = fixed_coefficients(FilterKind::Monomial, 3, None).unwrap();
        assert_eq!(t, vec![0.25; 4]);
    }

    #[test]
    fn hk_alpha_one() {
        let t = fixed_coefficients(FilterKind::Hk, 2, Some(1.0)).unwrap();
        let e = (-1.0f64).exp();
        assert!((t[0] - e).abs() < 1e-15);
        assert!((t[1] - e).abs() < 1e-15);
        assert!((t[2] - e / 2.0).abs() < 1e-15);
    }

    #[test]
    fn ppr_geometric() {
        let t = fixed_coefficients(FilterKind::Ppr, 2, Some(0.5)).unwrap();
        assert_eq!(t, vec![0.5, 0.25, 0.125]);
    }

    #[test]
    fn ppr_alpha_zero_rejected() {
        assert!(fixed_coefficients(FilterKind::Ppr, 2, Some(0.0)).is_err());
    }

    #[test]
    fn ppr_alpha_one_is_identity() {
        let t = fixed_coefficients(FilterKind::Ppr, 3, Some(1.0)).unwrap();
        assert_eq!(t, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn binomial_exact_small_and_log_large() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(10, 0), 1.0);
        // C(50, 25) against the known value.
        let exact = 126_410_606_437_752.0;
        assert!((binomial(50, 25) - exact).abs() / exact < 1e-12);
        assert!((bernstein_weight(50, 25) - exact / 2f64.powi(50)).abs() < 1e-15);
    }

    #[test]
    fn chebinterp_k0_doubles() {
        let w = chebinterp_weights(&[0.7]);
        assert!((w[0] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn chebinterp_zero_theta() {
        let w = chebinterp_weights(&[0.0; 5]);
        assert!(w.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cheb_first_at_one() {
        for k in 0..12 {
            assert!((cheb_first(k, 1.0) - 1.0).abs() < 1e-12);
        }
        assert!((cheb_first(2, 1.0) - 1.0).abs() < 1e-15);
    }
}
