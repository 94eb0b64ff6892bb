//! Filter descriptions: taxonomy, coefficients, hyperparameters, and the CLI
//! text grammar `name[:K=10][:alpha=0.5][:beta=1.0][:theta=...][:gamma=...][:fusion=sum]`.
//!
//! List-valued keys take comma-separated values; `;` separates channel or
//! layer groups (`theta=1,0;0,1` is two channel rows). `theta=uniform` expands
//! to `1/(K+1)` per order, which is also the fallback for variable filters
//! when no coefficients are given.

use crate::error::{Result, SgfError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Taxonomy {
    Fixed,
    Variable,
    Bank,
}

impl std::fmt::Display for Taxonomy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Taxonomy::Fixed => "fixed",
            Taxonomy::Variable => "variable",
            Taxonomy::Bank => "bank",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Identity,
    Linear,
    Impulse,
    Monomial,
    Ppr,
    Hk,
    Gaussian,
    VarLinear,
    VarMonomial,
    Horner,
    Chebyshev,
    ChebInterp,
    Clenshaw,
    Bernstein,
    Legendre,
    Jacobi,
    Favard,
    OptBasis,
    AdaGnn,
    Fbgnn,
    Acmgnn,
    Fagnn,
    G2cn,
    GnnLfHf,
    Figure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fusion {
    #[default]
    Sum,
    Concat,
}

impl FilterKind {
    pub fn taxonomy(self) -> Taxonomy {
        use FilterKind::*;
        match self {
            Identity | Linear | Impulse | Monomial | Ppr | Hk | Gaussian => Taxonomy::Fixed,
            VarLinear | VarMonomial | Horner | Chebyshev | ChebInterp | Clenshaw | Bernstein
            | Legendre | Jacobi | Favard | OptBasis => Taxonomy::Variable,
            AdaGnn | Fbgnn | Acmgnn | Fagnn | G2cn | GnnLfHf | Figure => Taxonomy::Bank,
        }
    }

    pub fn name(self) -> &'static str {
        use FilterKind::*;
        match self {
            Identity => "identity",
            Linear => "linear",
            Impulse => "impulse",
            Monomial => "monomial",
            Ppr => "ppr",
            Hk => "hk",
            Gaussian => "gaussian",
            VarLinear => "varlinear",
            VarMonomial => "varmonomial",
            Horner => "horner",
            Chebyshev => "chebyshev",
            ChebInterp => "chebinterp",
            Clenshaw => "clenshaw",
            Bernstein => "bernstein",
            Legendre => "legendre",
            Jacobi => "jacobi",
            Favard => "favard",
            OptBasis => "optbasis",
            AdaGnn => "adagnn",
            Fbgnn => "fbgnn",
            Acmgnn => "acmgnn",
            Fagnn => "fagnn",
            G2cn => "g2cn",
            GnnLfHf => "gnnlfhf",
            Figure => "figure",
        }
    }

    pub fn from_name(name: &str) -> Result<FilterKind> {
        use FilterKind::*;
        Ok(match name.to_ascii_lowercase().as_str() {
            "identity" | "id" => Identity,
            "linear" => Linear,
            "impulse" => Impulse,
            "monomial" => Monomial,
            "ppr" => Ppr,
            "hk" => Hk,
            "gaussian" => Gaussian,
            "varlinear" => VarLinear,
            "varmonomial" => VarMonomial,
            "horner" => Horner,
            "chebyshev" | "cheb" => Chebyshev,
            "chebinterp" => ChebInterp,
            "clenshaw" => Clenshaw,
            "bernstein" => Bernstein,
            "legendre" => Legendre,
            "jacobi" => Jacobi,
            "favard" => Favard,
            "optbasis" => OptBasis,
            "adagnn" => AdaGnn,
            // The I/II variants differ only in where the (here, identity)
            // transformation sits, so they share one filter.
            "fbgnn" | "fbgnn1" | "fbgnn2" => Fbgnn,
            "acmgnn" | "acmgnn1" | "acmgnn2" => Acmgnn,
            "fagnn" => Fagnn,
            "g2cn" => G2cn,
            "gnnlfhf" | "gnn-lf/hf" | "gnnlf" => GnnLfHf,
            "figure" => Figure,
            other => {
                return Err(SgfError::Validation(format!("unknown filter '{other}'")));
            }
        })
    }

    /// All 27 filter names, alias variants included.
    pub fn all_names() -> Vec<&'static str> {
        vec![
            "identity",
            "linear",
            "impulse",
            "monomial",
            "ppr",
            "hk",
            "gaussian",
            "varlinear",
            "varmonomial",
            "horner",
            "chebyshev",
            "chebinterp",
            "clenshaw",
            "bernstein",
            "legendre",
            "jacobi",
            "favard",
            "optbasis",
            "adagnn",
            "fbgnn1",
            "fbgnn2",
            "acmgnn1",
            "acmgnn2",
            "fagnn",
            "g2cn",
            "gnnlfhf",
            "figure",
        ]
    }

    /// Channel count Q for bank filters; 1 otherwise. AdaGnn is feature-wise
    /// (one channel per input column), reported as 1 here.
    pub fn channels(self) -> usize {
        use FilterKind::*;
        match self {
            Fbgnn | Fagnn | G2cn | GnnLfHf => 2,
            Acmgnn => 3,
            Figure => 4,
            _ => 1,
        }
    }

    /// True for banks realised as K compositions of a one-hop layer.
    pub fn is_composed_bank(self) -> bool {
        matches!(
            self,
            FilterKind::AdaGnn | FilterKind::Fbgnn | FilterKind::Acmgnn | FilterKind::Fagnn
        )
    }

    fn needs_theta(self) -> bool {
        self.taxonomy() == Taxonomy::Variable || self == FilterKind::Figure
    }
}

/// FiGURe channel bases in order; a bank of Q channels uses the first Q.
pub const FIGURE_CHANNELS: [FilterKind; 4] = [
    FilterKind::Identity,
    FilterKind::VarMonomial,
    FilterKind::Chebyshev,
    FilterKind::Bernstein,
];

pub const DEFAULT_HOPS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Propagation hops / polynomial order.
    pub k: usize,
    /// Coefficient rows, one per channel (a single row for non-bank filters).
    pub theta: Vec<Vec<f64>>,
    /// Decay/shape hyperparameters, per channel where the filter has several.
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// For composed banks: one row per layer (a single row broadcasts).
    /// For decoupled banks: a single row of Q channel weights.
    pub gamma: Vec<Vec<f64>>,
    /// Per-hop recurrence parameters for the learned-basis filter.
    pub favard_alpha: Vec<f64>,
    pub favard_beta: Vec<f64>,
    pub fusion: Fusion,
    /// True when theta was filled with the uniform fallback rather than given
    /// explicitly; such specs can be re-targeted to a different K.
    pub theta_is_default: bool,
}

impl FilterSpec {
    pub fn new(kind: FilterKind) -> FilterSpec {
        FilterSpec {
            kind,
            k: DEFAULT_HOPS,
            theta: Vec::new(),
            alpha: Vec::new(),
            beta: Vec::new(),
            gamma: Vec::new(),
            favard_alpha: Vec::new(),
            favard_beta: Vec::new(),
            fusion: Fusion::Sum,
            theta_is_default: false,
        }
    }

    pub fn fixed(kind: FilterKind, k: usize, alpha: Option<f64>) -> FilterSpec {
        let mut s = FilterSpec::new(kind);
        s.k = k;
        if let Some(a) = alpha {
            s.alpha = vec![a];
        }
        s
    }

    pub fn variable(kind: FilterKind, theta: Vec<f64>) -> FilterSpec {
        let mut s = FilterSpec::new(kind);
        s.k = match kind {
            FilterKind::VarLinear => theta.len(),
            _ => theta.len().saturating_sub(1),
        };
        s.theta = vec![theta];
        s
    }

    pub fn taxonomy(&self) -> Taxonomy {
        self.kind.taxonomy()
    }

    /// Single coefficient row for non-bank variable filters.
    pub fn theta_row(&self) -> &[f64] {
        &self.theta[0]
    }

    /// Channel weight row for decoupled banks.
    pub fn channel_weights(&self) -> &[f64] {
        &self.gamma[0]
    }

    /// Layer parameter row for composed banks (broadcast when only one given).
    pub fn layer_gamma(&self, layer: usize) -> &[f64] {
        if self.gamma.len() == 1 {
            &self.gamma[0]
        } else {
            &self.gamma[layer]
        }
    }

    pub fn figure_channels(&self) -> &'static [FilterKind] {
        &FIGURE_CHANNELS[..self.gamma[0].len()]
    }

    /// Parse the text grammar and validate.
    pub fn parse(text: &str) -> Result<FilterSpec> {
        let mut parts = text.split(':');
        let name = parts.next().unwrap_or("").trim();
        let mut spec = FilterSpec::new(FilterKind::from_name(name)?);
        let mut theta_uniform = false;
        for part in parts {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part.split_once('=').ok_or_else(|| {
                SgfError::Validation(format!("filter option '{part}' is not key=value"))
            })?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            match key.as_str() {
                "k" => {
                    spec.k = value.parse().map_err(|_| {
                        SgfError::Validation(format!("invalid hop count '{value}'"))
                    })?;
                }
                "alpha" | "a" => spec.alpha = parse_list(value, "alpha")?,
                "beta" | "b" => spec.beta = parse_list(value, "beta")?,
                "theta" => {
                    if value.eq_ignore_ascii_case("uniform") {
                        theta_uniform = true;
                    } else {
                        spec.theta = parse_groups(value, "theta")?;
                    }
                }
                "gamma" => spec.gamma = parse_groups(value, "gamma")?,
                "fusion" => {
                    spec.fusion = match value.to_ascii_lowercase().as_str() {
                        "sum" => Fusion::Sum,
                        "concat" => Fusion::Concat,
                        other => {
                            return Err(SgfError::Validation(format!(
                                "unknown fusion '{other}' (expected sum or concat)"
                            )));
                        }
                    };
                }
                other => {
                    return Err(SgfError::Validation(format!(
                        "unknown filter option '{other}'"
                    )));
                }
            }
        }
        if theta_uniform {
            spec.theta.clear();
            spec.theta_is_default = true;
        }
        spec.fill_defaults();
        spec.validate()?;
        Ok(spec)
    }

    /// Uniform theta row matching this spec's order.
    fn uniform_theta_row(&self) -> Vec<f64> {
        let len = match self.kind {
            FilterKind::VarLinear => self.k.max(1),
            _ => self.k + 1,
        };
        vec![1.0 / len as f64; len]
    }

    /// Populate absent hyperparameters with documented defaults.
    pub fn fill_defaults(&mut self) {
        use FilterKind::*;
        if self.alpha.is_empty() {
            match self.kind {
                Ppr | Hk | Gaussian | Jacobi => self.alpha = vec![0.5],
                G2cn | GnnLfHf => self.alpha = vec![0.5, 0.5],
                Favard => {}
                _ => {}
            }
        }
        if self.beta.is_empty() {
            match self.kind {
                Jacobi | Fagnn => self.beta = vec![1.0],
                G2cn => self.beta = vec![1.0, 1.0],
                GnnLfHf => self.beta = vec![0.5, 1.0],
                _ => {}
            }
        }
        if self.gamma.is_empty() {
            match self.kind {
                AdaGnn => self.gamma = vec![vec![0.5]],
                Fbgnn | Fagnn | G2cn | GnnLfHf => self.gamma = vec![vec![0.5, 0.5]],
                Acmgnn => self.gamma = vec![vec![1.0 / 3.0; 3]],
                Figure => self.gamma = vec![vec![0.25; 4]],
                _ => {}
            }
        }
        if self.kind == Favard {
            if self.favard_alpha.is_empty() {
                self.favard_alpha = std::mem::take(&mut self.alpha);
            }
            if self.favard_beta.is_empty() {
                self.favard_beta = std::mem::take(&mut self.beta);
            }
            if self.favard_alpha.is_empty() {
                self.favard_alpha = vec![1.0];
            }
            if self.favard_beta.is_empty() {
                self.favard_beta = vec![0.0];
            }
            broadcast(&mut self.favard_alpha, self.k + 1);
            broadcast(&mut self.favard_beta, self.k + 1);
        }
        if self.kind.needs_theta() && self.theta.is_empty() {
            let row = self.uniform_theta_row();
            let rows = if self.kind == Figure {
                self.gamma.first().map_or(4, |g| g.len())
            } else {
                1
            };
            self.theta = vec![row; rows];
            self.theta_is_default = true;
        }
    }

    /// Re-target the spec to a different hop count. Explicitly given
    /// coefficients cannot be rescaled, so only fixed filters and
    /// default-theta specs support this.
    pub fn with_hops(&self, k: usize) -> Result<FilterSpec> {
        let mut s = self.clone();
        s.k = k;
        match self.taxonomy() {
            Taxonomy::Fixed => {}
            _ if self.theta_is_default || !self.kind.needs_theta() => {
                if self.kind.needs_theta() {
                    let rows = s.theta.len();
                    s.theta = vec![s.uniform_theta_row(); rows];
                }
            }
            _ => {
                return Err(SgfError::Validation(format!(
                    "{}: explicit theta cannot be re-targeted to K={k}",
                    self.kind.name()
                )));
            }
        }
        if self.kind == FilterKind::Favard {
            s.favard_alpha = vec![self.favard_alpha[0]; k + 1];
            s.favard_beta = vec![self.favard_beta[0]; k + 1];
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        use FilterKind::*;
        let fail = |msg: String| Err(SgfError::Validation(format!("{}: {msg}", self.kind.name())));

        // Coefficient shape per kind.
        match self.kind {
            Identity | Linear | Impulse | Monomial | Ppr | Hk | Gaussian | AdaGnn | Fbgnn
            | Acmgnn | Fagnn | G2cn | GnnLfHf => {
                if !self.theta.is_empty() {
                    return fail("theta is formula-generated for this filter".into());
                }
            }
            VarLinear => {
                if self.theta.len() != 1 || self.theta[0].len() != self.k {
                    return fail(format!("needs one theta row of length K={}", self.k));
                }
            }
            Figure => {
                let q = self.gamma.first().map_or(0, |g| g.len());
                if self.theta.len() != q {
                    return fail(format!("needs {q} theta rows (one per channel)"));
                }
                for row in &self.theta {
                    if row.len() != self.k + 1 {
                        return fail(format!("each theta row must have K+1={} values", self.k + 1));
                    }
                }
            }
            _ => {
                if self.theta.len() != 1 || self.theta[0].len() != self.k + 1 {
                    return fail(format!("needs one theta row of length K+1={}", self.k + 1));
                }
            }
        }
        if self.theta.iter().flatten().any(|v| !v.is_finite()) {
            return fail("theta contains non-finite values".into());
        }

        // Hyperparameter domains.
        match self.kind {
            Ppr => {
                let a = self.require_scalar(&self.alpha, "alpha")?;
                if a == 0.0 {
                    return fail("alpha=0 gives all-zero coefficients (degenerate)".into());
                }
                if !(0.0..=1.0).contains(&a) {
                    return fail(format!("alpha={a} outside [0, 1]"));
                }
            }
            Hk | Gaussian => {
                let a = self.require_scalar(&self.alpha, "alpha")?;
                if a <= 0.0 {
                    return fail(format!("alpha={a} must be positive"));
                }
            }
            Jacobi => {
                let a = self.require_scalar(&self.alpha, "alpha")?;
                let b = self.require_scalar(&self.beta, "beta")?;
                for k in 1..=self.k.max(1) {
                    let kf = k as f64;
                    if (2.0 * kf + a + b).abs() < 1e-12 || (kf + a + b).abs() < 1e-12 {
                        return fail(format!(
                            "alpha={a}, beta={b} make the order-{k} recurrence singular"
                        ));
                    }
                }
            }
            Favard => {
                if self.favard_alpha.len() != self.k + 1 || self.favard_beta.len() != self.k + 1 {
                    return fail(format!(
                        "needs K+1={} recurrence parameters (alpha=..., beta=...)",
                        self.k + 1
                    ));
                }
                if self.favard_alpha.iter().any(|&a| a <= 0.0) {
                    return fail("every recurrence alpha_k must be positive".into());
                }
            }
            Bernstein => {
                if self.k > 60 {
                    return fail(format!("K={} exceeds the supported maximum 60", self.k));
                }
            }
            G2cn => {
                self.require_len(&self.alpha, 2, "alpha")?;
                self.require_len(&self.beta, 2, "beta")?;
                for &a in &self.alpha {
                    if !(0.0..=1.0).contains(&a) {
                        return fail(format!("channel alpha={a} outside [0, 1]"));
                    }
                }
                for &b in &self.beta {
                    if !(0.0..=1.0).contains(&b) {
                        return fail(format!("channel beta={b} outside [0, 1]"));
                    }
                }
            }
            GnnLfHf => {
                self.require_len(&self.alpha, 2, "alpha")?;
                self.require_len(&self.beta, 2, "beta")?;
                for &a in &self.alpha {
                    if !(0.0 < a && a <= 1.0) {
                        return fail(format!("channel alpha={a} outside (0, 1]"));
                    }
                }
                if !(0.0..=0.5).contains(&self.beta[0]) {
                    return fail(format!("low-pass beta={} outside [0, 1/2]", self.beta[0]));
                }
                if self.beta[1] <= 0.0 {
                    return fail(format!("high-pass beta={} must be positive", self.beta[1]));
                }
            }
            Fagnn => {
                let b = self.require_scalar(&self.beta, "beta")?;
                if !(0.0..=1.0).contains(&b) {
                    return fail(format!("beta={b} outside [0, 1]"));
                }
            }
            _ => {}
        }

        // Channel / layer weights.
        match self.kind {
            AdaGnn | Fbgnn | Acmgnn | Fagnn => {
                if self.gamma.is_empty() {
                    return fail("needs gamma".into());
                }
                if self.gamma.len() != 1 && self.gamma.len() != self.k {
                    return fail(format!(
                        "gamma must have 1 (broadcast) or K={} layer rows",
                        self.k
                    ));
                }
                let q = self.kind.channels();
                if self.kind != AdaGnn {
                    for row in &self.gamma {
                        if row.len() != q {
                            return fail(format!("each gamma row must have {q} values"));
                        }
                    }
                }
            }
            G2cn | GnnLfHf => {
                if self.gamma.len() != 1 || self.gamma[0].len() != 2 {
                    return fail("needs a single gamma row of 2 channel weights".into());
                }
            }
            Figure => {
                if self.gamma.len() != 1 || self.gamma[0].is_empty() || self.gamma[0].len() > 4 {
                    return fail("needs a single gamma row of 1..=4 channel weights".into());
                }
            }
            _ => {
                if !self.gamma.is_empty() {
                    return fail("gamma only applies to filter banks".into());
                }
            }
        }

        if self.fusion == Fusion::Concat
            && !matches!(self.kind, G2cn | GnnLfHf | Figure)
        {
            return fail("concat fusion only applies to decoupled banks".into());
        }
        Ok(())
    }

    fn require_scalar(&self, v: &[f64], what: &str) -> Result<f64> {
        if v.len() != 1 {
            return Err(SgfError::Validation(format!(
                "{}: needs exactly one {what} value",
                self.kind.name()
            )));
        }
        Ok(v[0])
    }

    fn require_len(&self, v: &[f64], len: usize, what: &str) -> Result<()> {
        if v.len() != len {
            return Err(SgfError::Validation(format!(
                "{}: needs {len} {what} values, got {}",
                self.kind.name(),
                v.len()
            )));
        }
        Ok(())
    }
}

fn broadcast(v: &mut Vec<f64>, len: usize) {
    if v.len() == 1 && len > 1 {
        *v = vec![v[0]; len];
    }
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| {
                SgfError::Validation(format!("invalid {what} value '{}'", t.trim()))
            })
        })
        .collect()
}

fn parse_groups(text: &str, what: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';').map(|grp| parse_list(grp, what)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_ppr() {
        let s = FilterSpec::parse("ppr:K=4:alpha=0.85").unwrap();
        assert_eq!(s.kind, FilterKind::Ppr);
        assert_eq!(s.k, 4);
        assert_eq!(s.alpha, vec![0.85]);
        assert_eq!(s.taxonomy(), Taxonomy::Fixed);
    }

    #[test]
    fn parse_theta_rows() {
        let s = FilterSpec::parse("figure:K=1:gamma=0.5,0.5:theta=1,0;0,1").unwrap();
        assert_eq!(s.theta, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(s.figure_channels().len(), 2);
    }

    #[test]
    fn variable_defaults_to_uniform() {
        let s = FilterSpec::parse("chebyshev:K=3").unwrap();
        assert!(s.theta_is_default);
        assert_eq!(s.theta_row(), &[0.25; 4]);
    }

    #[test]
    fn explicit_theta_length_checked() {
        assert!(FilterSpec::parse("chebyshev:K=3:theta=1,2").is_err());
        assert!(FilterSpec::parse("varlinear:K=2:theta=0.1,0.2").is_ok());
        assert!(FilterSpec::parse("varlinear:K=2:theta=0.1,0.2,0.3").is_err());
    }

    #[test]
    fn ppr_alpha_domain() {
        assert!(FilterSpec::parse("ppr:alpha=0").is_err());
        assert!(FilterSpec::parse("ppr:alpha=1").is_ok());
        assert!(FilterSpec::parse("ppr:alpha=1.2").is_err());
    }

    #[test]
    fn favard_params_broadcast() {
        let s = FilterSpec::parse("favard:K=2:alpha=4:theta=1,0,0").unwrap();
        assert_eq!(s.favard_alpha, vec![4.0; 3]);
        assert_eq!(s.favard_beta, vec![0.0; 3]);
        assert!(FilterSpec::parse("favard:K=2:alpha=0:theta=1,0,0").is_err());
    }

    #[test]
    fn acmgnn_aliases_collapse() {
        let a = FilterSpec::parse("acmgnn1:K=2").unwrap();
        let b = FilterSpec::parse("acmgnn2:K=2").unwrap();
        assert_eq!(a.kind, b.kind);
        assert_eq!(a.kind.channels(), 3);
    }

    #[test]
    fn concat_only_for_decoupled_banks() {
        assert!(FilterSpec::parse("g2cn:fusion=concat").is_ok());
        assert!(FilterSpec::parse("ppr:fusion=concat").is_err());
        assert!(FilterSpec::parse("fagnn:fusion=concat").is_err());
    }

    #[test]
    fn all_names_parse_to_valid_specs() {
        for name in FilterKind::all_names() {
            let spec = FilterSpec::parse(&format!("{name}:K=4")).unwrap();
            spec.validate().unwrap();
        }
        assert_eq!(FilterKind::all_names().len(), 27);
    }

    #[test]
    fn with_hops_retargets_fixed_and_default_theta() {
        let s = FilterSpec::parse("ppr:K=4").unwrap().with_hops(8).unwrap();
        assert_eq!(s.k, 8);
        let v = FilterSpec::parse("chebyshev:K=4").unwrap().with_hops(6).unwrap();
        assert_eq!(v.theta_row().len(), 7);
        assert!(FilterSpec::parse("chebyshev:K=4:theta=1,0,0,0,0")
            .unwrap()
            .with_hops(6)
            .is_err());
    }

    #[test]
    fn gnnlfhf_beta_domains() {
        assert!(FilterSpec::parse("gnnlfhf:beta=0.6,1.0").is_err());
        assert!(FilterSpec::parse("gnnlfhf:beta=0.4,0").is_err());
        assert!(FilterSpec::parse("gnnlfhf:beta=0.4,2.0").is_ok());
    }
}
