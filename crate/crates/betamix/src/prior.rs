//! The two prior specifications over Beta mixtures, their densities and
//! exact samplers, and the posterior contraction rate formulas.
//!
//! Adaptive prior: a component count k with p(k) ∝ exp(−a_k · k · L(k)),
//! symmetric Dirichlet weights, i.i.d. means from π_e = Beta(T+1, T+1) and
//! a scale with √α Gamma distributed. Dirichlet-process prior: stick
//! breaking with base measure ∝ ξ^{T1}(1−ξ)^{T1} and a scale floored at
//! n^t through √α = n^{t/2} + Gamma.

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma};

use crate::error::{Error, Result};
use crate::mixture::DiscreteMixture;
use crate::numkit::log_gamma;

/// Model-size penalty form L(k) in p(k) ∝ e^{−a_k k L(k)}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LMode {
    /// L(k) = 1.
    ConstantOne,
    /// L(k) = log k.
    LogK,
}

impl LMode {
    pub fn eval(self, k: usize) -> f64 {
        match self {
            LMode::ConstantOne => 1.0,
            LMode::LogK => (k as f64).ln(),
        }
    }
}

/// Hyperparameters of the adaptive finite-mixture prior.
#[derive(Debug, Clone, Copy)]
pub struct AdaptivePriorConfig {
    /// Penalty a_k of the component-count prior.
    pub a_k: f64,
    /// Penalty form L(k).
    pub l_mode: LMode,
    /// Exponent T ≥ 1 of the mean prior π_e = Beta(T+1, T+1).
    pub t_exponent: f64,
    /// Symmetric Dirichlet concentration of the weight prior.
    pub dirichlet_conc: f64,
    /// (shape ≥ 1, rate) of the Gamma law of √α.
    pub sqrt_alpha_gamma: (f64, f64),
}

impl Default for AdaptivePriorConfig {
    fn default() -> Self {
        AdaptivePriorConfig {
            a_k: 1.0,
            l_mode: LMode::LogK,
            t_exponent: 1.0,
            dirichlet_conc: 1.0,
            sqrt_alpha_gamma: (2.0, 0.2),
        }
    }
}

impl AdaptivePriorConfig {
    /// Admissibility: T ≥ 1, Gamma shape ≥ 1, positive penalties.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_exponent >= 1.0) {
            return Err(Error::domain("AdaptivePriorConfig", format!("T = {} must be >= 1", self.t_exponent)));
        }
        if !(self.sqrt_alpha_gamma.0 >= 1.0) || !(self.sqrt_alpha_gamma.1 > 0.0) {
            return Err(Error::domain(
                "AdaptivePriorConfig",
                format!("sqrt-alpha Gamma ({}, {}) needs shape >= 1 and positive rate", self.sqrt_alpha_gamma.0, self.sqrt_alpha_gamma.1),
            ));
        }
        if !(self.a_k > 0.0) || !(self.dirichlet_conc > 0.0) {
            return Err(Error::domain("AdaptivePriorConfig", "a_k and dirichlet_conc must be positive"));
        }
        Ok(())
    }

    /// Unnormalized log p(k) = −a_k · k · L(k).
    pub fn log_k_weight(&self, k: usize) -> f64 {
        -self.a_k * k as f64 * self.l_mode.eval(k)
    }

    /// Normalized pmf over k = 1..=kmax, truncated where the tail mass is
    /// below f64 resolution.
    pub fn k_pmf(&self, kmax: usize) -> Vec<f64> {
        let mut w: Vec<f64> = (1..=kmax).map(|k| self.log_k_weight(k).exp()).collect();
        let total: f64 = w.iter().sum();
        for v in &mut w {
            *v /= total;
        }
        w
    }
}

/// Hyperparameters of the Dirichlet-process prior.
#[derive(Debug, Clone, Copy)]
pub struct DpPriorConfig {
    /// Total mass of the base measure ν.
    pub mass: f64,
    /// Exponent T1 of the base-measure density ∝ ξ^{T1}(1−ξ)^{T1}.
    pub t1_exponent: f64,
    /// Support-floor exponent t ∈ (0,1): α ≥ n^t.
    pub t_floor: f64,
    /// Sample size n entering the floor.
    pub n: usize,
    /// (shape, rate) of the Gamma summand of √α.
    pub sqrt_alpha_gamma: (f64, f64),
}

impl Default for DpPriorConfig {
    fn default() -> Self {
        DpPriorConfig {
            mass: 1.0,
            t1_exponent: 1.0,
            t_floor: 0.4,
            n: 1000,
            sqrt_alpha_gamma: (2.0, 0.5),
        }
    }
}

impl DpPriorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_floor > 0.0 && self.t_floor < 1.0) {
            return Err(Error::domain("DpPriorConfig", format!("t = {} must lie in (0,1)", self.t_floor)));
        }
        if !(self.mass > 0.0) || !(self.t1_exponent >= 0.0) {
            return Err(Error::domain("DpPriorConfig", "mass must be positive and T1 nonnegative"));
        }
        if !(self.sqrt_alpha_gamma.0 > 0.0) || !(self.sqrt_alpha_gamma.1 > 0.0) {
            return Err(Error::domain("DpPriorConfig", "Gamma parameters must be positive"));
        }
        if self.n == 0 {
            return Err(Error::domain("DpPriorConfig", "n must be positive"));
        }
        Ok(())
    }

    /// The scale floor n^t.
    pub fn alpha_floor(&self) -> f64 {
        (self.n as f64).powf(self.t_floor)
    }
}

/// Log density of Beta(shape, shape) at x.
pub fn log_symmetric_beta_pdf(shape: f64, x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain("log_symmetric_beta_pdf", format!("x = {x} outside (0,1)")));
    }
    let ln_norm = log_gamma(2.0 * shape)? - 2.0 * log_gamma(shape)?;
    Ok(ln_norm + (shape - 1.0) * (x * (1.0 - x)).ln())
}

/// Log density of the symmetric Dirichlet(conc) over the k-simplex.
pub fn log_symmetric_dirichlet_pdf(conc: f64, weights: &[f64]) -> Result<f64> {
    let k = weights.len();
    if k == 0 {
        return Err(Error::contract("log_symmetric_dirichlet_pdf", "empty weight vector"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::domain("log_symmetric_dirichlet_pdf", "weights must be positive and sum to one"));
    }
    let ln_norm = log_gamma(conc * k as f64)? - k as f64 * log_gamma(conc)?;
    Ok(ln_norm + weights.iter().map(|&w| (conc - 1.0) * w.ln()).sum::<f64>())
}

/// Log density of α when √α ~ Gamma(shape, rate):
/// gamma_pdf(√α) · 1/(2√α) by change of variables.
pub fn log_alpha_pdf(shape: f64, rate: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain("log_alpha_pdf", "alpha must be positive"));
    }
    let s = alpha.sqrt();
    Ok(log_gamma_pdf(shape, rate, s)? - (2.0 * s).ln())
}

/// Log density of Gamma(shape, rate) at x > 0.
pub fn log_gamma_pdf(shape: f64, rate: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain("log_gamma_pdf", "x must be positive"));
    }
    Ok(shape * rate.ln() - log_gamma(shape)? + (shape - 1.0) * x.ln() - rate * x)
}

/// Joint log prior of the adaptive prior at (k, weights, means, α).
///
/// log p(k) + log Dirichlet(weights) + Σ log π_e(ε_j) + log π_α(α), with
/// p(k) normalized over k ≥ 1.
pub fn log_prior_adaptive(
    cfg: &AdaptivePriorConfig,
    k: usize,
    weights: &[f64],
    eps_list: &[f64],
    alpha: f64,
) -> Result<f64> {
    cfg.validate()?;
    if k == 0 || weights.len() != k || eps_list.len() != k {
        return Err(Error::contract(
            "log_prior_adaptive",
            format!("dimension mismatch: k = {k}, weights = {}, eps = {}", weights.len(), eps_list.len()),
        ));
    }
    let log_norm_k = {
        // normalizer of e^{-a_k k L(k)}; terms decay at least geometrically
        let mut total = 0.0f64;
        let mut k_i = 1usize;
        loop {
            let t = cfg.log_k_weight(k_i).exp();
            total += t;
            if t < 1e-18 * total || k_i > 10_000 {
                break;
            }
            k_i += 1;
        }
        total.ln()
    };
    let mut lp = cfg.log_k_weight(k) - log_norm_k;
    lp += log_symmetric_dirichlet_pdf(cfg.dirichlet_conc, weights)?;
    for &e in eps_list {
        lp += log_symmetric_beta_pdf(cfg.t_exponent + 1.0, e)?;
    }
    lp += log_alpha_pdf(cfg.sqrt_alpha_gamma.0, cfg.sqrt_alpha_gamma.1, alpha)?;
    Ok(lp)
}

/// Exact draw from the adaptive prior.
pub fn sample_adaptive<R: Rng>(cfg: &AdaptivePriorConfig, rng: &mut R) -> Result<(usize, DiscreteMixture<f64>)> {
    cfg.validate()?;
    // inverse-cdf draw of k
    let u: f64 = rng.gen();
    let pmf = cfg.k_pmf(10_000);
    let mut acc = 0.0;
    let mut k = pmf.len();
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u <= acc {
            k = i + 1;
            break;
        }
    }
    let weights = sample_symmetric_dirichlet(cfg.dirichlet_conc, k, rng);
    let eps_dist = BetaDist::new(cfg.t_exponent + 1.0, cfg.t_exponent + 1.0)
        .map_err(|e| Error::domain("sample_adaptive", format!("beta dist: {e}")))?;
    let alpha = {
        let (shape, rate) = cfg.sqrt_alpha_gamma;
        let g = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::domain("sample_adaptive", format!("gamma dist: {e}")))?;
        let s: f64 = g.sample(rng);
        s * s
    };
    let atoms: Vec<(f64, f64)> = weights
        .into_iter()
        .map(|w| (w, clamp_unit(eps_dist.sample(rng))))
        .collect();
    Ok((k, DiscreteMixture::new_normalizing(alpha, atoms)?))
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(1e-12, 1.0 - 1e-12)
}

/// Draw from a symmetric Dirichlet by Gamma normalization.
pub fn sample_symmetric_dirichlet<R: Rng>(conc: f64, k: usize, rng: &mut R) -> Vec<f64> {
    let g = Gamma::new(conc, 1.0).expect("positive concentration");
    let mut draws: Vec<f64> = (0..k).map(|_| g.sample(rng).max(1e-300)).collect();
    let total: f64 = draws.iter().sum();
    for d in &mut draws {
        *d /= total;
    }
    draws
}

/// Residual tolerance of the truncated stick-breaking draw.
pub const STICK_RESIDUAL_TOL: f64 = 1e-10;

/// Truncated stick-breaking draw from the Dirichlet-process prior. The
/// undistributed residual stick mass must come out below
/// [`STICK_RESIDUAL_TOL`] (raise the truncation otherwise); the weights are
/// renormalized over the kept sticks.
pub fn sample_dp<R: Rng>(
    cfg: &DpPriorConfig,
    rng: &mut R,
    truncation: usize,
) -> Result<DiscreteMixture<f64>> {
    cfg.validate()?;
    if truncation == 0 {
        return Err(Error::contract("sample_dp", "truncation must be positive"));
    }
    let stick = BetaDist::new(1.0, cfg.mass)
        .map_err(|e| Error::domain("sample_dp", format!("stick dist: {e}")))?;
    let base = BetaDist::new(cfg.t1_exponent + 1.0, cfg.t1_exponent + 1.0)
        .map_err(|e| Error::domain("sample_dp", format!("base dist: {e}")))?;
    let mut weights = Vec::with_capacity(truncation);
    let mut remaining = 1.0f64;
    for _ in 0..truncation {
        let v: f64 = stick.sample(rng);
        weights.push(remaining * v);
        remaining *= 1.0 - v;
    }
    if remaining >= STICK_RESIDUAL_TOL {
        return Err(Error::Budget {
            op: "sample_dp",
            detail: format!("residual stick mass {remaining:.3e} at truncation {truncation}; raise the truncation"),
        });
    }
    let alpha = sample_dp_alpha(cfg, rng);
    let atoms: Vec<(f64, f64)> = weights
        .into_iter()
        .map(|w| (w.max(1e-300), clamp_unit(base.sample(rng))))
        .collect();
    DiscreteMixture::new_normalizing(alpha, atoms)
}

/// Scale draw with the floor: √α = n^{t/2} + Gamma(shape, rate), so the
/// support of α is [n^t, ∞).
pub fn sample_dp_alpha<R: Rng>(cfg: &DpPriorConfig, rng: &mut R) -> f64 {
    let (shape, rate) = cfg.sqrt_alpha_gamma;
    let g = Gamma::new(shape, 1.0 / rate).expect("validated");
    let s: f64 = (cfg.n as f64).powf(cfg.t_floor / 2.0) + g.sample(rng);
    s * s
}

/// Which posterior-contraction rate formula applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateKind {
    /// Adaptive prior, L(k) = log k.
    AdaptiveLogK,
    /// Adaptive prior, L(k) = 1 (extra half log power).
    AdaptiveConstant,
    /// Dirichlet prior with floor exponent t.
    Dirichlet { t_floor: f64 },
    /// Deterministic α_n sequence.
    DeterministicAlpha { alpha_n: f64 },
}

/// Contraction rate τ_n/τ₀ for Hölder regularity β at sample size n.
///
/// Adaptive log-k: n^{−β/(2β+1)} (log n)^{5β/(4β+2)}; the constant-L
/// variant carries an extra (log n)^{1/2}. Dirichlet: the stated pair of
/// regimes split at β = 1/t − 1/2. Deterministic α_n:
/// (log α_n) · max(α_n^{−β/2}, (√(α_n log α_n)/n)^{1/2}), the two branches
/// balancing at the optimal α_n = n^{2/(2β+1)} (log n)^{−3/(2β+1)}.
pub fn rate_tau(beta: f64, n: usize, kind: RateKind) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::domain("rate_tau", format!("beta = {beta} must be positive")));
    }
    if n < 2 {
        return Err(Error::domain("rate_tau", "n must be at least 2"));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let poly = nf.powf(-beta / (2.0 * beta + 1.0));
    match kind {
        RateKind::AdaptiveLogK => Ok(poly * ln_n.powf(5.0 * beta / (4.0 * beta + 2.0))),
        RateKind::AdaptiveConstant => {
            Ok(poly * ln_n.powf(5.0 * beta / (4.0 * beta + 2.0) + 0.5))
        }
        RateKind::Dirichlet { t_floor } => {
            if !(t_floor > 0.0 && t_floor < 1.0) {
                return Err(Error::domain("rate_tau", format!("t = {t_floor} must lie in (0,1)")));
            }
            if beta <= 1.0 / t_floor - 0.5 {
                Ok(poly * ln_n.powf(5.0 * beta / (2.0 * beta + 1.0)))
            } else {
                Ok(nf.powf(-0.5 + t_floor / 4.0)
                    * ln_n.powf((6.0 * beta + 0.5) / (2.0 * beta + 1.0)))
            }
        }
        RateKind::DeterministicAlpha { alpha_n } => {
            if !(alpha_n > 1.0) {
                return Err(Error::domain("rate_tau", "alpha_n must exceed 1"));
            }
            let la = alpha_n.ln();
            let approx_branch = alpha_n.powf(-beta / 2.0);
            let estim_branch = ((alpha_n * la).sqrt() / nf).sqrt();
            Ok(la * approx_branch.max(estim_branch))
        }
    }
}

/// The optimal deterministic scale α_n = n^{2/(2β+1)} (log n)^{−3/(2β+1)}.
pub fn optimal_alpha_n(beta: f64, n: usize) -> f64 {
    let nf = n as f64;
    nf.powf(2.0 / (2.0 * beta + 1.0)) * nf.ln().powf(-3.0 / (2.0 * beta + 1.0))
}

/// Theory slope −β/(2β+1) of the L1 contraction rate in log n.
pub fn theory_slope(beta: f64) -> f64 {
    -beta / (2.0 * beta + 1.0)
}
