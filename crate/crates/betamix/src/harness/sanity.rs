//! Prior sanity battery: sampler-versus-density agreement and zero-data
//! posterior recovery of the component-count prior.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::prior::{sample_adaptive, AdaptivePriorConfig};
use crate::sampler::rjmcmc_fit;

/// Results of the prior sanity battery; every statistic sits next to its
/// critical value at the 1% level.
#[derive(Debug, Clone)]
pub struct PriorSanityReport {
    pub draws: usize,
    /// KS of pooled mean draws against the Beta(T+1, T+1) CDF (needs T = 1).
    pub ks_eps: f64,
    pub ks_eps_crit: f64,
    /// KS of √α draws against the Gamma(shape, rate) CDF (needs shape = 2).
    pub ks_sqrt_alpha: f64,
    pub ks_sqrt_alpha_crit: f64,
    /// Chi-square of the zero-data posterior k histogram against p(k).
    pub chi2_k: f64,
    pub chi2_k_crit: f64,
    pub pass: bool,
}

impl PriorSanityReport {
    pub fn to_text(&self) -> String {
        format!(
            "prior sanity (draws = {})\n\
             ks(eps vs Beta(T+1,T+1)):      {:.5} (1% critical {:.5})\n\
             ks(sqrt-alpha vs Gamma):       {:.5} (1% critical {:.5})\n\
             chi2(zero-data k vs p(k)):     {:.3} (1% critical {:.3})\n\
             verdict: {}\n",
            self.draws,
            self.ks_eps,
            self.ks_eps_crit,
            self.ks_sqrt_alpha,
            self.ks_sqrt_alpha_crit,
            self.chi2_k,
            self.chi2_k_crit,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        ks = ks.max(((i + 1) as f64 / n - c).abs()).max((c - i as f64 / n).abs());
    }
    ks
}

/// Asymptotic 1% KS critical value.
pub fn ks_crit_1pct(n: usize) -> f64 {
    1.62762 / (n as f64).sqrt()
}

/// Chi-square 1% critical value for 5 degrees of freedom (the k histogram
/// is binned into cells 1..5 plus a tail).
pub const CHI2_5DF_CRIT_1PCT: f64 = 15.086;

/// Run the battery. Requires the defaults T = 1 and √α-shape = 2, whose
/// CDFs have closed forms:
/// Beta(2,2): 3x² − 2x³; Gamma(2, rate): 1 − e^{−rx}(1 + rx).
pub fn run_prior_sanity(
    cfg: &AdaptivePriorConfig,
    draws: usize,
    zero_data_sweeps: usize,
    seed: u64,
) -> Result<PriorSanityReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // pooled mean draws and sqrt-alpha draws from the exact prior sampler
    let mut eps_draws: Vec<f64> = Vec::with_capacity(draws);
    let mut sqrt_alpha_draws: Vec<f64> = Vec::with_capacity(draws);
    while eps_draws.len() < draws {
        let (_, m) = sample_adaptive(cfg, &mut rng)?;
        for &(_, e) in m.atoms() {
            eps_draws.push(e);
        }
        sqrt_alpha_draws.push(m.alpha().sqrt());
    }
    eps_draws.truncate(draws);

    let ks_eps = ks_statistic(&mut eps_draws, |x| 3.0 * x * x - 2.0 * x * x * x);
    let rate = cfg.sqrt_alpha_gamma.1;
    let ks_sa = ks_statistic(&mut sqrt_alpha_draws, |x| {
        1.0 - (-rate * x).exp() * (1.0 + rate * x)
    });

    // zero-data posterior over k matches the prior pmf; thin the chain so
    // the chi-square sampling distribution applies
    let records = rjmcmc_fit(&[], cfg, zero_data_sweeps, seed ^ 0x5eed)?;
    let thin = 20;
    let ks: Vec<usize> = records.iter().skip(zero_data_sweeps / 5).step_by(thin).map(|r| r.model).collect();
    let pmf = cfg.k_pmf(10_000);
    let n = ks.len() as f64;
    let mut chi2 = 0.0;
    let mut tail_p = 1.0;
    let mut tail_obs = n;
    for cell in 1..=5usize {
        let p = pmf.get(cell - 1).copied().unwrap_or(0.0);
        let obs = ks.iter().filter(|&&k| k == cell).count() as f64;
        if p > 1e-12 {
            chi2 += (obs - p * n) * (obs - p * n) / (p * n);
        }
        tail_p -= p;
        tail_obs -= obs;
    }
    if tail_p > 1e-9 {
        chi2 += (tail_obs - tail_p * n) * (tail_obs - tail_p * n) / (tail_p * n);
    }

    let ks_crit = ks_crit_1pct(draws);
    let ks_sa_crit = ks_crit_1pct(sqrt_alpha_draws.len());
    let pass = ks_eps <= ks_crit && ks_sa <= ks_sa_crit && chi2 <= CHI2_5DF_CRIT_1PCT;
    Ok(PriorSanityReport {
        draws,
        ks_eps,
        ks_eps_crit: ks_crit,
        ks_sqrt_alpha: ks_sa,
        ks_sqrt_alpha_crit: ks_sa_crit,
        chi2_k: chi2,
        chi2_k_crit: CHI2_5DF_CRIT_1PCT,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_statistic_on_exact_uniforms() {
        let mut xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let ks = ks_statistic(&mut xs, |x| x);
        assert!(ks <= 0.5 / 1000.0 + 1e-12);
    }

    #[test]
    fn small_battery_passes() {
        let cfg = AdaptivePriorConfig::default();
        let r = run_prior_sanity(&cfg, 20_000, 20_000, 31).unwrap();
        assert!(r.pass, "{}", r.to_text());
    }
}
