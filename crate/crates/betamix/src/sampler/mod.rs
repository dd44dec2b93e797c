//! Posterior inference: a reversible-jump sampler over (k, weights, means,
//! α) for the adaptive prior and a truncated stick-breaking sampler for the
//! Dirichlet-process prior, with chain records and posterior summaries.
//!
//! A single chain is strictly sequential; chains with different seeds share
//! no mutable state and may run concurrently.

mod dp;
mod rj;
mod summary;

pub use dp::{dp_fit, DpOptions};
pub use rj::{
    apply_birth as rj_apply_birth, apply_death as rj_apply_death, birth_log_ratio, log_posterior,
    rjmcmc_fit, rjmcmc_fit_opts, BirthSpec, RjOptions, RjState, MAX_COMPONENTS,
};
pub use summary::{diagnostics, ess, posterior_mean_density, Diagnostics};

use crate::error::{Error, Result};
use crate::mixture::{DiscreteMixture, MixtureEval};

/// Labels of the five move kinds tracked by the acceptance counters.
pub const MOVE_LABELS: [&str; 5] = ["weights", "eps", "alpha", "birth", "death"];

/// Cumulative per-move proposal/acceptance counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MoveCounters {
    pub proposed: [u64; 5],
    pub accepted: [u64; 5],
}

impl MoveCounters {
    pub fn rate(&self, move_idx: usize) -> f64 {
        if self.proposed[move_idx] == 0 {
            return f64::NAN;
        }
        self.accepted[move_idx] as f64 / self.proposed[move_idx] as f64
    }
}

/// One recorded state of a posterior chain.
#[derive(Debug, Clone)]
pub struct ChainRecord {
    pub iteration: usize,
    /// Component count k (reversible jump) or truncation level (DP).
    pub model: usize,
    pub state: DiscreteMixture<f64>,
    pub log_likelihood: f64,
    pub log_prior: f64,
    pub counters: MoveCounters,
}

impl ChainRecord {
    /// Line format: `iter k alpha w1 e1 ... wk ek loglik logprior`,
    /// floats at 17 significant digits.
    pub fn to_line(&self) -> String {
        let mut s = format!("{} {} {:.16e}", self.iteration, self.model, self.state.alpha());
        for &(w, e) in self.state.atoms() {
            s.push_str(&format!(" {w:.16e} {e:.16e}"));
        }
        s.push_str(&format!(" {:.16e} {:.16e}", self.log_likelihood, self.log_prior));
        s
    }
}

/// Serialize a chain to the line-oriented record format.
pub fn chain_to_text(records: &[ChainRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

/// Observations for likelihood evaluation, with cached logs.
#[derive(Debug, Clone)]
pub struct DataCache {
    xs: Vec<f64>,
    ln_x: Vec<f64>,
    ln_1mx: Vec<f64>,
}

impl DataCache {
    /// Rejects data at or outside the open unit interval. With
    /// `jitter = true` boundary values are nudged into
    /// (1e-9, 1 - 1e-9) instead.
    pub fn new(data: &[f64], jitter: bool) -> Result<Self> {
        let mut xs = Vec::with_capacity(data.len());
        for &x in data {
            let x = if jitter { x.clamp(1e-9, 1.0 - 1e-9) } else { x };
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::domain(
                    "log_likelihood",
                    format!("datum {x} outside (0,1); re-ingest with boundary jitter enabled"),
                ));
            }
            xs.push(x);
        }
        let ln_x = xs.iter().map(|&x| x.ln()).collect();
        let ln_1mx = xs.iter().map(|&x| (1.0 - x).ln()).collect();
        Ok(DataCache { xs, ln_x, ln_1mx })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Log kernel values log g_{α,ε}(x_i) for every datum.
    pub fn kernel_column(&self, alpha: f64, eps: f64) -> Vec<f64> {
        let a = alpha / (1.0 - eps);
        let b = alpha / eps;
        let ln_norm = crate::numkit::log_gamma_unchecked(a + b)
            - crate::numkit::log_gamma_unchecked(a)
            - crate::numkit::log_gamma_unchecked(b);
        self.ln_x
            .iter()
            .zip(&self.ln_1mx)
            .map(|(&lx, &l1x)| (a - 1.0) * lx + (b - 1.0) * l1x + ln_norm)
            .collect()
    }

    /// Mixture log likelihood Σ_i log Σ_j w_j exp(cols[j][i]).
    pub fn loglik_from_columns(&self, log_w: &[f64], cols: &[Vec<f64>]) -> f64 {
        let n = self.xs.len();
        let k = cols.len();
        let mut total = 0.0;
        for i in 0..n {
            let mut max = f64::NEG_INFINITY;
            for j in 0..k {
                let v = log_w[j] + cols[j][i];
                if v > max {
                    max = v;
                }
            }
            let mut s = 0.0;
            for j in 0..k {
                s += (log_w[j] + cols[j][i] - max).exp();
            }
            total += max + s.ln();
        }
        total
    }
}

/// I.i.d. product log likelihood of a mixture on the data.
pub fn log_likelihood(m: &DiscreteMixture<f64>, data: &[f64]) -> Result<f64> {
    let cache = DataCache::new(data, false)?;
    let ev = MixtureEval::new(m);
    Ok(cache.xs.iter().map(|&x| ev.log_pdf(x)).sum())
}
