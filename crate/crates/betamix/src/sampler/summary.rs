//! Posterior summaries: pointwise mean density, acceptance diagnostics and
//! effective sample size.

use crate::error::{Error, Result};
use crate::mixture::MixtureEval;

use super::{ChainRecord, MOVE_LABELS};

/// Pointwise average of the mixture density over the post-burn-in records.
pub fn posterior_mean_density(
    chain: &[ChainRecord],
    burnin: usize,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if burnin >= chain.len() {
        return Err(Error::contract(
            "posterior_mean_density",
            format!("burnin {burnin} leaves no records of {}", chain.len()),
        ));
    }
    let kept = &chain[burnin..];
    let mut acc = vec![0.0f64; grid.len()];
    for rec in kept {
        let ev = MixtureEval::new(&rec.state);
        for (a, &x) in acc.iter_mut().zip(grid) {
            *a += ev.pdf(x);
        }
    }
    let inv = 1.0 / kept.len() as f64;
    for a in &mut acc {
        *a *= inv;
    }
    Ok(acc)
}

/// Chain diagnostics.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    /// (move label, acceptance rate); NaN where a move was never proposed.
    pub acceptance: Vec<(&'static str, f64)>,
    /// Effective sample size of the log-likelihood trace.
    pub ess_loglik: f64,
    /// Histogram of the model index (k or truncation level).
    pub k_histogram: Vec<(usize, usize)>,
}

/// Effective sample size by the initial-positive-sequence estimator on the
/// lag-autocorrelations.
pub fn ess(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 3 {
        return n as f64;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return n as f64;
    }
    let mut rho_sum = 0.0;
    let max_lag = n - 1;
    let mut lag = 1;
    while lag + 1 <= max_lag {
        let rho_a = autocorr(series, mean, var, lag);
        let rho_b = if lag + 1 <= max_lag { autocorr(series, mean, var, lag + 1) } else { 0.0 };
        if rho_a + rho_b <= 0.0 {
            break;
        }
        rho_sum += rho_a + rho_b;
        lag += 2;
    }
    (n as f64 / (1.0 + 2.0 * rho_sum)).clamp(1.0, n as f64)
}

fn autocorr(series: &[f64], mean: f64, var: f64, lag: usize) -> f64 {
    let n = series.len();
    let mut acc = 0.0;
    for i in 0..n - lag {
        acc += (series[i] - mean) * (series[i + lag] - mean);
    }
    acc / (n as f64 * var)
}

/// Acceptance rates, log-likelihood ESS and the model histogram.
pub fn diagnostics(chain: &[ChainRecord]) -> Result<Diagnostics> {
    let last = chain.last().ok_or_else(|| Error::contract("diagnostics", "empty chain"))?;
    let acceptance = MOVE_LABELS
        .iter()
        .enumerate()
        .map(|(i, &label)| (label, last.counters.rate(i)))
        .collect();
    let loglik: Vec<f64> = chain.iter().map(|r| r.log_likelihood).collect();
    let mut hist: std::collections::BTreeMap<usize, usize> = Default::default();
    for r in chain {
        *hist.entry(r.model).or_default() += 1;
    }
    Ok(Diagnostics {
        acceptance,
        ess_loglik: ess(&loglik),
        k_histogram: hist.into_iter().collect(),
    })
}
