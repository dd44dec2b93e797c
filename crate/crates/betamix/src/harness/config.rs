//! Flat key=value configuration files.
//!
//! Lines are `key = value`; `#` starts a comment. Keys are dotted paths,
//! list values comma-separated. Unknown keys are rejected so typos surface.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::prior::{AdaptivePriorConfig, DpPriorConfig, LMode};

use super::experiment::{ExperimentConfig, ExperimentKind, SamplerKind};

/// Parsed key=value file.
#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                what: "config".into(),
                detail: format!("line {}: expected key=value, got {raw:?}", lineno + 1),
            })?;
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(KvConfig { entries })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn take_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| Error::Parse {
                what: "config".into(),
                detail: format!("{key}: {e}"),
            }),
        }
    }

    pub fn take_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| Error::Parse {
                what: "config".into(),
                detail: format!("{key}: {e}"),
            }),
        }
    }

    pub fn take_f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|e| Error::Parse {
                        what: "config".into(),
                        detail: format!("{key}: {e}"),
                    })
                })
                .collect(),
        }
    }

    pub fn take_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|e| Error::Parse {
                        what: "config".into(),
                        detail: format!("{key}: {e}"),
                    })
                })
                .collect(),
        }
    }
}

/// Keys understood by [`experiment_from_kv`]; unknown keys are errors.
pub const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "density",
    "density.beta",
    "alpha_grid",
    "n_grid",
    "sampler",
    "correction_steps",
    "replications",
    "mcmc_iters",
    "tolerance",
    "prior.a_k",
    "prior.l_mode",
    "prior.T",
    "prior.dirichlet_conc",
    "prior.sqrt_alpha_shape",
    "prior.sqrt_alpha_rate",
    "dp.mass",
    "dp.T1",
    "dp.t",
    "dp.sqrt_alpha_shape",
    "dp.sqrt_alpha_rate",
];

/// Adaptive prior from `prior.*` keys (documented defaults elsewhere).
pub fn adaptive_prior_from_kv(kv: &KvConfig) -> Result<AdaptivePriorConfig> {
    let d = AdaptivePriorConfig::default();
    let l_mode = match kv.get("prior.l_mode").unwrap_or("log-k") {
        "log-k" | "logk" => LMode::LogK,
        "constant-one" | "one" => LMode::ConstantOne,
        other => {
            return Err(Error::Parse {
                what: "config".into(),
                detail: format!("prior.l_mode: expected log-k or constant-one, got {other:?}"),
            })
        }
    };
    let cfg = AdaptivePriorConfig {
        a_k: kv.take_f64("prior.a_k", d.a_k)?,
        l_mode,
        t_exponent: kv.take_f64("prior.T", d.t_exponent)?,
        dirichlet_conc: kv.take_f64("prior.dirichlet_conc", d.dirichlet_conc)?,
        sqrt_alpha_gamma: (
            kv.take_f64("prior.sqrt_alpha_shape", d.sqrt_alpha_gamma.0)?,
            kv.take_f64("prior.sqrt_alpha_rate", d.sqrt_alpha_gamma.1)?,
        ),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Dirichlet-process prior from `dp.*` keys.
pub fn dp_prior_from_kv(kv: &KvConfig, n: usize) -> Result<DpPriorConfig> {
    let d = DpPriorConfig::default();
    let cfg = DpPriorConfig {
        mass: kv.take_f64("dp.mass", d.mass)?,
        t1_exponent: kv.take_f64("dp.T1", d.t1_exponent)?,
        t_floor: kv.take_f64("dp.t", d.t_floor)?,
        n,
        sqrt_alpha_gamma: (
            kv.take_f64("dp.sqrt_alpha_shape", d.sqrt_alpha_gamma.0)?,
            kv.take_f64("dp.sqrt_alpha_rate", d.sqrt_alpha_gamma.1)?,
        ),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Assemble a full experiment config from a key=value file plus the common
/// CLI flags (seed, threads, budget).
pub fn experiment_from_kv(
    kv: &KvConfig,
    seed: u64,
    threads: usize,
    budget_seconds: Option<u64>,
) -> Result<ExperimentConfig> {
    for key in kv.keys() {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Parse {
                what: "config".into(),
                detail: format!("unknown key {key:?}; known keys: {}", KNOWN_KEYS.join(", ")),
            });
        }
    }
    let kind = match kv.get("experiment").unwrap_or("approx-continuous") {
        "approx-continuous" => ExperimentKind::ApproxContinuous,
        "approx-discrete" => ExperimentKind::ApproxDiscrete,
        "posterior-rate" => ExperimentKind::PosteriorRate,
        "prior-sanity" => ExperimentKind::PriorSanity,
        other => {
            return Err(Error::Parse {
                what: "config".into(),
                detail: format!("experiment: unknown kind {other:?}"),
            })
        }
    };
    let sampler = match kv.get("sampler").unwrap_or("adaptive") {
        "adaptive" => SamplerKind::Adaptive,
        "dirichlet" | "dp" => SamplerKind::Dirichlet,
        "deterministic-alpha" => SamplerKind::DeterministicAlpha,
        other => {
            return Err(Error::Parse {
                what: "config".into(),
                detail: format!("sampler: unknown kind {other:?}"),
            })
        }
    };
    let density_id = kv.get("density").unwrap_or("beta22").to_string();
    let mut density_params = Vec::new();
    if let Some(b) = kv.get("density.beta") {
        let beta: f64 = b.parse().map_err(|e| Error::Parse {
            what: "config".into(),
            detail: format!("density.beta: {e}"),
        })?;
        density_params.push(("beta".to_string(), beta));
    }
    let d = ExperimentConfig::default();
    let n_grid = kv.take_usize_list("n_grid", &d.n_grid)?;
    let cfg = ExperimentConfig {
        kind,
        density_id,
        density_params,
        alpha_grid: kv.take_f64_list("alpha_grid", &d.alpha_grid)?,
        n_grid,
        sampler,
        adaptive_prior: adaptive_prior_from_kv(kv)?,
        dp_prior: dp_prior_from_kv(kv, 1000)?,
        correction_steps: match kv.get("correction_steps") {
            None => None,
            Some(v) => Some(v.parse().map_err(|e| Error::Parse {
                what: "config".into(),
                detail: format!("correction_steps: {e}"),
            })?),
        },
        seed,
        replications: kv.take_usize("replications", d.replications)?,
        mcmc_iters: kv.take_usize("mcmc_iters", d.mcmc_iters)?,
        threads,
        budget_seconds,
        tolerance: kv.take_f64("tolerance", d.tolerance)?,
    };
    cfg.validate()?;
    Ok(cfg)
}
