//! Experiment harness: the density corpus, experiment drivers, report
//! emission and flat-file configuration.

mod config;
mod corpus;
mod experiment;
mod report;
mod sanity;

pub use config::{adaptive_prior_from_kv, dp_prior_from_kv, experiment_from_kv, KvConfig, KNOWN_KEYS};
pub use corpus::density_corpus;
pub use experiment::{
    run_approx_experiment, run_posterior_experiment, simulate_data, ExperimentConfig,
    ExperimentKind, SamplerKind,
};
pub use report::{emit_report, verdict_from, ExperimentReport, Verdict};
pub use sanity::{ks_crit_1pct, ks_statistic, run_prior_sanity, PriorSanityReport, CHI2_5DF_CRIT_1PCT};
