//! Experiment harness: query configs, synthetic data, Monte Carlo trials
//! and CSV results.

mod config;
mod experiment;
mod metrics;
mod synth;

pub use config::{AtomicConfig, DomainConfig, PredicateConfig, QueryConfig};
pub use experiment::{
    run_experiment, run_once, run_trials, run_trials_full, score, write_results, Algorithm, Params, Report,
    RunConfig,
};
pub use metrics::{measure_rates, summarize, threshold_zscore, Summary, TrialMetrics};
pub use synth::{synth_counts, synth_dataset, Band, Layout, MetricSpec, SynthSpec};
