//! Monte Carlo experiments: many seeded runs of one mechanism on one bound
//! query, scored against the exact answer.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::QueryConfig;
use super::metrics::{measure_rates, summarize, Summary, TrialMetrics};
use crate::data::BoundQuery;
use crate::dp::RandomSource;
use crate::engine::{naive, probe, Budget, NaiveConfig, ProbeConfig, ProbeResult};
use crate::ent::{ent_probe, min_entropy, EntConfig};
use crate::error::{Error, Result};
use crate::PredicateSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Naive,
    Probe,
    ProbeNaive,
    ProbeEnt,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Naive, Algorithm::Probe, Algorithm::ProbeNaive, Algorithm::ProbeEnt];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Naive => "naive",
            Algorithm::Probe => "probe",
            Algorithm::ProbeNaive => "probe-naive",
            Algorithm::ProbeEnt => "probe-ent",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Everything a single run needs besides the query and randomness.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Params {
    pub budget: Budget,
    pub probe: ProbeConfig,
    pub naive: NaiveConfig,
    pub ent: EntConfig,
}

/// Runs `algorithm` once on stream `trial` of `seed`.
pub fn run_once(query: &BoundQuery, algorithm: Algorithm, params: &Params, seed: u64, trial: u64) -> Result<ProbeResult> {
    let mut rng = RandomSource::new(seed, trial);
    match algorithm {
        Algorithm::Naive => naive(query, params.budget.beta, params.budget.epsilon_max, &params.naive, &mut rng),
        Algorithm::Probe => probe(query, &params.budget, &params.probe, &mut rng),
        Algorithm::ProbeNaive => {
            let cfg = ProbeConfig {
                split: crate::engine::SplitRule::Equal,
                ..params.probe
            };
            probe(query, &params.budget, &cfg, &mut rng)
        }
        Algorithm::ProbeEnt => ent_probe(query, &params.budget, &params.ent, &mut rng),
    }
}

/// Scores one run. Denied runs release nothing and report the ε spent
/// before stopping.
pub fn score(trial: usize, result: &ProbeResult, truth: &PredicateSet, k: usize) -> Result<TrialMetrics> {
    let (fnr, fpr) = measure_rates(&result.reported(), truth, k);
    Ok(TrialMetrics {
        trial,
        epsilon: result.epsilon,
        fnr,
        fpr,
        denied: result.is_denied(),
        min_entropy: min_entropy(&result.ledger)?,
    })
}

/// Runs trials `0..trials` in parallel; rows come back in trial order.
pub fn run_trials(
    query: &BoundQuery,
    algorithm: Algorithm,
    params: &Params,
    trials: usize,
    seed: u64,
) -> Result<Vec<TrialMetrics>> {
    let truth = query.true_answer();
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let r = run_once(query, algorithm, params, seed, t as u64)?;
            score(t, &r, &truth, query.k)
        })
        .collect()
}

/// Like [`run_trials`] but keeps the full results.
pub fn run_trials_full(
    query: &BoundQuery,
    algorithm: Algorithm,
    params: &Params,
    trials: usize,
    seed: u64,
) -> Result<Vec<ProbeResult>> {
    (0..trials)
        .into_par_iter()
        .map(|t| run_once(query, algorithm, params, seed, t as u64))
        .collect()
}

#[derive(Serialize)]
struct CsvRow {
    trial: Option<usize>,
    epsilon: f64,
    fnr: f64,
    fpr: f64,
    denied: f64,
    min_entropy: f64,
    summary: u8,
}

impl CsvRow {
    fn summary(s: &Summary, tag: u8) -> Self {
        Self {
            trial: None,
            epsilon: s.epsilon,
            fnr: s.fnr,
            fpr: s.fpr,
            denied: s.denial_rate,
            min_entropy: s.min_entropy,
            summary: tag,
        }
    }
}

/// Writes one row per trial, then two summary rows: `summary=1` averages
/// answered trials, `summary=2` averages all trials. `denied` holds the
/// denial rate in both.
pub fn write_results<W: Write>(out: W, rows: &[TrialMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(CsvRow {
            trial: Some(r.trial),
            epsilon: r.epsilon,
            fnr: r.fnr,
            fpr: r.fpr,
            denied: r.denied as u8 as f64,
            min_entropy: r.min_entropy,
            summary: 0,
        })?;
    }
    let (answered, all) = summarize(rows);
    w.serialize(CsvRow::summary(&answered, 1))?;
    w.serialize(CsvRow::summary(&all, 2))?;
    w.flush()?;
    Ok(())
}

/// A full experiment as driven from the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub query: PathBuf,
    pub data: PathBuf,
    pub params: Params,
    pub trials: usize,
    pub seed: u64,
    /// Replace all thresholds with `mean + z·σ` of the exact aggregates.
    pub z: Option<f64>,
    /// Results CSV; stdout when absent.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<TrialMetrics>,
    pub answered: Summary,
    pub all: Summary,
    pub k: usize,
    pub true_positives: usize,
    /// The predicate domain was read off the data.
    pub domain_from_data: bool,
}

pub fn run_experiment(config: &RunConfig) -> Result<Report> {
    if config.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let query_cfg = QueryConfig::load(&config.query)?;
    let (bound, domain) = query_cfg.bind_csv(&config.data, config.z)?;
    let rows = run_trials(&bound, config.algorithm, &config.params, config.trials, config.seed)?;
    match &config.out {
        Some(path) => write_results(std::fs::File::create(path)?, &rows)?,
        None => write_results(std::io::stdout().lock(), &rows)?,
    }
    let (answered, all) = summarize(&rows);
    Ok(Report {
        answered,
        all,
        k: bound.k,
        true_positives: bound.true_answer().len(),
        domain_from_data: domain.derived_from_data,
        rows,
    })
}
