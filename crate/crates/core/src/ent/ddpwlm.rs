//! Data-dependent multi-step Laplace mechanism for one sub-query.
//!
//! Each step draws fresh noise at `ε_j` for the predicates still undecided
//! and is allotted `β_i/m` of the FNR budget, so its uncertain region is
//! `u_j = Δg·ln(m/(2β_i))/ε_j`. A predicate is decided positive above `c`,
//! negative below `c − 2u_j`, and otherwise carried to the next step at a
//! larger ε. The last step compares against `c − u_j` like a single TSLM.

use serde::{Deserialize, Serialize};

use super::entropy::min_entropy;
use crate::data::BoundAtomic;
use crate::dp::{check_tslm_params, PrivacyAccountant, PwdpLedger, RandomSource};
use crate::engine::{estimate_fps, find_u_opt, DenialReason, LeafRun, LeafView};
use crate::error::{invalid, Result};
use crate::PredicateSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntConfig {
    /// Maximum number of steps.
    pub m: usize,
    /// Candidate ε levels considered between steps.
    pub m_f: usize,
    /// Starting uncertain region as a fraction of the value range width.
    pub u0_fraction: f64,
}

impl Default for EntConfig {
    fn default() -> Self {
        Self {
            m: 4,
            m_f: 3,
            u0_fraction: 0.3,
        }
    }
}

impl EntConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m_f == 0 {
            return Err(invalid("m and m_f must be at least 1"));
        }
        if !(self.u0_fraction > 0.0 && self.u0_fraction <= 1.0) {
            return Err(invalid(format!("u0_fraction must lie in (0, 1], got {}", self.u0_fraction)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DdpwlmOutput {
    pub reported: PredicateSet,
    pub epsilon: f64,
    pub beta_used: f64,
    pub iterations: usize,
    /// ε of each step run.
    pub epsilons: Vec<f64>,
    /// Uncertain region reset from the first step's FP estimate, when one
    /// was needed.
    pub u_opt: Option<f64>,
    /// Budget of the last allowed step.
    pub epsilon_cap: f64,
}

/// Laplace tail `P[η > a]` at scale `b`.
fn upper_tail(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        0.5 * (-a / b).exp()
    } else {
        1.0 - 0.5 * (a / b).exp()
    }
}

/// Picks the next step's ε among `m_f` geometric levels in `(ε_j, ε_m]`:
/// the level whose expected ledger (this step, plus the cap for predicates
/// likely to stay undecided) keeps the min-entropy highest.
#[allow(clippy::too_many_arguments)]
fn next_epsilon(
    ledger: &PwdpLedger,
    undecided: &[usize],
    gaps: &[f64],
    eps: f64,
    eps_cap: f64,
    m_f: usize,
    log_term: f64,
    dg: f64,
) -> Result<f64> {
    let r = (eps_cap / eps).powf(1.0 / m_f as f64);
    let mut best = (f64::NEG_INFINITY, eps_cap);
    for s in 1..=m_f {
        let cand = if s == m_f { eps_cap } else { eps * r.powi(s as i32) };
        let u = dg * log_term / cand;
        let b = dg / cand;
        let mut hypo = ledger.clone();
        for &p in undecided {
            let g = gaps[p];
            // Oriented noisy gap g − η: decided if below 0 or above 2u.
            let decide = (upper_tail(g, b) + upper_tail(2.0 * u - g, b)).min(1.0);
            hypo.entries[p] += cand + (1.0 - decide) * eps_cap;
        }
        let h = min_entropy(&hypo)?;
        if h > best.0 {
            best = (h, cand);
        }
    }
    Ok(best.1)
}

/// Runs the multi-step mechanism on one sub-query. `alpha_i` is its share
/// of the FPR budget; the first step's FP estimate caps the final ε.
#[allow(clippy::too_many_arguments)]
pub fn ddpwlm(
    atomic: &BoundAtomic,
    slot: usize,
    u0: f64,
    beta_i: f64,
    alpha_i: f64,
    config: &EntConfig,
    accountant: &mut PrivacyAccountant,
    runs: &mut Vec<LeafRun>,
    rng: &mut RandomSource,
) -> Result<std::result::Result<DdpwlmOutput, DenialReason>> {
    config.validate()?;
    let m = config.m;
    let beta_step = beta_i / m as f64;
    check_tslm_params(atomic, u0, beta_step)?;
    let dg = atomic.sensitivity();
    let dir = atomic.direction();
    let log_term = (1.0 / (2.0 * beta_step)).ln();
    let k = atomic.k();

    let mut eps = dg * log_term / u0;
    let mut eps_cap = eps;
    let mut u_opt = None;
    let mut undecided: Vec<usize> = (0..k).collect();
    let mut reported = PredicateSet::new();
    let mut noisy = atomic.exact.clone();
    let mut gaps = vec![0.0; k];
    let mut epsilons = Vec::new();
    let mut spent = 0.0;

    for j in 1..=m {
        let u = dg * log_term / eps;
        if accountant.charge(undecided.iter().copied(), eps).is_err() {
            return Ok(Err(DenialReason::BudgetExceeded));
        }
        spent += eps;
        epsilons.push(eps);
        runs.push(LeafRun {
            slot,
            atomic_id: atomic.query.id.clone(),
            phase: j,
            u,
            beta: beta_step,
            sensitivity: dg,
            epsilon: eps,
        });
        let scale = dg / eps;
        for &p in &undecided {
            noisy[p] = atomic.exact[p] + rng.laplace(scale);
            gaps[p] = dir.orient(atomic.thresholds[p]) - dir.orient(noisy[p]);
        }

        if j == 1 && m > 1 && undecided.iter().any(|&p| gaps[p] >= 0.0 && gaps[p] <= 2.0 * u) {
            let view = LeafView {
                noisy: &noisy,
                thresholds: &atomic.thresholds,
                direction: dir,
                u,
                beta: beta_step,
            };
            let own: PredicateSet = (0..k).filter(|&p| gaps[p] < u).collect();
            let f_max = alpha_i * estimate_fps(view, Some(&own)).r_est;
            let Some(uo) = find_u_opt(view, f_max, Some(&own)) else {
                return Ok(Err(DenialReason::FpBoundUnmet));
            };
            u_opt = Some(uo);
            eps_cap = dg * log_term / uo;
        }

        let last = j == m || eps >= eps_cap * (1.0 - 1e-12);
        let mut still = Vec::with_capacity(undecided.len());
        for &p in &undecided {
            let g = gaps[p];
            if last {
                if g < u {
                    reported.insert(p);
                }
            } else if g < 0.0 {
                reported.insert(p);
            } else if g <= 2.0 * u {
                still.push(p);
            }
        }
        undecided = still;
        if last || undecided.is_empty() {
            return Ok(Ok(DdpwlmOutput {
                reported,
                epsilon: spent,
                beta_used: j as f64 * beta_step,
                iterations: j,
                epsilons,
                u_opt,
                epsilon_cap: eps_cap,
            }));
        }
        eps = if j + 1 == m {
            eps_cap
        } else {
            next_epsilon(accountant.ledger(), &undecided, &gaps, eps, eps_cap, config.m_f, log_term, dg)?
        };
    }
    unreachable!("the last step always returns")
}
