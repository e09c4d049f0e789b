use serde::{Deserialize, Serialize};

use super::{estimate_fps, find_u_opt, DenialReason, EstimateRecord, LeafRun, LeafView, Outcome, ProbeResult};
use crate::apportion::{alpha_split, beta_split_equal, beta_split_tree, ApportionInput};
use crate::data::BoundQuery;
use crate::dp::{tslm, tslm_epsilon, PrivacyAccountant, RandomSource};
use crate::error::{invalid, Result};
use crate::query::QueryTree;
use crate::PredicateSet;

/// Global bounds for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub beta: f64,
    pub alpha: f64,
    pub epsilon_max: f64,
}

impl Budget {
    pub fn new(beta: f64, alpha: f64, epsilon_max: f64) -> Self {
        Self {
            beta,
            alpha,
            epsilon_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(invalid(format!("beta must lie in (0, 0.5), got {}", self.beta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.epsilon_max >= 0.0) {
            return Err(invalid(format!("epsilon_max must be non-negative, got {}", self.epsilon_max)));
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::new(0.05, 0.1, 5.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// Closed-form optimum over sensitivities, regions and occurrences.
    #[default]
    Optimal,
    /// `β/Σo` for every leaf.
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Phase-one uncertain region as a fraction of the value range width.
    pub u_fraction: f64,
    /// Share of β spent in phase one.
    pub phase_split: f64,
    pub split: SplitRule,
    pub skip_conjunctions: bool,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            u_fraction: 0.3,
            phase_split: 0.5,
            split: SplitRule::Optimal,
            skip_conjunctions: true,
        }
    }
}

impl ProbeConfig {
    /// Two-phase run with an equal phase-one split.
    pub fn naive_split() -> Self {
        Self {
            split: SplitRule::Equal,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.u_fraction > 0.0 && self.u_fraction <= 1.0) {
            return Err(invalid(format!("u_fraction must lie in (0, 1], got {}", self.u_fraction)));
        }
        if !(self.phase_split > 0.0 && self.phase_split < 1.0) {
            return Err(invalid(format!("phase_split must lie in (0, 1), got {}", self.phase_split)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaiveConfig {
    pub u_fraction: f64,
    pub skip_conjunctions: bool,
}

impl Default for NaiveConfig {
    fn default() -> Self {
        Self {
            u_fraction: 0.12,
            skip_conjunctions: true,
        }
    }
}

/// Mechanism state of one leaf occurrence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafState {
    pub slot: usize,
    /// Index into the compiled atomics.
    pub atomic: usize,
    pub atomic_id: String,
    pub u: f64,
    pub beta: f64,
    /// Set when the leaf must (re)run on its next visit.
    pub flag: bool,
    pub noisy: Option<Vec<f64>>,
    pub reported: Option<PredicateSet>,
    pub epsilon: f64,
}

enum Plan {
    Leaf(usize),
    And(Box<Plan>, Box<Plan>),
    Or(Box<Plan>, Box<Plan>),
}

fn plan(tree: &QueryTree, next: &mut usize) -> Plan {
    match tree {
        QueryTree::Leaf(_) => {
            *next += 1;
            Plan::Leaf(*next - 1)
        }
        QueryTree::And(l, r) => {
            let l = plan(l, next);
            Plan::And(Box::new(l), Box::new(plan(r, next)))
        }
        QueryTree::Or(l, r) => {
            let l = plan(l, next);
            Plan::Or(Box::new(l), Box::new(plan(r, next)))
        }
    }
}

/// `Err` carries a denial; parameter faults surface through the outer
/// `Result`.
pub type Step<T> = std::result::Result<T, DenialReason>;

/// One query run in progress: leaf states, accountant and trace.
pub struct Execution<'q> {
    pub query: &'q BoundQuery,
    plan: Plan,
    pub states: Vec<LeafState>,
    pub accountant: PrivacyAccountant,
    pub runs: Vec<LeafRun>,
    pub estimates: Vec<EstimateRecord>,
    skip_conjunctions: bool,
}

impl<'q> Execution<'q> {
    /// Every leaf starts flagged with `u_i = u_fraction·width_i`; β is set
    /// by the caller.
    pub fn new(query: &'q BoundQuery, epsilon_max: f64, u_fraction: f64, skip_conjunctions: bool) -> Self {
        let tree = &query.compiled.tree;
        let plan = plan(tree, &mut 0);
        let states = tree
            .leaves()
            .into_iter()
            .enumerate()
            .map(|(slot, id)| {
                let atomic = query.compiled.index_of(id).expect("compiled atomics cover the tree");
                LeafState {
                    slot,
                    atomic,
                    atomic_id: id.to_string(),
                    u: u_fraction * query.atomics[atomic].range_width(),
                    beta: 0.0,
                    flag: true,
                    noisy: None,
                    reported: None,
                    epsilon: 0.0,
                }
            })
            .collect();
        Self {
            query,
            plan,
            states,
            accountant: PrivacyAccountant::new(epsilon_max, query.k),
            runs: Vec::new(),
            estimates: Vec::new(),
            skip_conjunctions,
        }
    }

    /// Phase-one β per distinct atomic.
    fn apportion(&self, beta: f64, split: SplitRule) -> Result<Vec<f64>> {
        let c = &self.query.compiled;
        let mut u = vec![0.0; c.n()];
        for s in &self.states {
            u[s.atomic] = s.u;
        }
        let dg = self.query.atomics.iter().map(|a| a.sensitivity()).collect();
        let input = ApportionInput::new(u, dg, c.occurrences.clone(), beta)?;
        let out = match split {
            SplitRule::Optimal => beta_split_tree(&input)?,
            SplitRule::Equal => beta_split_equal(&input)?,
        };
        Ok(out.betas)
    }

    fn set_betas(&mut self, betas: &[f64]) {
        for s in &mut self.states {
            s.beta = betas[s.atomic];
        }
    }

    /// Evaluates the tree, running flagged leaves. Each run is charged
    /// before any noise is drawn.
    pub fn traverse(&mut self, phase: usize, rng: &mut RandomSource) -> Result<Step<PredicateSet>> {
        let plan = std::mem::replace(&mut self.plan, Plan::Leaf(0));
        let out = self.visit(&plan, phase, rng);
        self.plan = plan;
        out
    }

    fn visit(&mut self, node: &Plan, phase: usize, rng: &mut RandomSource) -> Result<Step<PredicateSet>> {
        match node {
            Plan::Leaf(slot) => self.run_leaf(*slot, phase, rng),
            Plan::And(l, r) => {
                let left = match self.visit(l, phase, rng)? {
                    Ok(s) => s,
                    Err(d) => return Ok(Err(d)),
                };
                if left.is_empty() && self.skip_conjunctions {
                    return Ok(Ok(left));
                }
                Ok(self
                    .visit(r, phase, rng)?
                    .map(|right| left.intersection(&right).copied().collect()))
            }
            Plan::Or(l, r) => {
                let left = match self.visit(l, phase, rng)? {
                    Ok(s) => s,
                    Err(d) => return Ok(Err(d)),
                };
                Ok(self
                    .visit(r, phase, rng)?
                    .map(|right| left.union(&right).copied().collect()))
            }
        }
    }

    fn run_leaf(&mut self, slot: usize, phase: usize, rng: &mut RandomSource) -> Result<Step<PredicateSet>> {
        let st = &self.states[slot];
        if !st.flag {
            return Ok(Ok(st.reported.clone().expect("unflagged leaves have run")));
        }
        let atomic = &self.query.atomics[st.atomic];
        let eps = tslm_epsilon(atomic.sensitivity(), st.beta, st.u);
        crate::dp::check_tslm_params(atomic, st.u, st.beta)?;
        if self.accountant.charge_all(eps).is_err() {
            return Ok(Err(DenialReason::BudgetExceeded));
        }
        let out = tslm(atomic, st.u, st.beta, rng)?;
        self.runs.push(LeafRun {
            slot,
            atomic_id: st.atomic_id.clone(),
            phase,
            u: st.u,
            beta: st.beta,
            sensitivity: atomic.sensitivity(),
            epsilon: out.epsilon,
        });
        let st = &mut self.states[slot];
        st.flag = false;
        st.epsilon += out.epsilon;
        st.noisy = Some(out.noisy);
        st.reported = Some(out.reported.clone());
        Ok(Ok(out.reported))
    }

    fn view(&self, slot: usize) -> Option<LeafView<'_>> {
        let st = &self.states[slot];
        let atomic = &self.query.atomics[st.atomic];
        Some(LeafView {
            noisy: st.noisy.as_deref()?,
            thresholds: &atomic.thresholds,
            direction: atomic.direction(),
            u: st.u,
            beta: st.beta,
        })
    }

    /// Estimates every executed leaf against `o_one`, recording the results.
    /// Returns the slots whose estimate exceeds its allowance, with the
    /// allowance.
    fn estimate_all(&mut self, alphas: &[f64], o_one: &PredicateSet, phase: usize) -> Vec<(usize, f64)> {
        let mut over = Vec::new();
        for slot in 0..self.states.len() {
            let Some(view) = self.view(slot) else { continue };
            let est = estimate_fps(view, Some(o_one));
            let st = &self.states[slot];
            let f_max = alphas[st.atomic] * est.r_est;
            if est.f_est > f_max {
                over.push((slot, f_max));
            }
            self.estimates.push(EstimateRecord {
                slot,
                atomic_id: st.atomic_id.clone(),
                phase,
                u: st.u,
                beta: st.beta,
                f_max,
                estimate: est,
            });
        }
        over
    }

    pub fn finish(self, outcome: Outcome) -> ProbeResult {
        let mut atomic_epsilon = vec![0.0; self.query.compiled.n()];
        for s in &self.states {
            atomic_epsilon[s.atomic] += s.epsilon;
        }
        ProbeResult {
            outcome,
            epsilon: self.accountant.spent(),
            epsilon_max: self.accountant.epsilon_max(),
            slot_epsilon: self.states.iter().map(|s| s.epsilon).collect(),
            atomic_epsilon,
            ledger: self.accountant.ledger().clone(),
            runs: self.runs,
            estimates: self.estimates,
            subqueries: Vec::new(),
        }
    }
}

/// Phase one: apportion `β·phase_split`, then one traversal with
/// conjunction skipping.
pub fn phase_one(
    exec: &mut Execution<'_>,
    beta: f64,
    config: &ProbeConfig,
    rng: &mut RandomSource,
) -> Result<Step<PredicateSet>> {
    let betas = exec.apportion(beta * config.phase_split, config.split)?;
    exec.set_betas(&betas);
    exec.traverse(1, rng)
}

/// Phase two: leaves whose FP estimate exceeds `α_i·r_est` rerun at the
/// largest sufficient `u` with the phase-two share of β; the final output
/// is re-estimated and denied if any leaf still exceeds its allowance.
pub fn phase_two(
    exec: &mut Execution<'_>,
    alpha: f64,
    config: &ProbeConfig,
    o_one: PredicateSet,
    rng: &mut RandomSource,
) -> Result<Step<PredicateSet>> {
    let alphas = alpha_split(alpha, &exec.query.compiled.occurrences);
    let over = exec.estimate_all(&alphas, &o_one, 1);
    if over.is_empty() {
        return Ok(Ok(o_one));
    }
    let carry = (1.0 - config.phase_split) / config.phase_split;
    for (slot, f_max) in over {
        let view = exec.view(slot).expect("estimated leaves have run");
        let Some(u_opt) = find_u_opt(view, f_max, Some(&o_one)) else {
            return Ok(Err(DenialReason::FpBoundUnmet));
        };
        let st = &mut exec.states[slot];
        st.u = u_opt;
        st.beta *= carry;
        st.flag = true;
    }
    let o_f = match exec.traverse(2, rng)? {
        Ok(s) => s,
        Err(d) => return Ok(Err(d)),
    };
    if exec.estimate_all(&alphas, &o_f, 2).is_empty() {
        Ok(Ok(o_f))
    } else {
        Ok(Err(DenialReason::FpBoundUnmet))
    }
}

/// Two-phase mechanism with a β-bound on FNR and an α-bound on FPR.
pub fn probe(
    query: &BoundQuery,
    budget: &Budget,
    config: &ProbeConfig,
    rng: &mut RandomSource,
) -> Result<ProbeResult> {
    budget.validate()?;
    config.validate()?;
    let mut exec = Execution::new(query, budget.epsilon_max, config.u_fraction, config.skip_conjunctions);
    let o_one = match phase_one(&mut exec, budget.beta, config, rng)? {
        Ok(s) => s,
        Err(d) => return Ok(exec.finish(Outcome::Denied(d))),
    };
    let outcome = match phase_two(&mut exec, budget.alpha, config, o_one, rng)? {
        Ok(s) => Outcome::Answered(s),
        Err(d) => Outcome::Denied(d),
    };
    Ok(exec.finish(outcome))
}

/// Single-phase baseline: equal β split, fixed `u`, no FP control.
pub fn naive(
    query: &BoundQuery,
    beta: f64,
    epsilon_max: f64,
    config: &NaiveConfig,
    rng: &mut RandomSource,
) -> Result<ProbeResult> {
    Budget::new(beta, 0.5, epsilon_max).validate()?;
    if !(config.u_fraction > 0.0 && config.u_fraction <= 1.0) {
        return Err(invalid(format!("u_fraction must lie in (0, 1], got {}", config.u_fraction)));
    }
    let mut exec = Execution::new(query, epsilon_max, config.u_fraction, config.skip_conjunctions);
    let betas = exec.apportion(beta, SplitRule::Equal)?;
    exec.set_betas(&betas);
    let outcome = match exec.traverse(1, rng)? {
        Ok(s) => Outcome::Answered(s),
        Err(d) => Outcome::Denied(d),
    };
    Ok(exec.finish(outcome))
}
