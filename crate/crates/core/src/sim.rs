//! Seeded closed-loop simulation.
//!
//! A rollout draws the true state path and observations from the model and
//! feeds the observations to a controller. Per step, with state `x`:
//!
//! 1. the controller picks `a` from its belief;
//! 2. `x' ~ transition[a][x]`, then `y ~ observation[a][x']`;
//! 3. the controller filters `(a, y)`.
//!
//! All draws come from one [`SimRng`] in that order (preceded by the
//! initial-state draw when the start state is sampled), so a trace is a
//! pure function of its inputs and seed.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::controller::{ControllerKind, ControllerState, SolvedController};
use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::model::{Belief, BoundParams, PomdpModel, SolveConfig};
use crate::rng::{SimRng, PRNG_NAME};
use crate::solver::evaluate;

/// Largest discounted tail the truncated infinite-horizon estimate may drop.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    SampleFromBelief,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutSpec {
    pub initial_belief: Belief,
    pub initial_state: InitialState,
    pub steps: usize,
    /// Written into trace headers.
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub true_state: usize,
    pub action: usize,
    /// Observation received after applying `action`.
    pub observation: usize,
    /// Belief the action was chosen from.
    pub belief: Belief,
    pub stage_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub steps: Vec<StepRecord>,
    pub final_state: usize,
    pub final_belief: Belief,
    pub terminal_cost: f64,
    pub seed: u64,
    pub discount: f64,
    pub model_id: String,
    pub controller: ControllerKind,
}

impl SimTrace {
    /// `Σ_t α^t c(x_t, u_t)`.
    pub fn cost_without_terminal(&self) -> f64 {
        let mut w = 1.0;
        let mut total = 0.0;
        for s in &self.steps {
            total += w * s.stage_cost;
            w *= self.discount;
        }
        total
    }

    /// Stage costs plus `α^T c_N(x_T)`.
    pub fn cost_with_terminal(&self) -> f64 {
        self.cost_without_terminal() + self.discount.powi(self.steps.len() as i32) * self.terminal_cost
    }

    /// Whether the true state visited `state` at any time up to the end.
    pub fn reached(&self, state: usize) -> bool {
        self.final_state == state || self.steps.iter().any(|s| s.true_state == state)
    }

    /// CSV export. The final row carries the terminal record: empty action
    /// and observation, the final belief and the terminal cost.
    pub fn to_csv(&self) -> String {
        let n = self.final_belief.len();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# seed={} model={} controller={} prng={}",
            self.seed, self.model_id, self.controller, PRNG_NAME
        );
        let beliefs: Vec<String> = (0..n).map(|i| format!("belief_{i}")).collect();
        let _ = writeln!(out, "t,true_state,action,observation,{},stage_cost", beliefs.join(","));
        let fmt_belief = |b: &Belief| b.as_slice().iter().map(|&p| g17(p)).collect::<Vec<_>>().join(",");
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.t,
                s.true_state,
                s.action,
                s.observation,
                fmt_belief(&s.belief),
                g17(s.stage_cost)
            );
        }
        let _ = writeln!(
            out,
            "{},{},,,{},{}",
            self.steps.len(),
            self.final_state,
            fmt_belief(&self.final_belief),
            g17(self.terminal_cost)
        );
        out
    }
}

/// Solves the controller and runs one rollout.
pub fn rollout(
    model: &PomdpModel,
    kind: ControllerKind,
    config: &SolveConfig,
    spec: &RolloutSpec,
    seed: u64,
) -> Result<SimTrace> {
    let solved = SolvedController::solve(model, config, kind)?;
    rollout_with(&solved, spec, seed)
}

pub fn rollout_with(solved: &Arc<SolvedController>, spec: &RolloutSpec, seed: u64) -> Result<SimTrace> {
    let model = solved.model();
    let mut rng = SimRng::new(seed);
    let mut x = match spec.initial_state {
        InitialState::SampleFromBelief => rng.categorical(spec.initial_belief.as_slice()),
        InitialState::Fixed(s) if s < model.n_states => s,
        InitialState::Fixed(s) => {
            return Err(Error::StateOutOfRange {
                state: s,
                n_states: model.n_states,
            })
        }
    };
    let mut controller = ControllerState::start(Arc::clone(solved), spec.initial_belief.clone())?;
    let mut steps = Vec::with_capacity(spec.steps);
    for t in 0..spec.steps {
        let a = controller.decide();
        let next = rng.categorical(&model.transition[a][x]);
        let y = rng.categorical(&model.observation[a][next]);
        steps.push(StepRecord {
            t,
            true_state: x,
            action: a,
            observation: y,
            belief: controller.belief().clone(),
            stage_cost: model.stage_cost[a][x],
        });
        controller = controller.advance(a, y)?;
        x = next;
    }
    Ok(SimTrace {
        steps,
        final_state: x,
        final_belief: controller.belief().clone(),
        terminal_cost: model.terminal_cost[x],
        seed,
        discount: solved.config().discount,
        model_id: spec.model_id.clone(),
        controller: solved.kind(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedCost {
    pub seed: u64,
    pub with_terminal: f64,
    pub without_terminal: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchStats {
    pub controller: ControllerKind,
    pub n_rollouts: usize,
    pub steps: usize,
    pub mean_cost: f64,
    pub std_cost: f64,
    pub mean_cost_no_terminal: f64,
    pub std_cost_no_terminal: f64,
    /// `[t][a]`: fraction of rollouts applying `a` at step `t`.
    pub action_freq_by_step: Vec<Vec<f64>>,
    /// Fraction of all applied actions equal to `a`.
    pub action_freq: Vec<f64>,
    /// Fraction of rollouts whose true state visited `s` by the final time.
    pub reach_prob: Vec<f64>,
    pub per_seed: Vec<SeedCost>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl BatchStats {
    pub fn from_traces(traces: &[SimTrace], n_states: usize, n_actions: usize) -> Self {
        let n = traces.len();
        let steps = traces.first().map_or(0, |t| t.steps.len());
        let per_seed: Vec<SeedCost> = traces
            .iter()
            .map(|t| SeedCost {
                seed: t.seed,
                with_terminal: t.cost_with_terminal(),
                without_terminal: t.cost_without_terminal(),
            })
            .collect();
        let with: Vec<f64> = per_seed.iter().map(|c| c.with_terminal).collect();
        let without: Vec<f64> = per_seed.iter().map(|c| c.without_terminal).collect();
        let (mean_cost, std_cost) = mean_std(&with);
        let (mean_cost_no_terminal, std_cost_no_terminal) = mean_std(&without);

        let mut by_step = vec![vec![0.0; n_actions]; steps];
        let mut overall = vec![0.0; n_actions];
        for t in traces {
            for s in &t.steps {
                by_step[s.t][s.action] += 1.0 / n as f64;
                overall[s.action] += 1.0;
            }
        }
        let total: f64 = overall.iter().sum();
        if total > 0.0 {
            overall.iter_mut().for_each(|f| *f /= total);
        }
        let reach_prob = (0..n_states)
            .map(|s| traces.iter().filter(|t| t.reached(s)).count() as f64 / n as f64)
            .collect();
        BatchStats {
            controller: traces.first().map_or(ControllerKind::DualSmpc, |t| t.controller),
            n_rollouts: n,
            steps,
            mean_cost,
            std_cost,
            mean_cost_no_terminal,
            std_cost_no_terminal,
            action_freq_by_step: by_step,
            action_freq: overall,
            reach_prob,
            per_seed,
        }
    }

    /// Flat `key=value` report.
    pub fn report(&self, model: &PomdpModel) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "controller={}", self.controller);
        let _ = writeln!(out, "n_rollouts={}", self.n_rollouts);
        let _ = writeln!(out, "steps={}", self.steps);
        let _ = writeln!(out, "mean_cost={}", self.mean_cost);
        let _ = writeln!(out, "std_cost={}", self.std_cost);
        let _ = writeln!(out, "mean_cost_no_terminal={}", self.mean_cost_no_terminal);
        let _ = writeln!(out, "std_cost_no_terminal={}", self.std_cost_no_terminal);
        for (a, f) in self.action_freq.iter().enumerate() {
            let _ = writeln!(out, "action_freq.{}={}", model.action_name(a), f);
        }
        for (s, p) in self.reach_prob.iter().enumerate() {
            let _ = writeln!(out, "reach_prob.{}={}", model.state_name(s), p);
        }
        out
    }

    pub fn per_seed_csv(&self) -> String {
        let mut out = String::from("seed,cost_with_terminal,cost_without_terminal\n");
        for c in &self.per_seed {
            let _ = writeln!(out, "{},{},{}", c.seed, g17(c.with_terminal), g17(c.without_terminal));
        }
        out
    }
}

/// Runs `n_rollouts` rollouts with seeds `base_seed + k`.
pub fn batch(
    model: &PomdpModel,
    kind: ControllerKind,
    config: &SolveConfig,
    spec: &RolloutSpec,
    n_rollouts: usize,
    base_seed: u64,
) -> Result<BatchStats> {
    let solved = SolvedController::solve(model, config, kind)?;
    batch_with(&solved, spec, n_rollouts, base_seed)
}

pub fn batch_with(solved: &Arc<SolvedController>, spec: &RolloutSpec, n_rollouts: usize, base_seed: u64) -> Result<BatchStats> {
    let traces = batch_traces(solved, spec, n_rollouts, base_seed)?;
    let m = solved.model();
    Ok(BatchStats::from_traces(&traces, m.n_states, m.n_actions))
}

/// The traces behind [`batch_with`], in seed order.
pub fn batch_traces(solved: &Arc<SolvedController>, spec: &RolloutSpec, n_rollouts: usize, base_seed: u64) -> Result<Vec<SimTrace>> {
    if n_rollouts == 0 {
        return Err(Error::InvalidConfig("n_rollouts must be >= 1".into()));
    }
    (0..n_rollouts as u64)
        .into_par_iter()
        .map(|k| rollout_with(solved, spec, base_seed.wrapping_add(k)))
        .collect()
}

/// One-sided paired t-test of `mean(a - b) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTest {
    pub n: usize,
    pub mean_diff: f64,
    pub std_diff: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

pub fn paired_one_sided(a: &[f64], b: &[f64]) -> Result<PairedTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidConfig("paired test needs two equal-length samples of size >= 2".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (mean_diff, std_diff) = mean_std(&diffs);
    let n = diffs.len();
    if std_diff == 0.0 {
        let p = if mean_diff > 0.0 { 0.0 } else { 1.0 };
        return Ok(PairedTest {
            n,
            mean_diff,
            std_diff,
            t_stat: if mean_diff > 0.0 { f64::INFINITY } else { 0.0 },
            p_value: p,
        });
    }
    let t_stat = mean_diff / (std_diff / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
    Ok(PairedTest {
        n,
        mean_diff,
        std_diff,
        t_stat,
        p_value: dist.sf(t_stat),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub discount: f64,
    pub gamma: f64,
    pub eta: f64,
    /// Exact finite-horizon optimum at the initial belief.
    pub j_design: f64,
    /// Monte Carlo mean of the truncated discounted cost of the receding-horizon law.
    pub j_achieved_estimate: f64,
    pub j_achieved_stderr: f64,
    pub truncation_steps: usize,
    pub truncation_error_bound: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_ok: bool,
}

impl BoundReport {
    pub fn report(&self) -> String {
        format!(
            "discount={}\ngamma={}\neta={}\nj_design={}\nj_achieved_estimate={}\nj_achieved_stderr={}\n\
             truncation_steps={}\ntruncation_error_bound={:e}\nlhs={}\nrhs={}\nlhs_ok={}\n",
            self.discount,
            self.gamma,
            self.eta,
            self.j_design,
            self.j_achieved_estimate,
            self.j_achieved_stderr,
            self.truncation_steps,
            self.truncation_error_bound,
            self.lhs,
            self.rhs,
            self.lhs_ok
        )
    }
}

/// Smallest `T` with `max_cost · α^T / (1 − α) ≤ TRUNCATION_TOLERANCE`.
pub fn truncation_steps(max_cost: f64, discount: f64) -> usize {
    let mut t = 0;
    let mut tail = max_cost / (1.0 - discount);
    while tail > TRUNCATION_TOLERANCE {
        tail *= discount;
        t += 1;
    }
    t
}

/// Compares the design cost with a Monte Carlo estimate of the achieved
/// infinite-horizon cost:
///
/// ```text
/// (1 − αγ) J∞_est  ≤  J_N + α/(1 − α) η
/// ```
///
/// The rollout length is at least `min_steps` and long enough that the
/// ignored discounted tail is below [`TRUNCATION_TOLERANCE`].
pub fn bound_report(
    model: &PomdpModel,
    config: &SolveConfig,
    bound: BoundParams,
    initial_belief: &Belief,
    n_rollouts: usize,
    min_steps: usize,
    seed: u64,
) -> Result<BoundReport> {
    let alpha = config.discount;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidConfig(
            "discount must be < 1 for infinite-horizon quantities".into(),
        ));
    }
    let solved = SolvedController::solve(model, config, ControllerKind::DualSmpc)?;
    let stack = solved.policy_stack().expect("dual controller carries alpha vectors");
    let j_design = evaluate(stack, 0, initial_belief)?.value;

    let max_cost = model.max_stage_cost();
    let steps = truncation_steps(max_cost, alpha).max(min_steps);
    let truncation_error_bound = max_cost * alpha.powi(steps as i32) / (1.0 - alpha);
    let spec = RolloutSpec {
        initial_belief: initial_belief.clone(),
        initial_state: InitialState::SampleFromBelief,
        steps,
        model_id: String::new(),
    };
    let traces = batch_traces(&solved, &spec, n_rollouts, seed)?;
    let costs: Vec<f64> = traces.iter().map(SimTrace::cost_without_terminal).collect();
    let (mean, std) = mean_std(&costs);
    let lhs = (1.0 - alpha * bound.gamma()) * mean;
    let rhs = j_design + alpha / (1.0 - alpha) * bound.eta();
    Ok(BoundReport {
        discount: alpha,
        gamma: bound.gamma(),
        eta: bound.eta(),
        j_design,
        j_achieved_estimate: mean,
        j_achieved_stderr: std / (costs.len() as f64).sqrt(),
        truncation_steps: steps,
        truncation_error_bound,
        lhs,
        rhs,
        lhs_ok: lhs <= rhs,
    })
}
