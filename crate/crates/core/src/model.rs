//! Finite POMDP data: model arrays, beliefs, solver configuration and
//! validation.
//!
//! Index conventions (all zero-based):
//!
//! - `transition[a][i][j]` = P(x' = j | x = i, u = a)
//! - `observation[a][j][o]` = P(y = o | x' = j, u = a)
//! - `stage_cost[a][i]` = cost of applying `a` in state `i`
//! - `terminal_cost[i]` = cost of ending in state `i`

use std::fmt;

use crate::error::{Error, Result};

/// Row sums must lie within this distance of 1.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Row-sum error attributable to floating-point summation alone.
pub const RENORMALIZE_SLACK: f64 = 1e-15;

/// Default cap on the number of vectors an unpruned cross-sum may produce.
pub const DEFAULT_VECTOR_CAP: usize = 1_000_000;

/// Optional human-readable names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels {
    pub states: Option<Vec<String>>,
    pub actions: Option<Vec<String>>,
    pub observations: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PomdpModel {
    pub n_states: usize,
    pub n_actions: usize,
    pub n_observations: usize,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub observation: Vec<Vec<Vec<f64>>>,
    pub stage_cost: Vec<Vec<f64>>,
    pub terminal_cost: Vec<f64>,
    pub labels: Labels,
}

impl PomdpModel {
    /// Builds a model, validates it and renormalizes rows that are within
    /// tolerance of summing to one.
    pub fn new(
        transition: Vec<Vec<Vec<f64>>>,
        observation: Vec<Vec<Vec<f64>>>,
        stage_cost: Vec<Vec<f64>>,
        terminal_cost: Vec<f64>,
    ) -> Result<Self> {
        let n_actions = transition.len();
        let n_states = terminal_cost.len();
        let n_observations = observation
            .first()
            .and_then(|o| o.first())
            .map_or(0, |row| row.len());
        PomdpModel {
            n_states,
            n_actions,
            n_observations,
            transition,
            observation,
            stage_cost,
            terminal_cost,
            labels: Labels::default(),
        }
        .validated()
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        let check = |names: &Option<Vec<String>>, n: usize, what: &str| match names {
            Some(v) if v.len() != n => Err(Error::DimensionMismatch(format!(
                "{} {what} labels for {n} {what}",
                v.len()
            ))),
            _ => Ok(()),
        };
        check(&labels.states, self.n_states, "states")?;
        check(&labels.actions, self.n_actions, "actions")?;
        check(&labels.observations, self.n_observations, "observations")?;
        self.labels = labels;
        Ok(self)
    }

    /// Checks every invariant and renormalizes near-stochastic rows so they
    /// sum to one. Rows whose sum is off only by summation rounding
    /// (`RENORMALIZE_SLACK`) are left untouched, so decimal literals such as
    /// `0.05` survive loading bit-for-bit.
    pub fn validated(mut self) -> Result<Self> {
        let report = validate_model(&self);
        if !report.is_ok() {
            return Err(Error::InvalidModel(report.violations));
        }
        for mat in self.transition.iter_mut().chain(self.observation.iter_mut()) {
            for row in mat.iter_mut() {
                let s: f64 = row.iter().sum();
                if (s - 1.0).abs() > RENORMALIZE_SLACK {
                    row.iter_mut().for_each(|p| *p /= s);
                }
            }
        }
        Ok(self)
    }

    pub fn check_action(&self, action: usize) -> Result<()> {
        if action < self.n_actions {
            Ok(())
        } else {
            Err(Error::ActionOutOfRange {
                action,
                n_actions: self.n_actions,
            })
        }
    }

    pub fn check_observation(&self, observation: usize) -> Result<()> {
        if observation < self.n_observations {
            Ok(())
        } else {
            Err(Error::ObservationOutOfRange {
                observation,
                n_observations: self.n_observations,
            })
        }
    }

    pub fn check_belief(&self, belief: &Belief) -> Result<()> {
        if belief.len() == self.n_states {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "belief has {} entries, model has {} states",
                belief.len(),
                self.n_states
            )))
        }
    }

    pub fn action_name(&self, action: usize) -> String {
        label_or_index(&self.labels.actions, action)
    }

    pub fn state_name(&self, state: usize) -> String {
        label_or_index(&self.labels.states, state)
    }

    pub fn observation_name(&self, observation: usize) -> String {
        label_or_index(&self.labels.observations, observation)
    }

    /// Resolves an action given either its label or its index.
    pub fn action_index(&self, name: &str) -> Option<usize> {
        resolve(&self.labels.actions, self.n_actions, name)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        resolve(&self.labels.states, self.n_states, name)
    }

    /// Largest stage-cost entry over all actions and states.
    pub fn max_stage_cost(&self) -> f64 {
        self.stage_cost
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }
}

fn label_or_index(names: &Option<Vec<String>>, i: usize) -> String {
    names
        .as_ref()
        .and_then(|v| v.get(i).cloned())
        .unwrap_or_else(|| i.to_string())
}

fn resolve(names: &Option<Vec<String>>, n: usize, name: &str) -> Option<usize> {
    if let Some(i) = names.as_ref().and_then(|v| v.iter().position(|s| s == name)) {
        return Some(i);
    }
    name.parse::<usize>().ok().filter(|&i| i < n)
}

/// One failed model invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Array and index, e.g. `transition[0][2]`.
    pub location: String,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    RowSum(f64),
    NegativeProbability(f64),
    NonFiniteProbability(f64),
    InvalidCost(f64),
    Dimension { expected: usize, found: usize },
    EmptySpace,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::RowSum(s) => write!(f, "{} row sum {} ≠ 1", self.location, s),
            ViolationKind::NegativeProbability(p) => {
                write!(f, "{} negative probability {}", self.location, p)
            }
            ViolationKind::NonFiniteProbability(p) => {
                write!(f, "{} non-finite probability {}", self.location, p)
            }
            ViolationKind::InvalidCost(c) => {
                write!(f, "{} cost {} is not finite and non-negative", self.location, c)
            }
            ViolationKind::Dimension { expected, found } => write!(
                f,
                "{} has length {}, expected {}",
                self.location, found, expected
            ),
            ViolationKind::EmptySpace => write!(f, "{} must be positive", self.location),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return writeln!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        Ok(())
    }
}

/// Checks every model invariant. Violations are reported as data; this
/// never fails.
pub fn validate_model(model: &PomdpModel) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |location: String, kind: ViolationKind| out.push(Violation { location, kind });

    for (name, n) in [
        ("n_states", model.n_states),
        ("n_actions", model.n_actions),
        ("n_observations", model.n_observations),
    ] {
        if n == 0 {
            push(name.to_string(), ViolationKind::EmptySpace);
        }
    }

    let mut dim = |location: String, expected: usize, found: usize| -> bool {
        if expected != found {
            push(location, ViolationKind::Dimension { expected, found });
            false
        } else {
            true
        }
    };
    let mut shape_ok = dim("transition".into(), model.n_actions, model.transition.len())
        & dim("observation".into(), model.n_actions, model.observation.len())
        & dim("stage_cost".into(), model.n_actions, model.stage_cost.len())
        & dim("terminal_cost".into(), model.n_states, model.terminal_cost.len());
    for (a, mat) in model.transition.iter().enumerate() {
        shape_ok &= dim(format!("transition[{a}]"), model.n_states, mat.len());
        for (i, row) in mat.iter().enumerate() {
            shape_ok &= dim(format!("transition[{a}][{i}]"), model.n_states, row.len());
        }
    }
    for (a, mat) in model.observation.iter().enumerate() {
        shape_ok &= dim(format!("observation[{a}]"), model.n_states, mat.len());
        for (j, row) in mat.iter().enumerate() {
            shape_ok &= dim(format!("observation[{a}][{j}]"), model.n_observations, row.len());
        }
    }
    for (a, row) in model.stage_cost.iter().enumerate() {
        shape_ok &= dim(format!("stage_cost[{a}]"), model.n_states, row.len());
    }
    let _ = shape_ok;

    for (kind, arrays) in [("transition", &model.transition), ("observation", &model.observation)] {
        for (a, mat) in arrays.iter().enumerate() {
            for (i, row) in mat.iter().enumerate() {
                let location = format!("{kind}[{a}][{i}]");
                let mut entries_ok = true;
                for &p in row {
                    if !p.is_finite() {
                        push(location.clone(), ViolationKind::NonFiniteProbability(p));
                        entries_ok = false;
                    } else if p < 0.0 {
                        push(location.clone(), ViolationKind::NegativeProbability(p));
                        entries_ok = false;
                    }
                }
                let s: f64 = row.iter().sum();
                if entries_ok && (s - 1.0).abs() > ROW_TOLERANCE {
                    push(location, ViolationKind::RowSum(s));
                }
            }
        }
    }

    for (a, row) in model.stage_cost.iter().enumerate() {
        for (i, &c) in row.iter().enumerate() {
            if !(c.is_finite() && c >= 0.0) {
                push(format!("stage_cost[{a}][{i}]"), ViolationKind::InvalidCost(c));
            }
        }
    }
    for (i, &c) in model.terminal_cost.iter().enumerate() {
        if !(c.is_finite() && c >= 0.0) {
            push(format!("terminal_cost[{i}]"), ViolationKind::InvalidCost(c));
        }
    }

    ValidationReport { violations: out }
}

/// Expected one-step cost `belief · stage_cost[action]`.
pub fn expected_stage_cost(model: &PomdpModel, belief: &Belief, action: usize) -> Result<f64> {
    model.check_action(action)?;
    model.check_belief(belief)?;
    Ok(dot(belief.as_slice(), &model.stage_cost[action]))
}

/// Terminal value `belief · terminal_cost`.
pub fn terminal_value(model: &PomdpModel, belief: &Belief) -> f64 {
    dot(belief.as_slice(), &model.terminal_cost)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A probability distribution over states. Always normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief(Vec<f64>);

impl Belief {
    /// Normalizes a non-negative, non-zero weight vector.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidBelief("empty vector".into()));
        }
        if let Some(p) = weights.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidBelief(format!("entry {p} is not a finite non-negative number")));
        }
        let s: f64 = weights.iter().sum();
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::InvalidBelief("weights sum to zero".into()));
        }
        Ok(Belief(weights.into_iter().map(|p| p / s).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Belief(vec![1.0 / n as f64; n])
    }

    /// Point mass on `state`.
    pub fn point(n: usize, state: usize) -> Self {
        let mut p = vec![0.0; n];
        p[state] = 1.0;
        Belief(p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for Belief {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// How alpha-vector sets are reduced after each backup step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PruneMode {
    /// Pointwise dominance only.
    DominanceOnly,
    /// Dominance followed by witness linear programs.
    #[default]
    ExactLp,
}

impl std::str::FromStr for PruneMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dominance_only" | "dominance" => Ok(PruneMode::DominanceOnly),
            "exact_lp" | "lp" => Ok(PruneMode::ExactLp),
            other => Err(Error::InvalidConfig(format!("unknown pruning mode {other:?}"))),
        }
    }
}

impl fmt::Display for PruneMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PruneMode::DominanceOnly => "dominance_only",
            PruneMode::ExactLp => "exact_lp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub horizon: usize,
    pub discount: f64,
    pub prune_mode: PruneMode,
    pub prune_tolerance: f64,
    /// Largest unpruned cross-sum the solver will form.
    pub vector_cap: usize,
}

impl SolveConfig {
    pub fn new(horizon: usize, discount: f64) -> Self {
        SolveConfig {
            horizon,
            discount,
            prune_mode: PruneMode::ExactLp,
            prune_tolerance: 1e-9,
            vector_cap: DEFAULT_VECTOR_CAP,
        }
    }

    pub fn with_prune_mode(mut self, mode: PruneMode) -> Self {
        self.prune_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.discount) {
            return Err(Error::InvalidConfig(format!(
                "discount {} outside [0, 1]",
                self.discount
            )));
        }
        if !(self.prune_tolerance >= 0.0 && self.prune_tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "prune tolerance {} must be finite and non-negative",
                self.prune_tolerance
            )));
        }
        Ok(())
    }
}

/// Constants of the receding-horizon performance bound. There are no
/// defaults; callers choose both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    gamma: f64,
    eta: f64,
}

impl BoundParams {
    pub fn new(gamma: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidConfig(format!("gamma {gamma} outside [0, 1]")));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("eta {eta} must be finite and >= 0")));
        }
        Ok(BoundParams { gamma, eta })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::healthcare_model;
    use proptest::prelude::*;

    fn identity_model() -> PomdpModel {
        PomdpModel::new(vec![vec![vec![1.0]]], vec![vec![vec![1.0]]], vec![vec![0.0]], vec![0.0])
            .unwrap()
    }

    #[test]
    fn healthcare_is_valid() {
        assert!(validate_model(&healthcare_model()).is_ok());
    }

    #[test]
    fn degenerate_identity_model_is_valid() {
        assert!(validate_model(&identity_model()).is_ok());
    }

    #[test]
    fn row_sum_defect_is_reported() {
        let mut m = healthcare_model();
        m.transition[0][0] = vec![0.8, 0.1, 0.0];
        let report = validate_model(&m);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.location, "transition[0][0]");
        match v.kind {
            ViolationKind::RowSum(s) => assert!((s - 0.9).abs() < 1e-12),
            ref k => panic!("unexpected {k:?}"),
        }
        assert!(v.to_string().contains("row sum 0.9"));
    }

    #[test]
    fn dimension_and_cost_defects() {
        let mut m = identity_model();
        m.stage_cost[0] = vec![-1.0];
        m.terminal_cost.push(0.0);
        let report = validate_model(&m);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::InvalidCost(c) if c == -1.0)));
        assert!(report
            .violations
            .iter()
            .any(|v| v.location == "terminal_cost"));
    }

    #[test]
    fn near_stochastic_rows_are_renormalized() {
        let m = PomdpModel::new(
            vec![vec![vec![0.5 + 4e-10, 0.5], vec![0.0, 1.0]]],
            vec![vec![vec![1.0], vec![1.0]]],
            vec![vec![0.0, 0.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        let s: f64 = m.transition[0][0].iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stage_cost_examples() {
        let m = healthcare_model();
        let b = |v: Vec<f64>| Belief::new(v).unwrap();
        assert_eq!(expected_stage_cost(&m, &b(vec![1.0, 0.0, 0.0]), 0).unwrap(), 0.0);
        let third = 1.0 / 3.0;
        let c = expected_stage_cost(&m, &b(vec![third, third, third]), 1).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        assert_eq!(expected_stage_cost(&m, &b(vec![0.0, 1.0, 0.0]), 3).unwrap(), 2.0);
        assert!(matches!(
            expected_stage_cost(&m, &Belief::uniform(3), 4),
            Err(Error::ActionOutOfRange { action: 4, .. })
        ));
    }

    #[test]
    fn terminal_value_examples() {
        let m = healthcare_model();
        assert_eq!(terminal_value(&m, &Belief::point(3, 0)), 0.0);
        assert_eq!(terminal_value(&m, &Belief::point(3, 2)), 30.0);
        assert!((terminal_value(&m, &Belief::uniform(3)) - 34.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_belief_is_rejected() {
        assert!(Belief::new(vec![0.0, 0.0]).is_err());
        assert!(Belief::new(vec![]).is_err());
        assert!(Belief::new(vec![1.0, -0.1]).is_err());
    }

    #[test]
    fn bound_params_ranges() {
        assert!(BoundParams::new(1.0, 0.0).is_ok());
        assert!(BoundParams::new(1.1, 0.0).is_err());
        assert!(BoundParams::new(0.5, -1.0).is_err());
    }

    fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..10.0, n).prop_filter("nonzero", |v| v.iter().sum::<f64>() > 1e-6)
    }

    proptest! {
        #[test]
        fn belief_construction_normalizes(w in weights(5)) {
            let b = Belief::new(w).unwrap();
            let s: f64 = b.as_slice().iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
        }

        #[test]
        fn costs_are_linear_in_belief(w1 in weights(3), w2 in weights(3), lam in 0.0f64..=1.0, a in 0usize..4) {
            let m = healthcare_model();
            let p1 = Belief::new(w1).unwrap();
            let p2 = Belief::new(w2).unwrap();
            let mix: Vec<f64> = p1.as_slice().iter().zip(p2.as_slice())
                .map(|(x, y)| lam * x + (1.0 - lam) * y).collect();
            let mix = Belief::new(mix).unwrap();
            let lhs = expected_stage_cost(&m, &mix, a).unwrap();
            let rhs = lam * expected_stage_cost(&m, &p1, a).unwrap()
                + (1.0 - lam) * expected_stage_cost(&m, &p2, a).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-12);
            let lhs = terminal_value(&m, &mix);
            let rhs = lam * terminal_value(&m, &p1) + (1.0 - lam) * terminal_value(&m, &p2);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
