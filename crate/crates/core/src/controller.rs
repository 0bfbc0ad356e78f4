//! Receding-horizon controllers.
//!
//! The model is time-invariant, so the finite-horizon problem is solved once
//! and its first-stage policy is applied at every step. Both controllers run
//! the full Bayesian filter between decisions; they differ only in how a
//! belief becomes an action:
//!
//! - [`ControllerKind::DualSmpc`]: minimizing stage-0 alpha vector at the
//!   belief.
//! - [`ControllerKind::CeSmpc`]: fully observed stage-0 action at the most
//!   likely state.
//! - [`ControllerKind::CePointMass`]: stage-0 alpha vectors evaluated at a
//!   point mass on the most likely state. An alternative reading of
//!   certainty equivalence, kept for comparison.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::filter::{self, map_state};
use crate::model::{Belief, PomdpModel, SolveConfig};
use crate::solver::{self, MdpPolicy, PolicyStack};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    DualSmpc,
    CeSmpc,
    CePointMass,
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControllerKind::DualSmpc => "dual_smpc",
            ControllerKind::CeSmpc => "ce_smpc",
            ControllerKind::CePointMass => "ce_point_mass",
        })
    }
}

impl FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dual" | "dual_smpc" => Ok(ControllerKind::DualSmpc),
            "ce" | "ce_smpc" => Ok(ControllerKind::CeSmpc),
            "ce_point_mass" => Ok(ControllerKind::CePointMass),
            other => Err(Error::InvalidConfig(format!("unknown controller {other:?}"))),
        }
    }
}

#[derive(Debug)]
enum Policy {
    Alpha(PolicyStack),
    Mdp(MdpPolicy),
}

/// The offline half of a controller: model, configuration and the solved
/// policy. Shared between any number of running controllers.
#[derive(Debug)]
pub struct SolvedController {
    kind: ControllerKind,
    model: PomdpModel,
    config: SolveConfig,
    policy: Policy,
}

impl SolvedController {
    pub fn solve(model: &PomdpModel, config: &SolveConfig, kind: ControllerKind) -> Result<Arc<Self>> {
        if config.horizon == 0 {
            return Err(Error::InvalidConfig("controller needs horizon >= 1".into()));
        }
        let policy = match kind {
            ControllerKind::DualSmpc | ControllerKind::CePointMass => Policy::Alpha(solver::solve(model, config)?),
            ControllerKind::CeSmpc => Policy::Mdp(solver::solve_mdp(model, config)?),
        };
        Ok(Arc::new(SolvedController {
            kind,
            model: model.clone(),
            config: *config,
            policy,
        }))
    }

    pub fn kind(&self) -> ControllerKind {
        self.kind
    }

    pub fn model(&self) -> &PomdpModel {
        &self.model
    }

    pub fn config(&self) -> &SolveConfig {
        &self.config
    }

    pub fn policy_stack(&self) -> Option<&PolicyStack> {
        match &self.policy {
            Policy::Alpha(s) => Some(s),
            Policy::Mdp(_) => None,
        }
    }

    pub fn mdp_policy(&self) -> Option<&MdpPolicy> {
        match &self.policy {
            Policy::Mdp(p) => Some(p),
            Policy::Alpha(_) => None,
        }
    }

    /// First-stage action at `belief`.
    pub fn decide_at(&self, belief: &Belief) -> usize {
        match (&self.policy, self.kind) {
            (Policy::Alpha(stack), ControllerKind::DualSmpc) => {
                let set = &stack.per_stage[0];
                set.vectors[set.argmin(belief.as_slice()).1].action.expect("stage 0 vectors carry actions")
            }
            (Policy::Alpha(stack), _) => {
                let point = Belief::point(belief.len(), map_state(belief));
                let set = &stack.per_stage[0];
                set.vectors[set.argmin(point.as_slice()).1].action.expect("stage 0 vectors carry actions")
            }
            (Policy::Mdp(p), _) => p.actions[0][map_state(belief)],
        }
    }
}

/// A running controller: shared solved policy plus the current belief.
#[derive(Debug, Clone)]
pub struct ControllerState {
    solved: Arc<SolvedController>,
    belief: Belief,
}

/// Solves the policy and starts a controller at `initial_belief`.
pub fn init(
    model: &PomdpModel,
    config: &SolveConfig,
    kind: ControllerKind,
    initial_belief: Belief,
) -> Result<ControllerState> {
    let solved = SolvedController::solve(model, config, kind)?;
    ControllerState::start(solved, initial_belief)
}

impl ControllerState {
    pub fn start(solved: Arc<SolvedController>, belief: Belief) -> Result<Self> {
        solved.model.check_belief(&belief)?;
        Ok(ControllerState { solved, belief })
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    pub fn kind(&self) -> ControllerKind {
        self.solved.kind
    }

    pub fn solved(&self) -> &Arc<SolvedController> {
        &self.solved
    }

    pub fn decide(&self) -> usize {
        self.solved.decide_at(&self.belief)
    }

    /// Filters in the applied action and the received observation.
    pub fn advance(&self, action: usize, observation: usize) -> Result<Self> {
        let belief = filter::step(&self.solved.model, &self.belief, action, observation)?;
        Ok(ControllerState {
            solved: Arc::clone(&self.solved),
            belief,
        })
    }

    /// Decision at every point of the barycentric grid with `resolution`
    /// subdivisions, in lexicographic order of grid coordinates.
    pub fn action_map(&self, resolution: usize) -> Result<Vec<(Belief, usize)>> {
        if resolution == 0 {
            return Err(Error::InvalidConfig("grid resolution must be >= 1".into()));
        }
        Ok(simplex_grid(self.solved.model.n_states, resolution)
            .into_iter()
            .map(|b| {
                let a = self.solved.decide_at(&b);
                (b, a)
            })
            .collect())
    }
}

/// All beliefs `k / resolution` with non-negative integer `k` summing to
/// `resolution`, in lexicographic order of `k`.
pub fn simplex_grid(n: usize, resolution: usize) -> Vec<Belief> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(n, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut points = Vec::new();
    if n > 0 {
        rec(n, resolution, &mut Vec::with_capacity(n), &mut points);
    }
    points
        .into_iter()
        .map(|k| Belief::new(k.into_iter().map(|x| x as f64 / resolution as f64).collect()).expect("grid point sums to one"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::healthcare_model;

    const SKIP: usize = 0;
    const APPOINTMENT: usize = 1;
    const DIAGNOSE: usize = 2;
    const TREATMENT: usize = 3;

    fn b(v: &[f64]) -> Belief {
        Belief::new(v.to_vec()).unwrap()
    }

    #[test]
    fn init_requires_positive_horizon() {
        let m = healthcare_model();
        assert!(init(&m, &SolveConfig::new(0, 1.0), ControllerKind::DualSmpc, Belief::uniform(3)).is_err());
        let c = init(&m, &SolveConfig::new(4, 1.0), ControllerKind::DualSmpc, Belief::uniform(3)).unwrap();
        assert!(!c.solved().policy_stack().unwrap().per_stage[0].is_empty());
        let c = init(&m, &SolveConfig::new(6, 1.0), ControllerKind::CeSmpc, Belief::uniform(3)).unwrap();
        assert_eq!(c.solved().mdp_policy().unwrap().actions[0].len(), 3);
    }

    #[test]
    fn ce_decisions_follow_most_likely_state() {
        let m = healthcare_model();
        let cfg = SolveConfig::new(6, 1.0);
        let c = init(&m, &cfg, ControllerKind::CeSmpc, b(&[0.2, 0.5, 0.3])).unwrap();
        assert_eq!(c.decide(), TREATMENT);
        let c = init(&m, &cfg, ControllerKind::CeSmpc, b(&[0.6, 0.3, 0.1])).unwrap();
        assert_eq!(c.decide(), SKIP);
    }

    #[test]
    fn dual_one_step_decision() {
        let m = healthcare_model();
        let c = init(&m, &SolveConfig::new(1, 1.0), ControllerKind::DualSmpc, Belief::point(3, 2)).unwrap();
        assert_eq!(c.decide(), APPOINTMENT);
        assert_eq!(c.decide(), c.decide());
    }

    #[test]
    fn advance_runs_the_filter() {
        let m = healthcare_model();
        let c = init(&m, &SolveConfig::new(2, 1.0), ControllerKind::DualSmpc, Belief::uniform(3)).unwrap();
        let next = c.advance(DIAGNOSE, 1).unwrap();
        for (x, y) in next.belief().as_slice().iter().zip([0.05, 0.9, 0.05]) {
            assert!((x - y).abs() < 1e-12);
        }
        let next = c.advance(SKIP, 0).unwrap();
        let pred = filter::predict(&m, c.belief(), SKIP).unwrap();
        for (x, y) in next.belief().as_slice().iter().zip(pred.as_slice()) {
            assert!((x - y).abs() < 1e-15);
        }
        let c = ControllerState::start(Arc::clone(c.solved()), Belief::point(3, 2)).unwrap();
        assert_eq!(c.advance(TREATMENT, 2).unwrap().belief(), &Belief::point(3, 2));
    }

    #[test]
    fn grid_order_and_vertices() {
        let g = simplex_grid(3, 1);
        let pts: Vec<&[f64]> = g.iter().map(|b| b.as_slice()).collect();
        assert_eq!(pts, vec![&[0.0, 0.0, 1.0][..], &[0.0, 1.0, 0.0][..], &[1.0, 0.0, 0.0][..]]);
        assert_eq!(simplex_grid(3, 50).len(), 51 * 52 / 2);
    }
}
