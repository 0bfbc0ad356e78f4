//! Seeded generators shared by the integration tests.

#![allow(dead_code)]

use pomdp_smpc::rng::SimRng;
use pomdp_smpc::{Belief, PomdpModel};

/// A probability row with roughly a quarter of its entries zeroed.
pub fn random_row(rng: &mut SimRng, n: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n)
            .map(|_| if rng.uniform() < 0.25 { 0.0 } else { rng.uniform() })
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 1e-3 {
            return raw.into_iter().map(|x| x / total).collect();
        }
    }
}

pub fn random_model(rng: &mut SimRng, n: usize, m: usize, o: usize) -> PomdpModel {
    let transition = (0..m).map(|_| (0..n).map(|_| random_row(rng, n)).collect()).collect();
    let observation = (0..m).map(|_| (0..n).map(|_| random_row(rng, o)).collect()).collect();
    let stage_cost = (0..m).map(|_| (0..n).map(|_| (rng.uniform() * 10.0).floor()).collect()).collect();
    let terminal = (0..n).map(|_| (rng.uniform() * 30.0).floor()).collect();
    PomdpModel::new(transition, observation, stage_cost, terminal).expect("generated rows are stochastic")
}

/// Uniform draw from the probability simplex.
pub fn random_belief(rng: &mut SimRng, n: usize) -> Belief {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    Belief::new(w).expect("positive weights")
}
