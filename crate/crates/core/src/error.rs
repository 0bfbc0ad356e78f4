use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("invalid model: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("action index {action} out of range (model has {n_actions} actions)")]
    ActionOutOfRange { action: usize, n_actions: usize },

    #[error("observation index {observation} out of range (model has {n_observations} observations)")]
    ObservationOutOfRange {
        observation: usize,
        n_observations: usize,
    },

    #[error("state index {state} out of range (model has {n_states} states)")]
    StateOutOfRange { state: usize, n_states: usize },

    #[error("stage {stage} out of range for horizon {horizon}")]
    StageOutOfRange { stage: usize, horizon: usize },

    /// The observation has zero probability under the predicted belief.
    #[error("observation {observation} has zero likelihood after action {action}")]
    ZeroLikelihood { action: usize, observation: usize },

    #[error("resource limit exceeded: {what} needs {needed}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("linear program failed while pruning vector {vector_index}: {reason}")]
    LpFailure { vector_index: usize, reason: String },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
