//! Dual-optimal stochastic model predictive control on finite POMDPs.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: finite POMDP data, beliefs, configuration and validation.
//! - [`filter`]: the discrete Bayesian filter over a model.
//! - [`solver`]: exact finite-horizon alpha-vector backups, a brute-force
//!   belief-tree oracle and the fully observed MDP recursion.
//! - [`controller`]: receding-horizon controllers (dual and certainty
//!   equivalent) sharing one interface.
//! - [`sim`]: seeded closed-loop Monte Carlo, traces and batch statistics.
//! - [`io`]: the `.pomdp` text format, policy files and the built-in
//!   healthcare model.
//!
//! Everything is cost-minimising.

pub mod controller;
pub mod error;
pub mod filter;
pub mod fmt;
pub mod io;
pub mod lp;
pub mod model;
pub mod rng;
pub mod sim;
pub mod solver;

pub use controller::{ControllerKind, ControllerState};
pub use error::{Error, Result};
pub use model::{BoundParams, Belief, PomdpModel, PruneMode, SolveConfig};
pub use solver::{AlphaVector, AlphaVectorSet, MdpPolicy, PolicyStack};
