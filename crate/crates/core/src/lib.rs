//! Exploration with randomized value functions on tabular, time-inhomogeneous,
//! finite-horizon MDPs.
//!
//! The crate provides:
//! - exact dynamic programming on tabular MDPs ([`mdp`]),
//! - count-based empirical models with `n + 1` / `max(n, 1)` denominators ([`estimators`]),
//! - single-seed randomized planning (Hoeffding and Bernstein noise), an RLSVI
//!   baseline with one Gaussian per `(h, s, a)`, and a UCBVI baseline ([`agents`]),
//! - the deep-sea benchmark and a seeded random-MDP generator ([`environments`]),
//! - runtime checks of confidence sets, noise envelopes and optimism/pessimism
//!   ([`diagnostics`]),
//! - a seeded multi-trial regret harness with CSV/JSONL output ([`harness`]).
//!
//! Indices are 0-based throughout: steps `h` run over `0..H`, value tables carry an
//! extra terminal row `V[H] = 0`.

pub mod agents;
pub mod diagnostics;
pub mod environments;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod mdp;
pub mod rng;

pub use agents::{Algorithm, NoiseKind, NoiseSpec, PlanResult, Planner};
pub use environments::{deep_sea, random_mdp, DeepSeaSpec};
pub use error::{Error, Result};
pub use estimators::EmpiricalModel;
pub use harness::{run_experiment, ExperimentConfig, RegretCurve};
pub use mdp::{Dims, Policy, RewardKind, TabularMdp, ValueTable};
