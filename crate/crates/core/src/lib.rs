//! Compiles 3-CNF formulas into finite-horizon MDPs whose action values are
//! exactly linear in a fixed feature map for every greedy and every softmax
//! policy of a stage-wise parameterization, and evaluates, solves and checks
//! those instances exactly.
//!
//! Layout:
//! - [`cnf`]: formulas, DIMACS input, the ordered clause universe
//! - [`mdp`]: the assignment-tree MDP and its generative model
//! - [`features`]: policy parameterization and realizability vectors
//! - [`policies`]: exact policy evaluation and trajectory tools
//! - [`reduction`]: turning an RL solver into a Max-3SAT decider, and the
//!   concentration bounds used by the softmax variant
//! - [`verify`]: named invariant suites with machine-readable results

pub mod cnf;
pub mod error;
pub mod features;
pub mod frac;
pub mod generate;
pub mod mdp;
pub mod policies;
pub mod reduction;
pub mod rng;
pub mod verify;

pub use cnf::{Assignment, Clause, ClauseUniverse, Formula, Literal};
pub use error::{Error, Result};
pub use features::{GreedyWeight, PolicyParams, RealizabilityFeature, SoftmaxWeight};
pub use mdp::{build_mdp, Action, MdpInstance, State};
pub use num_rational::Rational64;
