//! Optimal protection policies and insurance contract design for a user
//! whose cyber-security state evolves as a discounted Markov decision
//! process.
//!
//! The user picks a protection action in each state to minimize expected
//! discounted losses plus protection costs; an insurer offers a premium and
//! a coverage function. The crate provides:
//!
//! - [`model`], [`coverage`], [`policy`], [`evaluate`]: the MDP and exact
//!   policy evaluation;
//! - [`solvers`]: value iteration, a linear-programming route and brute-force
//!   enumeration;
//! - [`contracts`]: premiums, insurer profit, sweeps and the zero-profit region;
//! - [`analytic`]: closed forms for the two-state, two-action case;
//! - [`montecarlo`]: trajectory sampling;
//! - [`io`], [`reproduce`], [`cli`]: model files, CSV output and the studies.

pub mod analytic;
pub mod bundled;
pub mod cli;
pub mod contracts;
pub mod coverage;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod policy;
pub mod reproduce;
pub mod solvers;
#[doc(hidden)]
pub mod testutil;

pub use analytic::TwoStateModel;
pub use contracts::{ContractSweepRow, SweepOptions};
pub use coverage::CoveragePolicy;
pub use error::{Error, Result, ValidationError};
pub use evaluate::{decompose_value, evaluate_policy};
pub use io::{load_model, parse_model, save_model};
pub use model::{validate_model, MdpModel, RawModel};
pub use policy::{ProtectionPolicy, ValueVector};
pub use solvers::{solve_lp, solve_policy_enumeration, solve_value_iteration, SolveResult};
