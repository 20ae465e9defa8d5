//! Perturbation bounds for invariant probability vectors of stochastic matrices.
//!
//! Given an irreducible stochastic matrix `P` and a matrix `P̃` that differs from
//! it only on the rows of a set `W`, the total variation distance between their
//! invariant vectors is at most `Ψ(t_mix / (γ̃_W τ*_W))`. This crate computes
//! every ingredient of that bound exactly (or with an explicit bound tag), the
//! bound itself, and the exact distance for comparison.

pub mod analysis;
pub mod applications;
pub mod bounds;
pub mod config;
pub mod error;
pub mod generators;
pub mod io;
pub mod stationary;
pub mod stochastic;
pub mod tagged;
pub mod verify;

pub use config::{SolverConfig, Tolerances};
pub use error::{Error, Result};
pub use stochastic::{
    apply_perturbation, tv_distance, tv_subset_witness, PerturbationSpec, ProbVector, StateSpace,
    StochasticMatrix,
};
pub use tagged::{Method, Tagged};
