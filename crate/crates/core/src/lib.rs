//! Consensus weight optimization and cooperative bandit simulation.
//!
//! A team of agents plays a common multi-armed bandit and shares reward
//! information over a fixed undirected communication graph. Each round the
//! per-arm statistics are mixed by a symmetric doubly stochastic matrix `P`
//! (distributed averaging), so the spectral properties of `P` control how
//! fast the team reaches agreement on the arm means.
//!
//! This crate provides:
//!
//! * [`graph`] — undirected communication graphs, Laplacians, incidence
//!   matrices, and the built-in topology generators.
//! * [`spectral`] — a cyclic Jacobi eigensolver for symmetric matrices and
//!   the convergence metrics derived from it (asymptotic convergence factor
//!   and convergence time).
//! * [`weights`] — closed-form constructions of `P`: the Laplacian step-size
//!   rule and the constant-edge, maximum-degree, and local-degree heuristics.
//! * [`optimizer`] — projected subgradient solvers that minimize the spectral
//!   norm of `P - (1/M)11^T` over the edge weights, with and without the
//!   nonnegativity constraint.
//! * [`bandit`] — Gaussian bandit environments with seeded, stream-split RNG.
//! * [`coopucb2`] — the cooperative UCB decision rule and the running
//!   distributed-averaging consensus over a team of agents.
//! * [`metrics`] — team error, group regret, Monte-Carlo aggregation, and
//!   settling-time statistics.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the CLI
//! live in the companion `fastmix-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bandit;
pub mod coopucb2;
mod error;
pub mod graph;
pub mod matrix;
pub mod metrics;
pub mod optimizer;
pub mod spectral;
pub mod weights;

pub use error::Error;
pub use graph::Graph;
pub use matrix::Matrix;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
