//! Simulation and exact-certification laboratory for fractal percolation
//! and its projections.
//!
//! The crate samples realizations of the random nested-square construction,
//! computes their oblique, radial and co-radial shadows exactly at finite
//! level, certifies the finite covering inequality behind the
//! interval-in-projection theorems by exact sweep, replays the inductive
//! covering argument on sampled realizations, and runs reproducible Monte
//! Carlo campaigns against branching-process oracles.

pub mod branching;
pub mod code;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod matrix;
pub mod operator;
pub mod render;
pub mod replay;
pub mod rng;
pub mod tree;

pub use code::SquareCode;
pub use error::{PerclabError, Result};
pub use matrix::ProbabilityMatrix;
pub use tree::{sample_tree, survives_to_depth, RealizationTree};
