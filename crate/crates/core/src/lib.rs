//! Branching random walks with voting, their grid recursion, and the
//! traveling waves that describe the limiting cluster shapes.

pub mod bernstein;
pub mod cli;
pub mod config;
pub mod error;
pub mod grid;
pub mod increments;
pub mod mc;
pub mod models;
pub mod rng;
pub mod scalar;
pub mod wave;

pub use bernstein::BernsteinPoly;
pub use error::{Error, Result};
pub use models::{analyze, analyze_exact, Nonlinearity, Rule, VotingModel};
pub use scalar::Scalar;
