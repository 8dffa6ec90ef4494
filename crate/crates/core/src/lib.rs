//! Simulation of a mediator steering two no-regret learners in a repeated
//! Bayesian investment game through signaling and payments.

pub mod analysis;
pub mod bandit;
pub mod engine;
pub mod error;
pub mod game;
pub mod harness;
pub mod stackelberg;

pub use error::{Error, Result};
