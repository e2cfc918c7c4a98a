//! Desk-scale world-to-policy transfer.
//!
//! A scripted occupancy-grid world model, a trajectory reward engine, a
//! learned linear reward model, a reward-guided teacher planner and a
//! single-shot student distilled from it, plus open- and closed-loop
//! evaluation.

pub mod config;
pub mod error;
pub mod eval;
pub mod geom;
pub mod grid;
pub mod kinematics;
pub mod learned;
pub mod pipeline;
pub mod policy;
pub mod reward;
pub mod rng;
pub mod world;

pub use error::{Error, Result};
