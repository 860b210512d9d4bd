//! Numerical toolkit for the n-bit parity-oblivious multiplexing game.
//!
//! The crate builds the entanglement-assisted quantum strategy for the game,
//! the associated `2^(n-1) x n` Bell operator and its sum-of-squares
//! certificate, classical baselines (closed form, linear programming and
//! local-hidden-variable enumeration), a see-saw optimizer, and a seeded
//! Monte Carlo simulator of the protocol.

pub mod bell;
pub mod classical;
pub mod cli;
pub mod construct;
pub mod error;
pub mod game;
pub mod numerics;
pub mod random;
pub mod seesaw;
pub mod task;

pub use error::{PomError, Result};
