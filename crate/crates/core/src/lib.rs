//! Trapped-ion Coulomb crystals coupled dispersively to a pumped optical
//! cavity mode.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`]: physical constants of trap, ions, cavity and baths, and the
//!   scalar cavity mean-field quantities derived from them.
//! * [`crystal`]: total potential (trap + Coulomb + cavity), equilibrium
//!   search and the free-space linear–zigzag critical frequency.
//! * [`softmode`]: Landau-type potential of the zigzag mode and minima
//!   counting.
//! * [`linearized`]: normal modes, cavity–mode couplings, drift matrix and
//!   stability analysis of the linearized fluctuations.
//! * [`steadystate`]: stationary covariance, mode occupations, output
//!   spectrum and logarithmic negativity.
//! * [`sweep`]: pump-power sweeps, hysteresis traces and bistability windows.
//!
//! Internally every frequency is an angular frequency in rad/s, lengths are
//! in metres and energies in joules.

pub mod config;
pub mod constants;
pub mod crystal;
mod error;
pub mod export;
pub mod linalg;
pub mod linearized;
pub mod params;
pub mod softmode;
pub mod steadystate;
pub mod sweep;

pub use crate::error::{Error, Result};
pub use crate::params::{MeanField, Position, SystemParams};
