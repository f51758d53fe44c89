//! Conventional (ancilla-free) strategies for the King's Problem.
//!
//! A physicist prepares a `d`-level system, a king measures it in one of
//! `d + 1` mutually unbiased bases, the physicist performs one control
//! measurement and must then name the king's outcome. This crate builds the
//! bases, evaluates and optimizes physicist strategies, computes the closed
//! form upper bounds on the success probability, searches the two-qubit
//! case exhaustively for strategies that saturate the bound, and simulates
//! every game by Monte Carlo as an independent check.
//!
//! Module map:
//!
//! * [`qstate`]: dense complex state vectors, Born probabilities, spin states.
//! * [`mub`]: mutually unbiased bases for prime `d` and for `d = 4`.
//! * [`strategy`]: assignment maps, well-conditioning repair, exact success.
//! * [`bounds`]: closed-form bounds and the relaxed numerical maximizer.
//! * [`search`]: exhaustive `d = 4` signal-state search and the `d = 3`
//!   impossibility certificate.
//! * [`cube`]: the qubit variant where the king measures along a cube
//!   body diagonal.
//! * [`game`]: seeded Monte Carlo simulation of the full protocol.
//! * [`tables`]: machine-readable reproductions of the reference tables.
//! * [`verify`]: the acceptance criteria as a runnable report.

pub mod bounds;
pub mod cube;
mod error;
pub mod game;
pub mod io;
mod matching;
pub mod mub;
mod optim;
pub mod qstate;
pub mod search;
pub mod strategy;
pub mod tables;
mod tolerance;
pub mod verify;

pub use error::{Error, Result};
pub use matching::{max_weight_bijection, max_weight_bijection_brute_force};
pub use mub::{certify_family, construct_mub, CertificationReport, MubFamily, OrthonormalBasis};
pub use qstate::{
    born_probability, inner, spin_up_state, tensor, Amplitude, BlochDirection, StateVector,
};
pub use strategy::{AssignmentMap, ConventionalStrategy, GeneralStrategy, SuccessBreakdown};
pub use tolerance::Tolerances;
