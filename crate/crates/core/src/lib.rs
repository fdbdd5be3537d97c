//! Exact numerics for EPRB-type spin entanglement of two fermion species.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`]: finite fermionic Fock spaces, signed ladder operators, one- and
//!   two-body operator builders and unitary evolution.
//! * [`eprb`]: the 16-dimensional first-quantized two-particle model, the
//!   equivalent four-mode Fock model, spin correlations and the least-squares
//!   entanglement estimator.
//! * [`field`]: free Schrödinger propagation of Gaussian packets, the
//!   first-order entanglement integral `L(t)` along several evaluation paths,
//!   the steepest-descent estimate, and an exactly solvable 1-D lattice.
//! * [`vacuum`]: the unitary that rotates the vacuum into the two-packet
//!   state, and the checks on operators transformed by it.
//! * [`verify`]: invariant suites with per-check tolerances, used by the CLI.
//!
//! All quantities use units with ħ = 1.

pub mod eprb;
pub mod error;
pub mod field;
pub mod fock;
pub mod linalg;
pub mod quadrature;
pub mod vacuum;
pub mod verify;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
