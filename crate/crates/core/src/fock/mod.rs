//! Finite fermionic Fock spaces.
//!
//! Modes are ordered (species, spin, site) lexicographically and basis states
//! are bitmasks over that order; a ladder operator on mode `p` carries the
//! sign (−1)^(occupied modes before `p`).

pub mod basis;
pub mod builders;
pub mod evolve;
pub mod mode;
pub mod operator;
pub mod sparse;
pub mod vector;

pub use basis::{enumerate_basis, FockBasisState, FockSpace, Sector};
pub use builders::{build_one_body, build_two_body, number_operator, OneBodyCoeffs, TwoBodyCoeffs, TwoBodyTerm};
pub use evolve::{evolve, exp_hermitian, unitarity_error, SpectralPropagator};
pub use mode::{Mode, ModeSet, Species, Spin};
pub use operator::{expectation, FockOperator};
pub use sparse::CsrMatrix;
pub use vector::{apply_annihilation, apply_creation, FockVector};
