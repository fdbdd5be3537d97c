//! Field dynamics: free propagation of Gaussian packets, the first-order
//! entanglement integral L(t) and its limits, and an exactly solvable lattice.

pub mod coupling;
pub mod entanglement;
pub mod green;
pub mod lattice;
pub mod wavepacket;

pub use coupling::{CouplingProfile, GridSpec, TimeProfile};
pub use entanglement::{
    correlation_field, entanglement_l_gaussian, entanglement_l_point, entanglement_l_quadrature, steepest_descent_l,
    FieldScenario, LSettings, SteepestDescent, ValidityReport,
};
pub use green::{greens_function, greens_function_1d};
pub use lattice::{
    lattice_exact_correlation, lattice_perturbative_correlation, perturbation_order_scan, LatticeConfig, LatticeExact,
    LatticePropagator, LatticeScenario, OrderScan,
};
pub use wavepacket::{propagate_gaussian, Wavepacket};
