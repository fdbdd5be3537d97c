//! Two-particle spin entanglement: first-quantized and Fock-space models,
//! correlations, and the entanglement estimator.

pub mod analyzers;
pub mod estimator;
pub mod first_quantized;
pub mod fock_model;

pub use analyzers::{correlation_closed_form, sphere_grid, AnalyzerPair, CorrelationSample};
pub use estimator::{fit_two_gamma, FitReport};
pub use first_quantized::{build_g, build_u_e, build_xi, correlation_1q, FirstQuantizedModel};
pub use fock_model::{build_fock_g, build_fock_xi, correlation_fock, FockEprbModel};
