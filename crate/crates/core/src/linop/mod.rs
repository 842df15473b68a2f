//! The linear fluctuation operator, its eigensystem and the special modes.

pub mod analytic;
pub mod eigen;
pub mod hopf;
pub mod operator;

pub use analytic::analytic_modes_mu1;
pub use eigen::{eigensystem, spectrum, EigenSystem, ModeTag, Parity};
pub use hopf::{find_hopf_threshold, HopfPoint};
pub use operator::{
    alpha0, alpha0_from_field, background_eigenvalues, build_operators, build_operators_from_field,
    goldstone_vector, momentum_vector, Alpha0Field, LinearOperatorMatrix, OperatorKind,
};
