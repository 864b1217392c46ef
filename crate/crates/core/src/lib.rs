//! Two bosons in a tilted extended Bose-Hubbard chain: exact two-particle
//! spectra, bound-pair bands, and quench dynamics in a linear field.

// negated float comparisons below deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound_band;
pub mod error;
pub mod export;
pub mod hubbard;
pub mod linalg;
pub mod period;
pub mod propagate;
pub mod quench;
pub mod spectrum;
pub mod three_site;

pub use bound_band::{
    band_scan, solve_bound_states, BandStructure, BoundProjector, BoundState, Branch,
};
pub use error::{Error, Result};
pub use hubbard::{build_h0, build_hamiltonian, build_stark, Boundary, ModelParams, TwoBosonBasis};
pub use linalg::{StateVector, SymmetricEigen, SymmetricOperator};
pub use propagate::Backend;
pub use quench::{QuenchSetup, QuenchTrajectory, WavePacketSpec};
