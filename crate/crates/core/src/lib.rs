//! Simulation of controlled-Z gates between two three-level giant atoms that
//! couple at several points to a finite one-dimensional coupled-cavity array.
//!
//! The crate is organised bottom-up:
//!
//! - [`hilbert`]: system description and the fixed-excitation bases.
//! - [`operators`]: sparse projected Hamiltonians, Hermitian or with decay.
//! - [`propagator`]: Krylov time evolution of state vectors.
//! - [`interference`]: band dispersion and decoherence-free frequencies.
//! - [`tomography`]: populations, reduced density matrices, Choi matrices
//!   and process fidelity.
//! - [`protocol`]: gate presets, Lamb-shift calibration, gate runs and
//!   coupling-strength sweeps.
//!
//! All energies are in units of the inter-cavity hopping `J` and all times in
//! units of `1/J`.

pub mod error;
pub mod hilbert;
pub mod interference;
pub mod operators;
pub mod propagator;
pub mod protocol;
pub mod tomography;

mod par;

pub use error::{Error, Result};
pub use hilbert::{AtomSpec, Basis, BasisState, CouplingPoint, LatticeSpec, Sector, SystemSpec};
pub use operators::{build_effective_hamiltonian, build_hamiltonian, SparseOperator};
pub use propagator::{evolve, KrylovSettings, StateVector, TimeGrid};
pub use tomography::{ChoiMatrix, GateResult, ReducedDensityMatrix};
