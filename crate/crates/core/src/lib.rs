//! Boson-fermion nanoparticle Hamiltonians on a truncated Fock space, their
//! displaced-oscillator spectra, and numerical checks of the Gazeau-Klauder
//! properties of the associated (vector) coherent states.
//!
//! Module layout:
//! - [`fock`]: truncated tensor bases, ladder operators, fermionic hops, evolution.
//! - [`model`]: parameters, sector scalars, degeneracy counting, closed-form energies.
//! - [`assembly`]: Hamiltonian matrices, displaced eigenvectors, the numeric eigensolver.
//! - [`vcs`]: coherent-state families with truncation tail bounds.
//! - [`quadrature`]: Gauss-Laguerre rules and discrete phase grids.
//! - [`verify`]: property checkers producing [`verify::VerificationReport`]s.

pub mod assembly;
pub mod fock;
mod linalg;
pub mod model;
pub mod quadrature;
pub mod vcs;
pub mod verify;

pub use num_complex::Complex64 as C64;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid or inconsistent input parameters.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// An operation was called outside its contract (non-Hermitian input, undefined family).
    #[error("contract violation: {0}")]
    Contract(String),
    /// The coherent-state amplitude mass beyond the cutoff exceeds the configured bound.
    #[error("tail bound {bound:.3e} exceeds tolerance {tolerance:.3e}; cutoff {required} or more is needed")]
    Tail {
        bound: f64,
        tolerance: f64,
        required: usize,
    },
    /// Exact integer arithmetic left the representable range.
    #[error("integer overflow: {0}")]
    Overflow(String),
    /// A quadrature rule cannot integrate the requested family exactly.
    #[error("quadrature too coarse: need Q >= {q} and K >= {k}")]
    Coarse { q: usize, k: usize },
    #[error("eigensolver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
