//! Analytic theories, excitation bands, Green's-function spectroscopy, circuit mapping and
//! an exact-diagonalization oracle for a one-dimensional spin-boson lattice magnet.
//!
//! The chain alternates qubits and cavities, each qubit coupling to the cavities on
//! either side. Energies are in the caller's units; closed forms use ratios to ω.

pub mod ansatz;
pub mod circuit;
pub mod ed;
pub mod error;
pub mod excitations;
pub mod ising;
pub mod meanfield;
pub mod model;
pub mod spectroscopy;

pub use error::{Error, Result};

/// Formats a float with 17 significant digits, the width that round-trips an f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
