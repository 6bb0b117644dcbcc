//! Truncated-Fock-space simulation of a resonantly driven trapped ion.
//!
//! The crate builds the full ion-laser Hamiltonian on (two-level ion) x
//! (truncated vibrational mode), the unitary chain that maps it onto an
//! effective Jaynes-Cummings model without a rotating-wave approximation,
//! the analytic propagator of that model, and the conditional-measurement
//! protocols that turn the evolved state into vibrational qubits and
//! Schroedinger-cat states. An exact spectral propagator serves as the
//! oracle quantifying the approximation across parameter regimes.

pub mod acceptance;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod params;
pub mod protocols;
pub mod scan;
pub mod transforms;
pub mod wigner;

pub use error::{Error, Result};
pub use params::{DerivedParams, IonParams};
