//! Trapped-ion two-qubit gate simulation core.
//!
//! Spin ⊗ two-mode Fock state vectors, Raman-drive Hamiltonians, geometric
//! phase gates, pulsed fast gates, noise models, hyperfine clock-state
//! analysis and frequency-comb Raman spectra. Frequencies are angular
//! (rad/s) throughout; Hamiltonians are expressed in units of ħ.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod atomic;
pub mod comb;
pub mod dynamics;
pub mod error;
pub mod gates;
pub mod hilbert;
pub mod linalg;
pub mod noise;
pub mod optim;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use hilbert::{FockBasis, KronOperator, KronTerm, Spin, SpinMotionState};
pub use linalg::LinearOperator;
pub use num_complex::Complex64 as C64;
