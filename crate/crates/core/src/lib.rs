//! Simulation engine for probing quadrupolar nuclei with spin squeezing.
//!
//! The crate is organised bottom-up:
//!
//! - [`spin`]: dense angular-momentum algebra for arbitrary spin `I`
//!   (operators, Hermitian eigendecomposition, propagators, rotations).
//! - [`states`]: coherent spin states, thermal equilibrium and rotated
//!   thermal states, fidelity and the Husimi Q function.
//! - [`hamiltonian`]: Zeeman and quadrupole Hamiltonians, Euler rotation of
//!   the EFG principal axes and rotating-frame effective Hamiltonians.
//! - [`dynamics`]: unitary and relaxed time evolution, free induction decay.
//! - [`observables`]: the Kitagawa–Ueda squeezing parameter and spectra.
//! - [`sweeps`]: deterministic, optionally parallel parameter scans.
//!
//! All operators are dimensionless (units of ħ), Hamiltonians are in rad/s and
//! the basis is ordered `m = I, I-1, …, -I`.

pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod observables;
pub mod spin;
pub mod states;
pub mod sweeps;

pub use error::{Error, Result};
pub use num_complex::Complex64;
