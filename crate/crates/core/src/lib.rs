//! Spin-J quantum dynamics and precision-metrology toolkit for Lorentz-violation
//! signals of the form `κ J_z²`.
//!
//! The crate is organised bottom-up:
//!
//! * [`spin_algebra`]: angular-momentum matrices, Hermitian exponentials, Kronecker products.
//! * [`lv_model`]: the rank-2 tensor shift, its Wigner-Eckart diagonal and the `κ J_z²` Hamiltonian.
//! * [`interferometry`]: Ramsey and dynamical-decoupling pulse sequences, seeded fringe sampling.
//! * [`metrology`]: Fisher information, maximum-likelihood estimation of `κ`, SQL scans, entanglement checks.
//! * [`eep_framework`]: mass-energy test Hamiltonian for a trapped spin-1/2 atom and the
//!   conversion of measured level shifts into violation parameters.
//! * [`cli`]: config-driven experiment runner behind the `lvsim` binary.

pub mod cli;
pub mod constants;
pub mod eep_framework;
pub mod error;
pub mod interferometry;
pub mod lv_model;
pub mod metrology;
pub mod rng;
pub mod spin_algebra;
pub mod units;

pub use error::{Error, Result};
pub use nalgebra::DVector;
pub use num_complex::Complex64;
pub use spin_algebra::{ComplexMatrix, SpinOperators, SpinQuantumNumber, StateVector};
