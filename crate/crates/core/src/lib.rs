//! Quantum tensor automaton toolkit.
//!
//! A finite cyclic register of `n` qubits is evolved by a global operator
//! assembled from a local two-qubit rule applied at every site and summed.
//! On top of the engine sit equilibration and spectral analysis
//! ([`thermo`]), reversal-operator complexity and k-local Hamiltonians
//! ([`complexity`]), mean-ergodic checks ([`ergodic`]) and the experiment
//! harness with its CLI ([`lab`]).
//!
//! Basis states are indexed big-endian: qubit 0 is the most significant bit
//! of the basis index.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complexity;
pub mod ergodic;
mod error;
pub mod lab;
pub mod qca;
pub mod qlin;
pub mod thermo;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
