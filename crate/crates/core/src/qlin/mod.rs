//! Dense complex linear algebra shared by every other module.

mod eig;
mod json;
mod matrix;
mod random;
mod state;

pub use eig::{eig_hermitian, eig_unitary, HermitianEigen, UnitaryEigen};
pub use json::{matrix_from_json, matrix_to_json, vector_from_json, vector_to_json, JsonMatrix};
pub use matrix::{
    apply_two_qubit, bit_of, dagger, embed_two_qubit, hermitian_defect, identity, kron, max_abs,
    pauli, unitarity_defect, ComplexMatrix, ComplexVector, Pauli, MAX_QUBITS,
};
pub use random::{haar_unitary, random_state, splitmix64, RngSeed, TaskRng};
pub(crate) use state::factorize_product;
pub use state::{partial_trace, DensityMatrix, StateVector};

/// Unitarity tolerance used for gates and rules.
pub const UNITARY_TOL: f64 = 1e-10;
/// Residual tolerance of the eigensolvers.
pub const EIG_TOL: f64 = 1e-8;
