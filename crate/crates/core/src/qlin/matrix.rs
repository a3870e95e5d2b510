use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Largest register handled by the dense representation (dimension 4096).
pub const MAX_QUBITS: usize = 12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn identity(dim: usize) -> ComplexMatrix {
    DMatrix::identity(dim, dim)
}

/// Conjugate transpose.
pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖m − m†‖_max`, or infinity for a non-square matrix.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let d = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..d {
        for c in r..d {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `‖m†m − I‖_max`, or infinity for a non-square matrix.
pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for c in 0..prod.ncols() {
        for r in 0..prod.nrows() {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((prod[(r, c)] - target).norm());
        }
    }
    worst
}

/// Kronecker product; `a` is the most significant factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Value of qubit `q` in basis index `b` of an `n`-qubit register.
#[inline]
pub fn bit_of(b: usize, q: usize, n: usize) -> usize {
    (b >> (n - 1 - q)) & 1
}

#[inline]
fn with_bit(b: usize, q: usize, n: usize, v: usize) -> usize {
    let mask = 1 << (n - 1 - q);
    if v == 0 {
        b & !mask
    } else {
        b | mask
    }
}

fn check_pair(u: &ComplexMatrix, j: usize, n: usize) -> Result<usize> {
    if u.nrows() != 4 || u.ncols() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit gate must be 4x4, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "qubit count {n} outside 2..={MAX_QUBITS}"
        )));
    }
    if j >= n {
        return Err(Error::DimensionMismatch(format!(
            "site {j} out of range for {n} qubits"
        )));
    }
    Ok((j + 1) % n)
}

/// The `2^n × 2^n` operator acting as `u` on qubits `(j, (j+1) mod n)`, with
/// qubit `j` as the first tensor factor of `u`, and as identity elsewhere.
pub fn embed_two_qubit(u: &ComplexMatrix, j: usize, n: usize) -> Result<ComplexMatrix> {
    let k = check_pair(u, j, n)?;
    let dim = 1usize << n;
    let mut out = DMatrix::from_element(dim, dim, ZERO);
    for col in 0..dim {
        let local_in = 2 * bit_of(col, j, n) + bit_of(col, k, n);
        for local_out in 0..4 {
            let z = u[(local_out, local_in)];
            if z == ZERO {
                continue;
            }
            let row = with_bit(with_bit(col, j, n, local_out >> 1), k, n, local_out & 1);
            out[(row, col)] += z;
        }
    }
    Ok(out)
}

/// Applies a 4×4 gate to qubits `(j, (j+1) mod n)` of `amps` in place.
pub fn apply_two_qubit(amps: &mut [C64], u: &ComplexMatrix, j: usize, n: usize) -> Result<()> {
    let k = check_pair(u, j, n)?;
    if amps.len() != 1 << n {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} is not 2^{n}",
            amps.len()
        )));
    }
    let (mj, mk) = (1usize << (n - 1 - j), 1usize << (n - 1 - k));
    for base in 0..amps.len() {
        if base & (mj | mk) != 0 {
            continue;
        }
        let idx = [base, base | mk, base | mj, base | mj | mk];
        let v = idx.map(|i| amps[i]);
        for (r, &i) in idx.iter().enumerate() {
            amps[i] = (0..4).map(|c| u[(r, c)] * v[c]).sum();
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

pub fn pauli(p: Pauli) -> ComplexMatrix {
    let i = C64::i();
    let entries = match p {
        Pauli::I => [ONE, ZERO, ZERO, ONE],
        Pauli::X => [ZERO, ONE, ONE, ZERO],
        Pauli::Y => [ZERO, -i, i, ZERO],
        Pauli::Z => [ONE, ZERO, ZERO, -ONE],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}
