use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use super::eig::eig_hermitian;
use super::matrix::{hermitian_defect, ComplexMatrix, ComplexVector, MAX_QUBITS};
use crate::{Error, Result, C64};

const NORM_TOL: f64 = 1e-9;

/// Normalized amplitude vector over the `2^n` big-endian basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: ComplexVector,
}

impl StateVector {
    /// Wraps `amps` as an `n`-qubit state. The vector must already be
    /// normalized within `1e-9`.
    pub fn new(amps: ComplexVector) -> Result<Self> {
        let n = qubits_for_len(amps.len())?;
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n, amps })
    }

    /// Normalizes `amps` and wraps it. Fails on a (numerically) zero vector.
    pub fn normalized(amps: ComplexVector) -> Result<Self> {
        let norm = amps.norm();
        if !norm.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm <= 1e-300 {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amps.unscale(norm))
    }

    pub fn from_slice(amps: &[C64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amps))
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS || index >= 1 << n {
            return Err(Error::InvalidArgument(format!(
                "basis state {index} of {n} qubits"
            )));
        }
        let mut amps = DVector::from_element(1 << n, C64::new(0.0, 0.0));
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Tensor product of single-qubit states, qubit 0 first.
    pub fn product(cells: &[[C64; 2]]) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidArgument("product of zero qubits".into()));
        }
        let mut amps = DVector::from_element(1, C64::new(1.0, 0.0));
        for cell in cells {
            amps = amps.kronecker(&DVector::from_column_slice(cell));
        }
        Self::normalized(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amps
    }

    pub fn into_amplitudes(self) -> ComplexVector {
        self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "states of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn scaled_by_phase(&self, theta: f64) -> StateVector {
        Self {
            n: self.n,
            amps: self.amps.map(|z| z * C64::from_polar(1.0, theta)),
        }
    }
}

pub(crate) fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "length {len} is not 2^n with n >= 1"
        )));
    }
    let n = len.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "{n} qubits exceeds the maximum {MAX_QUBITS}"
        )));
    }
    Ok(n)
}

/// Hermitian, unit-trace, positive semidefinite matrix over `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::DimensionMismatch(
                "density matrix must be square".into(),
            ));
        }
        let n =
            qubits_for_len(rho.nrows()).or_else(
                |e| {
                    if rho.nrows() == 1 {
                        Ok(0)
                    } else {
                        Err(e)
                    }
                },
            )?;
        let herm = hermitian_defect(&rho);
        if herm > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!(
                "Hermitian defect {herm:e}"
            )));
        }
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let min_eig = eig_hermitian(&rho)?.values.first().copied().unwrap_or(0.0);
        if min_eig < -1e-9 {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { n, rho })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        Self {
            n: state.n_qubits(),
            rho: a * a.adjoint(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Reduced density matrix over the qubits in `keep`, ordered by ascending
/// qubit index (the lowest kept index is the most significant bit).
pub fn partial_trace(rho: &DensityMatrix, keep: &BTreeSet<usize>) -> Result<DensityMatrix> {
    let n = rho.n;
    if keep.is_empty() {
        return Err(Error::InvalidArgument(
            "partial trace needs a nonempty keep set".into(),
        ));
    }
    if let Some(&q) = keep.iter().find(|&&q| q >= n) {
        return Err(Error::InvalidArgument(format!(
            "qubit {q} out of range for {n} qubits"
        )));
    }
    let kept: Vec<usize> = keep.iter().copied().collect();
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let compose = |outer: usize, inner: usize| -> usize {
        let mut b = 0usize;
        for (pos, &q) in kept.iter().enumerate() {
            b |= ((outer >> (kept.len() - 1 - pos)) & 1) << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            b |= ((inner >> (traced.len() - 1 - pos)) & 1) << (n - 1 - q);
        }
        b
    };
    let (dk, dt) = (1usize << kept.len(), 1usize << traced.len());
    let mut out = DMatrix::from_element(dk, dk, C64::new(0.0, 0.0));
    for a in 0..dk {
        for b in 0..dk {
            out[(a, b)] = (0..dt)
                .map(|e| rho.rho[(compose(a, e), compose(b, e))])
                .sum();
        }
    }
    Ok(DensityMatrix {
        n: kept.len(),
        rho: out,
    })
}

/// Splits a product state into its single-qubit factors (each up to phase).
pub(crate) fn factorize_product(state: &StateVector) -> Result<Vec<[C64; 2]>> {
    let n = state.n_qubits();
    let rho = DensityMatrix::pure(state);
    let mut cells = Vec::with_capacity(n);
    for q in 0..n {
        let red = partial_trace(&rho, &BTreeSet::from([q]))?;
        if (red.purity() - 1.0).abs() > 1e-9 {
            return Err(Error::NotProductState);
        }
        let m = red.matrix();
        let k = if m[(0, 0)].re >= m[(1, 1)].re { 0 } else { 1 };
        let scale = m[(k, k)].re.sqrt();
        cells.push([m[(0, k)] / scale, m[(1, k)] / scale]);
    }
    let rebuilt = StateVector::product(&cells)?;
    if (rebuilt.inner(state)?.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::NotProductState);
    }
    Ok(cells)
}
