use nalgebra::SymmetricEigen;

use super::matrix::{hermitian_defect, unitarity_defect, ComplexMatrix};
use super::EIG_TOL;
use crate::{Error, Result, C64};

/// Eigenvalues in ascending order with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    pub values: Vec<C64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| C64::new(x, 0.0)),
        ));
        &self.vectors * d * self.vectors.adjoint()
    }
}

impl UnitaryEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.values));
        &self.vectors * d * self.vectors.adjoint()
    }

    /// Eigenphases in `[0, 2π)`, in the order of `values`.
    pub fn phases(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|z| z.arg().rem_euclid(std::f64::consts::TAU))
            .map(|p| if p >= std::f64::consts::TAU { 0.0 } else { p })
            .collect()
    }
}

pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "eigendecomposition of a non-square matrix".into(),
        ));
    }
    let defect = hermitian_defect(m);
    if !(defect <= EIG_TOL) {
        return Err(Error::NotHermitian(defect));
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (m + m.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors =
        ComplexMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

// Mixing weights for the Hermitian pencil Re(U) + w·Im(U); irrational-ish so
// that distinct unit-circle eigenvalues rarely collide.
const PENCIL_WEIGHTS: [f64; 4] = [
    0.618_033_988_749_894_8,
    -1.324_717_957_244_746,
    std::f64::consts::E,
    1.0 - std::f64::consts::SQRT_2,
];
const CLUSTER_GAP: f64 = 1e-5;

/// Eigendecomposition of a unitary matrix. The eigenvectors come from the
/// Hermitian pencil `(U + U†)/2 + w·(U − U†)/2i`, which shares them with the
/// normal matrix `U`; near-degenerate pencil clusters are re-diagonalized
/// within their subspace with a different weight.
pub fn eig_unitary(m: &ComplexMatrix) -> Result<UnitaryEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "eigendecomposition of a non-square matrix".into(),
        ));
    }
    let defect = unitarity_defect(m);
    if !(defect <= EIG_TOL) {
        return Err(Error::NotUnitary(defect));
    }
    let vectors = normal_eigenvectors(m, 0);
    let values = (0..m.ncols())
        .map(|c| {
            let v = vectors.column(c);
            let z = v.dotc(&(m * v));
            z / z.norm()
        })
        .collect();
    Ok(UnitaryEigen { values, vectors })
}

fn normal_eigenvectors(m: &ComplexMatrix, depth: usize) -> ComplexMatrix {
    let d = m.nrows();
    if d == 1 {
        return ComplexMatrix::identity(1, 1);
    }
    let w = PENCIL_WEIGHTS[depth % PENCIL_WEIGHTS.len()];
    let adj = m.adjoint();
    let re = (m + &adj).unscale(2.0);
    let im = (m - &adj) * C64::new(0.0, -0.5);
    let pencil = re + im.scale(w);
    let eig = eig_hermitian(&pencil).expect("pencil of a normal matrix is Hermitian");
    let mut vectors = eig.vectors;

    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && eig.values[end] - eig.values[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 && depth < 2 * PENCIL_WEIGHTS.len() {
            let basis = vectors.columns(start, end - start).into_owned();
            let compressed = basis.adjoint() * m * &basis;
            let mu = compressed.trace() / C64::new((end - start) as f64, 0.0);
            let spread = (&compressed - ComplexMatrix::identity(end - start, end - start) * mu)
                .iter()
                .fold(0.0f64, |a, z| a.max(z.norm()));
            if spread > 1e-13 {
                let inner = normal_eigenvectors(&compressed, depth + 1);
                vectors
                    .columns_mut(start, end - start)
                    .copy_from(&(basis * inner));
            }
        }
        start = end;
    }
    vectors
}
