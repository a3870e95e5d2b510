//! Numerical checks of the mean ergodic theorem for unitary operators:
//! Cesàro averages `(1/N) Σ Uⁿx` against the projection onto `ker(I − U)`,
//! plus a bounded-denominator rationality test on eigenphase ratios.

use std::f64::consts::TAU;
use std::io::Write;

use serde::Serialize;

use crate::qlin::{eig_unitary, ComplexMatrix, ComplexVector, UnitaryEigen};
use crate::{Error, Result, C64};

pub const DEFAULT_FIXED_TOL: f64 = 1e-8;
pub const DEFAULT_Q_MAX: u64 = 64;
pub const DEFAULT_RATIONAL_TOL: f64 = 1e-9;

// eigen-components of x smaller than this (relative to ‖x‖) do not set the gap
const CONTRIBUTION_FLOOR: f64 = 1e-10;

/// Orthogonal projection onto the eigenvalue-1 subspace of a unitary.
#[derive(Debug, Clone)]
pub struct FixedSpaceProjector {
    pub matrix: ComplexMatrix,
    pub rank: usize,
    pub tol: f64,
}

fn projector_from_eigen(eig: &UnitaryEigen, tol: f64) -> FixedSpaceProjector {
    let d = eig.vectors.nrows();
    let one = C64::new(1.0, 0.0);
    let mut basis: Vec<ComplexVector> = Vec::new();
    for (c, lambda) in eig.values.iter().enumerate() {
        if (lambda - one).norm() >= tol {
            continue;
        }
        // modified Gram-Schmidt against the vectors already collected
        let mut v = eig.vectors.column(c).into_owned();
        for b in &basis {
            let proj = b.dotc(&v);
            v -= b * proj;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v.unscale(norm));
        }
    }
    let mut matrix = ComplexMatrix::zeros(d, d);
    for b in &basis {
        matrix += b * b.adjoint();
    }
    FixedSpaceProjector {
        matrix,
        rank: basis.len(),
        tol,
    }
}

pub fn fixed_space_projector(u: &ComplexMatrix, tol: f64) -> Result<FixedSpaceProjector> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be > 0"
        )));
    }
    Ok(projector_from_eigen(&eig_unitary(u)?, tol))
}

fn check_vector(u: &ComplexMatrix, x: &ComplexVector) -> Result<()> {
    if !u.is_square() || u.nrows() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator applied to length-{} vector",
            u.nrows(),
            u.ncols(),
            x.len()
        )));
    }
    Ok(())
}

/// `(1/N) Σ_{n<N} Uⁿx` by repeated matrix-vector products.
pub fn cesaro_average(
    u: &ComplexMatrix,
    x: &ComplexVector,
    n_terms: usize,
) -> Result<ComplexVector> {
    check_vector(u, x)?;
    if n_terms == 0 {
        return Err(Error::InvalidArgument("Cesàro average needs N >= 1".into()));
    }
    let mut iterate = x.clone();
    let mut sum = x.clone();
    for _ in 1..n_terms {
        iterate = u * iterate;
        sum += &iterate;
    }
    Ok(sum.unscale(n_terms as f64))
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceReport {
    /// `errors[N-1] = ‖A_N x − P x‖₂` for `N = 1..=n_max`.
    pub errors: Vec<f64>,
    /// Smallest `|1 − λ|` over non-unit eigenvalues with a non-negligible
    /// component of `x`; `None` if `x` lies in the fixed space.
    pub gap: Option<f64>,
    /// `C = 2‖x‖ / gap`, so that `e(N) ≤ C / N`.
    pub bound_constant: f64,
    pub fixed_rank: usize,
}

impl ConvergenceReport {
    pub fn bound(&self, n: usize) -> f64 {
        self.bound_constant / n as f64
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["N", "error", "bound"])?;
        for (i, e) in self.errors.iter().enumerate() {
            let n = i + 1;
            w.write_record([n.to_string(), e.to_string(), self.bound(n).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn ergodic_convergence_check(
    u: &ComplexMatrix,
    x: &ComplexVector,
    n_max: usize,
) -> Result<ConvergenceReport> {
    check_vector(u, x)?;
    if n_max < 2 {
        return Err(Error::InvalidArgument(
            "convergence check needs Nmax >= 2".into(),
        ));
    }
    let eig = eig_unitary(u)?;
    let projector = projector_from_eigen(&eig, DEFAULT_FIXED_TOL);
    let px = &projector.matrix * x;
    let x_norm = x.norm();
    let one = C64::new(1.0, 0.0);
    let gap = eig
        .values
        .iter()
        .enumerate()
        .filter(|(c, lambda)| {
            (*lambda - one).norm() >= DEFAULT_FIXED_TOL
                && eig.vectors.column(*c).dotc(x).norm() > CONTRIBUTION_FLOOR * x_norm
        })
        .map(|(_, lambda)| (one - lambda).norm())
        .fold(None, |acc: Option<f64>, g| {
            Some(acc.map_or(g, |a| a.min(g)))
        });
    let bound_constant = gap.map_or(0.0, |g| 2.0 * x_norm / g);

    let mut errors = Vec::with_capacity(n_max);
    let mut iterate = x.clone();
    let mut sum = x.clone();
    errors.push((&sum - &px).norm());
    for n in 2..=n_max {
        iterate = u * iterate;
        sum += &iterate;
        errors.push((sum.unscale(n as f64) - &px).norm());
    }
    Ok(ConvergenceReport {
        errors,
        gap,
        bound_constant,
        fixed_rank: projector.rank,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EigenphaseReport {
    /// Eigenphases in `[0, 2π)`, ascending.
    pub phases: Vec<f64>,
    /// `pairwise_rational_flags[i][j]`: the ratio of phases `i` and `j` lies
    /// within `tol` of a fraction with denominator `≤ q_max`. Pairs of equal
    /// phases are not tested and stay false, as does the diagonal.
    pub pairwise_rational_flags: Vec<Vec<bool>>,
    pub rational_pairs: usize,
    pub q_max: u64,
    pub tol: f64,
}

/// Whether `r` is within `tol` of some `p/q` with `q ≤ q_max`, tested on the
/// continued-fraction convergents of `r`.
pub fn near_rational(r: f64, q_max: u64, tol: f64) -> bool {
    if !r.is_finite() {
        return false;
    }
    let (mut h_prev, mut h) = (0.0f64, 1.0f64);
    let (mut k_prev, mut k) = (1.0f64, 0.0f64);
    let mut x = r;
    for _ in 0..64 {
        let a = x.floor();
        let h_next = a * h + h_prev;
        let k_next = a * k + k_prev;
        if k_next > q_max as f64 {
            return false;
        }
        if (r - h_next / k_next).abs() < tol {
            return true;
        }
        let frac = x - a;
        if frac <= f64::EPSILON {
            return false;
        }
        (h_prev, h, k_prev, k) = (h, h_next, k, k_next);
        x = 1.0 / frac;
    }
    false
}

fn phase_pair_rational(a: f64, b: f64, q_max: u64, tol: f64) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if lo < tol {
        // ratio 0
        return true;
    }
    near_rational(lo / hi, q_max, tol)
}

pub fn eigenphase_report(u: &ComplexMatrix, q_max: u64, tol: f64) -> Result<EigenphaseReport> {
    if q_max == 0 {
        return Err(Error::InvalidArgument("q_max must be >= 1".into()));
    }
    let mut phases = eig_unitary(u)?.phases();
    phases.sort_by(f64::total_cmp);
    let d = phases.len();
    let mut flags = vec![vec![false; d]; d];
    let mut rational_pairs = 0;
    for i in 0..d {
        for j in i + 1..d {
            let gap = (phases[j] - phases[i]).abs();
            if gap.min(TAU - gap) < tol {
                // degenerate pair, not tested
                continue;
            }
            let f = phase_pair_rational(phases[i], phases[j], q_max, tol);
            flags[i][j] = f;
            flags[j][i] = f;
            rational_pairs += usize::from(f);
        }
    }
    Ok(EigenphaseReport {
        phases,
        pairwise_rational_flags: flags,
        rational_pairs,
        q_max,
        tol,
    })
}
