//! Reversal operators with their coarse circuit complexity, and exactly
//! k-local Pauli Hamiltonians with spectral time evolution.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::qca::{evolve, GlobalOperator};
use crate::qlin::{
    eig_hermitian, hermitian_defect, ComplexMatrix, HermitianEigen, Pauli, RngSeed, StateVector,
    MAX_QUBITS,
};
use crate::{Error, Result, C64};

/// Hermitian `R` with `R·ψᵗ = e^{iφ}·ψ⁰`.
#[derive(Debug, Clone)]
pub struct ReversalOperator {
    pub matrix: ComplexMatrix,
    /// Global phase `φ` applied to `ψ⁰` so that `⟨ψᵗ|e^{iφ}ψ⁰⟩` is real.
    pub phase_applied: f64,
    /// `s = |⟨ψᵗ|ψ⁰⟩|`.
    pub overlap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComplexityReport {
    /// `Σ|λ_i|²` over the eigenvalues of `R`.
    pub value: f64,
    pub overlap: f64,
}

/// Minimal-Frobenius-norm Hermitian solution of `R·x = b` with `x = ψᵗ` and
/// `b = e^{iφ}ψ⁰`: `R = b x† + x b† − s·x x†`.
pub fn reversal_operator(psi0: &StateVector, psi_t: &StateVector) -> Result<ReversalOperator> {
    let c = psi_t.inner(psi0)?;
    let s = c.norm();
    let phase = if s > 0.0 { -c.arg() } else { 0.0 };
    let x = psi_t.amplitudes();
    let b = psi0.amplitudes() * C64::from_polar(1.0, phase);
    let matrix = &b * x.adjoint() + x * b.adjoint() - (x * x.adjoint()) * C64::new(s, 0.0);
    Ok(ReversalOperator {
        matrix,
        phase_applied: phase,
        overlap: s,
    })
}

pub fn coarse_complexity(r: &ReversalOperator) -> Result<ComplexityReport> {
    let eig = eig_hermitian(&r.matrix)?;
    Ok(ComplexityReport {
        value: eig.values.iter().map(|l| l * l).sum(),
        overlap: r.overlap,
    })
}

/// Coarse complexity of the reversal from `state0` to its `t`-step evolute.
pub fn complexity_of_evolution(
    state0: &StateVector,
    g: &GlobalOperator,
    t: usize,
) -> Result<ComplexityReport> {
    let traj = evolve(state0, g, t)?;
    coarse_complexity(&reversal_operator(state0, traj.last())?)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn weight(&self) -> usize {
        pauli_weight(self)
    }

    /// `σ|b⟩ = phase·|b ⊕ flip⟩`.
    fn act_on_basis(&self, b: usize) -> (usize, C64) {
        let n = self.letters.len();
        let mut out = b;
        let mut phase = C64::new(1.0, 0.0);
        for (q, p) in self.letters.iter().enumerate() {
            let shift = n - 1 - q;
            let bit = (b >> shift) & 1;
            let sign = if bit == 1 { -1.0 } else { 1.0 };
            match p {
                Pauli::I => {}
                Pauli::X => out ^= 1 << shift,
                Pauli::Y => {
                    out ^= 1 << shift;
                    phase *= C64::new(0.0, sign);
                }
                Pauli::Z => phase *= sign,
            }
        }
        (out, phase)
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let dim = 1usize << self.letters.len();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for b in 0..dim {
            let (r, z) = self.act_on_basis(b);
            m[(r, b)] = z;
        }
        m
    }
}

pub fn pauli_weight(p: &PauliString) -> usize {
    p.letters.iter().filter(|&&l| l != Pauli::I).count()
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidPauliLetter(other)),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli string".into()));
        }
        Ok(Self { letters })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            f.write_str(match l {
                Pauli::I => "I",
                Pauli::X => "X",
                Pauli::Y => "Y",
                Pauli::Z => "Z",
            })?;
        }
        Ok(())
    }
}

/// JSON term record `{letters, J}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub letters: String,
    #[serde(rename = "J")]
    pub j: f64,
}

pub enum Couplings {
    Seeded(RngSeed),
    Explicit(Vec<f64>),
}

/// `H = Σ_I J_I σ_I` where every `σ_I` has weight exactly `k`.
#[derive(Debug, Clone)]
pub struct KLocalHamiltonian {
    n_qubits: usize,
    locality: usize,
    terms: Vec<(PauliString, f64)>,
    matrix: ComplexMatrix,
}

impl KLocalHamiltonian {
    pub fn from_terms(n_qubits: usize, terms: Vec<(PauliString, f64)>) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::InvalidArgument(format!(
                "qubit count {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let Some(first) = terms.first() else {
            return Err(Error::InvalidArgument("Hamiltonian without terms".into()));
        };
        let locality = first.0.weight();
        for (p, j) in &terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "term {p} on {n_qubits} qubits"
                )));
            }
            if p.weight() != locality || locality == 0 {
                return Err(Error::InvalidArgument(format!(
                    "term {p} is not exactly {locality}-local"
                )));
            }
            if !j.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let dim = 1usize << n_qubits;
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        for (p, j) in &terms {
            for b in 0..dim {
                let (r, z) = p.act_on_basis(b);
                matrix[(r, b)] += z * *j;
            }
        }
        Ok(Self {
            n_qubits,
            locality,
            terms,
            matrix,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn locality(&self) -> usize {
        self.locality
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.matrix)
    }

    pub fn eigen(&self) -> Result<HermitianEigen> {
        eig_hermitian(&self.matrix)
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(p, j)| TermJson {
                letters: p.to_string(),
                j: *j,
            })
            .collect()
    }

    pub fn from_json(terms: &[TermJson]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|t| Ok((t.letters.parse::<PauliString>()?, t.j)))
            .collect::<Result<Vec<_>>>()?;
        let n = parsed.first().map_or(0, |(p, _)| p.n_qubits());
        Self::from_terms(n, parsed)
    }
}

/// Site subsets of size `k` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return out;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// One term per (site subset, letter assignment in `{X,Y,Z}^k`), ordered by
/// subset then assignment; seeded couplings are drawn standard-normal in
/// that order.
pub fn build_k_local(n_qubits: usize, k: usize, couplings: Couplings) -> Result<KLocalHamiltonian> {
    if k == 0 || k > n_qubits || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= K <= {MAX_QUBITS}, got k={k}, K={n_qubits}"
        )));
    }
    let xyz = [Pauli::X, Pauli::Y, Pauli::Z];
    let assignments = 3usize.pow(k as u32);
    let mut strings = Vec::new();
    for subset in combinations(n_qubits, k) {
        for a in 0..assignments {
            let mut letters = vec![Pauli::I; n_qubits];
            for (pos, &site) in subset.iter().enumerate() {
                letters[site] = xyz[(a / 3usize.pow((k - 1 - pos) as u32)) % 3];
            }
            strings.push(PauliString::new(letters));
        }
    }
    let js: Vec<f64> = match couplings {
        Couplings::Seeded(seed) => {
            let mut rng = seed.rng();
            (0..strings.len())
                .map(|_| rng.sample(StandardNormal))
                .collect()
        }
        Couplings::Explicit(js) => {
            if js.len() != strings.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} couplings supplied for {} terms",
                    js.len(),
                    strings.len()
                )));
            }
            js
        }
    };
    KLocalHamiltonian::from_terms(n_qubits, strings.into_iter().zip(js).collect())
}

/// `U(t) = e^{−iHt} = V·diag(e^{−iE_n t})·V†`.
pub fn time_evolution(h: &KLocalHamiltonian, t: f64) -> Result<ComplexMatrix> {
    let eig = h.eigen()?;
    Ok(evolution_from_eigen(&eig, t))
}

pub fn evolution_from_eigen(eig: &HermitianEigen, t: f64) -> ComplexMatrix {
    let phases = DVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|e| C64::from_polar(1.0, -e * t)),
    );
    &eig.vectors * ComplexMatrix::from_diagonal(&phases) * eig.vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qca::{build_global_operator, LocalRule};
    use crate::qlin::{kron, max_abs, pauli, random_state, unitarity_defect};

    fn real_state(v: &[f64]) -> StateVector {
        StateVector::from_slice(&v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>()).unwrap()
    }

    fn assert_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        let d = max_abs(&(a - b));
        assert!(d < tol, "deviation {d:e}");
    }

    #[test]
    fn identical_states_give_projector() {
        let psi = random_state(3, RngSeed::new(1, 1)).unwrap();
        let r = reversal_operator(&psi, &psi).unwrap();
        let a = psi.amplitudes();
        assert_close(&r.matrix, &(a * a.adjoint()), 1e-14);
        assert!((coarse_complexity(&r).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_states() {
        let psi0 = real_state(&[1.0, 0.0, 0.0, 0.0]);
        let psit = real_state(&[0.0, 0.0, 1.0, 0.0]);
        let r = reversal_operator(&psi0, &psit).unwrap();
        assert_eq!(r.phase_applied, 0.0);
        let (a, b) = (psi0.amplitudes(), psit.amplitudes());
        assert_close(&r.matrix, &(a * b.adjoint() + b * a.adjoint()), 1e-15);
        let eig = eig_hermitian(&r.matrix).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-12 && (eig.values[3] - 1.0).abs() < 1e-12);
        assert!((coarse_complexity(&r).unwrap().value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_point_six() {
        // x = |0>, b = 0.6|0> + 0.8|1>: subspace matrix [[0.6, 0.8], [0.8, 0]]
        let psit = real_state(&[1.0, 0.0]);
        let psi0 = real_state(&[0.6, 0.8]);
        let r = reversal_operator(&psi0, &psit).unwrap();
        let expect =
            ComplexMatrix::from_row_slice(2, 2, &[0.6, 0.8, 0.8, 0.0].map(|x| C64::new(x, 0.0)));
        assert_close(&r.matrix, &expect, 1e-15);
        // eigenvalues of [[0.6,0.8],[0.8,0]]: 0.3 ± sqrt(0.09 + 0.64)
        let disc = 0.73f64.sqrt();
        let oracle = (0.3 + disc).powi(2) + (0.3 - disc).powi(2);
        let c = coarse_complexity(&r).unwrap().value;
        assert!((c - 1.64).abs() < 1e-12 && (c - oracle).abs() < 1e-12);
    }

    #[test]
    fn complex_overlap_gets_phase_fixed() {
        let psi0 = random_state(2, RngSeed::new(4, 0)).unwrap();
        let psit = random_state(2, RngSeed::new(4, 1)).unwrap();
        let r = reversal_operator(&psi0, &psit).unwrap();
        assert!(hermitian_defect(&r.matrix) < 1e-14);
        let mapped = &r.matrix * psit.amplitudes();
        let target = psi0.amplitudes() * C64::from_polar(1.0, r.phase_applied);
        assert!((mapped - target).norm() < 1e-12);
    }

    #[test]
    fn evolution_complexity_examples() {
        let g = build_global_operator(&LocalRule::cnot(), 3).unwrap();
        let psi = StateVector::basis(3, 0b100).unwrap();
        assert!((complexity_of_evolution(&psi, &g, 0).unwrap().value - 1.0).abs() < 1e-12);
        assert!((complexity_of_evolution(&psi, &g, 1).unwrap().value - 1.2).abs() < 1e-9);
        let id = build_global_operator(&LocalRule::identity(), 3).unwrap();
        let r = random_state(3, RngSeed::new(2, 2)).unwrap();
        assert!((complexity_of_evolution(&r, &id, 7).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complexity_ignores_global_phase() {
        let g = build_global_operator(&LocalRule::haar(RngSeed::new(6, 0)), 3).unwrap();
        let psi = random_state(3, RngSeed::new(6, 1)).unwrap();
        let a = complexity_of_evolution(&psi, &g, 4).unwrap().value;
        let b = complexity_of_evolution(&psi.scaled_by_phase(1.234), &g, 4)
            .unwrap()
            .value;
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn pauli_weights_and_parsing() {
        assert_eq!(pauli_weight(&"III".parse().unwrap()), 0);
        assert_eq!(pauli_weight(&"XIZ".parse().unwrap()), 2);
        assert_eq!(pauli_weight(&"YYY".parse().unwrap()), 3);
        assert!(matches!(
            "XQ".parse::<PauliString>(),
            Err(Error::InvalidPauliLetter('Q'))
        ));
        assert_eq!("XIZY".parse::<PauliString>().unwrap().to_string(), "XIZY");
    }

    #[test]
    fn pauli_string_matrix_matches_kron() {
        for s in ["XYZ", "YIY", "ZZI", "IXY"] {
            let p: PauliString = s.parse().unwrap();
            let oracle = p
                .letters()
                .iter()
                .skip(1)
                .fold(pauli(p.letters()[0]), |acc, &l| kron(&acc, &pauli(l)));
            assert_eq!(p.matrix(), oracle);
        }
    }

    #[test]
    fn k_local_term_counts() {
        let h = build_k_local(3, 2, Couplings::Seeded(RngSeed::new(1, 0))).unwrap();
        assert_eq!(h.terms().len(), 27);
        for kk in 1..=5usize {
            for k in 1..=kk {
                let h = build_k_local(kk, k, Couplings::Seeded(RngSeed::new(2, 0))).unwrap();
                let binom = (0..k).fold(1usize, |acc, i| acc * (kk - i) / (i + 1));
                assert_eq!(h.terms().len(), binom * 3usize.pow(k as u32));
                assert!(h.terms().iter().all(|(p, _)| p.weight() == k));
                assert!(h.hermitian_defect() < 1e-10);
            }
        }
        assert!(build_k_local(2, 3, Couplings::Seeded(RngSeed::new(0, 0))).is_err());
    }

    #[test]
    fn single_z_term() {
        let h = build_k_local(1, 1, Couplings::Explicit(vec![0.0, 0.0, 1.0])).unwrap();
        assert_eq!(h.matrix(), &pauli(Pauli::Z));
        assert!(build_k_local(1, 1, Couplings::Explicit(vec![1.0])).is_err());
    }

    #[test]
    fn time_evolution_examples() {
        let h = build_k_local(1, 1, Couplings::Explicit(vec![0.0, 0.0, 1.0])).unwrap();
        assert_close(
            &time_evolution(&h, 0.0).unwrap(),
            &ComplexMatrix::identity(2, 2),
            1e-14,
        );
        let u = time_evolution(&h, std::f64::consts::PI).unwrap();
        assert_close(
            &u,
            &(ComplexMatrix::identity(2, 2) * C64::new(-1.0, 0.0)),
            1e-12,
        );

        let h = build_k_local(3, 2, Couplings::Seeded(RngSeed::new(3, 0))).unwrap();
        let (t1, t2) = (0.37, 1.21);
        let u1 = time_evolution(&h, t1).unwrap();
        let u2 = time_evolution(&h, t2).unwrap();
        let u12 = time_evolution(&h, t1 + t2).unwrap();
        assert!(unitarity_defect(&u12) < 1e-8);
        assert_close(&(u1 * u2), &u12, 1e-8);
    }

    #[test]
    fn time_evolution_matches_taylor_series() {
        // independent oracle: truncated power series of exp(-iHt) with scaling and squaring
        let h = build_k_local(3, 2, Couplings::Seeded(RngSeed::new(9, 0))).unwrap();
        let t = 0.8;
        let squarings = 10;
        let a = h.matrix() * C64::new(0.0, -t / f64::from(1 << squarings));
        let mut term = ComplexMatrix::identity(8, 8);
        let mut sum = term.clone();
        for k in 1..20 {
            term = &term * &a / C64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        assert_close(&time_evolution(&h, t).unwrap(), &sum, 1e-9);
    }

    #[test]
    fn hamiltonian_json_round_trip() {
        let h = build_k_local(3, 2, Couplings::Seeded(RngSeed::new(5, 5))).unwrap();
        let text = serde_json::to_string(&h.to_json()).unwrap();
        let terms: Vec<TermJson> = serde_json::from_str(&text).unwrap();
        let back = KLocalHamiltonian::from_json(&terms).unwrap();
        assert_eq!(back.matrix(), h.matrix());
        assert_eq!(back.locality(), 2);
        let mixed = vec![
            TermJson {
                letters: "XI".into(),
                j: 1.0,
            },
            TermJson {
                letters: "XY".into(),
                j: 1.0,
            },
        ];
        assert!(KLocalHamiltonian::from_json(&mixed).is_err());
    }
}
