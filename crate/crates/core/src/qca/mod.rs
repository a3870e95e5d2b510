//! The automaton engine: a local two-qubit rule applied at every site of a
//! cyclic register, summed into a global operator, and iterated with
//! renormalization.

mod teleport;

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::qlin::{
    apply_two_qubit, haar_unitary, matrix_from_json, matrix_to_json, unitarity_defect,
    vector_to_json, ComplexMatrix, JsonMatrix, RngSeed, StateVector, MAX_QUBITS, UNITARY_TOL,
};
use crate::{Error, Result, C64};

pub use teleport::{
    run_teleportation_qca, teleport_qubit, CellGate, TeleportEvent, TeleportationRun,
};

/// Norm below which a step is considered to have annihilated the state.
pub const ANNIHILATION_NORM: f64 = 1e-12;

/// Ordered gate sequence `u¹..uᵐ`, applied at each (site, right neighbour)
/// pair with the site as the first tensor factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalRule {
    gates: Vec<ComplexMatrix>,
}

impl LocalRule {
    pub fn new(gates: Vec<ComplexMatrix>) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::InvalidArgument(
                "a rule needs at least one gate".into(),
            ));
        }
        for g in &gates {
            if g.nrows() != 4 || g.ncols() != 4 {
                return Err(Error::DimensionMismatch(format!(
                    "rule gates must be 4x4, got {}x{}",
                    g.nrows(),
                    g.ncols()
                )));
            }
            if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            let defect = unitarity_defect(g);
            if defect > UNITARY_TOL {
                return Err(Error::NotUnitary(defect));
            }
        }
        Ok(Self { gates })
    }

    pub fn cnot() -> Self {
        let mut m = ComplexMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            m[(r, c)] = C64::new(1.0, 0.0);
        }
        Self { gates: vec![m] }
    }

    pub fn identity() -> Self {
        Self {
            gates: vec![ComplexMatrix::identity(4, 4)],
        }
    }

    /// A single Haar-random 4×4 gate.
    pub fn haar(seed: RngSeed) -> Self {
        Self {
            gates: vec![haar_unitary(4, seed).expect("dimension 4 is valid")],
        }
    }

    pub fn gates(&self) -> &[ComplexMatrix] {
        &self.gates
    }

    pub fn to_json(&self) -> Vec<JsonMatrix> {
        self.gates.iter().map(matrix_to_json).collect()
    }

    pub fn from_json(gates: &[JsonMatrix]) -> Result<Self> {
        Self::new(gates.iter().map(matrix_from_json).collect::<Result<_>>()?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let gates: Vec<JsonMatrix> = serde_json::from_str(s)?;
        Self::from_json(&gates)
    }
}

/// `U = Σ_j uᵐ_j ⋯ u¹_j` over all sites `j` of an `n`-qubit cycle.
///
/// The sum of unitaries is not unitary in general; [`step`] renormalizes.
#[derive(Debug, Clone)]
pub struct GlobalOperator {
    n: usize,
    matrix: ComplexMatrix,
    rule: LocalRule,
}

impl GlobalOperator {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rule(&self) -> &LocalRule {
        &self.rule
    }

    pub fn translation_invariance_defect(&self) -> f64 {
        translation_invariance_defect(&self.matrix, self.n)
    }
}

pub fn build_global_operator(rule: &LocalRule, n: usize) -> Result<GlobalOperator> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "qubit count {n} outside 2..={MAX_QUBITS}"
        )));
    }
    // gates may have been built directly; re-check the unitarity contract
    let rule = LocalRule::new(rule.gates.clone())?;
    let dim = 1usize << n;
    let mut matrix = ComplexMatrix::zeros(dim, dim);
    let mut work = vec![C64::new(0.0, 0.0); dim];
    for col in 0..dim {
        for site in 0..n {
            work.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            work[col] = C64::new(1.0, 0.0);
            for gate in &rule.gates {
                apply_two_qubit(&mut work, gate, site, n)?;
            }
            for (r, z) in work.iter().enumerate() {
                matrix[(r, col)] += z;
            }
        }
    }
    Ok(GlobalOperator { n, matrix, rule })
}

/// One automaton step: `U·ψ / ‖U·ψ‖`.
pub fn step(state: &StateVector, g: &GlobalOperator) -> Result<StateVector> {
    if state.dim() != g.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs operator dimension {}",
            state.dim(),
            g.dim()
        )));
    }
    let next = &g.matrix * state.amplitudes();
    let norm = next.norm();
    if !(norm > ANNIHILATION_NORM) {
        return Err(Error::Annihilated { norm });
    }
    StateVector::normalized(next)
}

/// States `t = 0..=steps` and their basis-state probabilities.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<StateVector>,
    pub probabilities: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct TrajectoryJson {
    n_qubits: usize,
    states: Vec<Vec<[f64; 2]>>,
    probabilities: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn n_qubits(&self) -> usize {
        self.states[0].n_qubits()
    }

    pub fn last(&self) -> &StateVector {
        self.states.last().expect("trajectories are nonempty")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TrajectoryJson {
            n_qubits: self.n_qubits(),
            states: self
                .states
                .iter()
                .map(|s| vector_to_json(s.amplitudes()))
                .collect(),
            probabilities: self.probabilities.clone(),
        })
        .expect("plain data serializes")
    }

    /// One row per step: `step,p0,p1,...`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_probability_csv(&self.probabilities, out)
    }
}

pub fn write_probability_csv<W: Write>(rows: &[Vec<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = rows.first().map_or(0, Vec::len);
    let mut header = vec!["step".to_string()];
    header.extend((0..dim).map(|i| format!("p{i}")));
    w.write_record(&header)?;
    for (t, row) in rows.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(row.iter().map(|p| p.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `step,p0,p1,...` table back into probability rows.
pub fn read_probability_csv<R: std::io::Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (t, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("row {t}: bad probability {v:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if first != row.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row {t} has {} columns, expected {first}",
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn evolve(state0: &StateVector, g: &GlobalOperator, steps: usize) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(steps + 1);
    states.push(state0.clone());
    for t in 0..steps {
        let next = step(&states[t], g).map_err(|e| match e {
            Error::Annihilated { norm } => Error::AnnihilatedAt { step: t, norm },
            other => other,
        })?;
        states.push(next);
    }
    let probabilities = states.iter().map(StateVector::probabilities).collect();
    Ok(Trajectory {
        states,
        probabilities,
    })
}

/// Cyclic left rotation of the qubit string: `|q₀q₁…q_{n−1}⟩ ↦ |q₁…q_{n−1}q₀⟩`.
pub fn translate_index(b: usize, n: usize) -> usize {
    let mask = (1usize << n) - 1;
    ((b << 1) | (b >> (n - 1))) & mask
}

pub fn translate(state: &StateVector) -> StateVector {
    let n = state.n_qubits();
    let amps = state.amplitudes();
    let mut out = DVector::from_element(amps.len(), C64::new(0.0, 0.0));
    for (b, z) in amps.iter().enumerate() {
        out[translate_index(b, n)] = *z;
    }
    StateVector::new(out).expect("permutation preserves the norm")
}

pub fn translation_matrix(n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let mut t = ComplexMatrix::zeros(dim, dim);
    for b in 0..dim {
        t[(translate_index(b, n), b)] = C64::new(1.0, 0.0);
    }
    t
}

/// `‖U·T − T·U‖_max` for the cyclic translation `T` of an `n`-qubit register.
pub fn translation_invariance_defect(u: &ComplexMatrix, n: usize) -> f64 {
    let dim = 1usize << n;
    assert_eq!(u.nrows(), dim, "operator dimension must be 2^n");
    let image: Vec<usize> = (0..dim).map(|b| translate_index(b, n)).collect();
    let mut preimage = vec![0; dim];
    for (b, &t) in image.iter().enumerate() {
        preimage[t] = b;
    }
    // (U·T)[r, c] = U[r, π(c)], (T·U)[r, c] = U[π⁻¹(r), c]
    let mut worst = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            worst = worst.max((u[(r, image[c])] - u[(preimage[r], c)]).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::embed_two_qubit;

    fn basis(n: usize, b: usize) -> StateVector {
        StateVector::basis(n, b).unwrap()
    }

    fn close(a: &StateVector, b: &[C64], tol: f64) -> bool {
        a.amplitudes()
            .iter()
            .zip(b)
            .all(|(x, y)| (x - y).norm() < tol)
    }

    fn real(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    #[test]
    fn probability_table_round_trip() {
        let g = build_global_operator(&LocalRule::cnot(), 3).unwrap();
        let traj = evolve(&basis(3, 4), &g, 4).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        assert_eq!(
            read_probability_csv(buf.as_slice()).unwrap(),
            traj.probabilities
        );
    }

    #[test]
    fn identity_rule_sums_to_multiple_of_identity() {
        let g = build_global_operator(&LocalRule::identity(), 3).unwrap();
        let expect = ComplexMatrix::identity(8, 8) * C64::new(3.0, 0.0);
        assert_eq!(g.matrix(), &expect);
    }

    #[test]
    fn cnot_operator_hand_expansion() {
        let g = build_global_operator(&LocalRule::cnot(), 2).unwrap();
        let v = g.matrix() * basis(2, 0).amplitudes();
        assert_eq!(v.as_slice(), real(&[2.0, 0.0, 0.0, 0.0]).as_slice());

        let g = build_global_operator(&LocalRule::cnot(), 3).unwrap();
        let v = g.matrix() * basis(3, 0b100).amplitudes();
        let mut expect = vec![0.0; 8];
        expect[0b100] = 2.0;
        expect[0b110] = 1.0;
        assert_eq!(v.as_slice(), real(&expect).as_slice());
    }

    #[test]
    fn operator_matches_embedded_products() {
        let rule = LocalRule::new(vec![
            haar_unitary(4, RngSeed::new(1, 1)).unwrap(),
            haar_unitary(4, RngSeed::new(1, 2)).unwrap(),
        ])
        .unwrap();
        let n = 3;
        let g = build_global_operator(&rule, n).unwrap();
        let mut expect = ComplexMatrix::zeros(8, 8);
        for j in 0..n {
            let e1 = embed_two_qubit(&rule.gates()[0], j, n).unwrap();
            let e2 = embed_two_qubit(&rule.gates()[1], j, n).unwrap();
            expect += e2 * e1;
        }
        assert!((g.matrix() - expect).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(build_global_operator(&LocalRule::cnot(), 1).is_err());
        assert!(build_global_operator(&LocalRule::cnot(), 13).is_err());
        let mut m = ComplexMatrix::identity(4, 4);
        m[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(LocalRule::new(vec![m]), Err(Error::NotUnitary(_))));
        assert!(LocalRule::new(vec![]).is_err());
    }

    #[test]
    fn step_examples() {
        let g = build_global_operator(&LocalRule::cnot(), 3).unwrap();
        assert_eq!(step(&basis(3, 0), &g).unwrap(), basis(3, 0));
        let s = step(&basis(3, 0b100), &g).unwrap();
        let r5 = 5f64.sqrt();
        let mut expect = vec![0.0; 8];
        expect[0b100] = 2.0 / r5;
        expect[0b110] = 1.0 / r5;
        assert!(close(&s, &real(&expect), 1e-12));

        let id = build_global_operator(&LocalRule::identity(), 3).unwrap();
        let psi = crate::qlin::random_state(3, RngSeed::new(4, 4)).unwrap();
        assert!(close(
            &step(&psi, &id).unwrap(),
            psi.amplitudes().as_slice(),
            1e-14
        ));
    }

    #[test]
    fn step_detects_annihilation() {
        // (Z⊗I)·SWAP: the two site terms cancel on |01> + |10>
        let i = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let swap_z = ComplexMatrix::from_row_slice(
            4,
            4,
            &[i, z, z, z, z, z, i, z, z, -i, z, z, z, z, z, -i],
        );
        let rule = LocalRule::new(vec![swap_z]).unwrap();
        let g = build_global_operator(&rule, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::from_slice(&real(&[0.0, h, h, 0.0])).unwrap();
        assert!(matches!(step(&psi, &g), Err(Error::Annihilated { .. })));
        assert!(matches!(
            evolve(&psi, &g, 3),
            Err(Error::AnnihilatedAt { step: 0, .. })
        ));
    }

    #[test]
    fn evolve_fixed_point_and_shape() {
        let g = build_global_operator(&LocalRule::cnot(), 3).unwrap();
        let traj = evolve(&basis(3, 0), &g, 10).unwrap();
        assert_eq!(traj.states.len(), 11);
        assert!(traj.states.iter().all(|s| *s == basis(3, 0)));
        assert_eq!(evolve(&basis(3, 0), &g, 0).unwrap().states.len(), 1);

        let g = build_global_operator(&LocalRule::haar(RngSeed::new(8, 0)), 3).unwrap();
        let psi = crate::qlin::random_state(3, RngSeed::new(8, 1)).unwrap();
        let traj = evolve(&psi, &g, 5).unwrap();
        for row in &traj.probabilities {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn translation() {
        assert_eq!(translate(&basis(3, 0)), basis(3, 0));
        assert_eq!(translate(&basis(3, 0b100)), basis(3, 0b001));
        let psi = crate::qlin::random_state(4, RngSeed::new(2, 3)).unwrap();
        let mut t = psi.clone();
        for _ in 0..4 {
            t = translate(&t);
        }
        assert_eq!(t, psi);
        assert_eq!(
            &translation_matrix(4) * psi.amplitudes(),
            *translate(&psi).amplitudes()
        );
    }

    #[test]
    fn translation_defect_examples() {
        let g = build_global_operator(&LocalRule::identity(), 3).unwrap();
        assert_eq!(g.translation_invariance_defect(), 0.0);
        let g = build_global_operator(&LocalRule::cnot(), 3).unwrap();
        assert!(g.translation_invariance_defect() < 1e-12);
        let single = embed_two_qubit(&LocalRule::cnot().gates()[0], 0, 3).unwrap();
        assert!(translation_invariance_defect(&single, 3) > 0.5);
    }

    #[test]
    fn rule_json_round_trip() {
        let rule = LocalRule::haar(RngSeed::new(3, 3));
        let text = serde_json::to_string(&rule.to_json()).unwrap();
        assert_eq!(LocalRule::from_json_str(&text).unwrap(), rule);
    }
}
