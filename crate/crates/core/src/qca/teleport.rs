//! Teleportation-driven automaton: each cell's gate is chosen by the two
//! classical bits obtained when teleporting its right neighbour.

use rand::Rng;
use serde::Serialize;

use crate::qlin::{factorize_product, RngSeed, StateVector, TaskRng};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CellGate {
    H,
    X,
    Y,
    Z,
}

impl CellGate {
    /// Gate lookup for the measured bit pair: 00→H, 01→X, 10→Y, 11→Z.
    pub fn from_bits(bits: (u8, u8)) -> Self {
        match bits {
            (0, 0) => CellGate::H,
            (0, 1) => CellGate::X,
            (1, 0) => CellGate::Y,
            _ => CellGate::Z,
        }
    }

    pub fn apply(self, q: [C64; 2]) -> [C64; 2] {
        let [a, b] = q;
        let i = C64::i();
        match self {
            CellGate::H => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                [(a + b) * h, (a - b) * h]
            }
            CellGate::X => [b, a],
            CellGate::Y => [-i * b, i * a],
            CellGate::Z => [a, -b],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportEvent {
    pub cell: usize,
    pub source: usize,
    pub bits: (u8, u8),
    pub gate: CellGate,
}

#[derive(Debug, Clone, Serialize)]
pub struct TeleportationRun {
    pub n_qubits: usize,
    pub steps: usize,
    /// `log[t][j]`: the update of cell `j` during step `t`.
    pub log: Vec<Vec<TeleportEvent>>,
    /// `cells[t][j]`: single-qubit state of cell `j` after `t` steps.
    #[serde(skip)]
    pub cells: Vec<Vec<[C64; 2]>>,
}

impl TeleportationRun {
    pub fn bit_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for ev in self.log.iter().flatten() {
            counts[(2 * ev.bits.0 + ev.bits.1) as usize] += 1;
        }
        counts
    }
}

/// Teleports `phi` through a fresh Bell pair `(|00⟩ + |11⟩)/√2`.
///
/// Qubit order is (source, Alice's half, Bob's half). Returns the measured
/// bits `(m_source, m_alice)` and Bob's corrected qubit.
pub fn teleport_qubit(phi: [C64; 2], rng: &mut TaskRng) -> ((u8, u8), [C64; 2]) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero = C64::new(0.0, 0.0);
    let mut psi = [zero; 8];
    // φ ⊗ Φ+
    for s in 0..2 {
        psi[s << 2] = phi[s] * h;
        psi[(s << 2) | 0b11] = phi[s] * h;
    }
    // CNOT source → Alice
    for b in [0b100, 0b101] {
        psi.swap(b, b | 0b010);
    }
    // H on source
    for low in 0..4 {
        let (a, b) = (psi[low], psi[0b100 | low]);
        psi[low] = (a + b) * h;
        psi[0b100 | low] = (a - b) * h;
    }
    let probs: [f64; 4] =
        std::array::from_fn(|m| psi[m << 1].norm_sqr() + psi[(m << 1) | 1].norm_sqr());
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut outcome = 3;
    let mut acc = 0.0;
    for (m, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            outcome = m;
            break;
        }
    }
    let (m_src, m_alice) = ((outcome >> 1) as u8, (outcome & 1) as u8);
    let norm = probs[outcome].sqrt();
    let mut bob = [psi[outcome << 1] / norm, psi[(outcome << 1) | 1] / norm];
    if m_alice == 1 {
        bob.swap(0, 1);
    }
    if m_src == 1 {
        bob[1] = -bob[1];
    }
    ((m_src, m_alice), bob)
}

/// Runs the teleportation automaton on a product initial state for `steps`
/// synchronous updates. Every cell `j` teleports cell `(j+1) mod n` and
/// applies the looked-up gate to its own previous state; the teleported cell
/// keeps its state.
pub fn run_teleportation_qca(
    initial: &StateVector,
    steps: usize,
    seed: RngSeed,
) -> Result<TeleportationRun> {
    if steps == 0 {
        return Err(Error::InvalidArgument(
            "teleportation run needs at least one step".into(),
        ));
    }
    let n = initial.n_qubits();
    let mut rng = seed.rng();
    let mut cells = vec![factorize_product(initial)?];
    let mut log = Vec::with_capacity(steps);
    for _ in 0..steps {
        let prev = cells.last().expect("nonempty");
        let mut next = Vec::with_capacity(n);
        let mut events = Vec::with_capacity(n);
        for j in 0..n {
            let source = (j + 1) % n;
            let (bits, _restored) = teleport_qubit(prev[source], &mut rng);
            let gate = CellGate::from_bits(bits);
            next.push(gate.apply(prev[j]));
            events.push(TeleportEvent {
                cell: j,
                source,
                bits,
                gate,
            });
        }
        cells.push(next);
        log.push(events);
    }
    Ok(TeleportationRun {
        n_qubits: n,
        steps,
        log,
        cells,
    })
}
