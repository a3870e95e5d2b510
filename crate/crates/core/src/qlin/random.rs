use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use super::state::StateVector;
use crate::{Error, Result, C64};

pub type TaskRng = Xoshiro256PlusPlus;

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one task in an ensemble: a master seed plus the task's index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RngSeed {
    pub master: u64,
    pub task_index: u64,
}

impl RngSeed {
    pub const fn new(master: u64, task_index: u64) -> Self {
        Self { master, task_index }
    }

    /// The derived 64-bit task seed, `splitmix64(master ^ task_index)`.
    pub fn task_seed(&self) -> u64 {
        splitmix64(self.master ^ self.task_index)
    }

    pub fn rng(&self) -> TaskRng {
        Xoshiro256PlusPlus::seed_from_u64(self.task_seed())
    }
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed `d × d` unitary: QR of a complex Ginibre matrix, with
/// each column of `Q` multiplied by `r_jj / |r_jj|`.
pub fn haar_unitary(d: usize, seed: RngSeed) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("Haar dimension {d} < 2")));
    }
    let mut rng = seed.rng();
    // row-major fill keeps the sample order independent of storage layout
    let entries: Vec<C64> = (0..d * d).map(|_| complex_normal(&mut rng)).collect();
    let ginibre = DMatrix::from_row_slice(d, d, &entries);
    let qr = ginibre.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for v in q.column_mut(j).iter_mut() {
            *v *= phase;
        }
    }
    Ok(q)
}

/// Random pure state: independent complex standard normal amplitudes,
/// normalized.
pub fn random_state(n: usize, seed: RngSeed) -> Result<StateVector> {
    if n == 0 || n > super::MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qubit count {n} outside 1..=12"
        )));
    }
    let mut rng = seed.rng();
    let amps = DVector::from_iterator(1 << n, (0..1 << n).map(|_| complex_normal(&mut rng)));
    StateVector::normalized(amps)
}
