use std::collections::BTreeSet;

use proptest::prelude::*;
use qta::qca::{build_global_operator, evolve, run_teleportation_qca, step, LocalRule};
use qta::qlin::{
    eig_hermitian, haar_unitary, kron, max_abs, partial_trace, random_state, unitarity_defect,
    ComplexMatrix, DensityMatrix, RngSeed, StateVector,
};
use qta::C64;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut x = seed | 1;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(next(), next()))
}

fn mixed_state(n: usize, seed: u64, terms: usize) -> DensityMatrix {
    let dim = 1 << n;
    let mut rho = ComplexMatrix::zeros(dim, dim);
    let weights: Vec<f64> = (0..terms)
        .map(|i| 1.0 + ((seed >> (i % 60)) & 7) as f64)
        .collect();
    let total: f64 = weights.iter().sum();
    for (i, w) in weights.iter().enumerate() {
        let psi = random_state(n, RngSeed::new(seed, i as u64)).unwrap();
        let v = psi.amplitudes();
        rho += v * v.adjoint() * C64::new(w / total, 0.0);
    }
    DensityMatrix::new(rho).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn kron_is_associative(sa in any::<u64>(), sb in any::<u64>(), sc in any::<u64>(), dims in (1usize..4, 1usize..4, 1usize..4)) {
        let a = random_matrix(dims.0, dims.1, sa);
        let b = random_matrix(dims.1, dims.2, sb);
        let c = random_matrix(dims.2, dims.0, sc);
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(max_abs(&(left - right)) < 1e-12);
    }

    #[test]
    fn partial_trace_keeps_trace_and_hermiticity(n in 1usize..5, seed in any::<u64>(), terms in 1usize..4, mask in any::<u8>()) {
        let rho = mixed_state(n, seed, terms);
        let keep: BTreeSet<usize> = (0..n).filter(|q| mask & (1 << q) != 0).collect();
        if keep.is_empty() {
            prop_assert!(partial_trace(&rho, &keep).is_err());
            return Ok(());
        }
        let reduced = partial_trace(&rho, &keep).unwrap();
        let m = reduced.matrix();
        prop_assert!((m.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        prop_assert!(max_abs(&(m - m.adjoint())) < 1e-10);
        prop_assert_eq!(m.nrows(), 1 << keep.len());
    }

    #[test]
    fn hermitian_eigenvalues_sum_to_trace(d in 1usize..9, seed in any::<u64>()) {
        let a = random_matrix(d, d, seed);
        let h = &a + a.adjoint();
        let eig = eig_hermitian(&h).unwrap();
        prop_assert!((eig.values.iter().sum::<f64>() - h.trace().re).abs() < 1e-8);
    }

    #[test]
    fn step_is_norm_preserving(n in 2usize..5, seed in any::<u64>()) {
        let g = build_global_operator(&LocalRule::haar(RngSeed::new(seed, 0)), n).unwrap();
        let s = random_state(n, RngSeed::new(seed, 1)).unwrap();
        let next = step(&s, &g).unwrap();
        prop_assert!((next.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_is_phase_equivariant(n in 2usize..5, seed in any::<u64>(), theta in -10.0f64..10.0) {
        let g = build_global_operator(&LocalRule::haar(RngSeed::new(seed, 0)), n).unwrap();
        let s = random_state(n, RngSeed::new(seed, 1)).unwrap();
        let rotated = step(&s.scaled_by_phase(theta), &g).unwrap();
        let expected = step(&s, &g).unwrap().scaled_by_phase(theta);
        prop_assert!((rotated.amplitudes() - expected.amplitudes()).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn identity_rule_freezes_trajectories(n in 2usize..5, seed in any::<u64>()) {
        let g = build_global_operator(&LocalRule::identity(), n).unwrap();
        let s = random_state(n, RngSeed::new(seed, 0)).unwrap();
        let traj = evolve(&s, &g, 5).unwrap();
        for st in &traj.states {
            prop_assert!((st.amplitudes() - s.amplitudes()).iter().all(|z| z.norm() < 1e-14));
        }
    }
}

#[test]
fn haar_unitaries_for_consecutive_seeds() {
    for d in [2usize, 4, 8] {
        for i in 0..100 {
            let u = haar_unitary(d, RngSeed::new(20_190_701, i)).unwrap();
            assert!(unitarity_defect(&u) < 1e-10, "d {d} seed {i}");
        }
    }
}

#[test]
fn randomized_operations_repeat_for_a_seed() {
    let seed = RngSeed::new(5, 9);
    assert_eq!(
        haar_unitary(8, seed).unwrap(),
        haar_unitary(8, seed).unwrap()
    );
    assert_eq!(
        random_state(3, seed).unwrap(),
        random_state(3, seed).unwrap()
    );
    assert_ne!(
        random_state(3, seed).unwrap(),
        random_state(3, RngSeed::new(5, 10)).unwrap()
    );
    let g1 = build_global_operator(&LocalRule::haar(seed), 3).unwrap();
    let g2 = build_global_operator(&LocalRule::haar(seed), 3).unwrap();
    assert_eq!(g1.matrix(), g2.matrix());
}

#[test]
fn teleportation_bits_are_uniform() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let cells = [
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        [C64::new(h, 0.0), C64::new(h, 0.0)],
        [C64::new(0.6, 0.0), C64::new(0.0, 0.8)],
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    ];
    let initial = StateVector::product(&cells).unwrap();
    let run = run_teleportation_qca(&initial, 1000, RngSeed::new(20_190_701, 0)).unwrap();
    let counts = run.bit_counts();
    let total: usize = counts.iter().sum();
    assert!(total >= 4000);
    let expected = total as f64 / 4.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 99.9% quantile of chi-square with 3 degrees of freedom
    assert!(chi2 < 16.266, "chi-square {chi2} for counts {counts:?}");
}
