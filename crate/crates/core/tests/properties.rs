//! Property checks for the linear-algebra kernel: distance/fidelity
//! inequalities, measurement optimality against randomized oracles, and
//! structural invariants of the register operations.

use proptest::prelude::*;
use qclab_core::qmath::embed::basis_projector;
use qclab_core::qmath::linalg::trace_norm_hermitian;
use qclab_core::qmath::types::{DensityMatrix, StateVector};
use qclab_core::qmath::{
    fidelity, gentle_post_state, haar_unitary, helstrom_povm, partial_trace, random_density,
    random_effect, random_pure_state, trace_distance, uhlmann_unitary, ComplexMatrix,
    RegisterLayout, C64,
};
use qclab_core::SplitRng;

fn random_pair(dim: usize, rng: &mut SplitRng) -> (DensityMatrix, DensityMatrix) {
    let rank_a = 1 + rng.next_below(dim);
    let rank_b = 1 + rng.next_below(dim);
    (
        random_density(dim, rank_a, rng),
        random_density(dim, rank_b, rng),
    )
}

#[test]
fn fuchs_van_de_graaf_sandwich() {
    let mut rng = SplitRng::from_seed(0xFD00);
    for trial in 0..100 {
        let dim = 2 + rng.next_below(7);
        let (rho, sigma) = random_pair(dim, &mut rng);
        let f = fidelity(&rho, &sigma).unwrap();
        let td = trace_distance(&rho, &sigma).unwrap();
        let lower = 1.0 - f.sqrt();
        let upper = (1.0 - f).sqrt();
        assert!(lower <= td + 1e-9, "trial {trial}: 1-sqrt(F) > TD");
        assert!(td <= upper + 1e-9, "trial {trial}: TD > sqrt(1-F)");
    }
}

#[test]
fn helstrom_advantage_equals_trace_distance() {
    let mut rng = SplitRng::from_seed(0x4E15);
    for _ in 0..100 {
        let dim = 2 + rng.next_below(7);
        let (rho, sigma) = random_pair(dim, &mut rng);
        let (povm, advantage) = helstrom_povm(&rho, &sigma).unwrap();
        let td = trace_distance(&rho, &sigma).unwrap();
        assert!((advantage - td).abs() < 1e-9);
        // The POVM itself realizes the advantage.
        let realized = povm.elements()[0]
            .mul(&rho.matrix().sub(sigma.matrix()))
            .trace()
            .re;
        assert!((realized - td).abs() < 1e-9);
    }
}

#[test]
fn no_sampled_povm_beats_helstrom() {
    let mut rng = SplitRng::from_seed(0xBEA7);
    for _ in 0..20 {
        let dim = 2 + rng.next_below(3);
        let (rho, sigma) = random_pair(dim, &mut rng);
        let (_, advantage) = helstrom_povm(&rho, &sigma).unwrap();
        for _ in 0..50 {
            // Random two-outcome POVM from a random effect.
            let e = random_effect(dim, &mut rng);
            let sampled = e.mul(&rho.matrix().sub(sigma.matrix())).trace().re;
            assert!(sampled <= advantage + 1e-9);
        }
    }
}

#[test]
fn gentle_measurement_bound_on_corpus() {
    // 200 random (rho, E) with acceptance at least 1 - eps: the full trace
    // norm of the disturbance stays below 2 sqrt(eps).
    let mut rng = SplitRng::from_seed(0x6E47);
    for trial in 0..200 {
        let dim = 2 + rng.next_below(7);
        let rho = random_density(dim, 1 + rng.next_below(dim), &mut rng);
        let floor = 0.55 + 0.4 * rng.next_f64();
        let effect = qclab_core::qmath::ops::random_high_acceptance_effect(&rho, floor, &mut rng);
        let (post, accept) = gentle_post_state(&rho, &effect).unwrap();
        let eps = (1.0 - accept).max(0.0);
        let l1 = trace_norm_hermitian(&rho.matrix().sub(post.matrix()));
        assert!(
            l1 <= 2.0 * eps.sqrt() + 1e-9,
            "trial {trial}: l1 = {l1}, bound = {}",
            2.0 * eps.sqrt()
        );
    }
}

#[test]
fn uhlmann_overlap_squares_to_reduction_fidelity() {
    let mut rng = SplitRng::from_seed(0x0111);
    for _ in 0..60 {
        let layout = RegisterLayout::new(vec![2, 2]).unwrap();
        let psi0 = random_pure_state(&layout, &mut rng);
        let psi1 = random_pure_state(&layout, &mut rng);
        let (u, overlap) = uhlmann_unitary(&psi0, &psi1, &[1]).unwrap();
        u.validate().unwrap();
        let rho0 = psi0.reduced_density(&[0]).unwrap();
        let rho1 = psi1.reduced_density(&[0]).unwrap();
        let f = fidelity(&rho0, &rho1).unwrap();
        assert!((overlap * overlap - f).abs() < 1e-9);

        // Random unitaries on the act-on subsystem never beat the overlap.
        for _ in 0..30 {
            let cand = haar_unitary(2, &mut rng);
            let embedded =
                qclab_core::qmath::embed::embed(&layout, cand.matrix(), &[1]).unwrap();
            let moved = StateVector::new(layout.clone(), embedded.mul_vec(psi1.amps())).unwrap();
            let attained = psi0.inner(&moved).norm();
            assert!(attained <= overlap + 1e-9);
        }
    }
}

#[test]
fn partial_trace_outputs_are_states() {
    let mut rng = SplitRng::from_seed(0x77AC);
    for _ in 0..50 {
        let layout = RegisterLayout::new(vec![2, 3, 2]).unwrap();
        let rho = random_density(12, 1 + rng.next_below(12), &mut rng)
            .with_layout(layout.clone())
            .unwrap();
        for keep in [vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]] {
            let red = partial_trace(&rho, &keep).unwrap();
            red.validate().unwrap();
            assert!((red.matrix().trace().re - 1.0).abs() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_dimensions_multiply(
        ra in 1usize..4, ca in 1usize..4, rb in 1usize..4, cb in 1usize..4,
        seed in any::<u64>()
    ) {
        let mut rng = SplitRng::from_seed(seed);
        let a = ComplexMatrix::from_fn(ra, ca, |_, _| C64::new(rng.next_gaussian(), rng.next_gaussian()));
        let b = ComplexMatrix::from_fn(rb, cb, |_, _| C64::new(rng.next_gaussian(), rng.next_gaussian()));
        let t = qclab_core::qmath::tensor(&a, &b);
        prop_assert_eq!(t.rows(), ra * rb);
        prop_assert_eq!(t.cols(), ca * cb);
        // Spot-check the entry formula on a random position.
        let (i, j) = (rng.next_below(ra), rng.next_below(ca));
        let (k, l) = (rng.next_below(rb), rng.next_below(cb));
        let expect = a.get(i, j) * b.get(k, l);
        prop_assert!((t.get(i * rb + k, j * cb + l) - expect).norm() < 1e-12);
    }

    #[test]
    fn fidelity_symmetric_and_normalized(seed in any::<u64>(), dim in 2usize..7) {
        let mut rng = SplitRng::from_seed(seed);
        let (rho, sigma) = random_pair(dim, &mut rng);
        let fab = fidelity(&rho, &sigma).unwrap();
        let fba = fidelity(&sigma, &rho).unwrap();
        prop_assert!((fab - fba).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&fab));
        prop_assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn trace_distance_is_a_metric_sample(seed in any::<u64>(), dim in 2usize..6) {
        let mut rng = SplitRng::from_seed(seed);
        let (a, b) = random_pair(dim, &mut rng);
        let c = random_density(dim, 1 + rng.next_below(dim), &mut rng);
        let dab = trace_distance(&a, &b).unwrap();
        let dbc = trace_distance(&b, &c).unwrap();
        let dac = trace_distance(&a, &c).unwrap();
        prop_assert!(trace_distance(&a, &a).unwrap() < 1e-10);
        prop_assert!((dab - trace_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(dac <= dab + dbc + 1e-9);
    }

    #[test]
    fn basis_states_have_orthogonal_supports(i in 0usize..4, j in 0usize..4) {
        let layout = RegisterLayout::qubits(2).unwrap();
        let a = DensityMatrix::new(layout.clone(), basis_projector(4, i)).unwrap();
        let b = DensityMatrix::new(layout, basis_projector(4, j)).unwrap();
        let td = trace_distance(&a, &b).unwrap();
        if i == j {
            prop_assert!(td < 1e-12);
        } else {
            prop_assert!((td - 1.0).abs() < 1e-12);
        }
    }
}
