//! Acceptance suite: one test per certified claim, each printing a pass
//! line with the checked quantity. Tolerances are pinned in the asserts.

use std::collections::BTreeMap;

use qclab_cli::{run, ExperimentConfig};
use qclab_core::commit::{self, binding_attack_search, AttackSearchConfig};
use qclab_core::dqre::{
    build_constant_circuit, expand_plaintext, hybrid_equiv_check, matched_size, DqreScheme, Gate,
    ProgramCircuit, ReferenceDqre,
};
use qclab_core::money::{self, check, correctness_transform};
use qclab_core::owsg;
use qclab_core::qmath::embed::basis_projector;
use qclab_core::qmath::linalg::trace_norm_hermitian;
use qclab_core::qmath::types::DensityMatrix;
use qclab_core::qmath::{
    fidelity, gentle_post_state, helstrom_povm, random_density, trace_distance, RegisterLayout,
};
use qclab_core::unclone::{self, cloning_game_value, game_value_for_povms, SplitStrategy};
use qclab_core::SplitRng;

fn config(experiment: &str, seed: u64, params: &[(&str, serde_json::Value)]) -> ExperimentConfig {
    ExperimentConfig {
        experiment: experiment.to_string(),
        params: params
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect::<BTreeMap<_, _>>(),
        seed: Some(seed),
        out: None,
    }
}

#[test]
fn criterion_01_helstrom_and_fuchs_van_de_graaf() {
    let mut rng = SplitRng::from_seed(101);
    for trial in 0..100 {
        let dim = 2 + rng.next_below(7); // up to 8
        let rho = random_density(dim, 1 + rng.next_below(dim), &mut rng);
        let sigma = random_density(dim, 1 + rng.next_below(dim), &mut rng);
        let (_, advantage) = helstrom_povm(&rho, &sigma).unwrap();
        let td = trace_distance(&rho, &sigma).unwrap();
        assert!(
            (advantage - td).abs() < 1e-9,
            "trial {trial}: advantage {advantage} vs td {td}"
        );
        let f = fidelity(&rho, &sigma).unwrap();
        assert!(1.0 - f.sqrt() <= td + 1e-9, "trial {trial}");
        assert!(td <= (1.0 - f).sqrt() + 1e-9, "trial {trial}");
    }
    println!("[PASS] criterion 01: Helstrom advantage = trace distance and 1-sqrt(F) <= TD <= sqrt(1-F) on 100 random pairs");
}

#[test]
fn criterion_02_binding_attack_reaches_uhlmann_bound() {
    let mut rng = SplitRng::from_seed(102);
    let cfg = AttackSearchConfig {
        restarts: 50,
        iterations: 60,
        ..Default::default()
    };
    for trial in 0..50 {
        let c = commit::candidates::random_two_qubit(&mut rng);
        let target = c.metrics().f.sqrt();
        let (_, achieved) = binding_attack_search(&c, &cfg, &mut rng).unwrap();
        assert!(achieved <= target + 1e-9, "trial {trial}: overshoot");
        assert!(
            achieved >= target - 1e-3,
            "trial {trial}: achieved {achieved} << sqrt(f) {target}"
        );
    }
    println!("[PASS] criterion 02: binding attack search reaches sqrt(f) within 1e-3 and never exceeds it on 50 random commitments");
}

#[test]
fn criterion_03_gentle_measurement_bound() {
    let mut rng = SplitRng::from_seed(103);
    for trial in 0..200 {
        let dim = 2 + rng.next_below(7);
        let rho = random_density(dim, 1 + rng.next_below(dim), &mut rng);
        let floor = 0.5 + 0.5 * rng.next_f64();
        let effect = qclab_core::qmath::ops::random_high_acceptance_effect(&rho, floor, &mut rng);
        let (post, accept) = gentle_post_state(&rho, &effect).unwrap();
        let eps = (1.0 - accept).max(0.0);
        let l1 = trace_norm_hermitian(&rho.matrix().sub(post.matrix()));
        assert!(
            l1 <= 2.0 * eps.sqrt() + 1e-9,
            "trial {trial}: l1 {l1} vs 2 sqrt(eps) {}",
            2.0 * eps.sqrt()
        );
    }
    println!("[PASS] criterion 03: ||rho - rho'||_1 <= 2 sqrt(eps) + 1e-9 on 200 gentle-measurement instances");
}

#[test]
fn criterion_04_flavor_conversion() {
    let mut rng = SplitRng::from_seed(104);
    for trial in 0..100 {
        let c = commit::candidates::random_two_qubit(&mut rng);
        let f = c.metrics().f;
        let f_tilde = c.flavor_convert().unwrap().metrics().f;
        assert!(
            f_tilde <= (1.0 - f).sqrt() + 1e-9,
            "trial {trial}: f~ {f_tilde} vs sqrt(1-f) {}",
            (1.0 - f).sqrt()
        );
    }
    let converted = commit::candidates::orthogonal().flavor_convert().unwrap();
    assert!(converted.metrics().hiding_td < 1e-9);
    println!("[PASS] criterion 04: converted fidelity <= sqrt(1-f) on 100 random commitments; orthogonal scheme converts to perfect hiding");
}

#[test]
fn criterion_05_binding_amplification() {
    let mut rng = SplitRng::from_seed(105);
    let mut schemes = vec![commit::candidates::bb84()];
    schemes.push(commit::candidates::random_two_qubit(&mut rng));
    schemes.push(commit::candidates::random_two_qubit(&mut rng));
    for (i, c) in schemes.iter().enumerate() {
        let f = c.metrics().f;
        let f_tilde = c.flavor_convert().unwrap().metrics().f;
        for lam in [1usize, 2] {
            let f_star = c.amplify(lam).unwrap().metrics().f;
            let product = (f * f_tilde).powi(lam as i32);
            let chain = f.powi(lam as i32) * (1.0 - f).powf(lam as f64 / 2.0);
            assert!(
                (f_star - product).abs() < 1e-9,
                "scheme {i}, lam {lam}: f* {f_star} vs (f f~)^lam {product}"
            );
            assert!(f_star <= chain + 1e-9, "scheme {i}, lam {lam}");
            assert!(chain <= 2f64.powf(-(lam as f64) / 2.0) + 1e-9);
            assert!(f_star <= 2f64.powf(-(lam as f64) / 2.0) + 1e-9);
        }
    }
    println!("[PASS] criterion 05: f* = (f f~)^lam within 1e-9 and f* <= f^lam (1-f)^(lam/2) <= 2^(-lam/2) for lam in {{1,2}}");
}

#[test]
fn criterion_06_xor_combiner_hiding_sandwich() {
    let mut rng = SplitRng::from_seed(106);
    let pick = |rng: &mut SplitRng| match rng.next_below(4) {
        0 => commit::candidates::bb84(),
        1 => commit::candidates::orthogonal(),
        2 => commit::candidates::constant(),
        _ => commit::candidates::random_two_qubit(rng),
    };
    for n in [2usize, 3] {
        for trial in 0..6 {
            let components: Vec<_> = (0..n).map(|_| pick(&mut rng)).collect();
            let tds: Vec<f64> = components.iter().map(|c| c.metrics().hiding_td).collect();
            let combined = commit::xor_combine(&components).unwrap();
            let td = combined.metrics().hiding_td;
            let product: f64 = tds.iter().product();
            let min = tds.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            assert!(
                td >= product - 1e-9,
                "n {n} trial {trial}: td {td} below product {product}"
            );
            assert!(td <= min + 1e-9, "n {n} trial {trial}: td {td} above min {min}");
        }
    }
    println!("[PASS] criterion 06: product(TD_i) - 1e-9 <= TD_comb <= min(TD_i) + 1e-9 for n in {{2,3}}");
}

#[test]
fn criterion_07_owsg_transform_corpus() {
    let mut rng = SplitRng::from_seed(107);
    for i in 0..500 {
        let scheme = match i % 10 {
            0 => owsg::candidates::always_reject(),
            1 => owsg::candidates::half_correct(),
            _ => owsg::candidates::random_scheme(&mut rng),
        };
        let t = scheme.gentle_transform().unwrap();
        assert!(
            (t.scheme().correctness() - 1.0).abs() < 1e-9,
            "instance {i}: correctness {}",
            t.scheme().correctness()
        );
        for k in 0..scheme.key_count() {
            let eps = (1.0 - scheme.accept_prob(k, scheme.state(k))).max(0.0);
            let anc = scheme.ancilla_qubits() + 1;
            let mut ref_mat = scheme.state(k).matrix().clone();
            for q in 0..anc {
                let bit = if q == anc - 1 { 1 } else { 0 };
                ref_mat = ref_mat.kron(&basis_projector(2, bit));
            }
            let dist = 0.5 * trace_norm_hermitian(&t.scheme().state(k).matrix().sub(&ref_mat));
            assert!(dist <= 2.0 * eps.sqrt() + 1e-9, "instance {i}, key {k}");
        }
    }
    println!("[PASS] criterion 07: transformed correctness = 1 and distance <= 2 sqrt(eps) on a 500-instance corpus including always-reject verifiers");
}

#[test]
fn criterion_08_owsg_combiner_factorization() {
    let mut rng = SplitRng::from_seed(108);
    for trial in 0..12 {
        let s1 = owsg::candidates::random_scheme(&mut rng);
        let s2 = owsg::candidates::random_scheme(&mut rng);
        assert!(s1.key_count() <= 8 && s2.key_count() <= 8);
        let combined = owsg::parallel_combine(&[s1.clone(), s2.clone()]).unwrap();
        let v1 = s1.gentle_transform().unwrap().scheme().blind_attack_value().1;
        let v2 = s2.gentle_transform().unwrap().scheme().blind_attack_value().1;
        let v = combined.blind_attack_value().1;
        assert!(
            (v - v1 * v2).abs() < 1e-9,
            "trial {trial}: combined {v} vs product {}",
            v1 * v2
        );
    }
    println!("[PASS] criterion 08: blind-attack value of the parallel combiner equals the product of component values within 1e-9");
}

#[test]
fn criterion_09_money_check_concentration() {
    let mut rng = SplitRng::from_seed(109);
    let lam = 144usize;
    let runs = 10_000usize;

    // Per-trial acceptance 1/2: pass rate under the two-sided tail bound.
    let half = money::candidates::constant_acceptance(0.5);
    let mut passes = 0usize;
    for _ in 0..runs {
        if check(&half, lam, &mut rng) {
            passes += 1;
        }
    }
    let observed = passes as f64 / runs as f64;
    let bound = 2.0 * (-(lam as f64) / 72.0).exp();
    assert!(observed <= bound, "observed {observed} > bound {bound}");

    // Perfect acceptance: Check passes every run.
    let perfect = money::candidates::constant_acceptance(1.0);
    for _ in 0..runs {
        assert!(check(&perfect, lam, &mut rng));
    }

    // Transformed-scheme Monte-Carlo correctness floor.
    let transformed = correctness_transform(&money::candidates::constant_acceptance(0.95), lam);
    let (est, sigma) = transformed.correctness_estimate(runs, &mut rng);
    let floor = 1.0 - 4.0 * (-(lam as f64) / 72.0).exp() - 3.0 * sigma.max(1e-4);
    assert!(est >= floor, "estimate {est} below floor {floor}");

    println!("[PASS] criterion 09: Check pass rate {observed:.4} <= 2 exp(-2) at p=1/2; Check always passes at p=1; transformed correctness {est:.4} >= {floor:.4}");
}

#[test]
fn criterion_10_unclonable_ske() {
    // Transformed correctness on a 500-instance corpus.
    let mut rng = SplitRng::from_seed(110);
    for i in 0..500 {
        let scheme = match i % 10 {
            0 => unclone::candidates::broken_decryptor(),
            1 => unclone::candidates::noise_scheme(),
            _ => unclone::candidates::random_scheme(&mut rng),
        };
        let t = scheme.gentle_transform().unwrap();
        assert!(
            (t.scheme().correctness() - 1.0).abs() < 1e-9,
            "instance {i}"
        );
    }

    // XOR combiner roundtrip, n = 2 and n = 3 components, 2-bit messages.
    let two = unclone::xor_combine(&[
        unclone::candidates::passthrough(2, 1),
        unclone::candidates::passthrough(2, 1),
    ])
    .unwrap();
    for key in 0..two.key_count() {
        for m in 0..4 {
            assert!((two.decrypt_success(key, m) - 1.0).abs() < 1e-9);
        }
    }
    let three = unclone::xor_combine(&[
        unclone::candidates::passthrough(2, 1),
        unclone::candidates::passthrough(2, 0),
        unclone::candidates::passthrough(2, 0),
    ])
    .unwrap();
    for key in 0..three.key_count() {
        for m in 0..4 {
            assert!((three.decrypt_success(key, m) - 1.0).abs() < 1e-9);
        }
    }

    // Exact secrecy metrics.
    assert!(unclone::candidates::qotp_one_qubit().ind_advantage() <= 1e-9);
    assert!((unclone::candidates::passthrough(1, 1).ind_advantage() - 1.0).abs() < 1e-12);

    // Key normalization gives an exactly uniform marginal.
    let normalized = unclone::candidates::qotp_one_qubit().normalize_key().unwrap();
    for w in normalized.key_weights() {
        assert!((w - 0.25).abs() <= 1e-12);
    }

    println!("[PASS] criterion 10: transformed correctness = 1 on corpus; XOR roundtrip exact for n <= 3 with 2-bit messages; OTP advantage <= 1e-9, clear scheme = 1; key marginal exactly uniform");
}

#[test]
fn criterion_11_cloning_game() {
    let mut rng = SplitRng::from_seed(111);
    let scheme = unclone::candidates::passthrough(1, 1);
    let attack = SplitStrategy::broadcast(scheme.ct_layout());

    // Constant guess: both parties answer 0 regardless of their registers.
    let identity_povm = |dim: usize| {
        qclab_core::qmath::types::Povm::new(
            RegisterLayout::qubits(1).unwrap(),
            vec![
                qclab_core::qmath::ComplexMatrix::identity(dim),
                qclab_core::qmath::ComplexMatrix::zeros(dim, dim),
            ],
        )
        .unwrap()
    };
    let povms: Vec<_> = (0..scheme.key_count()).map(|_| identity_povm(2)).collect();
    let constant = game_value_for_povms(&scheme, &attack, 0, 1, &povms, &povms).unwrap();
    assert!((constant - 0.5).abs() < 1e-12);

    // Broadcast on the clear scheme reaches 1 via seesaw, monotonically.
    let report = cloning_game_value(&scheme, &attack, 0, 1, 30, &mut rng).unwrap();
    assert!(report.value >= 1.0 - 1e-6);
    for w in report.per_iteration_values.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }

    // Monotonicity on a hiding scheme too.
    let qotp = unclone::candidates::qotp_one_qubit();
    let report2 = cloning_game_value(
        &qotp,
        &SplitStrategy::broadcast(qotp.ct_layout()),
        0,
        1,
        30,
        &mut rng,
    )
    .unwrap();
    for w in report2.per_iteration_values.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }
    assert!(report2.value >= 0.5 - 1e-12);

    println!("[PASS] criterion 11: constant-guess value = 1/2 within 1e-12; broadcast attack reaches {:.6} >= 1 - 1e-6; seesaw traces monotone", report.value);
}

#[test]
fn criterion_12_plaintext_expansion() {
    let mut rng = SplitRng::from_seed(112);

    // Roundtrip for every message, n up to 4, over 50 random keys.
    for n in [2usize, 4] {
        let inner = unclone::candidates::passthrough(1, 1)
            .gentle_transform()
            .unwrap()
            .into_scheme();
        let scheme = expand_plaintext(ReferenceDqre::new(8), inner, n, 1).unwrap();
        for _ in 0..50 {
            let key = scheme.keygen(&mut rng);
            for m in 0..(1usize << n) {
                let ct = scheme.enc(&key, m, &mut rng).unwrap();
                let probs = scheme.dec_distribution(&key, &ct).unwrap();
                assert!((probs[m] - 1.0).abs() < 1e-9, "n {n}, m {m}");
            }
        }
    }

    // Hybrid functional equality over 100 trials.
    let inner = unclone::candidates::qotp_one_qubit()
        .gentle_transform()
        .unwrap()
        .into_scheme();
    let report = hybrid_equiv_check(
        &ReferenceDqre::new(6),
        &inner,
        &[false, true],
        &[true, false],
        100,
        &mut rng,
    )
    .unwrap();
    assert!(report.all_agree(), "mismatches: {:?}", report.mismatches);

    // Decomposability replay over the program corpus: constant circuits,
    // classical identities, and 2-qubit unitary circuits with terminal
    // measurement.
    let dqre = ReferenceDqre::new(6);
    let zero = DensityMatrix::new(RegisterLayout::qubits(1).unwrap(), basis_projector(2, 0)).unwrap();
    let corpus: Vec<ProgramCircuit> = vec![
        build_constant_circuit(&[true, false], 1, 2, matched_size(2)).unwrap(),
        build_constant_circuit(&[true, true, true], 0, 3, matched_size(3)).unwrap(),
        ProgramCircuit::new(0, 3, 0, vec![], vec![0, 1, 2]).unwrap(),
        ProgramCircuit::new(
            2,
            2,
            0,
            vec![
                Gate::H(0),
                Gate::Cnot { control: 0, target: 1 },
                Gate::T(1),
            ],
            vec![0, 1],
        )
        .unwrap(),
    ];
    for (ci, circuit) in corpus.iter().enumerate() {
        let q = vec![zero.clone(); circuit.quantum_wires()];
        let x: Vec<bool> = (0..circuit.classical_wires()).map(|i| i % 2 == 0).collect();
        let base_rng = SplitRng::from_seed(1200 + ci as u64);
        for j in 0..circuit.classical_wires() {
            let mut r1 = base_rng;
            let mut r2 = base_rng;
            let e1 = dqre.encode(circuit, &q, &x, &mut r1).unwrap();
            let mut flipped = x.clone();
            flipped[j] = !flipped[j];
            let e2 = dqre.encode(circuit, &q, &flipped, &mut r2).unwrap();
            assert_eq!(e1.offline, e2.offline, "circuit {ci}");
            for (w, (a, b)) in e1.labels.iter().zip(e2.labels.iter()).enumerate() {
                if w == circuit.quantum_wires() + j {
                    assert_ne!(a, b, "circuit {ci}: flipped wire label must change");
                } else {
                    assert_eq!(a, b, "circuit {ci}: wire {w} must be untouched");
                }
            }
        }
        // Correctness of the reference encoding on this corpus instance.
        let mut r = SplitRng::from_seed(1300 + ci as u64);
        let enc = dqre.encode(circuit, &q, &x, &mut r).unwrap();
        let direct = circuit.evaluate(&q, &x).unwrap();
        let decoded = dqre.decode_distribution(&enc).unwrap();
        for (d, e) in direct.iter().zip(decoded.iter()) {
            assert!((d - e).abs() < 1e-9, "circuit {ci}");
        }
    }

    println!("[PASS] criterion 12: expansion roundtrip exact for n <= 4 over 50 keys; hybrid equality holds in all 100 trials; decomposability replay passes on the program corpus");
}

#[test]
fn criterion_13_universal_wrapper() {
    let lam = 2usize;
    let budget = (lam * lam * lam) as u64;
    let registry = owsg::CandidateRegistry::new(vec![
        owsg::RegistryEntry {
            index: 1,
            declared_step_cost: budget + 1,
            generator: Box::new(|_| owsg::candidates::perfectly_correct()),
        },
        owsg::RegistryEntry {
            index: 2,
            declared_step_cost: budget,
            generator: Box::new(|_| owsg::candidates::basis_keys(vec![0.5, 0.5])),
        },
    ])
    .unwrap();
    let universal = owsg::universal_from_registry(&registry, lam).unwrap();
    assert!((universal.correctness() - 1.0).abs() < 1e-9);
    let honest = owsg::candidates::basis_keys(vec![0.5, 0.5])
        .gentle_transform()
        .unwrap();
    let expect = honest.scheme().blind_attack_value().1;
    let got = universal.blind_attack_value().1;
    assert!((got - expect).abs() < 1e-9);
    println!("[PASS] criterion 13: universal wrapper over an over-budget and an honest candidate is perfectly correct with the honest component's attack value");
}

#[test]
fn criterion_14_experiment_determinism() {
    let light_params: &[(&str, serde_json::Value)] = &[
        ("trials", serde_json::Value::from(200u64)),
        ("corpus", serde_json::Value::from(50u64)),
        ("keys", serde_json::Value::from(4u64)),
        ("n", serde_json::Value::from(2u64)),
    ];
    for experiment in qclab_cli::list_experiments() {
        let cfg = config(experiment, 20_240 + experiment.len() as u64, light_params);
        let a = run(&cfg).unwrap_or_else(|e| panic!("{experiment}: {e}"));
        let b = run(&cfg).unwrap_or_else(|e| panic!("{experiment}: {e}"));
        assert_eq!(
            a.deterministic_view(),
            b.deterministic_view(),
            "{experiment}: reports differ between identical runs"
        );
        // Every reported bound carries a non-empty anchor tag.
        for bound in &a.bounds {
            assert!(!bound.anchor.is_empty(), "{experiment}: missing anchor");
        }
        assert!(a.all_satisfied(), "{experiment}: violated bound in {a:?}");
    }
    println!("[PASS] criterion 14: every experiment reproduces its metrics bit-identically under a fixed seed, with anchored bounds");
}
