//! Wire-format checks: scheme, circuit and encoding JSON round-trips.

use qclab_cli::schema::{
    CommitmentJson, EncodingJson, MatrixJson, OwsgSchemeJson, ProgramCircuitJson,
};
use qclab_core::commit;
use qclab_core::dqre::{build_decrypt_wrapper, matched_size, DqreScheme, ReferenceDqre};
use qclab_core::owsg;
use qclab_core::qmath::{haar_unitary, random_density, RegisterLayout};
use qclab_core::unclone;
use qclab_core::SplitRng;

#[test]
fn matrix_roundtrip_within_tolerance() {
    let mut rng = SplitRng::from_seed(41);
    let m = haar_unitary(6, &mut rng).matrix().clone();
    let json = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
    let back: MatrixJson = serde_json::from_str(&json).unwrap();
    let recovered = back.to_matrix().unwrap();
    let err = recovered.sub(&m).frobenius_norm();
    assert!(err < 1e-12, "roundtrip error {err}");
}

#[test]
fn commitment_roundtrip_keeps_registers_and_metrics() {
    let mut rng = SplitRng::from_seed(42);
    for c in [
        commit::candidates::bb84(),
        commit::candidates::orthogonal(),
        commit::candidates::random_two_qubit(&mut rng),
        commit::candidates::bb84().flavor_convert().unwrap(),
    ] {
        let json = serde_json::to_string(&CommitmentJson::from_commitment(&c)).unwrap();
        let parsed: CommitmentJson = serde_json::from_str(&json).unwrap();
        let back = parsed.to_commitment().unwrap();
        assert_eq!(back.commit_subsystems(), c.commit_subsystems());
        assert_eq!(back.reveal_subsystems(), c.reveal_subsystems());
        assert_eq!(back.layout().dims(), c.layout().dims());
        let (ma, mb) = (c.metrics(), back.metrics());
        assert!((ma.f - mb.f).abs() < 1e-12);
        assert!((ma.hiding_td - mb.hiding_td).abs() < 1e-12);
    }
}

#[test]
fn commitment_schema_rejects_non_unitary_input() {
    let c = commit::candidates::bb84();
    let mut json = CommitmentJson::from_commitment(&c);
    json.q0.entries[0] = [2.0, 0.0];
    assert!(json.to_commitment().is_err());
}

#[test]
fn owsg_scheme_roundtrip_is_lossless() {
    let mut rng = SplitRng::from_seed(43);
    for _ in 0..5 {
        let s = owsg::candidates::random_scheme(&mut rng);
        let json = serde_json::to_string(&OwsgSchemeJson::from_scheme(&s)).unwrap();
        let parsed: OwsgSchemeJson = serde_json::from_str(&json).unwrap();
        let back = parsed.to_scheme().unwrap();
        assert_eq!(back.key_count(), s.key_count());
        for k in 0..s.key_count() {
            assert!((back.weights()[k] - s.weights()[k]).abs() < 1e-12);
            let ds = back.state(k).matrix().sub(s.state(k).matrix()).frobenius_norm();
            let dv = back
                .vrfy_unitary(k)
                .matrix()
                .sub(s.vrfy_unitary(k).matrix())
                .frobenius_norm();
            assert!(ds < 1e-12 && dv < 1e-12);
        }
        assert!((back.correctness() - s.correctness()).abs() < 1e-12);
    }
}

#[test]
fn program_circuit_roundtrip_preserves_semantics() {
    let inner = unclone::candidates::passthrough(1, 1);
    let circuit = build_decrypt_wrapper(&inner, &[true], &[false], matched_size(1)).unwrap();
    let json = serde_json::to_string(&ProgramCircuitJson::from_circuit(&circuit)).unwrap();
    let parsed: ProgramCircuitJson = serde_json::from_str(&json).unwrap();
    let back = parsed.to_circuit().unwrap();
    assert_eq!(back.size(), circuit.size());
    let mut rng = SplitRng::from_seed(7);
    let ct = random_density(2, 1, &mut rng)
        .with_layout(RegisterLayout::qubits(1).unwrap())
        .unwrap();
    let a = circuit.evaluate(std::slice::from_ref(&ct), &[true]).unwrap();
    let b = back.evaluate(&[ct], &[true]).unwrap();
    for (x, y) in a.iter().zip(b.iter()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn encoding_roundtrip_decodes_identically() {
    let mut rng = SplitRng::from_seed(44);
    let dqre = ReferenceDqre::new(6);
    let circuit =
        qclab_core::dqre::build_constant_circuit(&[true, false], 1, 1, matched_size(2)).unwrap();
    let zero = random_density(2, 1, &mut rng)
        .with_layout(RegisterLayout::qubits(1).unwrap())
        .unwrap();
    let enc = dqre.encode(&circuit, &[zero], &[true], &mut rng).unwrap();
    let json = serde_json::to_string(&EncodingJson::from_encoding(&enc)).unwrap();
    let parsed: EncodingJson = serde_json::from_str(&json).unwrap();
    let back = parsed.to_encoding().unwrap();
    assert_eq!(back.offline, enc.offline);
    let a = dqre.decode_distribution(&enc).unwrap();
    let b = dqre.decode_distribution(&back).unwrap();
    for (x, y) in a.iter().zip(b.iter()) {
        assert!((x - y).abs() < 1e-12);
    }
}
