//! Decomposable randomized encoding of small quantum circuits: a pluggable
//! interface with a reference instantiation (correct and decomposable, with
//! no security), the constant circuit and decryption wrapper used for
//! plaintext expansion, and the expanded encryption scheme built on them.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::qmath::embed::{hadamard, mul_embedded_left, mul_embedded_right, t_gate};
use crate::qmath::layout::{RegisterLayout, DIM_CAP};
use crate::qmath::matrix::{C64, ComplexMatrix, ONE};
use crate::qmath::ops::partial_trace;
use crate::qmath::types::DensityMatrix;
use crate::qmath::QmathError;
use crate::rng::SplitRng;
use crate::unclone::UnclonableSke;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DqreError {
    Qmath(QmathError),
    DimensionCap,
    SizeTooSmall,
    WireMismatch,
    MalformedOffline,
    NotProductState,
}

impl From<QmathError> for DqreError {
    fn from(e: QmathError) -> Self {
        match e {
            QmathError::DimensionCap => DqreError::DimensionCap,
            other => DqreError::Qmath(other),
        }
    }
}

impl fmt::Display for DqreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DqreError::Qmath(e) => write!(f, "{e}"),
            DqreError::DimensionCap => f.write_str("circuit register exceeds the dimension cap"),
            DqreError::SizeTooSmall => f.write_str("declared size is below the gate count"),
            DqreError::WireMismatch => f.write_str("inputs do not match the circuit's wires"),
            DqreError::MalformedOffline => f.write_str("offline blob failed to parse"),
            DqreError::NotProductState => {
                f.write_str("quantum input does not factor into per-wire states")
            }
        }
    }
}

/// Circuit gates. The serializable opcodes are I, H, T and CNOT; `Dilated`
/// carries an explicit unitary for steps (like running a keyed decryption)
/// that have no exact expansion over the discrete gate set.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    I(usize),
    H(usize),
    T(usize),
    Cnot { control: usize, target: usize },
    Dilated { wires: Vec<usize>, matrix: ComplexMatrix },
}

impl Gate {
    fn wires(&self) -> Vec<usize> {
        match self {
            Gate::I(w) | Gate::H(w) | Gate::T(w) => vec![*w],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Dilated { wires, .. } => wires.clone(),
        }
    }
}

/// A small quantum circuit over quantum input wires, classical input wires
/// (loaded as computational-basis qubits) and zero-initialized ancilla
/// wires, with designated output wires measured in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramCircuit {
    quantum_wires: usize,
    classical_wires: usize,
    ancilla_wires: usize,
    gates: Vec<Gate>,
    output_wires: Vec<usize>,
}

impl ProgramCircuit {
    pub fn new(
        quantum_wires: usize,
        classical_wires: usize,
        ancilla_wires: usize,
        gates: Vec<Gate>,
        output_wires: Vec<usize>,
    ) -> Result<Self, DqreError> {
        let wires = quantum_wires + classical_wires + ancilla_wires;
        if wires == 0 || wires > 12 || (1usize << wires) > DIM_CAP {
            return Err(DqreError::DimensionCap);
        }
        for g in &gates {
            let ws = g.wires();
            if ws.iter().any(|&w| w >= wires) {
                return Err(DqreError::WireMismatch);
            }
            if let Gate::Dilated { wires: dw, matrix } = g {
                if matrix.rows() != (1usize << dw.len()) || !matrix.is_square() {
                    return Err(DqreError::WireMismatch);
                }
            }
        }
        if output_wires.is_empty() || output_wires.iter().any(|&w| w >= wires) {
            return Err(DqreError::WireMismatch);
        }
        Ok(ProgramCircuit {
            quantum_wires,
            classical_wires,
            ancilla_wires,
            gates,
            output_wires,
        })
    }

    pub fn quantum_wires(&self) -> usize {
        self.quantum_wires
    }

    pub fn classical_wires(&self) -> usize {
        self.classical_wires
    }

    pub fn ancilla_wires(&self) -> usize {
        self.ancilla_wires
    }

    pub fn total_wires(&self) -> usize {
        self.quantum_wires + self.classical_wires + self.ancilla_wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output_wires(&self) -> &[usize] {
        &self.output_wires
    }

    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Pads with identity gates up to `p`; fails if the circuit is already
    /// larger.
    pub fn padded_to(mut self, p: usize) -> Result<Self, DqreError> {
        if self.gates.len() > p {
            return Err(DqreError::SizeTooSmall);
        }
        while self.gates.len() < p {
            self.gates.push(Gate::I(0));
        }
        Ok(self)
    }

    /// Exact output distribution over the designated wires for the given
    /// per-wire quantum inputs and classical input bits.
    pub fn evaluate(&self, q: &[DensityMatrix], x: &[bool]) -> Result<Vec<f64>, DqreError> {
        if q.len() != self.quantum_wires || x.len() != self.classical_wires {
            return Err(DqreError::WireMismatch);
        }
        let wires = self.total_wires();
        let layout = RegisterLayout::qubits(wires).map_err(DqreError::from)?;
        let dim = layout.dim();

        // Initial state: ⊗ quantum inputs ⊗ |x> ⊗ |0...0>.
        let mut rho = ComplexMatrix::from_entries(1, 1, vec![ONE]);
        for s in q {
            if s.layout().len() != 1 || s.layout().dims()[0] != 2 {
                return Err(DqreError::WireMismatch);
            }
            rho = rho.kron(s.matrix());
        }
        for &bit in x {
            rho = rho.kron(&crate::qmath::embed::basis_projector(2, usize::from(bit)));
        }
        for _ in 0..self.ancilla_wires {
            rho = rho.kron(&crate::qmath::embed::basis_projector(2, 0));
        }
        debug_assert_eq!(rho.rows(), dim);

        for gate in &self.gates {
            let (mat, positions): (ComplexMatrix, Vec<usize>) = match gate {
                Gate::I(_) => continue,
                Gate::H(w) => (hadamard(), vec![*w]),
                Gate::T(w) => (t_gate(), vec![*w]),
                Gate::Cnot { control, target } => {
                    (crate::qmath::embed::cnot(), vec![*control, *target])
                }
                Gate::Dilated { wires, matrix } => (matrix.clone(), wires.clone()),
            };
            rho = mul_embedded_left(&layout, &mat, &rho, &positions).map_err(DqreError::from)?;
            rho = mul_embedded_right(&layout, &rho, &mat.conjugate_transpose(), &positions)
                .map_err(DqreError::from)?;
        }

        // Marginal of the output wires in the computational basis.
        let n = self.output_wires.len();
        let mut probs = vec![0.0f64; 1 << n];
        let mut digits = vec![0usize; wires];
        for i in 0..dim {
            layout.decompose(i, &mut digits);
            let mut y = 0usize;
            for &w in &self.output_wires {
                y = (y << 1) | digits[w];
            }
            probs[y] += rho.get(i, i).re;
        }
        Ok(probs)
    }
}

/// X as an exact {H, T} word: H T^4 H.
fn x_macro(wire: usize, gates: &mut Vec<Gate>) {
    gates.push(Gate::H(wire));
    for _ in 0..4 {
        gates.push(Gate::T(wire));
    }
    gates.push(Gate::H(wire));
}

const X_MACRO_LEN: usize = 6;

/// Constant circuit: ignores all inputs and writes `m` onto fresh output
/// wires, padded with identities to size `p`.
pub fn build_constant_circuit(
    m: &[bool],
    quantum_wires: usize,
    classical_wires: usize,
    p: usize,
) -> Result<ProgramCircuit, DqreError> {
    let n = m.len();
    let base = quantum_wires + classical_wires;
    let mut gates = Vec::new();
    for (j, &bit) in m.iter().enumerate() {
        if bit {
            x_macro(base + j, &mut gates);
        }
    }
    let outputs = (base..base + n).collect();
    ProgramCircuit::new(quantum_wires, classical_wires, n, gates, outputs)?.padded_to(p)
}

/// Decryption wrapper: runs the inner scheme's keyed decryption on the
/// quantum wires (ciphertext) and classical wires (key), then writes
/// m_0 or m_1 onto fresh output wires according to the decoded bit.
pub fn build_decrypt_wrapper(
    inner: &UnclonableSke,
    m0: &[bool],
    m1: &[bool],
    p: usize,
) -> Result<ProgramCircuit, DqreError> {
    if inner.msg_len() != 1 || m0.len() != m1.len() || m0 == m1 || m0.is_empty() {
        return Err(DqreError::WireMismatch);
    }
    let n = m0.len();
    let q = inner.ct_layout().len();
    let s = inner.key_len();
    let a = inner.dec_ancilla();
    let base_anc = q + s;
    let out_base = base_anc + a;

    // Keyed decryption as one dilated gate on [key wires, ct wires, dec anc].
    let mut dil_wires: Vec<usize> = (q..q + s).collect(); // key wires
    dil_wires.extend(0..q); // ciphertext wires
    dil_wires.extend(base_anc..base_anc + a); // decryption ancillas
    let inner_dim = inner.dec_unitary(0).layout().dim();
    let keys = inner.key_count();
    let mut big = ComplexMatrix::zeros(keys * inner_dim, keys * inner_dim);
    for key in 0..keys {
        let u = inner.dec_unitary(key).matrix();
        for r in 0..inner_dim {
            for c in 0..inner_dim {
                let v = u.get(r, c);
                if v.norm_sqr() >= 1e-300 {
                    big.set(key * inner_dim + r, key * inner_dim + c, v);
                }
            }
        }
    }

    let mut gates = vec![Gate::Dilated {
        wires: dil_wires,
        matrix: big,
    }];
    for (j, &bit) in m0.iter().enumerate() {
        if bit {
            x_macro(out_base + j, &mut gates);
        }
    }
    for j in 0..n {
        if m0[j] != m1[j] {
            gates.push(Gate::Cnot {
                control: 0, // decoded message bit sits on the first ct wire
                target: out_base + j,
            });
        }
    }
    let outputs = (out_base..out_base + n).collect();
    ProgramCircuit::new(q, s, a + n, gates, outputs)?.padded_to(p)
}

/// Size parameter covering every constant circuit and wrapper for n-bit
/// plaintexts, so matched pairs can always be padded to equal size.
pub fn matched_size(n: usize) -> usize {
    1 + X_MACRO_LEN * n + n
}

/// Per-input-wire piece of an encoding: a classical bitstring for classical
/// wires, a single-qubit state for quantum wires.
#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    Classical(Vec<bool>),
    Quantum(DensityMatrix),
}

/// A randomized encoding: input-independent offline blob plus one label per
/// input wire (quantum wires first, then classical wires).
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub offline: Vec<u8>,
    pub labels: Vec<Label>,
    pub label_len: usize,
}

/// Offline part plus both classical label rows, which decomposability makes
/// available wire by wire.
#[derive(Debug, Clone)]
pub struct EncodedParts {
    pub offline: Vec<u8>,
    pub quantum_labels: Vec<DensityMatrix>,
    pub classical_table: Vec<[Vec<bool>; 2]>,
    pub label_len: usize,
}

/// Decomposable randomized encoding interface: per-wire labels, an
/// input-independent offline part, classical strings for classical wires.
pub trait DqreScheme {
    fn label_len(&self) -> usize;

    /// Offline part, quantum-wire labels for the given inputs, and both
    /// classical label rows.
    fn encode_parts(
        &self,
        program: &ProgramCircuit,
        q: &[DensityMatrix],
        rng: &mut SplitRng,
    ) -> Result<EncodedParts, DqreError>;

    /// Full encoding of (program, q, x).
    fn encode(
        &self,
        program: &ProgramCircuit,
        q: &[DensityMatrix],
        x: &[bool],
        rng: &mut SplitRng,
    ) -> Result<Encoding, DqreError> {
        if x.len() != program.classical_wires() {
            return Err(DqreError::WireMismatch);
        }
        let parts = self.encode_parts(program, q, rng)?;
        let mut labels: Vec<Label> = parts
            .quantum_labels
            .into_iter()
            .map(Label::Quantum)
            .collect();
        for (i, &bit) in x.iter().enumerate() {
            labels.push(Label::Classical(
                parts.classical_table[i][usize::from(bit)].clone(),
            ));
        }
        Ok(Encoding {
            offline: parts.offline,
            labels,
            label_len: parts.label_len,
        })
    }

    /// Exact output distribution of decoding.
    fn decode_distribution(&self, enc: &Encoding) -> Result<Vec<f64>, DqreError>;

    /// One sampled decode.
    fn decode(&self, enc: &Encoding, rng: &mut SplitRng) -> Result<Vec<bool>, DqreError> {
        let probs = self.decode_distribution(enc)?;
        let mut draw = rng.next_f64();
        let mut outcome = probs.len() - 1;
        for (y, &p) in probs.iter().enumerate() {
            if draw < p {
                outcome = y;
                break;
            }
            draw -= p;
        }
        let n = probs.len().trailing_zeros() as usize;
        Ok((0..n).map(|j| (outcome >> (n - 1 - j)) & 1 == 1).collect())
    }
}

/// Reference instantiation: classical wire i gets one of two random ℓ-bit
/// keys, quantum wire j gets its state under a Pauli one-time pad, and the
/// offline blob carries the program plus all keys and pad bits in the clear.
/// Correct and decomposable; deliberately not secure.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceDqre {
    pub label_len: usize,
}

impl ReferenceDqre {
    pub fn new(label_len: usize) -> Self {
        assert!(label_len >= 1);
        ReferenceDqre { label_len }
    }
}

struct OfflineData {
    program: ProgramCircuit,
    keys: Vec<[Vec<bool>; 2]>,
    masks: Vec<(bool, bool)>,
}

impl DqreScheme for ReferenceDqre {
    fn label_len(&self) -> usize {
        self.label_len
    }

    fn encode_parts(
        &self,
        program: &ProgramCircuit,
        q: &[DensityMatrix],
        rng: &mut SplitRng,
    ) -> Result<EncodedParts, DqreError> {
        if q.len() != program.quantum_wires() {
            return Err(DqreError::WireMismatch);
        }
        let ell = self.label_len;
        let mut keys = Vec::with_capacity(program.classical_wires());
        for _ in 0..program.classical_wires() {
            let k0: Vec<bool> = (0..ell).map(|_| rng.next_bool(0.5)).collect();
            let mut k1: Vec<bool> = (0..ell).map(|_| rng.next_bool(0.5)).collect();
            while k1 == k0 {
                k1 = (0..ell).map(|_| rng.next_bool(0.5)).collect();
            }
            keys.push([k0, k1]);
        }
        let mut masks = Vec::with_capacity(program.quantum_wires());
        let mut quantum_labels = Vec::with_capacity(program.quantum_wires());
        let qubit = RegisterLayout::qubits(1).map_err(DqreError::from)?;
        for state in q {
            if state.layout().dim() != 2 {
                return Err(DqreError::WireMismatch);
            }
            let a = rng.next_bool(0.5);
            let c = rng.next_bool(0.5);
            masks.push((a, c));
            let mut mask = ComplexMatrix::identity(2);
            if a {
                mask = crate::qmath::embed::pauli_x().mul(&mask);
            }
            if c {
                mask = mask.mul(&crate::qmath::embed::pauli_z());
            }
            let masked = mask
                .mul(state.matrix())
                .mul(&mask.conjugate_transpose())
                .symmetrize_hermitian();
            quantum_labels
                .push(DensityMatrix::new(qubit.clone(), masked).map_err(DqreError::from)?);
        }
        let offline = serialize_offline(&OfflineData {
            program: program.clone(),
            keys: keys.clone(),
            masks,
        });
        Ok(EncodedParts {
            offline,
            quantum_labels,
            classical_table: keys,
            label_len: ell,
        })
    }

    fn decode_distribution(&self, enc: &Encoding) -> Result<Vec<f64>, DqreError> {
        let data = parse_offline(&enc.offline)?;
        let program = &data.program;
        if enc.labels.len() != program.quantum_wires() + program.classical_wires() {
            return Err(DqreError::WireMismatch);
        }
        let qubit = RegisterLayout::qubits(1).map_err(DqreError::from)?;
        let mut q_inputs = Vec::with_capacity(program.quantum_wires());
        for (j, label) in enc.labels[..program.quantum_wires()].iter().enumerate() {
            let Label::Quantum(state) = label else {
                return Err(DqreError::WireMismatch);
            };
            let (a, c) = data.masks[j];
            // Unmask: (X^a Z^c)† rho (X^a Z^c).
            let fwd = {
                let mut m = ComplexMatrix::identity(2);
                if a {
                    m = crate::qmath::embed::pauli_x().mul(&m);
                }
                if c {
                    m = m.mul(&crate::qmath::embed::pauli_z());
                }
                m
            };
            let unmasked = fwd
                .conjugate_transpose()
                .mul(state.matrix())
                .mul(&fwd)
                .symmetrize_hermitian();
            q_inputs.push(DensityMatrix::new(qubit.clone(), unmasked).map_err(DqreError::from)?);
        }
        let mut x_bits = Vec::with_capacity(program.classical_wires());
        let mut any_invalid = false;
        for (i, label) in enc.labels[program.quantum_wires()..].iter().enumerate() {
            let Label::Classical(bits) = label else {
                return Err(DqreError::WireMismatch);
            };
            if bits == &data.keys[i][0] {
                x_bits.push(false);
            } else if bits == &data.keys[i][1] {
                x_bits.push(true);
            } else {
                any_invalid = true;
                x_bits.push(false);
            }
        }
        let probs = program.evaluate(&q_inputs, &x_bits)?;
        if any_invalid {
            // Unusable labels: return the bit-complemented outcome
            // distribution rather than an error.
            let m = probs.len();
            let flipped: Vec<f64> = (0..m).map(|y| probs[m - 1 - y]).collect();
            return Ok(flipped);
        }
        Ok(probs)
    }
}

// Offline blob format: counts, outputs, gates, keys, masks; fixed-width
// little-endian integers and bit-packed booleans, f64 bit patterns for
// dilated matrices.

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_bits(out: &mut Vec<u8>, bits: &[bool]) {
    push_u32(out, bits.len() as u32);
    let mut byte = 0u8;
    for (i, &b) in bits.iter().enumerate() {
        if b {
            byte |= 1 << (i % 8);
        }
        if i % 8 == 7 {
            out.push(byte);
            byte = 0;
        }
    }
    if !bits.len().is_multiple_of(8) {
        out.push(byte);
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> Result<u32, DqreError> {
        if self.pos + 4 > self.data.len() {
            return Err(DqreError::MalformedOffline);
        }
        let v = u32::from_le_bytes(self.data[self.pos..self.pos + 4].try_into().unwrap());
        self.pos += 4;
        Ok(v)
    }

    fn f64(&mut self) -> Result<f64, DqreError> {
        if self.pos + 8 > self.data.len() {
            return Err(DqreError::MalformedOffline);
        }
        let v = f64::from_le_bytes(self.data[self.pos..self.pos + 8].try_into().unwrap());
        self.pos += 8;
        Ok(v)
    }

    fn bits(&mut self) -> Result<Vec<bool>, DqreError> {
        let n = self.u32()? as usize;
        let bytes = n.div_ceil(8);
        if self.pos + bytes > self.data.len() {
            return Err(DqreError::MalformedOffline);
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.data[self.pos + i / 8] >> (i % 8) & 1 == 1);
        }
        self.pos += bytes;
        Ok(out)
    }
}

fn serialize_offline(data: &OfflineData) -> Vec<u8> {
    let p = &data.program;
    let mut out = Vec::new();
    push_u32(&mut out, p.quantum_wires() as u32);
    push_u32(&mut out, p.classical_wires() as u32);
    push_u32(&mut out, p.ancilla_wires() as u32);
    push_u32(&mut out, p.output_wires().len() as u32);
    for &w in p.output_wires() {
        push_u32(&mut out, w as u32);
    }
    push_u32(&mut out, p.gates().len() as u32);
    for g in p.gates() {
        match g {
            Gate::I(w) => {
                out.push(0);
                push_u32(&mut out, *w as u32);
            }
            Gate::H(w) => {
                out.push(1);
                push_u32(&mut out, *w as u32);
            }
            Gate::T(w) => {
                out.push(2);
                push_u32(&mut out, *w as u32);
            }
            Gate::Cnot { control, target } => {
                out.push(3);
                push_u32(&mut out, *control as u32);
                push_u32(&mut out, *target as u32);
            }
            Gate::Dilated { wires, matrix } => {
                out.push(4);
                push_u32(&mut out, wires.len() as u32);
                for &w in wires {
                    push_u32(&mut out, w as u32);
                }
                push_u32(&mut out, matrix.rows() as u32);
                for e in matrix.entries() {
                    out.extend_from_slice(&e.re.to_le_bytes());
                    out.extend_from_slice(&e.im.to_le_bytes());
                }
            }
        }
    }
    push_u32(&mut out, data.keys.len() as u32);
    for [k0, k1] in &data.keys {
        push_bits(&mut out, k0);
        push_bits(&mut out, k1);
    }
    push_u32(&mut out, data.masks.len() as u32);
    let mask_bits: Vec<bool> = data.masks.iter().flat_map(|&(a, c)| [a, c]).collect();
    push_bits(&mut out, &mask_bits);
    out
}

fn parse_offline(blob: &[u8]) -> Result<OfflineData, DqreError> {
    let mut r = Reader {
        data: blob,
        pos: 0,
    };
    let qw = r.u32()? as usize;
    let cw = r.u32()? as usize;
    let aw = r.u32()? as usize;
    let n_out = r.u32()? as usize;
    let mut outputs = Vec::with_capacity(n_out);
    for _ in 0..n_out {
        outputs.push(r.u32()? as usize);
    }
    let n_gates = r.u32()? as usize;
    let mut gates = Vec::with_capacity(n_gates);
    for _ in 0..n_gates {
        if r.pos >= r.data.len() {
            return Err(DqreError::MalformedOffline);
        }
        let opcode = r.data[r.pos];
        r.pos += 1;
        gates.push(match opcode {
            0 => Gate::I(r.u32()? as usize),
            1 => Gate::H(r.u32()? as usize),
            2 => Gate::T(r.u32()? as usize),
            3 => Gate::Cnot {
                control: r.u32()? as usize,
                target: r.u32()? as usize,
            },
            4 => {
                let n_wires = r.u32()? as usize;
                let mut wires = Vec::with_capacity(n_wires);
                for _ in 0..n_wires {
                    wires.push(r.u32()? as usize);
                }
                let dim = r.u32()? as usize;
                let mut entries = Vec::with_capacity(dim * dim);
                for _ in 0..dim * dim {
                    let re = r.f64()?;
                    let im = r.f64()?;
                    entries.push(C64::new(re, im));
                }
                Gate::Dilated {
                    wires,
                    matrix: ComplexMatrix::from_entries(dim, dim, entries),
                }
            }
            _ => return Err(DqreError::MalformedOffline),
        });
    }
    let n_keys = r.u32()? as usize;
    let mut keys = Vec::with_capacity(n_keys);
    for _ in 0..n_keys {
        let k0 = r.bits()?;
        let k1 = r.bits()?;
        keys.push([k0, k1]);
    }
    let n_masks = r.u32()? as usize;
    let mask_bits = r.bits()?;
    if mask_bits.len() != 2 * n_masks {
        return Err(DqreError::MalformedOffline);
    }
    let masks = (0..n_masks)
        .map(|j| (mask_bits[2 * j], mask_bits[2 * j + 1]))
        .collect();
    let program = ProgramCircuit::new(qw, cw, aw, gates, outputs)?;
    Ok(OfflineData {
        program,
        keys,
        masks,
    })
}

/// Key for the expanded scheme: the inner-key bits x and one fresh mask per
/// key bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedKey {
    pub x: usize,
    pub masks: Vec<Vec<bool>>,
}

/// Ciphertext of the expanded scheme: offline part, quantum labels for the
/// (zeroed) ciphertext wires, and the two-row masked label table for the key
/// wires.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedCiphertext {
    pub offline: Vec<u8>,
    pub quantum_labels: Vec<DensityMatrix>,
    pub masked_table: Vec<[Vec<bool>; 2]>,
    pub label_len: usize,
}

/// One-time encryption with an n-bit plaintext space built over a
/// decomposable randomized encoding: the ciphertext encodes the constant
/// circuit C[m], with the key-wire label rows masked so only the row
/// selected by x unmasks correctly.
pub struct ExpandedSke<D: DqreScheme> {
    dqre: D,
    inner: UnclonableSke,
    msg_len: usize,
}

impl<D: DqreScheme> ExpandedSke<D> {
    pub fn msg_len(&self) -> usize {
        self.msg_len
    }

    pub fn key_bits(&self) -> usize {
        self.inner.key_len()
    }

    pub fn inner(&self) -> &UnclonableSke {
        &self.inner
    }

    pub fn size_param(&self) -> usize {
        matched_size(self.msg_len)
    }

    pub fn keygen(&self, rng: &mut SplitRng) -> ExpandedKey {
        let s = self.inner.key_len();
        let ell = self.dqre.label_len();
        let x = if s == 0 { 0 } else { rng.next_below(1 << s) };
        let masks = (0..s)
            .map(|_| (0..ell).map(|_| rng.next_bool(0.5)).collect())
            .collect();
        ExpandedKey { x, masks }
    }

    pub fn enc(
        &self,
        key: &ExpandedKey,
        m: usize,
        rng: &mut SplitRng,
    ) -> Result<ExpandedCiphertext, DqreError> {
        let n = self.msg_len;
        if m >= (1 << n) {
            return Err(DqreError::WireMismatch);
        }
        let s = self.inner.key_len();
        let q = self.inner.ct_layout().len();
        let m_bits: Vec<bool> = (0..n).map(|j| (m >> (n - 1 - j)) & 1 == 1).collect();
        let program = build_constant_circuit(&m_bits, q, s, self.size_param())?;
        let zero = DensityMatrix::new(
            RegisterLayout::qubits(1).map_err(DqreError::from)?,
            crate::qmath::embed::basis_projector(2, 0),
        )
        .map_err(DqreError::from)?;
        let zeros = vec![zero; q];
        let parts = self.dqre.encode_parts(&program, &zeros, rng)?;
        let ell = parts.label_len;
        // Mask the x-selected row with the key masks and the other row with
        // fresh dummies.
        let mut masked_table = Vec::with_capacity(s);
        for i in 0..s {
            let xi = (key.x >> (s - 1 - i)) & 1;
            let dummy: Vec<bool> = (0..ell).map(|_| rng.next_bool(0.5)).collect();
            let mut rows: [Vec<bool>; 2] = [vec![false; ell], vec![false; ell]];
            rows[xi] = xor_bits(&parts.classical_table[i][xi], &key.masks[i]);
            rows[1 - xi] = xor_bits(&parts.classical_table[i][1 - xi], &dummy);
            masked_table.push(rows);
        }
        Ok(ExpandedCiphertext {
            offline: parts.offline,
            quantum_labels: parts.quantum_labels,
            masked_table,
            label_len: ell,
        })
    }

    /// Exact output distribution of decryption.
    pub fn dec_distribution(
        &self,
        key: &ExpandedKey,
        ct: &ExpandedCiphertext,
    ) -> Result<Vec<f64>, DqreError> {
        let s = self.inner.key_len();
        if ct.masked_table.len() != s || key.masks.len() != s {
            return Err(DqreError::WireMismatch);
        }
        let mut labels: Vec<Label> = ct
            .quantum_labels
            .iter()
            .cloned()
            .map(Label::Quantum)
            .collect();
        for i in 0..s {
            let xi = (key.x >> (s - 1 - i)) & 1;
            labels.push(Label::Classical(xor_bits(
                &ct.masked_table[i][xi],
                &key.masks[i],
            )));
        }
        let enc = Encoding {
            offline: ct.offline.clone(),
            labels,
            label_len: ct.label_len,
        };
        self.dqre.decode_distribution(&enc)
    }

    pub fn dec(
        &self,
        key: &ExpandedKey,
        ct: &ExpandedCiphertext,
        rng: &mut SplitRng,
    ) -> Result<usize, DqreError> {
        let probs = self.dec_distribution(key, ct)?;
        let mut draw = rng.next_f64();
        let mut outcome = probs.len() - 1;
        for (y, &p) in probs.iter().enumerate() {
            if draw < p {
                outcome = y;
                break;
            }
            draw -= p;
        }
        Ok(outcome)
    }
}

fn xor_bits(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Builds the expanded scheme: `lam` must equal the inner key length, and
/// the inner scheme must have single-bit plaintexts.
pub fn expand_plaintext<D: DqreScheme>(
    dqre: D,
    inner: UnclonableSke,
    n: usize,
    lam: usize,
) -> Result<ExpandedSke<D>, DqreError> {
    if n == 0 || inner.msg_len() != 1 || inner.key_len() != lam {
        return Err(DqreError::WireMismatch);
    }
    // The evaluation register must stay under the cap.
    let wires = inner.ct_layout().len() + lam + inner.dec_ancilla() + n;
    if wires > 12 {
        return Err(DqreError::DimensionCap);
    }
    Ok(ExpandedSke {
        dqre,
        inner,
        msg_len: n,
    })
}

/// Splits a multi-qubit state into per-wire factors; fails if the state is
/// not a product across wires within tolerance.
pub fn split_product_state(state: &DensityMatrix) -> Result<Vec<DensityMatrix>, DqreError> {
    let wires = state.layout().len();
    let mut parts = Vec::with_capacity(wires);
    for w in 0..wires {
        parts.push(partial_trace(state, &[w]).map_err(DqreError::from)?);
    }
    let mut recon = parts[0].matrix().clone();
    for p in &parts[1..] {
        recon = recon.kron(p.matrix());
    }
    if recon.sub(state.matrix()).frobenius_norm() > 1e-9 {
        return Err(DqreError::NotProductState);
    }
    Ok(parts)
}

/// One trial's provenance in a hybrid functional-equality check.
#[derive(Debug, Clone)]
pub struct HybridMismatch {
    pub trial: usize,
    pub key: usize,
    pub b: bool,
    pub constant_prob: f64,
    pub wrapper_prob: f64,
}

#[derive(Debug, Clone)]
pub struct HybridReport {
    pub trials: usize,
    pub mismatches: Vec<HybridMismatch>,
}

impl HybridReport {
    pub fn all_agree(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Functional-equality check between the constant circuit on (0..0, x) and
/// the decryption wrapper on (ct_b, x): both must output m_b with
/// probability 1. Mismatches become report entries, not errors.
pub fn hybrid_equiv_check<D: DqreScheme>(
    dqre: &D,
    inner: &UnclonableSke,
    m0: &[bool],
    m1: &[bool],
    trials: usize,
    rng: &mut SplitRng,
) -> Result<HybridReport, DqreError> {
    if inner.msg_len() != 1 || m0.len() != m1.len() || m0 == m1 {
        return Err(DqreError::WireMismatch);
    }
    let n = m0.len();
    let p = matched_size(n);
    let q = inner.ct_layout().len();
    let s = inner.key_len();
    let wrapper = build_decrypt_wrapper(inner, m0, m1, p)?;
    let qubit = RegisterLayout::qubits(1).map_err(DqreError::from)?;
    let zero = DensityMatrix::new(qubit, crate::qmath::embed::basis_projector(2, 0))
        .map_err(DqreError::from)?;

    let mut mismatches = Vec::new();
    for trial in 0..trials {
        // Sample a key from the inner distribution and a challenge bit.
        let key = {
            let mut x = rng.next_f64();
            let mut chosen = inner.key_count() - 1;
            for (k, &w) in inner.key_weights().iter().enumerate() {
                if x < w {
                    chosen = k;
                    break;
                }
                x -= w;
            }
            chosen
        };
        let b = rng.next_bool(0.5);
        let m_b = if b { m1 } else { m0 };
        let target: usize = m_b.iter().fold(0, |acc, &bit| (acc << 1) | usize::from(bit));
        let x_bits: Vec<bool> = (0..s).map(|i| (key >> (s - 1 - i)) & 1 == 1).collect();

        // Constant side: C[m_b] on zero quantum inputs and x.
        let constant = build_constant_circuit(m_b, q, s, p)?;
        let enc_c = dqre.encode(&constant, &vec![zero.clone(); q], &x_bits, rng)?;
        let probs_c = dqre.decode_distribution(&enc_c)?;

        // Wrapper side: D[m0, m1] on the split ciphertext and x.
        let ct = inner.ciphertext(key, usize::from(b));
        let ct_parts = split_product_state(ct)?;
        let enc_d = dqre.encode(&wrapper, &ct_parts, &x_bits, rng)?;
        let probs_d = dqre.decode_distribution(&enc_d)?;

        let pc = probs_c[target];
        let pd = probs_d[target];
        if (pc - 1.0).abs() > 1e-9 || (pd - 1.0).abs() > 1e-9 {
            mismatches.push(HybridMismatch {
                trial,
                key,
                b,
                constant_prob: pc,
                wrapper_prob: pd,
            });
        }
    }
    Ok(HybridReport {
        trials,
        mismatches,
    })
}
