//! One-time unclonable secret-key encryption candidates with canonical
//! dilated decryption, the gentle-measurement correctness transform, key
//! normalization, the XOR combiner, exact one-time secrecy metrics, and a
//! seesaw evaluator for the two-party cloning game.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::qmath::embed::{basis_projector, cnot, controlled_on, mul_embedded_left, tensor_on_positions};
use crate::qmath::layout::{RegisterLayout, DIM_CAP};
use crate::qmath::linalg::eigh;
use crate::qmath::matrix::{C64, ComplexMatrix, ZERO};
use crate::qmath::ops::{apply_channel, helstrom_povm, partial_trace, trace_distance};
use crate::qmath::types::{DensityMatrix, KrausChannel, Povm, UnitaryOp};
use crate::qmath::QmathError;
use crate::rng::SplitRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UncloneError {
    Qmath(QmathError),
    DimensionCap,
    MessageLengthMismatch,
    InvalidScheme,
    EmptyList,
}

impl From<QmathError> for UncloneError {
    fn from(e: QmathError) -> Self {
        match e {
            QmathError::DimensionCap => UncloneError::DimensionCap,
            other => UncloneError::Qmath(other),
        }
    }
}

impl fmt::Display for UncloneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UncloneError::Qmath(e) => write!(f, "{e}"),
            UncloneError::DimensionCap => f.write_str("combined ciphertext exceeds the dimension cap"),
            UncloneError::MessageLengthMismatch => {
                f.write_str("components must share the message length")
            }
            UncloneError::InvalidScheme => f.write_str("scheme tables are inconsistent"),
            UncloneError::EmptyList => f.write_str("at least one component is required"),
        }
    }
}

/// One-time unclonable SKE candidate over keys {0,1}^s and the full message
/// space {0,1}^n. Encryption is stored as the channel output per (key,
/// message); decryption applies the per-key unitary to ct ⊗ |0...0> and
/// measures the first n qubits in the computational basis.
#[derive(Debug, Clone)]
pub struct UnclonableSke {
    key_len: usize,
    key_weights: Vec<f64>,
    msg_len: usize,
    ct_layout: RegisterLayout,
    enc: Vec<Vec<DensityMatrix>>,
    dec: Vec<UnitaryOp>,
    dec_ancilla: usize,
}

impl UnclonableSke {
    pub fn new(
        key_len: usize,
        key_weights: Vec<f64>,
        msg_len: usize,
        ct_layout: RegisterLayout,
        enc: Vec<Vec<DensityMatrix>>,
        dec: Vec<UnitaryOp>,
        dec_ancilla: usize,
    ) -> Result<Self, UncloneError> {
        let keys = 1usize << key_len;
        let msgs = 1usize << msg_len;
        if key_weights.len() != keys || enc.len() != keys || dec.len() != keys {
            return Err(UncloneError::InvalidScheme);
        }
        let total: f64 = key_weights.iter().sum();
        if key_weights.iter().any(|&w| w < 0.0) || libm::fabs(total - 1.0) > 1e-12 {
            return Err(UncloneError::InvalidScheme);
        }
        if ct_layout.dims().iter().any(|&d| d != 2) || ct_layout.len() < msg_len {
            return Err(UncloneError::InvalidScheme);
        }
        let mut dec_dims = ct_layout.dims().to_vec();
        dec_dims.extend(core::iter::repeat_n(2, dec_ancilla));
        let dec_layout = RegisterLayout::new(dec_dims).map_err(UncloneError::from)?;
        for row in &enc {
            if row.len() != msgs || row.iter().any(|s| s.layout() != &ct_layout) {
                return Err(UncloneError::InvalidScheme);
            }
        }
        for u in &dec {
            if u.layout() != &dec_layout {
                return Err(UncloneError::InvalidScheme);
            }
        }
        Ok(UnclonableSke {
            key_len,
            key_weights,
            msg_len,
            ct_layout,
            enc,
            dec,
            dec_ancilla,
        })
    }

    pub fn key_len(&self) -> usize {
        self.key_len
    }

    pub fn key_count(&self) -> usize {
        1 << self.key_len
    }

    pub fn key_weights(&self) -> &[f64] {
        &self.key_weights
    }

    pub fn msg_len(&self) -> usize {
        self.msg_len
    }

    pub fn msg_count(&self) -> usize {
        1 << self.msg_len
    }

    pub fn ct_layout(&self) -> &RegisterLayout {
        &self.ct_layout
    }

    pub fn dec_ancilla(&self) -> usize {
        self.dec_ancilla
    }

    pub fn ciphertext(&self, key: usize, msg: usize) -> &DensityMatrix {
        &self.enc[key][msg]
    }

    pub fn dec_unitary(&self, key: usize) -> &UnitaryOp {
        &self.dec[key]
    }

    /// Ciphertext averaged over the key distribution.
    pub fn average_ciphertext(&self, msg: usize) -> DensityMatrix {
        let d = self.ct_layout.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for k in 0..self.key_count() {
            acc = acc.add(&self.enc[k][msg].matrix().scale(C64::new(self.key_weights[k], 0.0)));
        }
        DensityMatrix::new_unchecked(self.ct_layout.clone(), acc)
    }

    /// Output distribution of decrypting `state` under `key`: probabilities
    /// of each n-bit outcome on the first n qubits after the dec unitary.
    pub fn decrypt_distribution(&self, key: usize, state: &DensityMatrix) -> Vec<f64> {
        let u = self.dec[key].matrix();
        let full_dim = self.dec[key].layout().dim();
        let ct_dim = self.ct_layout.dim();
        let anc_dim = full_dim / ct_dim;
        let msgs = self.msg_count();
        let msg_stride = full_dim >> self.msg_len;
        // p_m = sum over rows of U with message-part m of <row| U (ct ⊗ P0) U† |row>.
        let mut probs = vec![0.0f64; msgs];
        for row in 0..full_dim {
            let m = row / msg_stride;
            let mut acc = 0.0;
            // <row| U (ct ⊗ |0><0|) U† |row> = sum_{i,j} U[row, i*anc] ct[i,j] conj(U[row, j*anc]).
            for i in 0..ct_dim {
                let ui = u.get(row, i * anc_dim);
                if ui.norm_sqr() < 1e-300 {
                    continue;
                }
                for j in 0..ct_dim {
                    let term = ui * state.matrix().get(i, j) * u.get(row, j * anc_dim).conj();
                    acc += term.re;
                }
            }
            probs[m] += acc;
        }
        probs
    }

    /// Probability that decryption of the honest ciphertext returns the
    /// encrypted message.
    pub fn decrypt_success(&self, key: usize, msg: usize) -> f64 {
        self.decrypt_distribution(key, &self.enc[key][msg])[msg].clamp(0.0, 1.0)
    }

    /// Exact expectation over keys and (uniform) messages of the decryption
    /// success probability.
    pub fn correctness(&self) -> f64 {
        let msgs = self.msg_count();
        let mut total = 0.0;
        for k in 0..self.key_count() {
            for m in 0..msgs {
                total += self.key_weights[k] * self.decrypt_success(k, m) / msgs as f64;
            }
        }
        total
    }

    /// Exact one-time distinguishing advantage: max over message pairs of
    /// the trace distance between key-averaged ciphertexts.
    pub fn ind_advantage(&self) -> f64 {
        let msgs = self.msg_count();
        let averages: Vec<DensityMatrix> = (0..msgs).map(|m| self.average_ciphertext(m)).collect();
        let mut best = 0.0f64;
        for a in 0..msgs {
            for b in (a + 1)..msgs {
                let td = trace_distance(&averages[a], &averages[b]).expect("same layout");
                best = best.max(td);
            }
        }
        best
    }

    /// Gentle-measurement transform: encryption dry-runs the decryption,
    /// rewinds on success and appends flag 1; on failure it emits the
    /// plaintext in the clear with flag 0, which the new decryption honors
    /// unconditionally. Output correctness is exactly 1.
    pub fn gentle_transform(&self) -> Result<TransformedSke, UncloneError> {
        let dec_layout = self.dec[0].layout().clone();
        let full_dim = dec_layout.dim();
        let ct_dim = self.ct_layout.dim();
        let anc_dim = full_dim / ct_dim;
        let msg_stride = full_dim >> self.msg_len;
        let mut new_dims = dec_layout.dims().to_vec();
        new_dims.push(2); // flag
        let new_ct_layout = RegisterLayout::new(new_dims).map_err(UncloneError::from)?;

        let mut enc = Vec::with_capacity(self.key_count());
        for k in 0..self.key_count() {
            let u = self.dec[k].matrix();
            let udag = u.conjugate_transpose();
            let mut row_states = Vec::with_capacity(self.msg_count());
            for m in 0..self.msg_count() {
                let ct = self.enc[k][m].matrix();
                // sigma = U (ct ⊗ |0><0|) U†.
                let mut sigma = ComplexMatrix::zeros(full_dim, full_dim);
                for r in 0..full_dim {
                    for c in 0..full_dim {
                        let mut acc = ZERO;
                        for i in 0..ct_dim {
                            let uri = u.get(r, i * anc_dim);
                            if uri.norm_sqr() < 1e-300 {
                                continue;
                            }
                            for j in 0..ct_dim {
                                acc += uri * ct.get(i, j) * u.get(c, j * anc_dim).conj();
                            }
                        }
                        sigma.set(r, c, acc);
                    }
                }
                // Keep only the outcome-m block, rewind, flag 1.
                let mut proj = sigma;
                let mut p_accept = 0.0;
                for r in 0..full_dim {
                    for c in 0..full_dim {
                        if r / msg_stride != m || c / msg_stride != m {
                            proj.set(r, c, ZERO);
                        } else if r == c {
                            p_accept += proj.get(r, c).re;
                        }
                    }
                }
                let rewound = udag.mul(&proj).mul(u);
                let mut flagged = ComplexMatrix::zeros(2 * full_dim, 2 * full_dim);
                for r in 0..full_dim {
                    for c in 0..full_dim {
                        let v = rewound.get(r, c);
                        if v.norm_sqr() >= 1e-300 {
                            flagged.add_assign_at(2 * r + 1, 2 * c + 1, v);
                        }
                    }
                }
                // Fallback branch: |m, 0...0> with flag 0, weight 1 - p.
                let fail = (1.0 - p_accept).max(0.0);
                if fail > 0.0 {
                    let basis = m * msg_stride; // message on the first n qubits, rest zero
                    flagged.add_assign_at(2 * basis, 2 * basis, C64::new(fail, 0.0));
                }
                row_states.push(DensityMatrix::new(
                    new_ct_layout.clone(),
                    flagged.symmetrize_hermitian(),
                )
                .map_err(UncloneError::from)?);
            }
            enc.push(row_states);
        }

        // New decryption: controlled on the trailing flag, apply the inner
        // unitary (flag 1) or nothing (flag 0: plaintext already in place).
        let flag_pos = new_ct_layout.len() - 1;
        let inner_positions: Vec<usize> = (0..dec_layout.len()).collect();
        let mut dec = Vec::with_capacity(self.key_count());
        for k in 0..self.key_count() {
            let u = self.dec[k].matrix().clone();
            let mat = controlled_on(&new_ct_layout, &[flag_pos], &inner_positions, |f| {
                if f == 1 {
                    u.clone()
                } else {
                    ComplexMatrix::identity(full_dim)
                }
            })
            .map_err(UncloneError::from)?;
            dec.push(UnitaryOp::new_unchecked(new_ct_layout.clone(), mat));
        }

        let scheme = UnclonableSke::new(
            self.key_len,
            self.key_weights.clone(),
            self.msg_len,
            new_ct_layout,
            enc,
            dec,
            0,
        )?;
        Ok(TransformedSke { scheme })
    }

    /// Key normalization: the new key is uniform on {0,1}^s; encryption
    /// draws a fresh inner key sk' and appends the classical tag sk' ⊕ key,
    /// which decryption unmasks to recover sk'.
    pub fn normalize_key(&self) -> Result<UnclonableSke, UncloneError> {
        let s = self.key_len;
        let keys = self.key_count();
        let tag_dim = keys;
        let mut new_dims = self.ct_layout.dims().to_vec();
        new_dims.extend(core::iter::repeat_n(2, s));
        let new_ct_layout = RegisterLayout::new(new_dims).map_err(UncloneError::from)?;
        let ct_dim = self.ct_layout.dim();

        let uniform = 1.0 / keys as f64;
        let mut enc = Vec::with_capacity(keys);
        for u_key in 0..keys {
            let mut row = Vec::with_capacity(self.msg_count());
            for m in 0..self.msg_count() {
                let mut acc = ComplexMatrix::zeros(ct_dim * tag_dim, ct_dim * tag_dim);
                for sk in 0..keys {
                    let w = self.key_weights[sk];
                    if w == 0.0 {
                        continue;
                    }
                    let tag = sk ^ u_key;
                    let inner = self.enc[sk][m].matrix();
                    for i in 0..ct_dim {
                        for j in 0..ct_dim {
                            let v = inner.get(i, j);
                            if v.norm_sqr() >= 1e-300 {
                                acc.add_assign_at(
                                    i * tag_dim + tag,
                                    j * tag_dim + tag,
                                    v * w,
                                );
                            }
                        }
                    }
                }
                row.push(
                    DensityMatrix::new(new_ct_layout.clone(), acc).map_err(UncloneError::from)?,
                );
            }
            enc.push(row);
        }

        // dec(u): read the tag t, recover sk' = t ⊕ u, run the inner unitary.
        let mut dec_dims = new_ct_layout.dims().to_vec();
        dec_dims.extend(core::iter::repeat_n(2, self.dec_ancilla));
        let dec_layout = RegisterLayout::new(dec_dims).map_err(UncloneError::from)?;
        let ct_wires = self.ct_layout.len();
        let tag_positions: Vec<usize> = (ct_wires..ct_wires + s).collect();
        let mut inner_positions: Vec<usize> = (0..ct_wires).collect();
        inner_positions.extend(ct_wires + s..dec_layout.len());
        let mut dec = Vec::with_capacity(keys);
        for u_key in 0..keys {
            let mats: Vec<ComplexMatrix> = (0..keys)
                .map(|t| self.dec[t ^ u_key].matrix().clone())
                .collect();
            let mat = controlled_on(&dec_layout, &tag_positions, &inner_positions, |t| {
                mats[t].clone()
            })
            .map_err(UncloneError::from)?;
            dec.push(UnitaryOp::new_unchecked(dec_layout.clone(), mat));
        }

        UnclonableSke::new(
            s,
            vec![uniform; keys],
            self.msg_len,
            new_ct_layout,
            enc,
            dec,
            self.dec_ancilla,
        )
    }
}

/// Output of the gentle transform: ciphertexts carry a trailing flag qubit
/// and flag-0 ciphertexts decrypt to the embedded plaintext unconditionally.
#[derive(Debug, Clone)]
pub struct TransformedSke {
    scheme: UnclonableSke,
}

impl TransformedSke {
    pub fn scheme(&self) -> &UnclonableSke {
        &self.scheme
    }

    pub fn into_scheme(self) -> UnclonableSke {
        self.scheme
    }

    pub fn flag_subsystem(&self) -> usize {
        self.scheme.ct_layout().len() - 1
    }
}

/// XOR combiner: the message is secret-shared as r_1 ⊕ ... ⊕ r_k and each
/// share encrypted under the gentle-transformed component; decryption XORs
/// the component plaintexts. Components must all have the full message space
/// of the same length.
pub fn xor_combine(components: &[UnclonableSke]) -> Result<UnclonableSke, UncloneError> {
    if components.is_empty() {
        return Err(UncloneError::EmptyList);
    }
    let n = components[0].msg_len();
    if components.iter().any(|c| c.msg_len() != n) {
        return Err(UncloneError::MessageLengthMismatch);
    }
    let transformed: Vec<UnclonableSke> = components
        .iter()
        .map(|c| c.gentle_transform().map(TransformedSke::into_scheme))
        .collect::<Result<_, _>>()?;

    let nc = transformed.len();
    let msgs = 1usize << n;
    let key_len: usize = transformed.iter().map(|t| t.key_len()).sum();
    let mut ct_dims = Vec::new();
    let mut block_offsets = Vec::new();
    for t in &transformed {
        block_offsets.push(ct_dims.len());
        ct_dims.extend_from_slice(t.ct_layout().dims());
    }
    if ct_dims.len() > 12 {
        return Err(UncloneError::DimensionCap);
    }
    let ct_layout = RegisterLayout::new(ct_dims).map_err(UncloneError::from)?;
    let dim = ct_layout.dim();
    if dim > DIM_CAP {
        return Err(UncloneError::DimensionCap);
    }

    let split_key = |mut key: usize| -> Vec<usize> {
        let mut parts = vec![0usize; nc];
        for i in (0..nc).rev() {
            let bits = transformed[i].key_len();
            parts[i] = key & ((1 << bits) - 1);
            key >>= bits;
        }
        parts
    };

    let keys = 1usize << key_len;
    let mut key_weights = Vec::with_capacity(keys);
    let mut enc = Vec::with_capacity(keys);
    let share_count = msgs.pow((nc - 1) as u32);
    let share_weight = 1.0 / share_count as f64;
    for key in 0..keys {
        let parts = split_key(key);
        let w: f64 = (0..nc)
            .map(|i| transformed[i].key_weights()[parts[i]])
            .product();
        key_weights.push(w);
        let mut row = Vec::with_capacity(msgs);
        for m in 0..msgs {
            let mut acc = ComplexMatrix::zeros(dim, dim);
            // Enumerate the first nc-1 shares; the last is forced by parity.
            for draw in 0..share_count {
                let mut shares = Vec::with_capacity(nc);
                let mut rest = draw;
                let mut forced = m;
                for _ in 0..nc - 1 {
                    let r = rest % msgs;
                    rest /= msgs;
                    forced ^= r;
                    shares.push(r);
                }
                shares.push(forced);
                let mut term = transformed[0].ciphertext(parts[0], shares[0]).matrix().clone();
                for i in 1..nc {
                    term = term.kron(transformed[i].ciphertext(parts[i], shares[i]).matrix());
                }
                acc = acc.add(&term.scale(C64::new(share_weight, 0.0)));
            }
            row.push(DensityMatrix::new(ct_layout.clone(), acc).map_err(UncloneError::from)?);
        }
        enc.push(row);
    }

    // Decryption: run every component's unitary, then CNOT each component's
    // message wires onto component 1's so the first n qubits read the XOR.
    let mut dec = Vec::with_capacity(keys);
    for key in 0..keys {
        let parts = split_key(key);
        let mats: Vec<ComplexMatrix> = (0..nc)
            .map(|i| transformed[i].dec_unitary(parts[i]).matrix().clone())
            .collect();
        let positions: Vec<Vec<usize>> = (0..nc)
            .map(|i| {
                (block_offsets[i]..block_offsets[i] + transformed[i].ct_layout().len()).collect()
            })
            .collect();
        let factors: Vec<(&ComplexMatrix, &[usize])> = (0..nc)
            .map(|i| (&mats[i], positions[i].as_slice()))
            .collect();
        let mut mat = tensor_on_positions(&ct_layout, &factors).map_err(UncloneError::from)?;
        for i in 1..nc {
            for bit in 0..n {
                let control = block_offsets[i] + bit;
                let target = bit; // component 1's message wires are global 0..n
                mat = mul_embedded_left(&ct_layout, &cnot(), &mat, &[control, target])
                    .map_err(UncloneError::from)?;
            }
        }
        dec.push(UnitaryOp::new_unchecked(ct_layout.clone(), mat));
    }

    UnclonableSke::new(key_len, key_weights, n, ct_layout, enc, dec, 0)
}

/// An adversary's splitting channel from the ciphertext register to the two
/// parties' registers; the first `b_wires` output subsystems belong to B.
#[derive(Debug, Clone)]
pub struct SplitStrategy {
    pub split: KrausChannel,
    pub b_wires: usize,
}

impl SplitStrategy {
    /// Copies the ciphertext in the computational basis and hands one copy
    /// to each party.
    pub fn broadcast(ct_layout: &RegisterLayout) -> Self {
        let d = ct_layout.dim();
        let out_layout = ct_layout.concat(ct_layout).expect("within cap");
        let mut k = ComplexMatrix::zeros(d * d, d);
        for x in 0..d {
            k.set(x * d + x, x, crate::qmath::matrix::ONE);
        }
        let split = KrausChannel::new(ct_layout.clone(), out_layout, vec![k])
            .expect("isometry is trace preserving");
        SplitStrategy {
            split,
            b_wires: ct_layout.len(),
        }
    }

    /// Forwards the whole ciphertext to B; C receives a fresh |0> qubit.
    pub fn all_to_b(ct_layout: &RegisterLayout) -> Self {
        let d = ct_layout.dim();
        let mut out_dims = ct_layout.dims().to_vec();
        out_dims.push(2);
        let out_layout = RegisterLayout::new(out_dims).expect("within cap");
        let mut k = ComplexMatrix::zeros(d * 2, d);
        for x in 0..d {
            k.set(x * 2, x, crate::qmath::matrix::ONE);
        }
        let split = KrausChannel::new(ct_layout.clone(), out_layout, vec![k])
            .expect("isometry is trace preserving");
        SplitStrategy {
            split,
            b_wires: ct_layout.len(),
        }
    }
}

/// Result of the seesaw evaluation of the cloning game.
#[derive(Debug, Clone)]
pub struct CloningGameReport {
    pub value: f64,
    pub iterations: usize,
    pub per_iteration_values: Vec<f64>,
    pub povm_b: Vec<Povm>,
    pub povm_c: Vec<Povm>,
}

struct GameInstance {
    weights: Vec<f64>,
    /// rho[key][b] on B ⊗ C.
    states: Vec<[DensityMatrix; 2]>,
    b_dim: usize,
    c_dim: usize,
    b_layout: RegisterLayout,
    c_layout: RegisterLayout,
}

impl GameInstance {
    fn build(
        s: &UnclonableSke,
        a: &SplitStrategy,
        m0: usize,
        m1: usize,
    ) -> Result<Self, UncloneError> {
        if a.split.in_layout() != s.ct_layout() {
            return Err(UncloneError::Qmath(QmathError::DimensionMismatch));
        }
        let out = a.split.out_layout();
        let b_positions: Vec<usize> = (0..a.b_wires).collect();
        let c_positions: Vec<usize> = (a.b_wires..out.len()).collect();
        let b_layout = out.select(&b_positions).map_err(UncloneError::from)?;
        let c_layout = out.select(&c_positions).map_err(UncloneError::from)?;
        let mut states = Vec::with_capacity(s.key_count());
        for key in 0..s.key_count() {
            let rho0 = apply_channel(&a.split, s.ciphertext(key, m0)).map_err(UncloneError::from)?;
            let rho1 = apply_channel(&a.split, s.ciphertext(key, m1)).map_err(UncloneError::from)?;
            states.push([rho0, rho1]);
        }
        Ok(GameInstance {
            weights: s.key_weights().to_vec(),
            states,
            b_dim: b_layout.dim(),
            c_dim: c_layout.dim(),
            b_layout,
            c_layout,
        })
    }

    /// Tr_C[(I ⊗ m_c) rho] as an operator on B.
    fn contract_c(&self, rho: &DensityMatrix, m_c: &ComplexMatrix) -> ComplexMatrix {
        let (db, dc) = (self.b_dim, self.c_dim);
        ComplexMatrix::from_fn(db, db, |ib, jb| {
            let mut acc = ZERO;
            for ic in 0..dc {
                for kc in 0..dc {
                    let mv = m_c.get(ic, kc);
                    if mv.norm_sqr() < 1e-300 {
                        continue;
                    }
                    acc += mv * rho.matrix().get(ib * dc + kc, jb * dc + ic);
                }
            }
            acc
        })
    }

    /// Tr_B[(m_b ⊗ I) rho] as an operator on C.
    fn contract_b(&self, rho: &DensityMatrix, m_b: &ComplexMatrix) -> ComplexMatrix {
        let (db, dc) = (self.b_dim, self.c_dim);
        ComplexMatrix::from_fn(dc, dc, |ic, jc| {
            let mut acc = ZERO;
            for ib in 0..db {
                for kb in 0..db {
                    let mv = m_b.get(ib, kb);
                    if mv.norm_sqr() < 1e-300 {
                        continue;
                    }
                    acc += mv * rho.matrix().get(kb * dc + ic, ib * dc + jc);
                }
            }
            acc
        })
    }

    fn value(&self, povm_b: &[[ComplexMatrix; 2]], povm_c: &[[ComplexMatrix; 2]]) -> f64 {
        let mut total = 0.0;
        for (key, pair) in self.states.iter().enumerate() {
            for b in 0..2 {
                let joint = povm_b[key][b].kron(&povm_c[key][b]);
                total += 0.5
                    * self.weights[key]
                    * joint.mul(pair[b].matrix()).trace().re;
            }
        }
        total
    }
}

/// Positive-part optimizer: the two-outcome POVM maximizing
/// Tr[M_0 a_0] + Tr[M_1 a_1] subject to M_0 + M_1 = I.
fn optimal_response(a0: &ComplexMatrix, a1: &ComplexMatrix) -> [ComplexMatrix; 2] {
    let d = a0.rows();
    let diff = a1.sub(a0).symmetrize_hermitian();
    let (eig, v) = eigh(&diff);
    let mut m1 = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        if eig[k] > 0.0 {
            for i in 0..d {
                let vik = v.get(i, k);
                for j in 0..d {
                    m1.add_assign_at(i, j, vik * v.get(j, k).conj());
                }
            }
        }
    }
    let m1 = m1.symmetrize_hermitian();
    let m0 = ComplexMatrix::identity(d).sub(&m1);
    [m0, m1]
}

/// Evaluates the cloning game by seesaw over per-key product two-outcome
/// POVMs: C's measurement is fixed while B's optimal response is computed
/// exactly (positive-part thresholding), then roles alternate. Restarts keep
/// the best monotone trace; the constant-guess baseline 1/2 is always
/// included as an initialization.
pub fn cloning_game_value(
    s: &UnclonableSke,
    a: &SplitStrategy,
    m0: usize,
    m1: usize,
    seesaw_iters: usize,
    rng: &mut SplitRng,
) -> Result<CloningGameReport, UncloneError> {
    if m0 == m1 || m0 >= s.msg_count() || m1 >= s.msg_count() {
        return Err(UncloneError::InvalidScheme);
    }
    let game = GameInstance::build(s, a, m0, m1)?;
    let keys = game.weights.len();
    let (db, dc) = (game.b_dim, game.c_dim);

    // Initializations for C's POVMs.
    let helstrom_init: Vec<[ComplexMatrix; 2]> = (0..keys)
        .map(|key| {
            let rho0 = partial_trace(&game.states[key][0], &c_keep(a)).expect("split layouts");
            let rho1 = partial_trace(&game.states[key][1], &c_keep(a)).expect("split layouts");
            let (povm, _) = helstrom_povm(&rho0, &rho1).expect("same layout");
            [povm.elements()[0].clone(), povm.elements()[1].clone()]
        })
        .collect();
    let constant_init: Vec<[ComplexMatrix; 2]> = (0..keys)
        .map(|_| [ComplexMatrix::identity(dc), ComplexMatrix::zeros(dc, dc)])
        .collect();
    let mut inits = vec![helstrom_init, constant_init];
    for _ in 0..3 {
        let mut split = rng.split();
        inits.push(
            (0..keys)
                .map(|_| {
                    let u = crate::qmath::ops::haar_unitary(dc, &mut split);
                    let mut proj = ComplexMatrix::zeros(dc, dc);
                    for k in 0..dc {
                        if split.next_bool(0.5) {
                            for i in 0..dc {
                                let vik = u.matrix().get(i, k);
                                for j in 0..dc {
                                    proj.add_assign_at(i, j, vik * u.matrix().get(j, k).conj());
                                }
                            }
                        }
                    }
                    let proj = proj.symmetrize_hermitian();
                    let rest = ComplexMatrix::identity(dc).sub(&proj);
                    [proj, rest]
                })
                .collect(),
        );
    }

    let mut best: Option<CloningGameReport> = None;
    for init_c in inits {
        let mut povm_c = init_c;
        let mut povm_b: Vec<[ComplexMatrix; 2]> = (0..keys)
            .map(|_| [ComplexMatrix::identity(db), ComplexMatrix::zeros(db, db)])
            .collect();
        let mut trace = Vec::new();
        let mut last = -1.0f64;
        for _ in 0..seesaw_iters.max(1) {
            // B responds to C.
            for key in 0..keys {
                let a0 = game
                    .contract_c(&game.states[key][0], &povm_c[key][0])
                    .scale(C64::new(0.5, 0.0));
                let a1 = game
                    .contract_c(&game.states[key][1], &povm_c[key][1])
                    .scale(C64::new(0.5, 0.0));
                povm_b[key] = optimal_response(&a0, &a1);
            }
            let after_b = game.value(&povm_b, &povm_c);
            trace.push(after_b);
            // C responds to B.
            for key in 0..keys {
                let a0 = game
                    .contract_b(&game.states[key][0], &povm_b[key][0])
                    .scale(C64::new(0.5, 0.0));
                let a1 = game
                    .contract_b(&game.states[key][1], &povm_b[key][1])
                    .scale(C64::new(0.5, 0.0));
                povm_c[key] = optimal_response(&a0, &a1);
            }
            let after_c = game.value(&povm_b, &povm_c);
            trace.push(after_c);
            if after_c - last < 1e-12 {
                break;
            }
            last = after_c;
        }
        let value = trace.last().copied().unwrap_or(0.0);
        let report = CloningGameReport {
            value,
            iterations: trace.len() / 2,
            per_iteration_values: trace,
            povm_b: povm_b
                .iter()
                .map(|m| Povm::new_unchecked(game.b_layout.clone(), m.to_vec()))
                .collect(),
            povm_c: povm_c
                .iter()
                .map(|m| Povm::new_unchecked(game.c_layout.clone(), m.to_vec()))
                .collect(),
        };
        if best.as_ref().map(|b| value > b.value).unwrap_or(true) {
            best = Some(report);
        }
    }
    Ok(best.expect("at least one initialization"))
}

fn c_keep(a: &SplitStrategy) -> Vec<usize> {
    (a.b_wires..a.split.out_layout().len()).collect()
}

/// Direct evaluation of the game value for explicitly given per-key POVMs;
/// used as an oracle against the seesaw.
pub fn game_value_for_povms(
    s: &UnclonableSke,
    a: &SplitStrategy,
    m0: usize,
    m1: usize,
    povm_b: &[Povm],
    povm_c: &[Povm],
) -> Result<f64, UncloneError> {
    let game = GameInstance::build(s, a, m0, m1)?;
    let b: Vec<[ComplexMatrix; 2]> = povm_b
        .iter()
        .map(|p| [p.elements()[0].clone(), p.elements()[1].clone()])
        .collect();
    let c: Vec<[ComplexMatrix; 2]> = povm_c
        .iter()
        .map(|p| [p.elements()[0].clone(), p.elements()[1].clone()])
        .collect();
    Ok(game.value(&b, &c))
}

/// Built-in candidates for tests and experiments.
pub mod candidates {
    use super::*;

    /// Plaintext in the clear: CT = |m>, identity decryption, s-bit keys
    /// that are ignored.
    pub fn passthrough(msg_len: usize, key_len: usize) -> UnclonableSke {
        let keys = 1usize << key_len;
        let ct_layout = RegisterLayout::qubits(msg_len).unwrap();
        let d = ct_layout.dim();
        let enc: Vec<Vec<DensityMatrix>> = (0..keys)
            .map(|_| {
                (0..d)
                    .map(|m| {
                        DensityMatrix::new(ct_layout.clone(), basis_projector(d, m)).unwrap()
                    })
                    .collect()
            })
            .collect();
        let dec = (0..keys)
            .map(|_| UnitaryOp::identity(ct_layout.clone()))
            .collect();
        UnclonableSke::new(
            key_len,
            vec![1.0 / keys as f64; keys],
            msg_len,
            ct_layout,
            enc,
            dec,
            0,
        )
        .unwrap()
    }

    /// Quantum one-time pad on a single message qubit: key (a, c), CT =
    /// X^a Z^c |m>, decryption inverts the Paulis.
    pub fn qotp_one_qubit() -> UnclonableSke {
        let ct_layout = RegisterLayout::qubits(1).unwrap();
        let x = crate::qmath::embed::pauli_x();
        let z = crate::qmath::embed::pauli_z();
        let mut enc = Vec::with_capacity(4);
        let mut dec = Vec::with_capacity(4);
        for key in 0..4usize {
            let (a, c) = (key >> 1, key & 1);
            let mut mask = ComplexMatrix::identity(2);
            if a == 1 {
                mask = x.mul(&mask);
            }
            if c == 1 {
                mask = mask.mul(&z); // X^a Z^c
            }
            let row = (0..2)
                .map(|m| {
                    let ct = mask.mul(&basis_projector(2, m)).mul(&mask.conjugate_transpose());
                    DensityMatrix::new(ct_layout.clone(), ct).unwrap()
                })
                .collect();
            enc.push(row);
            dec.push(UnitaryOp::new_unchecked(
                ct_layout.clone(),
                mask.conjugate_transpose(),
            ));
        }
        UnclonableSke::new(2, vec![0.25; 4], 1, ct_layout, enc, dec, 0).unwrap()
    }

    /// Pass-through ciphertexts with a decryptor that always flips the bit.
    pub fn broken_decryptor() -> UnclonableSke {
        let ct_layout = RegisterLayout::qubits(1).unwrap();
        let enc: Vec<Vec<DensityMatrix>> = (0..2)
            .map(|_| {
                (0..2)
                    .map(|m| {
                        DensityMatrix::new(ct_layout.clone(), basis_projector(2, m)).unwrap()
                    })
                    .collect()
            })
            .collect();
        let dec = (0..2)
            .map(|_| {
                UnitaryOp::new_unchecked(ct_layout.clone(), crate::qmath::embed::pauli_x())
            })
            .collect();
        UnclonableSke::new(1, vec![0.5; 2], 1, ct_layout, enc, dec, 0).unwrap()
    }

    /// Encryption ignores everything and outputs the maximally mixed state.
    pub fn noise_scheme() -> UnclonableSke {
        let ct_layout = RegisterLayout::qubits(1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(ct_layout.clone());
        let enc: Vec<Vec<DensityMatrix>> =
            vec![vec![mixed.clone(), mixed.clone()], vec![mixed.clone(), mixed]];
        let dec = (0..2)
            .map(|_| UnitaryOp::identity(ct_layout.clone()))
            .collect();
        UnclonableSke::new(1, vec![0.5; 2], 1, ct_layout, enc, dec, 0).unwrap()
    }

    /// Random small scheme: 1-bit key, 1-bit messages, one ciphertext qubit,
    /// random pure ciphertexts and Haar decryption (often wrong).
    pub fn random_scheme(rng: &mut SplitRng) -> UnclonableSke {
        let ct_layout = RegisterLayout::qubits(1).unwrap();
        let anc = rng.next_below(2);
        let mut dec_dims = ct_layout.dims().to_vec();
        dec_dims.extend(core::iter::repeat_n(2, anc));
        let dec_layout = RegisterLayout::new(dec_dims).unwrap();
        let enc = (0..2)
            .map(|_| {
                (0..2)
                    .map(|_| crate::qmath::ops::random_pure_state(&ct_layout, rng).to_density())
                    .collect()
            })
            .collect();
        let dec = (0..2)
            .map(|_| {
                let u = crate::qmath::ops::haar_unitary(dec_layout.dim(), rng);
                UnitaryOp::new_unchecked(dec_layout.clone(), u.matrix().clone())
            })
            .collect();
        UnclonableSke::new(1, vec![0.5; 2], 1, ct_layout, enc, dec, anc).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::trace_norm_hermitian;

    #[test]
    fn correctness_examples() {
        assert!((candidates::passthrough(2, 1).correctness() - 1.0).abs() < 1e-12);
        assert!((candidates::qotp_one_qubit().correctness() - 1.0).abs() < 1e-12);
        // Maximally mixed ciphertexts decrypt to a uniform outcome.
        assert!((candidates::noise_scheme().correctness() - 0.5).abs() < 1e-12);
        assert!(candidates::broken_decryptor().correctness() < 1e-12);
    }

    #[test]
    fn gentle_transform_fixes_broken_decryptor() {
        let t = candidates::broken_decryptor().gentle_transform().unwrap();
        assert!((t.scheme().correctness() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gentle_transform_preserves_correct_ciphertexts() {
        let base = candidates::qotp_one_qubit();
        let t = base.gentle_transform().unwrap();
        assert!((t.scheme().correctness() - 1.0).abs() < 1e-12);
        for key in 0..4 {
            for m in 0..2 {
                let got = t.scheme().ciphertext(key, m);
                let flag = DensityMatrix::new(
                    RegisterLayout::qubits(1).unwrap(),
                    basis_projector(2, 1),
                )
                .unwrap();
                let expect = base.ciphertext(key, m).tensor(&flag).unwrap();
                assert!(got.matrix().sub(expect.matrix()).frobenius_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gentle_transform_distance_bound_on_corpus() {
        let mut rng = SplitRng::from_seed(11);
        for _ in 0..40 {
            let s = candidates::random_scheme(&mut rng);
            let t = s.gentle_transform().unwrap();
            assert!((t.scheme().correctness() - 1.0).abs() < 1e-9);
            for key in 0..s.key_count() {
                for m in 0..s.msg_count() {
                    let eps = (1.0 - s.decrypt_success(key, m)).max(0.0);
                    let anc = s.dec_ancilla() + 1;
                    let mut ref_mat = s.ciphertext(key, m).matrix().clone();
                    for q in 0..anc {
                        let bit = if q == anc - 1 { 1 } else { 0 };
                        ref_mat = ref_mat.kron(&basis_projector(2, bit));
                    }
                    let diff = t.scheme().ciphertext(key, m).matrix().sub(&ref_mat);
                    let dist = 0.5 * trace_norm_hermitian(&diff);
                    assert!(dist <= 2.0 * libm::sqrt(eps) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn transformed_ciphertexts_are_valid() {
        let mut rng = SplitRng::from_seed(12);
        for _ in 0..10 {
            let s = candidates::random_scheme(&mut rng);
            let t = s.gentle_transform().unwrap();
            for key in 0..s.key_count() {
                for m in 0..s.msg_count() {
                    t.scheme().ciphertext(key, m).validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn normalize_key_examples() {
        // Point-mass key distribution becomes exactly uniform; correctness
        // is preserved.
        let base = candidates::qotp_one_qubit();
        let mut skewed_weights = vec![0.0; 4];
        skewed_weights[2] = 1.0;
        let skewed = UnclonableSke::new(
            2,
            skewed_weights,
            1,
            base.ct_layout().clone(),
            (0..4).map(|k| vec![base.ciphertext(k, 0).clone(), base.ciphertext(k, 1).clone()]).collect(),
            (0..4).map(|k| base.dec_unitary(k).clone()).collect(),
            0,
        )
        .unwrap();
        let norm = skewed.normalize_key().unwrap();
        for w in norm.key_weights() {
            assert!((w - 0.25).abs() < 1e-12);
        }
        assert!((norm.correctness() - skewed.correctness()).abs() < 1e-9);

        // Already uniform stays uniform with unchanged correctness.
        let n2 = base.normalize_key().unwrap();
        assert!((n2.correctness() - base.correctness()).abs() < 1e-9);
    }

    #[test]
    fn normalize_key_wrong_key_decrypts_like_inner() {
        // Decrypting with the wrong normalized key recovers a shifted inner
        // key, so failure matches the inner scheme's wrong-key behavior.
        let base = candidates::qotp_one_qubit();
        let norm = base.normalize_key().unwrap();
        // Key u encrypts; decrypting with u' recovers sk ^ u ^ u'.
        let (u_key, wrong) = (1usize, 2usize);
        let ct = norm.ciphertext(u_key, 0);
        let dist = norm.decrypt_distribution(wrong, ct);
        // Inner behavior: average over sk of decrypting CT(sk, 0) with key
        // sk ^ u ^ wrong.
        let shift = u_key ^ wrong;
        let mut expect = 0.0;
        for sk in 0..4 {
            let inner_ct = base.ciphertext(sk, 0);
            let d = base.decrypt_distribution(sk ^ shift, inner_ct);
            expect += 0.25 * d[0];
        }
        assert!((dist[0] - expect).abs() < 1e-9);
    }

    #[test]
    fn ind_advantage_examples() {
        assert!(candidates::qotp_one_qubit().ind_advantage() < 1e-12);
        assert!((candidates::passthrough(1, 1).ind_advantage() - 1.0).abs() < 1e-12);
        assert!(candidates::noise_scheme().ind_advantage() < 1e-12);
    }

    #[test]
    fn xor_combine_roundtrip_and_shares() {
        // n = 1 component: equals the gentle transform.
        let single = xor_combine(&[candidates::passthrough(1, 1)]).unwrap();
        assert!((single.correctness() - 1.0).abs() < 1e-12);

        // Two components, exhaustive roundtrip over 2-bit messages.
        let combined = xor_combine(&[
            candidates::passthrough(2, 1),
            candidates::passthrough(2, 1),
        ])
        .unwrap();
        assert!((combined.correctness() - 1.0).abs() < 1e-10);
        for key in 0..combined.key_count() {
            for m in 0..combined.msg_count() {
                assert!((combined.decrypt_success(key, m) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn xor_combine_hiding_contraction() {
        // Clear component + QOTP component: advantage collapses to 0.
        let combined = xor_combine(&[
            candidates::passthrough(1, 1),
            candidates::qotp_one_qubit(),
        ])
        .unwrap();
        assert!(combined.ind_advantage() < 1e-9);
        // And never exceeds the best component.
        let c1 = candidates::passthrough(1, 1);
        let c2 = candidates::qotp_one_qubit();
        let min_adv = c1.ind_advantage().min(c2.ind_advantage());
        assert!(combined.ind_advantage() <= min_adv + 1e-9);
    }

    #[test]
    fn xor_combine_rejects_mismatched_lengths() {
        let r = xor_combine(&[
            candidates::passthrough(1, 1),
            candidates::passthrough(2, 1),
        ]);
        assert!(matches!(r, Err(UncloneError::MessageLengthMismatch)));
    }

    #[test]
    fn cloning_constant_guess_is_half() {
        let s = candidates::passthrough(1, 1);
        let a = SplitStrategy::broadcast(s.ct_layout());
        let db = 2usize;
        let povm_b: Vec<Povm> = (0..2)
            .map(|_| {
                Povm::new_unchecked(
                    RegisterLayout::qubits(1).unwrap(),
                    vec![ComplexMatrix::identity(db), ComplexMatrix::zeros(db, db)],
                )
            })
            .collect();
        let povm_c = povm_b.clone();
        let v = game_value_for_povms(&s, &a, 0, 1, &povm_b, &povm_c).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cloning_broadcast_on_clear_scheme_wins() {
        let mut rng = SplitRng::from_seed(13);
        let s = candidates::passthrough(1, 1);
        let a = SplitStrategy::broadcast(s.ct_layout());
        let report = cloning_game_value(&s, &a, 0, 1, 30, &mut rng).unwrap();
        assert!(report.value >= 1.0 - 1e-6);
        assert!(report.value <= 1.0 + 1e-9);
    }

    #[test]
    fn cloning_starved_c_pins_value_at_half() {
        let mut rng = SplitRng::from_seed(14);
        let s = candidates::passthrough(1, 1);
        let a = SplitStrategy::all_to_b(s.ct_layout());
        let report = cloning_game_value(&s, &a, 0, 1, 30, &mut rng).unwrap();
        assert!((report.value - 0.5).abs() < 1e-9, "value {}", report.value);
    }

    #[test]
    fn seesaw_trace_is_monotone() {
        let mut rng = SplitRng::from_seed(15);
        for scheme in [candidates::qotp_one_qubit(), candidates::passthrough(1, 1)] {
            let a = SplitStrategy::broadcast(scheme.ct_layout());
            let report = cloning_game_value(&scheme, &a, 0, 1, 25, &mut rng).unwrap();
            for w in report.per_iteration_values.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
            assert!(report.value >= 0.5 - 1e-9);
            assert!(report.value <= 1.0 + 1e-9);
        }
    }
}
