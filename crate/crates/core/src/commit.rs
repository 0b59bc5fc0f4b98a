//! Canonical quantum bit commitments as unitary pairs (Q0, Q1) over a commit
//! register C and a reveal register R, with exact hiding/binding metrics and
//! the three transformations built on them: flavor conversion, binding
//! amplification, and the XOR combiner.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::qmath::embed::{cnot, hadamard, mul_embedded_right, pauli_x, pauli_z, tensor_on_positions};
use crate::qmath::layout::{RegisterLayout, DIM_CAP};
use crate::qmath::linalg::svd;
use crate::qmath::matrix::{C64, ComplexMatrix, ONE, ZERO};
use crate::qmath::ops::{fidelity, haar_unitary, trace_distance};
use crate::qmath::types::{StateVector, UnitaryOp};
use crate::qmath::QmathError;
use crate::rng::SplitRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommitError {
    Qmath(QmathError),
    DimensionCap,
    EmptyList,
    InvalidRegisters,
}

impl From<QmathError> for CommitError {
    fn from(e: QmathError) -> Self {
        match e {
            QmathError::DimensionCap => CommitError::DimensionCap,
            other => CommitError::Qmath(other),
        }
    }
}

impl fmt::Display for CommitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommitError::Qmath(e) => write!(f, "{e}"),
            CommitError::DimensionCap => f.write_str("combined commitment exceeds the dimension cap"),
            CommitError::EmptyList => f.write_str("at least one commitment is required"),
            CommitError::InvalidRegisters => {
                f.write_str("commit and reveal subsystems must partition the layout")
            }
        }
    }
}

/// A canonical bit commitment: two unitaries on the same layout whose
/// subsystems are partitioned into commit (C) and reveal (R) registers.
#[derive(Debug, Clone, PartialEq)]
pub struct Commitment {
    q0: UnitaryOp,
    q1: UnitaryOp,
    commit_subsystems: Vec<usize>,
    reveal_subsystems: Vec<usize>,
}

/// Exact hiding/binding quantities of a commitment: `f` is the fidelity of
/// the two commit-register reductions, `hiding_td` their trace distance, and
/// `binding_amp` = sqrt(f) is the optimal opening amplitude an unbounded
/// sender can reach acting on R and ancilla alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommitMetrics {
    pub f: f64,
    pub hiding_td: f64,
    pub binding_amp: f64,
}

/// Settings for the numerical binding-attack search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSearchConfig {
    /// Dimension of the ancilla register Z; 0 selects the default dim(R).
    pub ancilla_dim: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub step_tolerance: f64,
}

impl Default for AttackSearchConfig {
    fn default() -> Self {
        AttackSearchConfig {
            ancilla_dim: 0,
            restarts: 50,
            iterations: 60,
            step_tolerance: 1e-12,
        }
    }
}

impl Commitment {
    /// Validates registers and unitarity (intended for untrusted inputs such
    /// as parsed scheme files).
    pub fn new(
        q0: UnitaryOp,
        q1: UnitaryOp,
        commit_subsystems: Vec<usize>,
        reveal_subsystems: Vec<usize>,
    ) -> Result<Self, CommitError> {
        q0.validate().map_err(CommitError::from)?;
        q1.validate().map_err(CommitError::from)?;
        Self::new_trusted(q0, q1, commit_subsystems, reveal_subsystems)
    }

    /// Same checks minus the quadratic unitarity test; for operators unitary
    /// by construction.
    pub fn new_trusted(
        q0: UnitaryOp,
        q1: UnitaryOp,
        commit_subsystems: Vec<usize>,
        reveal_subsystems: Vec<usize>,
    ) -> Result<Self, CommitError> {
        if q0.layout() != q1.layout() {
            return Err(CommitError::Qmath(QmathError::DimensionMismatch));
        }
        let n = q0.layout().len();
        let mut seen = vec![false; n];
        for &s in commit_subsystems.iter().chain(reveal_subsystems.iter()) {
            if s >= n || seen[s] {
                return Err(CommitError::InvalidRegisters);
            }
            seen[s] = true;
        }
        if !seen.iter().all(|&b| b) || commit_subsystems.is_empty() {
            return Err(CommitError::InvalidRegisters);
        }
        Ok(Commitment {
            q0,
            q1,
            commit_subsystems,
            reveal_subsystems,
        })
    }

    pub fn q(&self, b: bool) -> &UnitaryOp {
        if b {
            &self.q1
        } else {
            &self.q0
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        self.q0.layout()
    }

    pub fn commit_subsystems(&self) -> &[usize] {
        &self.commit_subsystems
    }

    pub fn reveal_subsystems(&self) -> &[usize] {
        &self.reveal_subsystems
    }

    pub fn commit_dim(&self) -> usize {
        self.layout()
            .subset_dim(&self.commit_subsystems)
            .expect("registers validated")
    }

    pub fn reveal_dim(&self) -> usize {
        self.layout()
            .subset_dim(&self.reveal_subsystems)
            .expect("registers validated")
    }

    /// Q_b applied to the all-zero basis state.
    pub fn commit_state(&self, b: bool) -> StateVector {
        let zero = StateVector::all_zero(self.layout().clone());
        self.q(b).apply_state(&zero).expect("layouts agree")
    }

    /// Reduction of the committed state onto the commit register.
    pub fn commit_reduction(&self, b: bool) -> crate::qmath::DensityMatrix {
        self.commit_state(b)
            .reduced_density(&self.commit_subsystems)
            .expect("commit subsystems validated")
    }

    pub fn metrics(&self) -> CommitMetrics {
        let rho0 = self.commit_reduction(false);
        let rho1 = self.commit_reduction(true);
        let f = fidelity(&rho0, &rho1).expect("equal layouts");
        let hiding_td = trace_distance(&rho0, &rho1).expect("equal layouts");
        CommitMetrics {
            f,
            hiding_td,
            binding_amp: libm::sqrt(f),
        }
    }

    /// Flavor conversion: swaps the roles of the commit and reveal registers
    /// and appends a one-qubit register D to the new commit side, with
    ///   Q~_b = (Q0 ⊗ |0><0|_D + Q1 ⊗ |1><1|_D) (I ⊗ Z^b H_D).
    pub fn flavor_convert(&self) -> Result<Commitment, CommitError> {
        let old = self.layout();
        let mut dims = old.dims().to_vec();
        dims.push(2);
        let layout = RegisterLayout::new(dims).map_err(CommitError::from)?;
        let d_index = old.len();

        let p0 = crate::qmath::embed::basis_projector(2, 0);
        let p1 = crate::qmath::embed::basis_projector(2, 1);
        let select = self.q0.matrix().kron(&p0).add(&self.q1.matrix().kron(&p1));
        let h = hadamard();
        let z = pauli_z();
        let build = |b: bool| -> ComplexMatrix {
            let gate = if b { z.mul(&h) } else { h.clone() };
            mul_embedded_right(&layout, &select, &gate, &[d_index]).expect("embedding fits")
        };
        let m0 = build(false);
        let m1 = build(true);
        let q0 = UnitaryOp::new_unchecked(layout.clone(), m0);
        let q1 = UnitaryOp::new_unchecked(layout, m1);

        let mut commit = self.reveal_subsystems.clone();
        commit.push(d_index);
        let reveal = self.commit_subsystems.clone();
        Commitment::new_trusted(q0, q1, commit, reveal)
    }

    /// Binding amplification: Q*_b = (Q_b ⊗ Q~_b)^{⊗ lam}, with the commit
    /// register collecting every copy's C and C~.
    pub fn amplify(&self, lam: usize) -> Result<Commitment, CommitError> {
        assert!(lam >= 1, "lam must be at least 1");
        let converted = self.flavor_convert()?;
        let base_dims: Vec<usize> = self
            .layout()
            .dims()
            .iter()
            .chain(converted.layout().dims().iter())
            .copied()
            .collect();
        let block = base_dims.len();
        let mut dims = Vec::with_capacity(block * lam);
        for _ in 0..lam {
            dims.extend_from_slice(&base_dims);
        }
        let layout = RegisterLayout::new(dims).map_err(CommitError::from)?;

        let pair0 = self.q0.matrix().kron(converted.q(false).matrix());
        let pair1 = self.q1.matrix().kron(converted.q(true).matrix());
        let mut m0 = pair0.clone();
        let mut m1 = pair1.clone();
        for _ in 1..lam {
            m0 = m0.kron(&pair0);
            m1 = m1.kron(&pair1);
        }
        if m0.rows() > DIM_CAP {
            return Err(CommitError::DimensionCap);
        }

        let offset_conv = self.layout().len();
        let mut commit = Vec::new();
        let mut reveal = Vec::new();
        for copy in 0..lam {
            let base = copy * block;
            commit.extend(self.commit_subsystems.iter().map(|&s| base + s));
            commit.extend(
                converted
                    .commit_subsystems()
                    .iter()
                    .map(|&s| base + offset_conv + s),
            );
            reveal.extend(self.reveal_subsystems.iter().map(|&s| base + s));
            reveal.extend(
                converted
                    .reveal_subsystems()
                    .iter()
                    .map(|&s| base + offset_conv + s),
            );
        }
        Commitment::new_trusted(
            UnitaryOp::new_unchecked(layout.clone(), m0),
            UnitaryOp::new_unchecked(layout, m1),
            commit,
            reveal,
        )
    }
}

/// XOR combiner: commits to b by secret-sharing it as r_1 ⊕ ... ⊕ r_n and
/// committing to r_i with candidate i. The combined commit register is every
/// component's C (component order); the reveal register is every component's
/// R followed by the share qubits D_1..D_n.
pub fn xor_combine(components: &[Commitment]) -> Result<Commitment, CommitError> {
    if components.is_empty() {
        return Err(CommitError::EmptyList);
    }
    let n = components.len();

    // Combined layout: [C_1.., C_2.., ..., R_1.., ..., D_1..D_n].
    let mut dims = Vec::new();
    let mut commit_blocks = Vec::new();
    let mut reveal_blocks = Vec::new();
    for c in components {
        let sub = c
            .layout()
            .select(c.commit_subsystems())
            .map_err(CommitError::from)?;
        commit_blocks.push((dims.len(), c.commit_subsystems().len()));
        dims.extend_from_slice(sub.dims());
    }
    for c in components {
        let sub = c
            .layout()
            .select(c.reveal_subsystems())
            .map_err(CommitError::from)?;
        reveal_blocks.push((dims.len(), c.reveal_subsystems().len()));
        dims.extend_from_slice(sub.dims());
    }
    let d_start = dims.len();
    dims.extend(core::iter::repeat_n(2, n));
    let layout = RegisterLayout::new(dims).map_err(CommitError::from)?;

    // Component i's wires, listed in its own layout order, as combined positions.
    let wire_maps = component_wire_maps(components, &commit_blocks, &reveal_blocks);
    let d_positions: Vec<usize> = (0..n).map(|i| d_start + i).collect();

    // Share-selection unitary: sum_r ( ⊗_i Q_{i, r_i} ) ⊗ |r><r|_D.
    // The D wires sit last, so the sum is block diagonal over the trailing
    // index: each share r only fills the (.., r), (.., r) block.
    let dim = layout.dim();
    let cr_positions: Vec<usize> = (0..d_start).collect();
    let cr_layout = layout.select(&cr_positions).map_err(CommitError::from)?;
    let d_dim = 1usize << n;
    let mut selector = ComplexMatrix::zeros(dim, dim);
    for r in 0..d_dim {
        let mats: Vec<&ComplexMatrix> = (0..n)
            .map(|i| components[i].q(share_bit(r, i, n)).matrix())
            .collect();
        let factors: Vec<(&ComplexMatrix, &[usize])> = (0..n)
            .map(|i| (mats[i], wire_maps[i].as_slice()))
            .collect();
        let block = tensor_on_positions(&cr_layout, &factors)?;
        for i in 0..block.rows() {
            for j in 0..block.cols() {
                let v = block.get(i, j);
                if v.norm_sqr() >= 1e-300 {
                    selector.set(i * d_dim + r, j * d_dim + r, v);
                }
            }
        }
    }

    // Share-preparation layer on the D wires: X^b on D_1, CNOTs with D_1 as
    // target and D_i as control, Hadamards on D_2..D_n.
    let d_layout = layout.select(&d_positions).map_err(CommitError::from)?;
    let build_prep = |b: bool| -> ComplexMatrix {
        let mut w = ComplexMatrix::identity(1 << n);
        for i in 1..n {
            let h = crate::qmath::embed::embed(&d_layout, &hadamard(), &[i]).expect("fits");
            w = h.mul(&w);
        }
        for i in 1..n {
            // control D_i, target D_1
            let g = crate::qmath::embed::embed(&d_layout, &cnot(), &[i, 0]).expect("fits");
            w = g.mul(&w);
        }
        if b {
            let x = crate::qmath::embed::embed(&d_layout, &pauli_x(), &[0]).expect("fits");
            w = x.mul(&w);
        }
        w
    };

    let q0 = UnitaryOp::new_unchecked(
        layout.clone(),
        mul_embedded_right(&layout, &selector, &build_prep(false), &d_positions)?,
    );
    let q1 = UnitaryOp::new_unchecked(
        layout.clone(),
        mul_embedded_right(&layout, &selector, &build_prep(true), &d_positions)?,
    );

    let mut commit = Vec::new();
    for (start, len) in &commit_blocks {
        commit.extend(*start..start + len);
    }
    let mut reveal = Vec::new();
    for (start, len) in &reveal_blocks {
        reveal.extend(*start..start + len);
    }
    reveal.extend(d_positions.iter().copied());
    Commitment::new_trusted(q0, q1, commit, reveal)
}

#[inline]
fn share_bit(r: usize, i: usize, n: usize) -> bool {
    (r >> (n - 1 - i)) & 1 == 1
}

fn component_wire_maps(
    components: &[Commitment],
    commit_blocks: &[(usize, usize)],
    reveal_blocks: &[(usize, usize)],
) -> Vec<Vec<usize>> {
    components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut map = vec![0usize; c.layout().len()];
            for (k, &s) in c.commit_subsystems().iter().enumerate() {
                map[s] = commit_blocks[i].0 + k;
            }
            for (k, &s) in c.reveal_subsystems().iter().enumerate() {
                map[s] = reveal_blocks[i].0 + k;
            }
            map
        })
        .collect()
}

/// Robust combiner: amplify every candidate's binding with `lam` copies,
/// then combine hiding with the XOR construction.
pub fn robust_combine(components: &[Commitment], lam: usize) -> Result<Commitment, CommitError> {
    if components.is_empty() {
        return Err(CommitError::EmptyList);
    }
    let amplified: Result<Vec<Commitment>, CommitError> =
        components.iter().map(|c| c.amplify(lam)).collect();
    xor_combine(&amplified?)
}

/// The expected combined commit state: 2^{-(n-1)/2} sum over shares r with
/// parity b of ⊗_i (Q_{i,r_i}|0> ⊗ |r_i>_{D_i}); exposed so tests can check
/// the combiner output against a directly built superposition.
pub fn xor_superposition(components: &[Commitment], b: bool) -> Result<StateVector, CommitError> {
    if components.is_empty() {
        return Err(CommitError::EmptyList);
    }
    let n = components.len();
    let mut dims = Vec::new();
    let mut commit_blocks = Vec::new();
    let mut reveal_blocks = Vec::new();
    for c in components {
        let sub = c
            .layout()
            .select(c.commit_subsystems())
            .map_err(CommitError::from)?;
        commit_blocks.push((dims.len(), c.commit_subsystems().len()));
        dims.extend_from_slice(sub.dims());
    }
    for c in components {
        let sub = c
            .layout()
            .select(c.reveal_subsystems())
            .map_err(CommitError::from)?;
        reveal_blocks.push((dims.len(), c.reveal_subsystems().len()));
        dims.extend_from_slice(sub.dims());
    }
    let d_start = dims.len();
    dims.extend(core::iter::repeat_n(2, n));
    let layout = RegisterLayout::new(dims).map_err(CommitError::from)?;
    let wire_maps = component_wire_maps(components, &commit_blocks, &reveal_blocks);

    let dim = layout.dim();
    let mut amps = vec![ZERO; dim];
    let scale = C64::new(libm::pow(2.0, -((n as f64 - 1.0) / 2.0)), 0.0);
    let mut digits = vec![0usize; layout.len()];
    for r in 0..(1usize << n) {
        let bits: Vec<usize> = (0..n).map(|i| usize::from(share_bit(r, i, n))).collect();
        if bits.iter().sum::<usize>() % 2 != usize::from(b) {
            continue;
        }
        let states: Vec<StateVector> = (0..n)
            .map(|i| components[i].commit_state(bits[i] == 1))
            .collect();
        for (idx, slot) in amps.iter_mut().enumerate() {
            layout.decompose(idx, &mut digits);
            if (0..n).any(|i| digits[d_start + i] != bits[i]) {
                continue;
            }
            let mut amp = scale;
            for i in 0..n {
                let comp_layout = components[i].layout();
                let mut comp_digits = vec![0usize; comp_layout.len()];
                for (w, &pos) in wire_maps[i].iter().enumerate() {
                    comp_digits[w] = digits[pos];
                }
                amp *= states[i].amps()[comp_layout.compose(&comp_digits)];
                if amp.norm_sqr() < 1e-300 {
                    break;
                }
            }
            *slot += amp;
        }
    }
    StateVector::new(layout, amps).map_err(CommitError::from)
}

/// Numerical lower bound on the optimal opening amplitude
/// ||<0| Q1† (I_C ⊗ U_{R,Z}) (Q0|0> ⊗ |tau>)|| via alternating exact updates
/// of U (polar step on the contracted cross operator) and of the attack's
/// output direction, from random restarts. Never exceeds sqrt(f).
pub fn binding_attack_search(
    c: &Commitment,
    cfg: &AttackSearchConfig,
    rng: &mut SplitRng,
) -> Result<(UnitaryOp, f64), CommitError> {
    let layout = c.layout();
    let dim_r = c.reveal_dim();
    let dim_c = c.commit_dim();
    let dim_z = if cfg.ancilla_dim == 0 {
        dim_r
    } else {
        cfg.ancilla_dim
    };
    let drz = dim_r * dim_z;
    if dim_c.checked_mul(drz).map(|d| d > DIM_CAP).unwrap_or(true) {
        return Err(CommitError::DimensionCap);
    }

    // Amplitudes reordered to [C..., R...] blocks: psi[c][r].
    let order: Vec<usize> = c
        .commit_subsystems()
        .iter()
        .chain(c.reveal_subsystems().iter())
        .copied()
        .collect();
    let psi0 = c
        .commit_state(false)
        .permute(&order)
        .map_err(CommitError::from)?;
    let psi1 = c
        .commit_state(true)
        .permute(&order)
        .map_err(CommitError::from)?;
    let block = |psi: &StateVector| -> Vec<Vec<C64>> {
        let mut out = vec![vec![ZERO; dim_r]; dim_c];
        for (idx, &a) in psi.amps().iter().enumerate() {
            out[idx / dim_r][idx % dim_r] = a;
        }
        out
    };
    let b0 = block(&psi0);
    let b1 = block(&psi1);

    // Attack value for a given U on R ⊗ Z with |tau> = |0>_Z:
    //   T_z = sum_{c,r,r'} conj(psi1[c,r]) U[(r,z),(r',0)] psi0[c,r'].
    let out_vector = |u: &ComplexMatrix| -> Vec<C64> {
        let mut t = vec![ZERO; dim_z];
        for (z, slot) in t.iter_mut().enumerate() {
            let mut acc = ZERO;
            for r in 0..dim_r {
                for rp in 0..dim_r {
                    let uv = u.get(r * dim_z + z, rp * dim_z);
                    if uv.norm_sqr() < 1e-300 {
                        continue;
                    }
                    let mut cross = ZERO;
                    for cc in 0..dim_c {
                        cross += b1[cc][r].conj() * b0[cc][rp];
                    }
                    acc += uv * cross;
                }
            }
            *slot = acc;
        }
        t
    };
    let value_of = |u: &ComplexMatrix| -> f64 {
        let t = out_vector(u);
        libm::sqrt(t.iter().map(|x| x.norm_sqr()).sum())
    };

    let mut best_value = -1.0f64;
    let mut best_u = ComplexMatrix::identity(drz);
    for restart in 0..cfg.restarts.max(1) {
        let mut split = rng.split();
        let mut u = if restart == 0 {
            ComplexMatrix::identity(drz)
        } else {
            haar_unitary(drz, &mut split).matrix().clone()
        };
        let mut value = value_of(&u);
        let mut run_best = (value, u.clone());
        for _ in 0..cfg.iterations.max(1) {
            let t = out_vector(&u);
            let norm = libm::sqrt(t.iter().map(|x| x.norm_sqr()).sum::<f64>());
            let phi: Vec<C64> = if norm > 1e-300 {
                t.iter().map(|x| x / norm).collect()
            } else {
                let mut v = vec![ZERO; dim_z];
                v[0] = ONE;
                v
            };
            // Polar step: maximize |Tr(U M)| over unitaries, where
            // M[(r',z'),(r,z)] = sum_c psi0[c,r'] tau[z'] conj(psi1[c,r] phi[z]).
            let m = ComplexMatrix::from_fn(drz, drz, |row, col| {
                let (rp, zp) = (row / dim_z, row % dim_z);
                let (r, z) = (col / dim_z, col % dim_z);
                if zp != 0 {
                    return ZERO;
                }
                let mut cross = ZERO;
                for cc in 0..dim_c {
                    cross += b0[cc][rp] * b1[cc][r].conj();
                }
                cross * phi[z].conj()
            });
            let (us, _s, vs) = svd(&m);
            u = vs.mul(&us.conjugate_transpose());
            let new_value = value_of(&u);
            if new_value > run_best.0 {
                run_best = (new_value, u.clone());
            }
            if new_value - value < cfg.step_tolerance {
                break;
            }
            value = new_value;
        }
        if run_best.0 > best_value {
            best_value = run_best.0;
            best_u = run_best.1;
        }
    }

    let mut rz_dims = layout
        .select(c.reveal_subsystems())
        .map_err(CommitError::from)?
        .dims()
        .to_vec();
    rz_dims.push(dim_z);
    let rz_layout = RegisterLayout::new(rz_dims).map_err(CommitError::from)?;
    Ok((
        UnitaryOp::new_unchecked(rz_layout, best_u),
        best_value.min(1.0),
    ))
}

/// Built-in candidate schemes used by tests and the experiment runner.
pub mod candidates {
    use super::*;

    /// Perfectly binding: commits |b> in the clear on a one-qubit C.
    pub fn orthogonal() -> Commitment {
        let layout = RegisterLayout::qubits(2).unwrap();
        let q0 = UnitaryOp::identity(layout.clone());
        let q1 = UnitaryOp::new_unchecked(
            layout.clone(),
            crate::qmath::embed::embed(&layout, &pauli_x(), &[0]).unwrap(),
        );
        Commitment::new_trusted(q0, q1, vec![0], vec![1]).unwrap()
    }

    /// Partially hiding/binding: commits |0> or |+> on C.
    pub fn bb84() -> Commitment {
        let layout = RegisterLayout::qubits(2).unwrap();
        let q0 = UnitaryOp::identity(layout.clone());
        let q1 = UnitaryOp::new_unchecked(
            layout.clone(),
            crate::qmath::embed::embed(&layout, &hadamard(), &[0]).unwrap(),
        );
        Commitment::new_trusted(q0, q1, vec![0], vec![1]).unwrap()
    }

    /// Perfectly hiding and binding-broken: Q0 = Q1.
    pub fn constant() -> Commitment {
        let layout = RegisterLayout::qubits(2).unwrap();
        let q0 = UnitaryOp::identity(layout.clone());
        let q1 = UnitaryOp::identity(layout);
        Commitment::new_trusted(q0, q1, vec![0], vec![1]).unwrap()
    }

    /// Haar-random two-qubit commitment (one-qubit C, one-qubit R).
    pub fn random_two_qubit(rng: &mut SplitRng) -> Commitment {
        let layout = RegisterLayout::qubits(2).unwrap();
        let relabel =
            |u: UnitaryOp| UnitaryOp::new_unchecked(layout.clone(), u.matrix().clone());
        let q0 = relabel(haar_unitary(4, rng));
        let q1 = relabel(haar_unitary(4, rng));
        Commitment::new_trusted(q0, q1, vec![0], vec![1]).unwrap()
    }
}
