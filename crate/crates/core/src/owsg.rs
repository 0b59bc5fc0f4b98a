//! Finite one-way state generator candidates in canonical form (verification
//! is a unitary followed by a first-qubit measurement), the gentle-measurement
//! transform that forces perfect correctness, the parallel combiner, and a
//! registry-backed universal wrapper with a step budget.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::qmath::embed::{basis_projector, controlled_on, pauli_x, swap, tensor_on_positions};
use crate::qmath::layout::{RegisterLayout, DIM_CAP};
use crate::qmath::matrix::{ComplexMatrix, ZERO};
use crate::qmath::types::{DensityMatrix, UnitaryOp};
use crate::qmath::QmathError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OwsgError {
    Qmath(QmathError),
    DimensionCap,
    InvalidScheme,
    EmptyRegistry,
}

impl From<QmathError> for OwsgError {
    fn from(e: QmathError) -> Self {
        match e {
            QmathError::DimensionCap => OwsgError::DimensionCap,
            other => OwsgError::Qmath(other),
        }
    }
}

impl fmt::Display for OwsgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OwsgError::Qmath(e) => write!(f, "{e}"),
            OwsgError::DimensionCap => f.write_str("combined scheme exceeds the dimension cap"),
            OwsgError::InvalidScheme => f.write_str("scheme tables are inconsistent"),
            OwsgError::EmptyRegistry => f.write_str("registry selection is empty"),
        }
    }
}

/// A finite OWSG candidate. Keys are indices into the tables; verification
/// applies the per-key unitary to state ⊗ |0...0> ancilla and accepts when
/// the first qubit measures 1.
#[derive(Debug, Clone)]
pub struct OwsgScheme {
    weights: Vec<f64>,
    states: Vec<DensityMatrix>,
    vrfy: Vec<UnitaryOp>,
    ancilla_qubits: usize,
}

impl OwsgScheme {
    pub fn new(
        weights: Vec<f64>,
        states: Vec<DensityMatrix>,
        vrfy: Vec<UnitaryOp>,
        ancilla_qubits: usize,
    ) -> Result<Self, OwsgError> {
        let k = weights.len();
        if k == 0 || states.len() != k || vrfy.len() != k {
            return Err(OwsgError::InvalidScheme);
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || libm::fabs(total - 1.0) > 1e-12 {
            return Err(OwsgError::InvalidScheme);
        }
        let state_layout = states[0].layout().clone();
        if state_layout.dims().first() != Some(&2) {
            // The acceptance convention measures the first qubit.
            return Err(OwsgError::InvalidScheme);
        }
        let mut dims = state_layout.dims().to_vec();
        dims.extend(core::iter::repeat_n(2, ancilla_qubits));
        let vrfy_layout = RegisterLayout::new(dims).map_err(OwsgError::from)?;
        for s in &states {
            if s.layout() != &state_layout {
                return Err(OwsgError::InvalidScheme);
            }
        }
        for u in &vrfy {
            if u.layout() != &vrfy_layout {
                return Err(OwsgError::InvalidScheme);
            }
        }
        Ok(OwsgScheme {
            weights,
            states,
            vrfy,
            ancilla_qubits,
        })
    }

    pub fn key_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn state(&self, key: usize) -> &DensityMatrix {
        &self.states[key]
    }

    pub fn vrfy_unitary(&self, key: usize) -> &UnitaryOp {
        &self.vrfy[key]
    }

    pub fn ancilla_qubits(&self) -> usize {
        self.ancilla_qubits
    }

    pub fn state_layout(&self) -> &RegisterLayout {
        self.states[0].layout()
    }

    /// Acceptance effect of key `key` compressed onto the state register:
    /// E = G† G with G the rows of U with first digit 1, restricted to
    /// columns whose ancilla digits are zero.
    pub fn accept_effect(&self, key: usize) -> ComplexMatrix {
        let u = self.vrfy[key].matrix();
        let layout = self.vrfy[key].layout();
        let dim = layout.dim();
        let state_dim = self.state_layout().dim();
        let anc_dim = dim / state_dim;
        let first_stride = dim / layout.dims()[0];
        let mut eff = ComplexMatrix::zeros(state_dim, state_dim);
        for row in 0..dim {
            if row / first_stride != 1 {
                continue; // first qubit must read 1
            }
            for i in 0..state_dim {
                let gi = u.get(row, i * anc_dim);
                if gi.norm_sqr() < 1e-300 {
                    continue;
                }
                for j in 0..state_dim {
                    let gj = u.get(row, j * anc_dim);
                    eff.add_assign_at(i, j, gi.conj() * gj);
                }
            }
        }
        eff
    }

    /// Probability that the key-`vrfy_key` verifier accepts `state`.
    pub fn accept_prob(&self, vrfy_key: usize, state: &DensityMatrix) -> f64 {
        let eff = self.accept_effect(vrfy_key);
        eff.mul(state.matrix()).trace().re.clamp(0.0, 1.0)
    }

    /// Exact expected acceptance of honest states: E_k[Pr(accept | k, psi_k)].
    pub fn correctness(&self) -> f64 {
        (0..self.key_count())
            .map(|k| self.weights[k] * self.accept_prob(k, &self.states[k]))
            .sum()
    }

    /// Best state-ignoring key guess: (argmax, max_{k'} E_k accept(k', psi_k)).
    pub fn blind_attack_value(&self) -> (usize, f64) {
        let mut best = (0usize, -1.0f64);
        for guess in 0..self.key_count() {
            let eff = self.accept_effect(guess);
            let value: f64 = (0..self.key_count())
                .map(|k| self.weights[k] * eff.mul(self.states[k].matrix()).trace().re)
                .sum();
            if value > best.1 {
                best = (guess, value);
            }
        }
        (best.0, best.1.clamp(0.0, 1.0))
    }

    /// Upper bracket: an adversary told the key wins with the scheme's own
    /// correctness.
    pub fn omniscient_attack_value(&self) -> f64 {
        self.correctness()
    }

    /// Gentle-measurement transform. The new state carries the verifier run
    /// forward and rewound, plus a trailing flag qubit recording the outcome;
    /// the new verifier accepts flag-0 states unconditionally and re-verifies
    /// flag-1 states. Output correctness is exactly 1.
    pub fn gentle_transform(&self) -> Result<FlaggedScheme, OwsgError> {
        let vrfy_layout = self.vrfy[0].layout().clone();
        let va_dim = vrfy_layout.dim();
        let state_dim = self.state_layout().dim();
        let anc_dim = va_dim / state_dim;
        let mut new_dims = vrfy_layout.dims().to_vec();
        new_dims.push(2); // flag
        let new_state_layout = RegisterLayout::new(new_dims).map_err(OwsgError::from)?;

        let first_stride = va_dim / vrfy_layout.dims()[0];
        let mut states = Vec::with_capacity(self.key_count());
        for k in 0..self.key_count() {
            let u = self.vrfy[k].matrix();
            // sigma = U (psi ⊗ |0><0|) U†, built without forming psi ⊗ anc.
            let psi = self.states[k].matrix();
            let mut sigma = ComplexMatrix::zeros(va_dim, va_dim);
            for r in 0..va_dim {
                for c in 0..va_dim {
                    let mut acc = ZERO;
                    for i in 0..state_dim {
                        let uri = u.get(r, i * anc_dim);
                        if uri.norm_sqr() < 1e-300 {
                            continue;
                        }
                        for j in 0..state_dim {
                            acc += uri * psi.get(i, j) * u.get(c, j * anc_dim).conj();
                        }
                    }
                    sigma.set(r, c, acc);
                }
            }
            // Branch projections and rewinds: psi* = sum_b U† P_b sigma P_b U ⊗ |b><b|.
            let udag = u.conjugate_transpose();
            let mut flagged = ComplexMatrix::zeros(2 * va_dim, 2 * va_dim);
            for flag in 0..2usize {
                let mut proj = sigma.clone();
                for r in 0..va_dim {
                    for c in 0..va_dim {
                        if r / first_stride != flag || c / first_stride != flag {
                            proj.set(r, c, ZERO);
                        }
                    }
                }
                let rewound = udag.mul(&proj).mul(u);
                for r in 0..va_dim {
                    for c in 0..va_dim {
                        let v = rewound.get(r, c);
                        if v.norm_sqr() >= 1e-300 {
                            flagged.add_assign_at(2 * r + flag, 2 * c + flag, v);
                        }
                    }
                }
            }
            states.push(DensityMatrix::new(
                new_state_layout.clone(),
                flagged.symmetrize_hermitian(),
            )
            .map_err(OwsgError::from)?);
        }

        // New verifier on (old state ⊗ old ancilla ⊗ flag) ⊗ fresh qubit a:
        //   flag = 1: run U and copy its first-qubit outcome into a;
        //   flag = 0: set a to 1.
        // A final swap brings a to the front for the measurement convention.
        let mut vdims = new_state_layout.dims().to_vec();
        vdims.push(2);
        let new_vrfy_layout = RegisterLayout::new(vdims).map_err(OwsgError::from)?;
        let flag_pos = vrfy_layout.len();
        let a_pos = flag_pos + 1;
        let sa_positions: Vec<usize> = (0..vrfy_layout.len()).collect();
        let mut vrfy = Vec::with_capacity(self.key_count());
        for k in 0..self.key_count() {
            let u = self.vrfy[k].matrix().clone();
            let run = controlled_on(&new_vrfy_layout, &[flag_pos], &sa_positions, |f| {
                if f == 1 {
                    u.clone()
                } else {
                    ComplexMatrix::identity(va_dim)
                }
            })
            .map_err(OwsgError::from)?;
            let write = controlled_on(&new_vrfy_layout, &[flag_pos], &[0, a_pos], |f| {
                if f == 1 {
                    crate::qmath::embed::cnot()
                } else {
                    ComplexMatrix::identity(2).kron(&pauli_x())
                }
            })
            .map_err(OwsgError::from)?;
            let bring_front = crate::qmath::embed::embed(&new_vrfy_layout, &swap(2), &[0, a_pos])
                .map_err(OwsgError::from)?;
            let mat = bring_front.mul(&write).mul(&run);
            vrfy.push(UnitaryOp::new_unchecked(new_vrfy_layout.clone(), mat));
        }

        let scheme = OwsgScheme::new(self.weights.clone(), states, vrfy, 1)?;
        Ok(FlaggedScheme { scheme })
    }
}

/// Output of the gentle-measurement transform; the wrapped scheme's states
/// carry a trailing flag qubit and verify with probability exactly 1.
#[derive(Debug, Clone)]
pub struct FlaggedScheme {
    scheme: OwsgScheme,
}

impl FlaggedScheme {
    pub fn scheme(&self) -> &OwsgScheme {
        &self.scheme
    }

    pub fn into_scheme(self) -> OwsgScheme {
        self.scheme
    }

    /// Flag qubit index within the transformed state layout.
    pub fn flag_subsystem(&self) -> usize {
        self.scheme.state_layout().len() - 1
    }
}

/// Parallel combiner: gentle-transforms every candidate, then tensors their
/// states over tuple keys and accepts only when all component verifiers do.
pub fn parallel_combine(components: &[OwsgScheme]) -> Result<OwsgScheme, OwsgError> {
    if components.is_empty() {
        return Err(OwsgError::EmptyRegistry);
    }
    let transformed: Vec<OwsgScheme> = components
        .iter()
        .map(|c| c.gentle_transform().map(FlaggedScheme::into_scheme))
        .collect::<Result<_, _>>()?;

    // Combined state layout and key space.
    let mut state_dims = Vec::new();
    let mut block_offsets = Vec::new();
    for t in &transformed {
        block_offsets.push(state_dims.len());
        state_dims.extend_from_slice(t.state_layout().dims());
    }
    let state_wires = state_dims.len();
    let state_layout = RegisterLayout::new(state_dims.clone()).map_err(OwsgError::from)?;

    let key_counts: Vec<usize> = transformed.iter().map(|t| t.key_count()).collect();
    let total_keys: usize = key_counts.iter().product();
    let key_split = |mut key: usize| -> Vec<usize> {
        let mut parts = vec![0usize; key_counts.len()];
        for i in (0..key_counts.len()).rev() {
            parts[i] = key % key_counts[i];
            key /= key_counts[i];
        }
        parts
    };

    let mut weights = Vec::with_capacity(total_keys);
    let mut states = Vec::with_capacity(total_keys);
    for key in 0..total_keys {
        let parts = key_split(key);
        let mut w = 1.0;
        let mut state: Option<DensityMatrix> = None;
        for (i, t) in transformed.iter().enumerate() {
            w *= t.weights()[parts[i]];
            let s = t.state(parts[i]).clone();
            state = Some(match state {
                None => s,
                Some(acc) => acc.tensor(&s).map_err(OwsgError::from)?,
            });
        }
        weights.push(w);
        states.push(
            state
                .expect("at least one component")
                .with_layout(state_layout.clone())
                .map_err(OwsgError::from)?,
        );
    }

    // Verifier layout: states ++ per-component fresh ancilla ++ AND target.
    let n = transformed.len();
    let mut vdims = state_dims;
    vdims.extend(core::iter::repeat_n(2, n + 1));
    let vrfy_layout = RegisterLayout::new(vdims).map_err(OwsgError::from)?;
    if vrfy_layout.dim() > DIM_CAP {
        return Err(OwsgError::DimensionCap);
    }
    let and_pos = state_wires + n;
    let first_positions: Vec<usize> = block_offsets.clone();

    let mut vrfy = Vec::with_capacity(total_keys);
    for key in 0..total_keys {
        let parts = key_split(key);
        // All component verifiers act on disjoint wires.
        let mats: Vec<ComplexMatrix> = (0..n)
            .map(|i| transformed[i].vrfy_unitary(parts[i]).matrix().clone())
            .collect();
        let positions: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut p: Vec<usize> =
                    (block_offsets[i]..block_offsets[i] + transformed[i].state_layout().len())
                        .collect();
                p.push(state_wires + i); // its fresh ancilla
                p
            })
            .collect();
        let factors: Vec<(&ComplexMatrix, &[usize])> = (0..n)
            .map(|i| (&mats[i], positions[i].as_slice()))
            .collect();
        let run_all = tensor_on_positions(&vrfy_layout, &factors).map_err(OwsgError::from)?;
        // AND of the component accept bits into the target wire.
        let and_gate = controlled_on(&vrfy_layout, &first_positions, &[and_pos], |bits| {
            if bits == (1 << n) - 1 {
                pauli_x()
            } else {
                ComplexMatrix::identity(2)
            }
        })
        .map_err(OwsgError::from)?;
        let bring_front = crate::qmath::embed::embed(&vrfy_layout, &swap(2), &[0, and_pos])
            .map_err(OwsgError::from)?;
        let mat = bring_front.mul(&and_gate).mul(&run_all);
        vrfy.push(UnitaryOp::new_unchecked(vrfy_layout.clone(), mat));
    }

    OwsgScheme::new(weights, states, vrfy, n + 1)
}

/// A numbered generator of OWSG candidates with a declared running cost,
/// standing in for an enumeration of candidate machines.
pub struct RegistryEntry {
    pub index: usize,
    pub declared_step_cost: u64,
    pub generator: Box<dyn Fn(usize) -> OwsgScheme>,
}

pub struct CandidateRegistry {
    entries: Vec<RegistryEntry>,
}

impl CandidateRegistry {
    pub fn new(entries: Vec<RegistryEntry>) -> Result<Self, OwsgError> {
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|p| p.index == e.index) {
                return Err(OwsgError::InvalidScheme);
            }
        }
        Ok(CandidateRegistry { entries })
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }
}

/// Accept-everything stub standing in for candidates that blow the step
/// budget: trivial |1> state, verifier accepts any input.
pub fn stub_scheme() -> OwsgScheme {
    let state_layout = RegisterLayout::qubits(1).unwrap();
    let state = DensityMatrix::new(state_layout, basis_projector(2, 1)).unwrap();
    let vrfy_layout = RegisterLayout::qubits(2).unwrap();
    // Set the fresh ancilla to 1, then bring it to the front.
    let set = crate::qmath::embed::embed(&vrfy_layout, &pauli_x(), &[1]).unwrap();
    let front = crate::qmath::embed::embed(&vrfy_layout, &swap(2), &[0, 1]).unwrap();
    let u = UnitaryOp::new_unchecked(vrfy_layout, front.mul(&set));
    OwsgScheme::new(vec![1.0], vec![state], vec![u], 1).unwrap()
}

/// Universal wrapper over a candidate registry: entries numbered above `lam`
/// are ignored, entries whose declared cost exceeds lam^3 are replaced by the
/// accept-everything stub, and the survivors are parallel-combined.
pub fn universal_from_registry(
    reg: &CandidateRegistry,
    lam: usize,
) -> Result<OwsgScheme, OwsgError> {
    let budget = (lam as u64)
        .saturating_mul(lam as u64)
        .saturating_mul(lam as u64);
    let mut order: Vec<&RegistryEntry> = reg.entries.iter().filter(|e| e.index <= lam).collect();
    order.sort_by_key(|e| e.index);
    let mut selected = Vec::new();
    for entry in order {
        if entry.declared_step_cost > budget {
            selected.push(stub_scheme());
        } else {
            selected.push((entry.generator)(lam));
        }
    }
    if selected.is_empty() {
        return Err(OwsgError::EmptyRegistry);
    }
    parallel_combine(&selected)
}

/// Built-in candidates for tests and experiments.
pub mod candidates {
    use super::*;
    use crate::qmath::ops::{haar_unitary, random_pure_state};
    use crate::rng::SplitRng;

    /// psi_k = |k> on one qubit; verifying with key k' accepts exactly the
    /// state |k'>.
    pub fn basis_keys(weights: Vec<f64>) -> OwsgScheme {
        assert_eq!(weights.len(), 2);
        let l = RegisterLayout::qubits(1).unwrap();
        let states = vec![
            DensityMatrix::new(l.clone(), basis_projector(2, 0)).unwrap(),
            DensityMatrix::new(l.clone(), basis_projector(2, 1)).unwrap(),
        ];
        let vrfy = vec![
            UnitaryOp::new_unchecked(l.clone(), pauli_x()),
            UnitaryOp::identity(l),
        ];
        OwsgScheme::new(weights, states, vrfy, 0).unwrap()
    }

    /// Honest scheme: state |1>, identity verifier, accepts with probability 1.
    pub fn perfectly_correct() -> OwsgScheme {
        let l = RegisterLayout::qubits(1).unwrap();
        let state = DensityMatrix::new(l.clone(), basis_projector(2, 1)).unwrap();
        let vrfy = UnitaryOp::identity(l);
        OwsgScheme::new(vec![1.0], vec![state], vec![vrfy], 0).unwrap()
    }

    /// Broken scheme: state |0>, identity verifier, never accepts.
    pub fn always_reject() -> OwsgScheme {
        let l = RegisterLayout::qubits(1).unwrap();
        let state = DensityMatrix::new(l.clone(), basis_projector(2, 0)).unwrap();
        let vrfy = UnitaryOp::identity(l);
        OwsgScheme::new(vec![1.0], vec![state], vec![vrfy], 0).unwrap()
    }

    /// State |+> with an accept-on-1 identity verifier: correctness 1/2.
    pub fn half_correct() -> OwsgScheme {
        let l = RegisterLayout::qubits(1).unwrap();
        let h = crate::qmath::embed::hadamard();
        let plus = h.mul(&basis_projector(2, 0)).mul(&h);
        let state = DensityMatrix::new(l.clone(), plus).unwrap();
        let vrfy = UnitaryOp::identity(l);
        OwsgScheme::new(vec![1.0], vec![state], vec![vrfy], 0).unwrap()
    }

    /// Random one-qubit scheme with a small keyspace and an arbitrary (often
    /// pathological) Haar verifier, optionally with one ancilla qubit.
    pub fn random_scheme(rng: &mut SplitRng) -> OwsgScheme {
        let keys = 1 + rng.next_below(4);
        let ancilla = rng.next_below(2);
        let state_layout = RegisterLayout::qubits(1).unwrap();
        let vrfy_layout = RegisterLayout::qubits(1 + ancilla).unwrap();
        let mut raw: Vec<f64> = (0..keys).map(|_| rng.next_f64() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        for w in raw.iter_mut() {
            *w /= total;
        }
        // Pin the residue onto the last weight so the sum is exactly 1.
        let partial: f64 = raw[..keys - 1].iter().sum();
        raw[keys - 1] = 1.0 - partial;
        let states = (0..keys)
            .map(|_| random_pure_state(&state_layout, rng).to_density())
            .collect();
        let vrfy = (0..keys)
            .map(|_| {
                let u = haar_unitary(vrfy_layout.dim(), rng);
                UnitaryOp::new_unchecked(vrfy_layout.clone(), u.matrix().clone())
            })
            .collect();
        OwsgScheme::new(raw, states, vrfy, ancilla).unwrap()
    }
}
