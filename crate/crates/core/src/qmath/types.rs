//! Typed operators: states, unitaries, POVMs and channels, each carrying a
//! register layout and checked against its defining tolerance.

use alloc::vec;
use alloc::vec::Vec;

use super::layout::RegisterLayout;
use super::linalg::eigh;
use super::matrix::{C64, ComplexMatrix, ONE, ZERO};
use super::QmathError;

/// Frobenius-level tolerance used for Hermiticity, unitarity, POVM
/// completeness and channel trace preservation (upper-bounds the operator
/// norm of the deviation).
pub const TOL_OPERATOR: f64 = 1e-9;
pub const TOL_PSD: f64 = 1e-9;
pub const TOL_TRACE: f64 = 1e-9;
pub const TOL_ACCEPT: f64 = 1e-12;

/// A pure state: unit vector with a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(layout: RegisterLayout, amps: Vec<C64>) -> Result<Self, QmathError> {
        if amps.len() != layout.dim() {
            return Err(QmathError::DimensionMismatch);
        }
        Ok(StateVector { layout, amps })
    }

    /// Computational basis state |index>.
    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self, QmathError> {
        if index >= layout.dim() {
            return Err(QmathError::IndexOutOfRange);
        }
        let mut amps = vec![ZERO; layout.dim()];
        amps[index] = ONE;
        Ok(StateVector { layout, amps })
    }

    pub fn all_zero(layout: RegisterLayout) -> Self {
        Self::basis(layout, 0).expect("layout dimension is at least 1")
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amps.iter().map(|c| c.norm_sqr()).sum())
    }

    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.amps.len(), other.amps.len());
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &Self) -> Result<Self, QmathError> {
        let layout = self.layout.concat(&other.layout)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { layout, amps })
    }

    /// |psi><psi| as a density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        let d = self.amps.len();
        let mat = ComplexMatrix::from_fn(d, d, |i, j| self.amps[i] * self.amps[j].conj());
        DensityMatrix {
            layout: self.layout.clone(),
            mat,
        }
    }

    /// Reduced density matrix on `keep` (original order) without building
    /// the full projector.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix, QmathError> {
        if keep.is_empty() {
            return Err(QmathError::DegenerateInput);
        }
        let split = super::layout::split_indices(&self.layout, keep)?;
        let kept_sorted = sorted(keep);
        let out_layout = self.layout.select(&kept_sorted)?;
        // Accumulate psi[s,r] psi*[s',r] over the traced part.
        let mut table = vec![vec![ZERO; split.rest_dim]; split.sub_dim];
        // keep may be in arbitrary order; reduced state must keep original order.
        let split_sorted = super::layout::split_indices(&self.layout, &kept_sorted)?;
        for (idx, amp) in self.amps.iter().enumerate() {
            let (s, r) = split_sorted.parts[idx];
            table[s][r] = *amp;
        }
        let d = split.sub_dim;
        let mut mat = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                for r in 0..split_sorted.rest_dim {
                    acc += table[i][r] * table[j][r].conj();
                }
                mat.set(i, j, acc);
            }
        }
        Ok(DensityMatrix {
            layout: out_layout,
            mat,
        })
    }

    /// Reorders the subsystems; `new_order[k]` names the old subsystem that
    /// becomes position k.
    pub fn permute(&self, new_order: &[usize]) -> Result<Self, QmathError> {
        if new_order.len() != self.layout.len() {
            return Err(QmathError::DimensionMismatch);
        }
        let new_layout = self.layout.select(new_order)?;
        let n = self.layout.len();
        let mut digits = vec![0usize; n];
        let mut new_digits = vec![0usize; n];
        let mut amps = vec![ZERO; self.amps.len()];
        for (idx, amp) in self.amps.iter().enumerate() {
            self.layout.decompose(idx, &mut digits);
            for (k, &old) in new_order.iter().enumerate() {
                new_digits[k] = digits[old];
            }
            amps[new_layout.compose(&new_digits)] = *amp;
        }
        Ok(StateVector {
            layout: new_layout,
            amps,
        })
    }
}

fn sorted(xs: &[usize]) -> Vec<usize> {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v
}

/// Mixed state: Hermitian, PSD, unit trace within tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: RegisterLayout,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Checks shape, finiteness, Hermiticity and trace; the PSD check runs
    /// in `validate` since it needs an eigendecomposition.
    pub fn new(layout: RegisterLayout, mat: ComplexMatrix) -> Result<Self, QmathError> {
        if !mat.is_square() || mat.rows() != layout.dim() {
            return Err(QmathError::DimensionMismatch);
        }
        if !mat.all_finite() {
            return Err(QmathError::NotFinite);
        }
        if mat.hermitian_defect() > TOL_OPERATOR {
            return Err(QmathError::NotHermitian);
        }
        let tr = mat.trace();
        if libm::fabs(tr.re - 1.0) > TOL_TRACE || libm::fabs(tr.im) > TOL_TRACE {
            return Err(QmathError::NotNormalized);
        }
        Ok(DensityMatrix { layout, mat })
    }

    /// For operators known valid by construction.
    pub(crate) fn new_unchecked(layout: RegisterLayout, mat: ComplexMatrix) -> Self {
        DensityMatrix { layout, mat }
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        let mat = ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
        DensityMatrix { layout, mat }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    /// Full invariant check including positive semidefiniteness.
    pub fn validate(&self) -> Result<(), QmathError> {
        if self.mat.hermitian_defect() > TOL_OPERATOR {
            return Err(QmathError::NotHermitian);
        }
        let tr = self.mat.trace();
        if libm::fabs(tr.re - 1.0) > TOL_TRACE || libm::fabs(tr.im) > TOL_TRACE {
            return Err(QmathError::NotNormalized);
        }
        let (eig, _) = eigh(&self.mat);
        if eig.first().copied().unwrap_or(0.0) < -TOL_PSD {
            return Err(QmathError::NotPositive);
        }
        Ok(())
    }

    pub fn tensor(&self, other: &Self) -> Result<Self, QmathError> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(DensityMatrix {
            layout,
            mat: self.mat.kron(&other.mat),
        })
    }

    /// Relabels the register structure without touching entries; the new
    /// layout must have the same total dimension.
    pub fn with_layout(&self, layout: RegisterLayout) -> Result<Self, QmathError> {
        if layout.dim() != self.dim() {
            return Err(QmathError::DimensionMismatch);
        }
        Ok(DensityMatrix {
            layout,
            mat: self.mat.clone(),
        })
    }
}

/// Unitary operator over a register layout.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    layout: RegisterLayout,
    mat: ComplexMatrix,
}

impl UnitaryOp {
    pub fn new(layout: RegisterLayout, mat: ComplexMatrix) -> Result<Self, QmathError> {
        if !mat.is_square() || mat.rows() != layout.dim() {
            return Err(QmathError::DimensionMismatch);
        }
        if !mat.all_finite() {
            return Err(QmathError::NotFinite);
        }
        if mat.unitary_defect() > TOL_OPERATOR {
            return Err(QmathError::NotUnitary);
        }
        Ok(UnitaryOp { layout, mat })
    }

    /// For products and tensor powers of unitaries, which stay unitary; the
    /// quadratic-cost defect check is skipped.
    pub(crate) fn new_unchecked(layout: RegisterLayout, mat: ComplexMatrix) -> Self {
        UnitaryOp { layout, mat }
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let mat = ComplexMatrix::identity(layout.dim());
        UnitaryOp { layout, mat }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn validate(&self) -> Result<(), QmathError> {
        if self.mat.unitary_defect() > TOL_OPERATOR {
            return Err(QmathError::NotUnitary);
        }
        Ok(())
    }

    pub fn apply_state(&self, state: &StateVector) -> Result<StateVector, QmathError> {
        if state.layout() != &self.layout {
            return Err(QmathError::DimensionMismatch);
        }
        StateVector::new(self.layout.clone(), self.mat.mul_vec(state.amps()))
    }

    /// U rho U†.
    pub fn conjugate_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix, QmathError> {
        if rho.layout() != &self.layout {
            return Err(QmathError::DimensionMismatch);
        }
        let mat = self.mat.mul(rho.matrix()).mul(&self.mat.conjugate_transpose());
        Ok(DensityMatrix::new_unchecked(self.layout.clone(), mat))
    }

    pub fn dagger(&self) -> UnitaryOp {
        UnitaryOp {
            layout: self.layout.clone(),
            mat: self.mat.conjugate_transpose(),
        }
    }
}

/// Finite POVM: Hermitian PSD elements summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    layout: RegisterLayout,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(layout: RegisterLayout, elements: Vec<ComplexMatrix>) -> Result<Self, QmathError> {
        let d = layout.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &elements {
            if !e.is_square() || e.rows() != d {
                return Err(QmathError::DimensionMismatch);
            }
            if e.hermitian_defect() > TOL_OPERATOR {
                return Err(QmathError::NotHermitian);
            }
            let (eig, _) = eigh(e);
            if eig.first().copied().unwrap_or(0.0) < -TOL_PSD {
                return Err(QmathError::NotPositive);
            }
            sum = sum.add(e);
        }
        if sum.sub(&ComplexMatrix::identity(d)).frobenius_norm() > TOL_OPERATOR {
            return Err(QmathError::NotComplete);
        }
        Ok(Povm { layout, elements })
    }

    pub(crate) fn new_unchecked(layout: RegisterLayout, elements: Vec<ComplexMatrix>) -> Self {
        Povm { layout, elements }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn outcome_probability(&self, outcome: usize, rho: &DensityMatrix) -> f64 {
        self.elements[outcome].mul(rho.matrix()).trace().re
    }
}

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    in_layout: RegisterLayout,
    out_layout: RegisterLayout,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(
        in_layout: RegisterLayout,
        out_layout: RegisterLayout,
        kraus: Vec<ComplexMatrix>,
    ) -> Result<Self, QmathError> {
        let din = in_layout.dim();
        let dout = out_layout.dim();
        let mut sum = ComplexMatrix::zeros(din, din);
        for k in &kraus {
            if k.rows() != dout || k.cols() != din {
                return Err(QmathError::DimensionMismatch);
            }
            sum = sum.add(&k.conjugate_transpose().mul(k));
        }
        if sum.sub(&ComplexMatrix::identity(din)).frobenius_norm() > TOL_OPERATOR {
            return Err(QmathError::NotTracePreserving);
        }
        Ok(KrausChannel {
            in_layout,
            out_layout,
            kraus,
        })
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let k = ComplexMatrix::identity(layout.dim());
        KrausChannel {
            in_layout: layout.clone(),
            out_layout: layout,
            kraus: vec![k],
        }
    }

    pub fn in_layout(&self) -> &RegisterLayout {
        &self.in_layout
    }

    pub fn out_layout(&self) -> &RegisterLayout {
        &self.out_layout
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }
}
