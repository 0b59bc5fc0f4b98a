//! Register layouts: ordered lists of subsystem dimensions with mixed-radix
//! index arithmetic.

use alloc::vec;
use alloc::vec::Vec;

use super::QmathError;

/// Hard cap on the dense Hilbert-space dimension (2^12).
pub const DIM_CAP: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    dims: Vec<usize>,
}

impl RegisterLayout {
    /// Subsystem dimensions in order; the total dimension must stay under the cap.
    pub fn new(dims: Vec<usize>) -> Result<Self, QmathError> {
        if dims.contains(&0) {
            return Err(QmathError::DegenerateInput);
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = total
                .checked_mul(d)
                .ok_or(QmathError::DimensionCap)?;
            if total > DIM_CAP {
                return Err(QmathError::DimensionCap);
            }
        }
        Ok(RegisterLayout { dims })
    }

    pub fn qubits(n: usize) -> Result<Self, QmathError> {
        Self::new(vec![2; n])
    }

    pub fn single(dim: usize) -> Result<Self, QmathError> {
        Self::new(vec![dim])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn concat(&self, other: &Self) -> Result<Self, QmathError> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(dims)
    }

    /// Dimension of the named subsystems.
    pub fn subset_dim(&self, subsystems: &[usize]) -> Result<usize, QmathError> {
        let mut d = 1usize;
        for &s in subsystems {
            if s >= self.dims.len() {
                return Err(QmathError::IndexOutOfRange);
            }
            d *= self.dims[s];
        }
        Ok(d)
    }

    /// Layout formed by the named subsystems, in the order given.
    pub fn select(&self, subsystems: &[usize]) -> Result<Self, QmathError> {
        let mut dims = Vec::with_capacity(subsystems.len());
        for &s in subsystems {
            if s >= self.dims.len() {
                return Err(QmathError::IndexOutOfRange);
            }
            dims.push(self.dims[s]);
        }
        Self::new(dims)
    }

    /// Subsystems not listed in `subsystems`, in ascending order.
    pub fn complement(&self, subsystems: &[usize]) -> Vec<usize> {
        (0..self.dims.len())
            .filter(|i| !subsystems.contains(i))
            .collect()
    }

    /// Row-major strides: index = sum_k digit_k * stride_k.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.dims.len();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn decompose(&self, mut index: usize, digits: &mut [usize]) {
        debug_assert_eq!(digits.len(), self.dims.len());
        for k in (0..self.dims.len()).rev() {
            digits[k] = index % self.dims[k];
            index /= self.dims[k];
        }
    }

    pub fn compose(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.dims.len());
        let mut index = 0usize;
        for (k, &d) in digits.iter().enumerate() {
            index = index * self.dims[k] + d;
        }
        index
    }
}

/// Precomputed map from a full-register index to the pair
/// (index over `subsystems`, index over the complement).
pub struct IndexSplit {
    pub sub_dim: usize,
    pub rest_dim: usize,
    /// For each full index: (sub part, rest part).
    pub parts: Vec<(usize, usize)>,
}

pub fn split_indices(layout: &RegisterLayout, subsystems: &[usize]) -> Result<IndexSplit, QmathError> {
    let sub_dim = layout.subset_dim(subsystems)?;
    let rest = layout.complement(subsystems);
    let rest_dim = layout.subset_dim(&rest)?;
    let n = layout.len();
    let dim = layout.dim();
    let mut digits = vec![0usize; n];
    let mut parts = Vec::with_capacity(dim);
    for idx in 0..dim {
        layout.decompose(idx, &mut digits);
        let mut s = 0usize;
        for &k in subsystems {
            s = s * layout.dims()[k] + digits[k];
        }
        let mut r = 0usize;
        for &k in &rest {
            r = r * layout.dims()[k] + digits[k];
        }
        parts.push((s, r));
    }
    Ok(IndexSplit {
        sub_dim,
        rest_dim,
        parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_decompose_roundtrip() {
        let l = RegisterLayout::new(vec![2, 3, 2]).unwrap();
        let mut digits = [0usize; 3];
        for idx in 0..l.dim() {
            l.decompose(idx, &mut digits);
            assert_eq!(l.compose(&digits), idx);
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(RegisterLayout::qubits(12).is_ok());
        assert!(matches!(
            RegisterLayout::qubits(13),
            Err(QmathError::DimensionCap)
        ));
    }

    #[test]
    fn split_indices_agree_with_manual_order() {
        let l = RegisterLayout::new(vec![2, 2]).unwrap();
        let split = split_indices(&l, &[1]).unwrap();
        // index = 2*a + b with subsystem order (a, b); sub = b, rest = a.
        assert_eq!(split.parts[3], (1, 1));
        assert_eq!(split.parts[2], (0, 1));
        assert_eq!(split.parts[1], (1, 0));
    }
}
