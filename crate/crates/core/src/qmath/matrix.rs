//! Dense complex matrices in row-major order.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;

pub type C64 = Complex<f64>;

pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const ONE: C64 = Complex::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = ONE;
        }
        m
    }

    /// Builds from row-major entries; length must equal rows * cols.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<C64>) -> Self {
        assert_eq!(
            entries.len(),
            rows * cols,
            "entry count must match dimensions"
        );
        ComplexMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ComplexMatrix {
            rows,
            cols,
            entries,
        }
    }

    /// Diagonal matrix from real values.
    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * n + i] = C64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_assign_at(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.cols + j] += v;
    }

    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn conjugate_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a * s).collect(),
        }
    }

    /// Matrix product with a sparsity skip on near-zero left entries.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.entries[i * self.cols + k];
                if aik.norm_sqr() < 1e-300 {
                    continue;
                }
                let row_k = k * other.cols;
                let row_i = i * other.cols;
                for j in 0..other.cols {
                    out.entries[row_i + j] += aik * other.entries[row_k + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = ZERO;
            let row = i * self.cols;
            for k in 0..self.cols {
                acc += self.entries[row + k] * v[k];
            }
            out[i] = acc;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.entries[i * self.cols + i]).sum()
    }

    /// Kronecker product; (a ⊗ b)[(i,k),(j,l)] = a[i,j] b[k,l].
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.norm_sqr() < 1e-300 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.entries[(i * other.rows + k) * cols + (j * other.cols + l)] =
                            a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.entries.iter().map(|c| c.norm_sqr()).sum())
    }

    /// Frobenius distance to the identity of U†U; zero iff the matrix is an isometry.
    pub fn unitary_defect(&self) -> f64 {
        let gram = self.conjugate_transpose().mul(self);
        gram.sub(&Self::identity(self.cols)).frobenius_norm()
    }

    pub fn hermitian_defect(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self.get(i, j) - self.get(j, i).conj();
                acc += d.norm_sqr();
            }
        }
        libm::sqrt(acc)
    }

    /// Averages the matrix with its own conjugate transpose.
    pub fn symmetrize_hermitian(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_basis_projectors() {
        // |0><0| ⊗ |1><1| has its single 1 at row/col index 1 (ordering |00>,|01>,|10>,|11>).
        let mut p0 = ComplexMatrix::zeros(2, 2);
        p0.set(0, 0, ONE);
        let mut p1 = ComplexMatrix::zeros(2, 2);
        p1.set(1, 1, ONE);
        let k = p0.kron(&p1);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == 1 && j == 1 { ONE } else { ZERO };
                assert_eq!(k.get(i, j), expect);
            }
        }
    }

    #[test]
    fn mul_against_hand_example() {
        let a = ComplexMatrix::from_entries(
            2,
            2,
            vec![
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(3.0, 0.0),
                C64::new(4.0, 0.0),
            ],
        );
        let b = a.mul(&a);
        assert_eq!(b.get(0, 0), C64::new(7.0, 0.0));
        assert_eq!(b.get(1, 1), C64::new(22.0, 0.0));
    }

    #[test]
    fn dagger_squares_to_original() {
        let a = ComplexMatrix::from_entries(
            2,
            2,
            vec![
                C64::new(1.0, 2.0),
                C64::new(0.5, -1.0),
                C64::new(0.0, 3.0),
                C64::new(-1.0, 0.0),
            ],
        );
        assert_eq!(a.conjugate_transpose().conjugate_transpose(), a);
    }
}
