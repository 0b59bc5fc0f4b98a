//! Placing small operators onto chosen subsystems of a larger register.
//!
//! The builders here fill result matrices entrywise from factor lookups so
//! that multi-register constructions (combiner unitaries, controlled
//! verifiers) never pay a full dense matrix product at the outer dimension.

use alloc::vec;
use alloc::vec::Vec;

use super::layout::RegisterLayout;
use super::matrix::{C64, ComplexMatrix, ONE, ZERO};
use super::QmathError;

/// Operator acting as `factors[k].0` on the subsystem positions
/// `factors[k].1` (listed in the factor's own wire order) and as identity on
/// every unlisted subsystem. Positions must be disjoint.
pub fn tensor_on_positions(
    layout: &RegisterLayout,
    factors: &[(&ComplexMatrix, &[usize])],
) -> Result<ComplexMatrix, QmathError> {
    let n = layout.len();
    let dim = layout.dim();
    let mut owner = vec![usize::MAX; n]; // factor index per subsystem
    let mut slot = vec![0usize; n]; // wire position inside the factor
    for (f, (mat, positions)) in factors.iter().enumerate() {
        let sub_layout = layout.select(positions)?;
        if mat.rows() != sub_layout.dim() || !mat.is_square() {
            return Err(QmathError::DimensionMismatch);
        }
        for (w, &p) in positions.iter().enumerate() {
            if owner[p] != usize::MAX {
                return Err(QmathError::DegenerateInput);
            }
            owner[p] = f;
            slot[p] = w;
        }
    }

    // Strides of each factor's own index space.
    let factor_strides: Vec<Vec<usize>> = factors
        .iter()
        .map(|(_, positions)| {
            let mut strides = vec![1usize; positions.len()];
            for k in (0..positions.len().saturating_sub(1)).rev() {
                strides[k] = strides[k + 1] * layout.dims()[positions[k + 1]];
            }
            strides
        })
        .collect();

    let mut row_digits = vec![0usize; n];
    let mut col_digits = vec![0usize; n];
    let mut out = ComplexMatrix::zeros(dim, dim);
    let nf = factors.len();
    let mut row_sub = vec![0usize; nf];
    let mut col_sub = vec![0usize; nf];
    for row in 0..dim {
        layout.decompose(row, &mut row_digits);
        for col in 0..dim {
            layout.decompose(col, &mut col_digits);
            // Identity on unowned subsystems.
            let mut keep = true;
            for p in 0..n {
                if owner[p] == usize::MAX && row_digits[p] != col_digits[p] {
                    keep = false;
                    break;
                }
            }
            if !keep {
                continue;
            }
            row_sub.iter_mut().for_each(|x| *x = 0);
            col_sub.iter_mut().for_each(|x| *x = 0);
            for p in 0..n {
                let f = owner[p];
                if f != usize::MAX {
                    let stride = factor_strides[f][slot[p]];
                    row_sub[f] += row_digits[p] * stride;
                    col_sub[f] += col_digits[p] * stride;
                }
            }
            let mut v = ONE;
            for f in 0..nf {
                v *= factors[f].0.get(row_sub[f], col_sub[f]);
                if v.norm_sqr() < 1e-300 {
                    break;
                }
            }
            if v.norm_sqr() >= 1e-300 {
                out.set(row, col, v);
            }
        }
    }
    Ok(out)
}

/// Dense embedding of a single operator.
pub fn embed(
    layout: &RegisterLayout,
    op: &ComplexMatrix,
    positions: &[usize],
) -> Result<ComplexMatrix, QmathError> {
    tensor_on_positions(layout, &[(op, positions)])
}

/// a · embed(w, positions) without forming the embedding; cost
/// dim^2 · dim(positions).
pub fn mul_embedded_right(
    layout: &RegisterLayout,
    a: &ComplexMatrix,
    w: &ComplexMatrix,
    positions: &[usize],
) -> Result<ComplexMatrix, QmathError> {
    let dim = layout.dim();
    if a.rows() != dim || a.cols() != dim {
        return Err(QmathError::DimensionMismatch);
    }
    let split = super::layout::split_indices(layout, positions)?;
    if w.rows() != split.sub_dim {
        return Err(QmathError::DimensionMismatch);
    }
    // full index of (sub = s, rest = r) pairs
    let mut recompose = vec![0usize; split.sub_dim * split.rest_dim];
    for (idx, &(s, r)) in split.parts.iter().enumerate() {
        recompose[s * split.rest_dim + r] = idx;
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for col in 0..dim {
            let (cs, cr) = split.parts[col];
            let mut acc = ZERO;
            for ks in 0..split.sub_dim {
                let wv = w.get(ks, cs);
                if wv.norm_sqr() < 1e-300 {
                    continue;
                }
                let k = recompose[ks * split.rest_dim + cr];
                acc += a.get(i, k) * wv;
            }
            out.set(i, col, acc);
        }
    }
    Ok(out)
}

/// embed(w, positions) · a without forming the embedding.
pub fn mul_embedded_left(
    layout: &RegisterLayout,
    w: &ComplexMatrix,
    a: &ComplexMatrix,
    positions: &[usize],
) -> Result<ComplexMatrix, QmathError> {
    let dim = layout.dim();
    if a.rows() != dim || a.cols() != dim {
        return Err(QmathError::DimensionMismatch);
    }
    let split = super::layout::split_indices(layout, positions)?;
    if w.rows() != split.sub_dim {
        return Err(QmathError::DimensionMismatch);
    }
    let mut recompose = vec![0usize; split.sub_dim * split.rest_dim];
    for (idx, &(s, r)) in split.parts.iter().enumerate() {
        recompose[s * split.rest_dim + r] = idx;
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    for row in 0..dim {
        let (rs, rr) = split.parts[row];
        for ks in 0..split.sub_dim {
            let wv = w.get(rs, ks);
            if wv.norm_sqr() < 1e-300 {
                continue;
            }
            let k = recompose[ks * split.rest_dim + rr];
            for j in 0..dim {
                out.add_assign_at(row, j, wv * a.get(k, j));
            }
        }
    }
    Ok(out)
}

/// Controlled operator sum_k |k><k|_{controls} ⊗ branch(k)_{targets},
/// identity elsewhere. `branch` returns the operator on the target
/// sub-layout for each computational-basis control value.
pub fn controlled_on(
    layout: &RegisterLayout,
    controls: &[usize],
    targets: &[usize],
    mut branch: impl FnMut(usize) -> ComplexMatrix,
) -> Result<ComplexMatrix, QmathError> {
    let ctrl_dim = layout.subset_dim(controls)?;
    let dim = layout.dim();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for k in 0..ctrl_dim {
        let proj = basis_projector(ctrl_dim, k);
        let br = branch(k);
        let term = tensor_on_positions(layout, &[(&proj, controls), (&br, targets)])?;
        out = out.add(&term);
    }
    Ok(out)
}

pub fn basis_projector(dim: usize, index: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(dim, dim);
    p.set(index, index, ONE);
    p
}

// Fixed gates.

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_entries(2, 2, vec![ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_entries(
        2,
        2,
        vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
    )
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_entries(2, 2, vec![ONE, ZERO, ZERO, C64::new(-1.0, 0.0)])
}

pub fn hadamard() -> ComplexMatrix {
    let h = 1.0 / libm::sqrt(2.0);
    ComplexMatrix::from_entries(
        2,
        2,
        vec![
            C64::new(h, 0.0),
            C64::new(h, 0.0),
            C64::new(h, 0.0),
            C64::new(-h, 0.0),
        ],
    )
}

pub fn t_gate() -> ComplexMatrix {
    let p = core::f64::consts::FRAC_PI_4;
    ComplexMatrix::from_entries(
        2,
        2,
        vec![ONE, ZERO, ZERO, C64::new(libm::cos(p), libm::sin(p))],
    )
}

/// CNOT on the sub-layout [control, target].
pub fn cnot() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    m.set(0, 0, ONE);
    m.set(1, 1, ONE);
    m.set(2, 3, ONE);
    m.set(3, 2, ONE);
    m
}

/// SWAP of two equal-dimension subsystems, as a matrix on [a, b].
pub fn swap(dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim * dim, dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            m.set(i * dim + j, j * dim + i, ONE);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_x_on_second_qubit() {
        let l = RegisterLayout::qubits(2).unwrap();
        let m = embed(&l, &pauli_x(), &[1]).unwrap();
        // |00> -> |01>
        assert_eq!(m.get(1, 0), ONE);
        assert_eq!(m.get(0, 1), ONE);
        assert_eq!(m.get(2, 3), ONE);
    }

    #[test]
    fn tensor_on_positions_matches_kron_when_ordered() {
        let l = RegisterLayout::qubits(2).unwrap();
        let x = pauli_x();
        let z = pauli_z();
        let a = tensor_on_positions(&l, &[(&x, &[0]), (&z, &[1])]).unwrap();
        assert_eq!(a, x.kron(&z));
    }

    #[test]
    fn tensor_on_positions_reordered_factors() {
        let l = RegisterLayout::qubits(2).unwrap();
        let x = pauli_x();
        let z = pauli_z();
        // Z on wire 0, X on wire 1.
        let a = tensor_on_positions(&l, &[(&x, &[1]), (&z, &[0])]).unwrap();
        assert_eq!(a, z.kron(&x));
    }

    #[test]
    fn xx_maps_00_to_11() {
        let l = RegisterLayout::qubits(2).unwrap();
        let xx = tensor_on_positions(&l, &[(&pauli_x(), &[0]), (&pauli_x(), &[1])]).unwrap();
        let v = xx.mul_vec(&[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(v[3], ONE);
    }

    #[test]
    fn mul_embedded_right_matches_dense() {
        let l = RegisterLayout::qubits(3).unwrap();
        let mut rng = crate::rng::SplitRng::from_seed(17);
        let a = ComplexMatrix::from_fn(8, 8, |_, _| {
            C64::new(rng.next_gaussian(), rng.next_gaussian())
        });
        let w = hadamard().kron(&pauli_x());
        let fast = mul_embedded_right(&l, &a, &w, &[2, 0]).unwrap();
        let dense = a.mul(&embed(&l, &w, &[2, 0]).unwrap());
        assert!(fast.sub(&dense).frobenius_norm() < 1e-12);
    }

    #[test]
    fn mul_embedded_left_matches_dense() {
        let l = RegisterLayout::qubits(3).unwrap();
        let mut rng = crate::rng::SplitRng::from_seed(18);
        let a = ComplexMatrix::from_fn(8, 8, |_, _| {
            C64::new(rng.next_gaussian(), rng.next_gaussian())
        });
        let w = hadamard().kron(&pauli_z());
        let fast = mul_embedded_left(&l, &w, &a, &[1, 2]).unwrap();
        let dense = embed(&l, &w, &[1, 2]).unwrap().mul(&a);
        assert!(fast.sub(&dense).frobenius_norm() < 1e-12);
    }

    #[test]
    fn controlled_x_is_cnot() {
        let l = RegisterLayout::qubits(2).unwrap();
        let m = controlled_on(&l, &[0], &[1], |k| {
            if k == 1 {
                pauli_x()
            } else {
                ComplexMatrix::identity(2)
            }
        })
        .unwrap();
        assert_eq!(m, cnot());
    }

    #[test]
    fn swap_exchanges_amplitudes() {
        let l = RegisterLayout::qubits(2).unwrap();
        let s = embed(&l, &swap(2), &[0, 1]).unwrap();
        let v = s.mul_vec(&[ZERO, ONE, ZERO, ZERO]); // |01> -> |10>
        assert_eq!(v[2], ONE);
    }
}
