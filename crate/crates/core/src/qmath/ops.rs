//! The quantum-information primitives everything downstream leans on:
//! partial trace, Uhlmann fidelity, Helstrom discrimination, the gentle
//! measurement post-state, channel application and seeded random instances.

use alloc::vec;
use alloc::vec::Vec;

use super::layout::{split_indices, RegisterLayout};
use super::linalg::{eigh, sqrt_psd, svd, trace_norm_hermitian};
use super::matrix::{C64, ComplexMatrix, ZERO};
use super::types::{DensityMatrix, KrausChannel, Povm, StateVector, UnitaryOp, TOL_ACCEPT};
use super::QmathError;
use crate::rng::SplitRng;

/// Kronecker product (the ⊗ of every construction here).
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Traces out every subsystem not in `keep`; the returned layout keeps the
/// surviving subsystems in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, QmathError> {
    if keep.is_empty() {
        return Err(QmathError::DegenerateInput);
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let layout = rho.layout();
    let split = split_indices(layout, &keep_sorted)?;
    let out_layout = layout.select(&keep_sorted)?;
    let d = split.sub_dim;
    let mut mat = ComplexMatrix::zeros(d, d);
    let dim = layout.dim();
    // rho[(s,r),(s',r')] contributes to out[s][s'] when r == r'.
    let mut by_rest: Vec<Vec<usize>> = vec![Vec::new(); split.rest_dim];
    for idx in 0..dim {
        let (_, r) = split.parts[idx];
        by_rest[r].push(idx);
    }
    for group in &by_rest {
        for &row in group {
            let (s, _) = split.parts[row];
            for &col in group {
                let (s2, _) = split.parts[col];
                mat.add_assign_at(s, s2, rho.matrix().get(row, col));
            }
        }
    }
    DensityMatrix::new(out_layout, mat)
}

/// Uhlmann fidelity, squared-overlap convention: F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2,
/// so F(|a>,|b>) = |<a|b>|^2 on pure states.
///
/// Evaluated as ||A† B||_1^2 with rho = A A†, sigma = B B† low-rank factors,
/// which keeps rank-deficient inputs accurate to near machine precision.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QmathError> {
    if rho.layout() != sigma.layout() {
        return Err(QmathError::DimensionMismatch);
    }
    let a = psd_factor(rho.matrix());
    let b = psd_factor(sigma.matrix());
    let cross = a.conjugate_transpose().mul(&b);
    let (_, sing, _) = svd(&cross);
    let root_sum: f64 = sing.iter().sum();
    Ok((root_sum * root_sum).min(1.0))
}

/// Factor A with m = A A†, keeping eigenvalues above a relative cutoff.
fn psd_factor(mat: &ComplexMatrix) -> ComplexMatrix {
    let (eig, v) = eigh(mat);
    let top = eig.last().copied().unwrap_or(0.0).max(0.0);
    let cut = top * 1e-14;
    let keep: Vec<usize> = (0..eig.len()).filter(|&k| eig[k] > cut).collect();
    let n = mat.rows();
    ComplexMatrix::from_fn(n, keep.len().max(1), |i, j| {
        if keep.is_empty() {
            ZERO
        } else {
            let k = keep[j];
            v.get(i, k) * libm::sqrt(eig[k])
        }
    })
}

/// Trace distance TD = ||rho - sigma||_1 / 2.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, QmathError> {
    if rho.layout() != sigma.layout() {
        return Err(QmathError::DimensionMismatch);
    }
    let diff = rho.matrix().sub(sigma.matrix());
    Ok((0.5 * trace_norm_hermitian(&diff)).clamp(0.0, 1.0))
}

/// Optimal two-outcome discrimination of rho vs sigma: the first element
/// projects onto the strictly positive eigenspace of (rho - sigma), and the
/// advantage Tr(Pi_0 (rho - sigma)) equals the trace distance. Equal states
/// get the zero projector.
pub fn helstrom_povm(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<(Povm, f64), QmathError> {
    if rho.layout() != sigma.layout() {
        return Err(QmathError::DimensionMismatch);
    }
    let diff = rho.matrix().sub(sigma.matrix());
    let (eig, v) = eigh(&diff);
    let d = diff.rows();
    let mut proj = ComplexMatrix::zeros(d, d);
    let mut advantage = 0.0;
    for k in 0..d {
        if eig[k] > 1e-12 {
            advantage += eig[k];
            for i in 0..d {
                let vik = v.get(i, k);
                for j in 0..d {
                    proj.add_assign_at(i, j, vik * v.get(j, k).conj());
                }
            }
        }
    }
    let proj = proj.symmetrize_hermitian();
    let complement = ComplexMatrix::identity(d).sub(&proj);
    let povm = Povm::new_unchecked(rho.layout().clone(), vec![proj, complement]);
    Ok((povm, advantage))
}

/// Unitary on the `act_on` subsystems maximizing |<psi0|(I ⊗ U)|psi1>|,
/// built from the SVD of the cross-Gram operator between the two states'
/// complement-conditioned blocks. The returned overlap squares to the
/// fidelity of the reductions onto the complement of `act_on`.
pub fn uhlmann_unitary(
    psi0: &StateVector,
    psi1: &StateVector,
    act_on: &[usize],
) -> Result<(UnitaryOp, f64), QmathError> {
    if psi0.layout() != psi1.layout() {
        return Err(QmathError::DimensionMismatch);
    }
    let layout = psi0.layout();
    if act_on.is_empty() || act_on.len() >= layout.len() {
        return Err(QmathError::DegenerateInput);
    }
    let split = split_indices(layout, act_on)?;
    let act_layout = layout.select(act_on)?;
    let da = split.sub_dim;
    let dc = split.rest_dim;
    // Blocks b[c][r] with r the act_on part.
    let mut b0 = vec![vec![ZERO; da]; dc];
    let mut b1 = vec![vec![ZERO; da]; dc];
    for idx in 0..layout.dim() {
        let (s, r) = split.parts[idx];
        b0[r][s] = psi0.amps()[idx];
        b1[r][s] = psi1.amps()[idx];
    }
    // <psi0|(I ⊗ U)|psi1> = Tr[U G] with G[r', r] = sum_c psi1[c,r'] conj(psi0[c,r]).
    let gram = ComplexMatrix::from_fn(da, da, |rp, r| {
        let mut acc = ZERO;
        for c in 0..dc {
            acc += b1[c][rp] * b0[c][r].conj();
        }
        acc
    });
    let (u_svd, sing, v_svd) = svd(&gram);
    let overlap: f64 = sing.iter().sum();
    // argmax_U |Tr(U G)| for G = V S W† is U = W V†.
    let u_opt = v_svd.mul(&u_svd.conjugate_transpose());
    let unitary = UnitaryOp::new_unchecked(act_layout, u_opt);
    Ok((unitary, overlap.min(1.0)))
}

/// Post-measurement state sqrt(E) rho sqrt(E) / Tr(E rho) and the
/// acceptance probability Tr(E rho).
pub fn gentle_post_state(
    rho: &DensityMatrix,
    effect: &ComplexMatrix,
) -> Result<(DensityMatrix, f64), QmathError> {
    if effect.rows() != rho.dim() || !effect.is_square() {
        return Err(QmathError::DimensionMismatch);
    }
    if effect.hermitian_defect() > super::types::TOL_OPERATOR {
        return Err(QmathError::NotHermitian);
    }
    let (spectrum, _) = eigh(effect);
    let lo = spectrum.first().copied().unwrap_or(0.0);
    let hi = spectrum.last().copied().unwrap_or(0.0);
    if lo < -super::types::TOL_PSD || hi > 1.0 + super::types::TOL_PSD {
        return Err(QmathError::NotPositive);
    }
    let accept = effect.mul(rho.matrix()).trace().re;
    if accept <= TOL_ACCEPT {
        return Err(QmathError::ZeroAcceptance);
    }
    let root = sqrt_psd(effect);
    let post = root
        .mul(rho.matrix())
        .mul(&root)
        .scale(C64::new(1.0 / accept, 0.0))
        .symmetrize_hermitian();
    Ok((
        DensityMatrix::new(rho.layout().clone(), post)?,
        accept,
    ))
}

/// sum_k K rho K†.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix, QmathError> {
    if rho.layout() != ch.in_layout() {
        return Err(QmathError::DimensionMismatch);
    }
    let dout = ch.out_layout().dim();
    let mut out = ComplexMatrix::zeros(dout, dout);
    for k in ch.kraus() {
        let term = k.mul(rho.matrix()).mul(&k.conjugate_transpose());
        out = out.add(&term);
    }
    DensityMatrix::new(ch.out_layout().clone(), out.symmetrize_hermitian())
}

/// Haar-random unitary via QR of a complex Gaussian matrix with the phase
/// convention fixed on the R diagonal.
pub fn haar_unitary(dim: usize, rng: &mut SplitRng) -> UnitaryOp {
    assert!(dim >= 1);
    let layout = RegisterLayout::single(dim).expect("dim under cap");
    if dim == 1 {
        let phase = 2.0 * core::f64::consts::PI * rng.next_f64();
        let m = ComplexMatrix::from_entries(
            1,
            1,
            vec![C64::new(libm::cos(phase), libm::sin(phase))],
        );
        return UnitaryOp::new_unchecked(layout, m);
    }
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.next_gaussian(), rng.next_gaussian())
    });
    // Modified Gram-Schmidt with re-orthogonalization.
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|j| (0..dim).map(|i| g.get(i, j)).collect())
        .collect();
    for j in 0..dim {
        for _pass in 0..2 {
            for k in 0..j {
                let overlap: C64 = cols[k]
                    .iter()
                    .zip(cols[j].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let prev = cols[k].clone();
                for (x, p) in cols[j].iter_mut().zip(prev.iter()) {
                    *x -= overlap * p;
                }
            }
        }
        // Diagonal phase fix: divide by the phase of <g_j, q_j> to make the
        // implicit R diagonal positive, which gives exact Haar measure.
        let norm: f64 = libm::sqrt(cols[j].iter().map(|c| c.norm_sqr()).sum());
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
        let r_jj: C64 = cols[j]
            .iter()
            .zip((0..dim).map(|i| g.get(i, j)))
            .map(|(q, gi)| q.conj() * gi)
            .sum();
        let phase = r_jj / r_jj.norm();
        for x in cols[j].iter_mut() {
            *x *= phase.conj();
        }
    }
    let m = ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i]);
    UnitaryOp::new_unchecked(layout, m)
}

/// Random rank-r density matrix: normalized G G† with G complex Gaussian of
/// shape dim x rank.
pub fn random_density(dim: usize, rank: usize, rng: &mut SplitRng) -> DensityMatrix {
    assert!(dim >= 1 && rank >= 1 && rank <= dim);
    let layout = RegisterLayout::single(dim).expect("dim under cap");
    let g = ComplexMatrix::from_fn(dim, rank, |_, _| {
        C64::new(rng.next_gaussian(), rng.next_gaussian())
    });
    let raw = g.mul(&g.conjugate_transpose());
    let tr = raw.trace().re;
    let mat = raw.scale(C64::new(1.0 / tr, 0.0)).symmetrize_hermitian();
    DensityMatrix::new_unchecked(layout, mat)
}

/// Random pure state on a layout.
pub fn random_pure_state(layout: &RegisterLayout, rng: &mut SplitRng) -> StateVector {
    let dim = layout.dim();
    let mut amps: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.next_gaussian(), rng.next_gaussian()))
        .collect();
    let norm: f64 = libm::sqrt(amps.iter().map(|c| c.norm_sqr()).sum());
    for a in amps.iter_mut() {
        *a /= norm;
    }
    StateVector::new(layout.clone(), amps).expect("dimensions agree")
}

/// Random effect operator with spectrum in [0, 1].
pub fn random_effect(dim: usize, rng: &mut SplitRng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.next_gaussian(), rng.next_gaussian())
    });
    let herm = g.add(&g.conjugate_transpose()).scale(C64::new(0.5, 0.0));
    let (eig, _) = eigh(&herm);
    let lo = eig.first().copied().unwrap_or(0.0);
    let hi = eig.last().copied().unwrap_or(1.0);
    let span = (hi - lo).max(1e-12);
    // Affine map of the spectrum into [0, 1].
    let shifted = herm
        .sub(&ComplexMatrix::identity(dim).scale(C64::new(lo, 0.0)))
        .scale(C64::new(1.0 / span, 0.0));
    shifted.symmetrize_hermitian()
}

/// Random effect with acceptance on `rho` at least `min_accept`, for
/// exercising the gentle measurement regime.
pub fn random_high_acceptance_effect(
    rho: &DensityMatrix,
    min_accept: f64,
    rng: &mut SplitRng,
) -> ComplexMatrix {
    let dim = rho.dim();
    let e = random_effect(dim, rng);
    // Blend toward the identity until Tr(E rho) clears the floor.
    let mut t = 0.0f64;
    loop {
        let blended = e
            .scale(C64::new(1.0 - t, 0.0))
            .add(&ComplexMatrix::identity(dim).scale(C64::new(t, 0.0)));
        let accept = blended.mul(rho.matrix()).trace().re;
        if accept >= min_accept || t >= 1.0 {
            return blended;
        }
        t = (t + 0.05).min(1.0);
    }
}
