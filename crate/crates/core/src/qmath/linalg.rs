//! Hermitian eigendecomposition (cyclic Jacobi), SVD and polar factors.
//!
//! Everything is written for the small dense operators this crate works
//! with (dimension a few hundred at most), so the cubic cost of Jacobi
//! sweeps is fine and the quadratic convergence gives close to machine
//! precision, which the 1e-9 tolerances downstream rely on.

use alloc::vec;
use alloc::vec::Vec;

use super::matrix::{C64, ComplexMatrix, ONE, ZERO};

/// Eigenvalues (ascending) and a unitary whose columns are the eigenvectors
/// of a Hermitian matrix.
pub fn eigh(mat: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    assert!(mat.is_square(), "eigh requires a square matrix");
    let n = mat.rows();
    let mut a = mat.symmetrize_hermitian();
    let mut v = ComplexMatrix::identity(n);
    if n <= 1 {
        let eig = if n == 1 { vec![a.get(0, 0).re] } else { vec![] };
        return (eig, v);
    }

    let scale = a.frobenius_norm().max(1.0);
    let tol = 1e-30 * scale * scale;

    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q).norm_sqr();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let m = apq.norm();
                if m < 1e-300 {
                    continue;
                }
                // Phase that makes the pivot real, then a real Givens rotation.
                let u = apq.conj() / m;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * m);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;

                // Column rotation J: J[p][p]=c, J[p][q]=s, J[q][p]=-s*u, J[q][q]=c*u.
                let (jc, js) = (C64::new(c, 0.0), C64::new(s, 0.0));
                for i in 0..n {
                    let aip = a.get(i, p);
                    let aiq = a.get(i, q);
                    a.set(i, p, aip * jc - aiq * js * u);
                    a.set(i, q, aip * js + aiq * jc * u);
                }
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, apj * jc - aqj * js * u.conj());
                    a.set(q, j, apj * js + aqj * jc * u.conj());
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, vip * jc - viq * js * u);
                    v.set(i, q, vip * js + viq * jc * u);
                }
                // Clean up round-off on the pivot pair.
                let fixed_pq = (a.get(p, q) + a.get(q, p).conj()) * 0.5;
                a.set(p, q, fixed_pq);
                a.set(q, p, fixed_pq.conj());
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigvals: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| eigvals[i].partial_cmp(&eigvals[j]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| eigvals[i]).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    (sorted, vecs)
}

/// Reconstructs V diag(f(eig)) V† for a Hermitian input.
pub fn hermitian_function(mat: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = mat.rows();
    let (eig, v) = eigh(mat);
    let mut out = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let fv = f(eig[k]);
        if fv == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = v.get(i, k) * fv;
            for j in 0..n {
                out.add_assign_at(i, j, vik * v.get(j, k).conj());
            }
        }
    }
    out
}

/// Square root of a PSD matrix; negative round-off eigenvalues are clipped
/// to zero, and eigenvalues below a relative cutoff are treated as zero so
/// their square roots do not inject sqrt(eps)-level noise.
pub fn sqrt_psd(mat: &ComplexMatrix) -> ComplexMatrix {
    let scale = spectral_bound(mat);
    let cut = scale * 1e-14;
    hermitian_function(mat, move |x| if x > cut { libm::sqrt(x) } else { 0.0 })
}

fn spectral_bound(mat: &ComplexMatrix) -> f64 {
    // Frobenius norm upper-bounds the spectral radius; enough for a cutoff.
    mat.frobenius_norm().max(1e-300)
}

/// Schatten 1-norm of a Hermitian matrix.
pub fn trace_norm_hermitian(mat: &ComplexMatrix) -> f64 {
    eigh(mat).0.iter().map(|x| libm::fabs(*x)).sum()
}

/// Largest eigenvalue magnitude of a Hermitian matrix.
pub fn spectral_norm_hermitian(mat: &ComplexMatrix) -> f64 {
    eigh(mat)
        .0
        .iter()
        .fold(0.0f64, |acc, x| acc.max(libm::fabs(*x)))
}

/// Thin SVD: m = u diag(s) v† with s descending; u has orthonormal columns
/// completed to a full basis when singular values vanish.
///
/// Uses one-sided Jacobi (column orthogonalization), which reaches the
/// singular values without squaring the matrix; tiny singular values come
/// out near machine precision instead of sqrt(eps).
pub fn svd(mat: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    if mat.rows() < mat.cols() {
        let (u, s, v) = svd(&mat.conjugate_transpose());
        return (v, s, u);
    }
    let rows = mat.rows();
    let cols = mat.cols();
    let mut a: Vec<Vec<C64>> = (0..cols)
        .map(|j| (0..rows).map(|i| mat.get(i, j)).collect())
        .collect();
    let mut v = ComplexMatrix::identity(cols);

    let dot = |x: &[C64], y: &[C64]| -> C64 { x.iter().zip(y).map(|(a, b)| a.conj() * b).sum() };

    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let app = dot(&a[p], &a[p]).re;
                let aqq = dot(&a[q], &a[q]).re;
                let apq = dot(&a[p], &a[q]);
                let m = apq.norm();
                if m * m <= 1e-30 * app * aqq || m < 1e-300 {
                    continue;
                }
                rotated = true;
                // Hermitian Jacobi rotation on the 2x2 Gram block.
                let u_phase = apq.conj() / m;
                let tau = (aqq - app) / (2.0 * m);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                let (jc, js) = (C64::new(c, 0.0), C64::new(s, 0.0));
                for i in 0..rows {
                    let xp = a[p][i];
                    let xq = a[q][i];
                    a[p][i] = xp * jc - xq * js * u_phase;
                    a[q][i] = xp * js + xq * jc * u_phase;
                }
                for i in 0..cols {
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, vp * jc - vq * js * u_phase);
                    v.set(i, q, vp * js + vq * jc * u_phase);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sing: Vec<f64> = a
        .iter()
        .map(|col| libm::sqrt(col.iter().map(|c| c.norm_sqr()).sum()))
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sing[j].partial_cmp(&sing[i]).unwrap());
    let v_sorted = ComplexMatrix::from_fn(cols, cols, |i, j| v.get(i, order[j]));
    let a_sorted: Vec<Vec<C64>> = order.iter().map(|&j| a[j].clone()).collect();
    sing = order.iter().map(|&j| sing[j]).collect();

    // Columns whose norm sits at round-off level carry no usable direction;
    // normalizing them would break the orthonormality of u, so they are
    // zeroed here and completed below.
    let smax = sing.first().copied().unwrap_or(0.0);
    let cut = smax * 1e-13;
    let mut u_cols: Vec<Vec<C64>> = Vec::with_capacity(cols);
    for (j, col) in a_sorted.iter().enumerate() {
        if sing[j] > cut && sing[j] > 0.0 {
            let inv = 1.0 / sing[j];
            u_cols.push(col.iter().map(|c| c * inv).collect());
        } else {
            sing[j] = 0.0;
            u_cols.push(vec![ZERO; rows]);
        }
    }
    // Complete the zero columns to an orthonormal set.
    for j in 0..u_cols.len() {
        if u_cols[j].iter().all(|c| c.norm_sqr() < 1e-200) {
            'basis: for b in 0..rows {
                let mut cand = vec![ZERO; rows];
                cand[b] = ONE;
                for other in u_cols.iter() {
                    let overlap: C64 = other
                        .iter()
                        .zip(cand.iter())
                        .map(|(o, c)| o.conj() * c)
                        .sum();
                    for (ci, oi) in cand.iter_mut().zip(other.iter()) {
                        *ci -= overlap * oi;
                    }
                }
                let norm: f64 = libm::sqrt(cand.iter().map(|c| c.norm_sqr()).sum());
                if norm > 1e-6 {
                    for c in cand.iter_mut() {
                        *c /= norm;
                    }
                    u_cols[j] = cand;
                    break 'basis;
                }
            }
        }
    }
    let u = ComplexMatrix::from_fn(rows, u_cols.len(), |i, j| u_cols[j][i]);
    (u, sing, v_sorted)
}

/// Sum of singular values.
pub fn nuclear_norm(mat: &ComplexMatrix) -> f64 {
    svd(mat).1.iter().sum()
}

/// Unitary polar factor of a square matrix (u v† from the SVD); for
/// rank-deficient inputs the completion keeps the factor unitary.
pub fn polar_unitary(mat: &ComplexMatrix) -> ComplexMatrix {
    assert!(mat.is_square());
    let (u, _s, v) = svd(mat);
    u.mul(&v.conjugate_transpose())
}

/// Isometry factor of a tall matrix (rows >= cols): closest matrix with
/// orthonormal columns.
pub fn polar_isometry(mat: &ComplexMatrix) -> ComplexMatrix {
    let (u, _s, v) = svd(mat);
    u.mul(&v.conjugate_transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = crate::rng::SplitRng::from_seed(seed);
        let raw = ComplexMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.next_gaussian(), rng.next_gaussian())
        });
        raw.add(&raw.conjugate_transpose()).scale(C64::new(0.5, 0.0))
    }

    #[test]
    fn eigh_reconstructs_input() {
        for n in [1usize, 2, 3, 5, 8] {
            let a = random_hermitian(n, 40 + n as u64);
            let (eig, v) = eigh(&a);
            let recon = {
                let d = ComplexMatrix::diag_real(&eig);
                v.mul(&d).mul(&v.conjugate_transpose())
            };
            assert!(recon.sub(&a).frobenius_norm() < 1e-11, "n = {n}");
            assert!(v.unitary_defect() < 1e-11);
        }
    }

    #[test]
    fn eigh_known_pauli_x() {
        let x = ComplexMatrix::from_entries(2, 2, vec![ZERO, ONE, ONE, ZERO]);
        let (eig, _) = eigh(&x);
        assert!((eig[0] + 1.0).abs() < 1e-14);
        assert!((eig[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let a = random_hermitian(4, 99);
        let psd = a.mul(&a.conjugate_transpose());
        let r = sqrt_psd(&psd);
        assert!(r.mul(&r).sub(&psd).frobenius_norm() < 1e-10);
    }

    #[test]
    fn svd_reconstructs_and_polar_is_unitary() {
        let mut rng = crate::rng::SplitRng::from_seed(5);
        let m = ComplexMatrix::from_fn(4, 4, |_, _| {
            C64::new(rng.next_gaussian(), rng.next_gaussian())
        });
        let (u, s, v) = svd(&m);
        let recon = u.mul(&ComplexMatrix::diag_real(&s)).mul(&v.conjugate_transpose());
        assert!(recon.sub(&m).frobenius_norm() < 1e-10);
        let p = polar_unitary(&m);
        assert!(p.unitary_defect() < 1e-10);
    }

    #[test]
    fn polar_of_rank_deficient_matrix_is_unitary() {
        let mut m = ComplexMatrix::zeros(3, 3);
        m.set(0, 0, ONE);
        let p = polar_unitary(&m);
        assert!(p.unitary_defect() < 1e-9);
    }

    #[test]
    fn nuclear_norm_of_unitary_is_dimension() {
        let u = ComplexMatrix::identity(5);
        assert!((nuclear_norm(&u) - 5.0).abs() < 1e-10);
    }
}
