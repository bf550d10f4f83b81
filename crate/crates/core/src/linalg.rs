//! Small dense Hermitian linear-algebra helpers.
//!
//! The matrices in this crate are 2×2 (qubit states) and 4×4 (process
//! matrices), so a self-contained cyclic Jacobi eigensolver is both fast and
//! fully deterministic; it avoids pulling in an external LAPACK binding.

use nalgebra::DMatrix;

use crate::C64;

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are returned in ascending order with matching eigenvector
/// columns. The input is assumed Hermitian; only its lower triangle's
/// conjugate symmetry is exploited implicitly by the rotations.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "hermitian_eigen requires a square matrix");
    let mut a = m.clone();
    let mut v = DMatrix::<C64>::identity(n, n);

    // Cyclic Jacobi sweeps with complex Givens rotations.
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm_sqr() < 1e-34 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Phase that makes the pivot real, then a real Jacobi rotation.
                let phase = apq / C64::new(apq.norm(), 0.0);
                let g = apq.norm();
                let theta = 0.5 * (2.0 * g).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let cp = C64::new(c, 0.0);
                let sp = phase * C64::new(s, 0.0);
                // Columns p and q of A and V: A <- R† A R, V <- V R with
                // R = [[c, s·phase], [-s·conj(phase), c]] acting on (p, q).
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * cp - arq * sp.conj();
                    a[(r, q)] = arp * sp + arq * cp;
                }
                for col in 0..n {
                    let apc = a[(p, col)];
                    let aqc = a[(q, col)];
                    a[(p, col)] = apc * cp - aqc * sp;
                    a[(q, col)] = apc * sp.conj() + aqc * cp;
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * cp - vrq * sp.conj();
                    v[(r, q)] = vrp * sp + vrq * cp;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("eigenvalues are finite"));
    let values: Vec<f64> = pairs.iter().map(|&(w, _)| w).collect();
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new_col)] = v[(r, old_col)];
        }
    }
    (values, vectors)
}

/// Hermitian part of a matrix, (M + M†)/2.
pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Nearest positive-semidefinite matrix in Frobenius norm:
/// eigendecompose the Hermitian part and clip negative eigenvalues to zero.
pub fn psd_clip(m: &DMatrix<C64>) -> DMatrix<C64> {
    let h = hermitian_part(m);
    let (values, vectors) = hermitian_eigen(&h);
    let n = h.nrows();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (k, &w) in values.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let col = vectors.column(k);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += col[r] * col[c].conj() * C64::new(w, 0.0);
            }
        }
    }
    out
}

/// Nearest density matrix in Frobenius norm: Hermitize, then project the
/// eigenvalue vector onto the probability simplex.
pub fn project_to_density(m: &DMatrix<C64>) -> DMatrix<C64> {
    let h = hermitian_part(m);
    let (values, vectors) = hermitian_eigen(&h);
    let clipped = simplex_project(&values);
    let n = h.nrows();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (k, &w) in clipped.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let col = vectors.column(k);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += col[r] * col[c].conj() * C64::new(w, 0.0);
            }
        }
    }
    out
}

/// Euclidean projection of a real vector onto the probability simplex.
fn simplex_project(values: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (i, &w) in sorted.iter().enumerate() {
        cumulative += w;
        let t = (cumulative - 1.0) / (i as f64 + 1.0);
        if w - t > 0.0 {
            threshold = t;
        }
    }
    values.iter().map(|&w| (w - threshold).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigen_diagonal_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(5.0, 0.0)]);
        let (w, _) = hermitian_eigen(&m);
        assert_abs_diff_eq!(w[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn eigen_complex_hermitian() {
        // Pauli Y has eigenvalues ±1.
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let (w, v) = hermitian_eigen(&m);
        assert_abs_diff_eq!(w[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-12);
        // Reconstruct and compare.
        let mut rec = DMatrix::<C64>::zeros(2, 2);
        for k in 0..2 {
            let col = v.column(k);
            for r in 0..2 {
                for cidx in 0..2 {
                    rec[(r, cidx)] += col[r] * col[cidx].conj() * c(w[k], 0.0);
                }
            }
        }
        for r in 0..2 {
            for cidx in 0..2 {
                assert_abs_diff_eq!((rec[(r, cidx)] - m[(r, cidx)]).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn eigen_4x4_random_hermitian() {
        // A fixed non-trivial Hermitian 4×4.
        let mut m = DMatrix::<C64>::zeros(4, 4);
        let vals = [
            [c(1.0, 0.0), c(0.3, 0.2), c(-0.1, 0.5), c(0.0, -0.4)],
            [c(0.3, -0.2), c(2.0, 0.0), c(0.7, 0.0), c(0.2, 0.1)],
            [c(-0.1, -0.5), c(0.7, 0.0), c(-1.0, 0.0), c(0.0, 0.9)],
            [c(0.0, 0.4), c(0.2, -0.1), c(0.0, -0.9), c(0.5, 0.0)],
        ];
        for r in 0..4 {
            for cidx in 0..4 {
                m[(r, cidx)] = vals[r][cidx];
            }
        }
        let (w, v) = hermitian_eigen(&m);
        // Trace and Frobenius norm are preserved by a correct decomposition.
        let trace: f64 = w.iter().sum();
        assert_abs_diff_eq!(trace, 2.5, epsilon = 1e-10);
        let frob_eig: f64 = w.iter().map(|x| x * x).sum();
        let frob_m: f64 = m.iter().map(|x| x.norm_sqr()).sum();
        assert_abs_diff_eq!(frob_eig, frob_m, epsilon = 1e-9);
        // Columns are orthonormal.
        let g = v.adjoint() * &v;
        for r in 0..4 {
            for cidx in 0..4 {
                let expect = if r == cidx { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(g[(r, cidx)].re, expect, epsilon = 1e-10);
                assert_abs_diff_eq!(g[(r, cidx)].im, 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn simplex_projection_clips_and_renormalizes() {
        let p = simplex_project(&[0.8, 0.4, -0.2]);
        let sum: f64 = p.iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert_abs_diff_eq!(p[0], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(p[2], 0.0, epsilon = 1e-12);
    }
}
