//! Householder QR for square complex matrices.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// |R_kk| below this fraction of ||A||_F marks the matrix rank-deficient.
const RANK_TOL: f64 = 1e-12;

/// QR factorization `A = Q R` with unitary `Q` and upper-triangular `R`,
/// by Householder reflections without pivoting.
pub fn qr_unitary(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);

    for k in 0..n {
        let len = n - k;
        let mut norm2 = 0.0;
        for i in 0..len {
            norm2 += r[(k + i, k)].norm_sqr();
        }
        if norm2 == 0.0 {
            continue; // zero column; caught by the rank check below
        }
        let norm = norm2.sqrt();
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (0..len).map(|i| r[(k + i, k)]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / vv;

        // R[k.., j] -= beta v (v^dag R[k.., j])
        for j in k..n {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..len {
                s += v[i].conj() * r[(k + i, j)];
            }
            let s = s * beta;
            for i in 0..len {
                r[(k + i, j)] -= s * v[i];
            }
        }
        // Q[:, k..] <- Q (I - beta v v^dag)
        for row in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..len {
                s += q[(row, k + j)] * v[j];
            }
            let s = s * beta;
            for j in 0..len {
                q[(row, k + j)] -= s * v[j].conj();
            }
        }
        r[(k, k)] = alpha;
        for i in 1..len {
            r[(k + i, k)] = Complex64::new(0.0, 0.0);
        }
    }

    let scale = a.frobenius_norm();
    for k in 0..n {
        if r[(k, k)].norm() <= RANK_TOL * scale {
            return Err(Error::RankDeficient);
        }
    }
    Ok((q, r))
}
