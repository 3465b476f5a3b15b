//! Hermitian eigendecomposition and the PSD matrix square root.
//!
//! The solver reduces a Hermitian matrix to real symmetric tridiagonal form
//! with complex Householder reflections, rotates the subdiagonal real with a
//! diagonal phase similarity, then diagonalizes with implicit-shift QL
//! iterations (tql2), accumulating everything into a complex eigenvector
//! matrix. Eigenvalues come out ascending.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Input must be Hermitian to this elementwise tolerance.
pub(crate) const HERMITIAN_INPUT_TOL: f64 = 1e-8;

/// Eigenvalues in [-PSD_CLAMP_TOL, 0) are treated as rounding noise and
/// clamped to zero by [`sqrt_psd`]; anything lower is an error.
pub(crate) const PSD_CLAMP_TOL: f64 = 1e-10;

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS: usize = 64;

/// Result of a Hermitian eigendecomposition: ascending eigenvalues and the
/// matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

/// Eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let deviation = a.hermitian_deviation();
    if deviation > HERMITIAN_INPUT_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = a.rows();
    let mut m = a.hermitized();
    let mut q = ComplexMatrix::identity(n);

    if n == 1 {
        return Ok(HermitianEigen {
            eigenvalues: vec![m[(0, 0)].re],
            eigenvectors: q,
        });
    }

    // Householder tridiagonalization: for each column, reflect the
    // below-subdiagonal part onto the subdiagonal.
    for k in 0..n - 2 {
        let len = n - k - 1;
        let mut norm2 = 0.0;
        for i in 0..len {
            norm2 += m[(k + 1 + i, k)].norm_sqr();
        }
        if norm2 == 0.0 {
            continue;
        }
        let norm = norm2.sqrt();
        let x0 = m[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        // alpha opposes the phase of x0, so v = x - alpha e1 never cancels.
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (0..len).map(|i| m[(k + 1 + i, k)]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = 2.0 / vv;

        // Hermitian rank-2 update of the trailing block:
        // M <- M - v w^dag - w v^dag with w = p - (beta/2)(v^dag p) v, p = beta M v.
        let mut p = vec![Complex64::new(0.0, 0.0); len];
        for i in 0..len {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..len {
                s += m[(k + 1 + i, k + 1 + j)] * v[j];
            }
            p[i] = s * beta;
        }
        let vhp: Complex64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
        let kappa = 0.5 * beta * vhp.re;
        let w: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - vi * kappa).collect();
        for i in 0..len {
            for j in 0..len {
                let delta = v[i] * w[j].conj() + w[i] * v[j].conj();
                m[(k + 1 + i, k + 1 + j)] -= delta;
            }
        }
        m[(k + 1, k)] = alpha;
        m[(k, k + 1)] = alpha.conj();
        for i in 1..len {
            m[(k + 1 + i, k)] = Complex64::new(0.0, 0.0);
            m[(k, k + 1 + i)] = Complex64::new(0.0, 0.0);
        }

        // Accumulate Q <- Q (I - beta v v^dag) on columns k+1..n.
        for r in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..len {
                s += q[(r, k + 1 + j)] * v[j];
            }
            let s = s * beta;
            for j in 0..len {
                q[(r, k + 1 + j)] -= s * v[j].conj();
            }
        }
    }

    // Make the subdiagonal real non-negative with a diagonal phase
    // similarity, folding the phases into Q's columns.
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in 0..n {
        d[i] = m[(i, i)].re;
    }
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..n - 1 {
        let t = m[(k + 1, k)];
        let r = t.norm();
        e[k] = r;
        if r > 0.0 {
            phase *= t / r;
            if phase != Complex64::new(1.0, 0.0) {
                for row in 0..n {
                    q[(row, k + 1)] *= phase;
                }
            }
        } else if phase != Complex64::new(1.0, 0.0) {
            for row in 0..n {
                q[(row, k + 1)] *= phase;
            }
        }
    }

    tql2(&mut d, &mut e, &mut q)?;

    // Ascending selection sort with matching column swaps.
    for i in 0..n {
        let mut min = i;
        for j in i + 1..n {
            if d[j] < d[min] {
                min = j;
            }
        }
        if min != i {
            d.swap(i, min);
            q.swap_cols(i, min);
        }
    }

    Ok(HermitianEigen {
        eigenvalues: d,
        eigenvectors: q,
    })
}

/// Implicit-shift QL on a real symmetric tridiagonal (diagonal `d`,
/// subdiagonal `e` with `e[i]` coupling `i` and `i+1`), rotations
/// accumulated into the complex columns of `z`.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut ComplexMatrix) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::NoConvergence);
                }

                // Wilkinson-style shift.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                // One QL sweep from m down to l.
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let gi = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * gi;
                    d[i + 1] = h + s * (c * gi + s * d[i]);
                    for k in 0..z.rows() {
                        let hk = z[(k, i + 1)];
                        z[(k, i + 1)] = z[(k, i)] * s + hk * c;
                        z[(k, i)] = z[(k, i)] * c - hk * s;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero (rounding noise from
/// Monte-Carlo-generated Gram matrices); lower ones raise `NotPsd`.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a)?;
    let n = a.rows();
    // Eigenvalues at rounding-noise level get sqrt-amplified (sqrt(1e-16)
    // is 1e-8), so anything below n*eps*lambda_max counts as zero.
    let lam_max = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let noise_floor = lam_max * n as f64 * f64::EPSILON;
    let mut roots = Vec::with_capacity(n);
    for &lam in &eig.eigenvalues {
        if lam < -PSD_CLAMP_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: lam,
            });
        }
        roots.push(if lam > noise_floor { lam.sqrt() } else { 0.0 });
    }
    let v = &eig.eigenvectors;
    // S = V diag(roots) V^dag, assembled entrywise so S is exactly Hermitian.
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| v[(i, k)] * v[(j, k)].conj() * roots[k])
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::EntropySource;
    use crate::randkit::ginibre_matrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(entries: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(entries.len(), entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = c(x, 0.0);
        }
        m
    }

    fn random_hermitian(src: &mut EntropySource, n: usize) -> ComplexMatrix {
        let g = ginibre_matrix(src, n, n).unwrap();
        &g + &g.conj_transpose()
    }

    fn check_decomposition(a: &ComplexMatrix, eig: &HermitianEigen) {
        let n = a.rows();
        let v = &eig.eigenvectors;
        // A V = V diag(lambda)
        let av = a * v;
        let vl = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] * eig.eigenvalues[j]);
        let resid = (&av - &vl).frobenius_norm();
        let scale = a.frobenius_norm().max(1e-300);
        assert!(
            resid <= 1e-10 * scale,
            "reconstruction residual {resid:e} vs scale {scale:e}"
        );
        // V^dag V = I
        let gram = &v.conj_transpose() * v;
        let dev = (&gram - &ComplexMatrix::identity(n)).max_abs();
        assert!(dev <= 1e-10, "orthonormality deviation {dev:e}");
        // ascending
        for w in eig.eigenvalues.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn diagonal_matrix_eigenvalues_sort_ascending() {
        let eig = hermitian_eig(&diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 2.0, 3.0]);
        check_decomposition(&diag(&[3.0, 1.0, 2.0]), &eig);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ]);
        let eig = hermitian_eig(&x).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        check_decomposition(&x, &eig);
    }

    #[test]
    fn normalized_gram_matrix_spectrum_sums_to_one() {
        let mut src = EntropySource::deterministic(10);
        let g = ginibre_matrix(&mut src, 4, 4).unwrap();
        let gram = &g * &g.conj_transpose();
        let rho = gram.scale_re(1.0 / gram.trace().unwrap().re);
        let eig = hermitian_eig(&rho).unwrap();
        let sum: f64 = eig.eigenvalues.iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
        check_decomposition(&rho, &eig);
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.5, 0.0), c(0.0, 0.0)],
        ]);
        assert!(matches!(
            hermitian_eig(&m),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            hermitian_eig(&ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn decomposition_invariants_over_random_matrices() {
        let mut src = EntropySource::deterministic(11);
        for trial in 0..1000 {
            let n = 2 + (trial % 15);
            let a = random_hermitian(&mut src, n);
            let eig = hermitian_eig(&a).unwrap();
            check_decomposition(&a, &eig);
        }
    }

    #[test]
    fn sqrt_of_diagonal() {
        let s = sqrt_psd(&diag(&[4.0, 9.0])).unwrap();
        assert!((&s - &diag(&[2.0, 3.0])).max_abs() < 1e-14);
        let id = ComplexMatrix::identity(3);
        assert!((&sqrt_psd(&id).unwrap() - &id).max_abs() < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut src = EntropySource::deterministic(12);
        let g = ginibre_matrix(&mut src, 4, 4).unwrap();
        let a = &g * &g.conj_transpose();
        let s = sqrt_psd(&a).unwrap();
        let resid = (&(&s * &s) - &a).frobenius_norm();
        assert!(resid <= 1e-9 * (1.0 + a.frobenius_norm()));
        assert!(s.hermitian_deviation() == 0.0);
    }

    #[test]
    fn sqrt_keeps_exact_zero_eigenvalue() {
        let s = sqrt_psd(&diag(&[0.0, 4.0])).unwrap();
        assert_eq!(s[(0, 0)], c(0.0, 0.0));
        assert_eq!(s[(0, 1)], c(0.0, 0.0));
        assert_eq!(s[(1, 1)], c(2.0, 0.0));
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        assert!(matches!(
            sqrt_psd(&diag(&[-0.5, 1.0])),
            Err(Error::NotPsd { .. })
        ));
        // Within the clamp window: treated as zero.
        let s = sqrt_psd(&diag(&[-5e-11, 1.0])).unwrap();
        assert_eq!(s[(0, 0)], c(0.0, 0.0));
    }
}
