//! Distances, fidelities and the closed-form verification quantities:
//! Hilbert-Schmidt and Bures distances, trace distance, Hellinger affinity,
//! the Hilbert-Schmidt eigenvalue density with its normalization constant,
//! and the mean qubit fidelity under induced measures.
//!
//! Fidelity convention: `root_fidelity` is tr|sqrt(a) sqrt(b)| and
//! `fidelity` is its square, so that for a pure first argument
//! `fidelity(|phi><phi|, rho) = <phi|rho|phi>`.

pub mod special;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, sqrt_psd};
use crate::qstates::DensityMatrix;
use special::ln_gamma;

/// Eigenvalue spectrum of a density matrix: a validated simplex point.
///
/// Entries within rounding noise below zero (>= -1e-12) are clamped to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    lambdas: Vec<f64>,
}

impl SpectrumPoint {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::NotDistribution("empty spectrum".into()));
        }
        let mut clamped = Vec::with_capacity(lambdas.len());
        for &l in &lambdas {
            if !l.is_finite() || l < -1e-12 {
                return Err(Error::NotDistribution(format!(
                    "eigenvalue {l} below the simplex"
                )));
            }
            clamped.push(l.max(0.0));
        }
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotDistribution(format!(
                "spectrum sums to {sum}, not 1"
            )));
        }
        Ok(Self { lambdas: clamped })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

fn check_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Root fidelity tr|sqrt(a) sqrt(b)|, computed as tr sqrt(sqrt(b) a sqrt(b)).
pub fn root_fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let sb = sqrt_psd(b.matrix())?;
    let inner = (&(&sb * a.matrix()) * &sb).hermitized();
    let s = sqrt_psd(&inner)?;
    Ok(s.trace().expect("square").re.max(0.0))
}

/// Fidelity: the square of [`root_fidelity`]. Equals `<phi|b|phi>` when `a`
/// is the pure state `|phi><phi|`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let rf = root_fidelity(a, b)?;
    Ok(rf * rf)
}

/// Hilbert-Schmidt distance: the Frobenius norm of the difference.
pub fn hs_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a, b)?;
    Ok((a.matrix() - b.matrix()).frobenius_norm())
}

/// Bures distance sqrt(2 - 2 sqrt(F)), reading sqrt(F) as the root fidelity.
pub fn bures_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let rf = root_fidelity(a, b)?;
    Ok((2.0 - 2.0 * rf).max(0.0).sqrt())
}

/// Trace distance: half the sum of absolute eigenvalues of the difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dims(a, b)?;
    let diff = a.matrix() - b.matrix();
    let eig = hermitian_eig(&diff)?;
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// Hellinger affinity H(p, q) = sum_i sqrt(p_i q_i) of two probability
/// vectors; equals 1 exactly when p = q.
pub fn hellinger_affinity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    for v in [p, q] {
        if v.is_empty() {
            return Err(Error::NotDistribution("empty distribution".into()));
        }
        if v.iter().any(|&x| !x.is_finite() || x < -1e-9) {
            return Err(Error::NotDistribution(
                "negative probability entry".into(),
            ));
        }
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NotDistribution(format!(
                "distribution sums to {sum}, not 1"
            )));
        }
    }
    Ok(p
        .iter()
        .zip(q)
        .map(|(&pi, &qi)| (pi.max(0.0) * qi.max(0.0)).sqrt())
        .sum())
}

/// Joint eigenvalue density of the Hilbert-Schmidt ensemble,
/// P_HS(lambda) = C_N^HS prod_{i<j} (lambda_i - lambda_j)^2.
pub fn hs_eigenvalue_density(spectrum: &SpectrumPoint) -> f64 {
    let l = spectrum.lambdas();
    let n = l.len();
    let c = hs_normalization(n).expect("spectrum is non-empty");
    let mut vandermonde_sq = 1.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = l[i] - l[j];
            vandermonde_sq *= d * d;
        }
    }
    c * vandermonde_sq
}

/// Normalization constant of the Hilbert-Schmidt eigenvalue density,
/// C_N^HS = Gamma(N^2) / prod_{k=1}^N Gamma(k) Gamma(k+1), evaluated in
/// log space.
pub fn hs_normalization(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension 0".into()));
    }
    let mut log_c = ln_gamma((n * n) as f64);
    for k in 1..=n {
        log_c -= ln_gamma(k as f64) + ln_gamma(k as f64 + 1.0);
    }
    Ok(log_c.exp())
}

/// Mean fidelity between two independent one-qubit states drawn from the
/// induced measure with ancilla dimension K:
/// 1/2 + 1/2 (Gamma(K-1/2) Gamma(K+1/2) / (Gamma(K-1) Gamma(K+1)))^2.
///
/// K = 1 is the pure-state limit; the Gamma(0) pole drives the correction
/// term to zero, so the value is exactly 1/2.
pub fn mean_fidelity_2k(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "ancilla dimension must be >= 1".into(),
        ));
    }
    if k == 1 {
        return Ok(0.5);
    }
    let k = k as f64;
    let log_ratio = ln_gamma(k - 0.5) + ln_gamma(k + 0.5) - ln_gamma(k - 1.0) - ln_gamma(k + 1.0);
    Ok(0.5 + 0.5 * (2.0 * log_ratio).exp())
}
