//! Random quantum objects: kets and product kets, Haar unitaries and local
//! unitaries, density matrices under the Hilbert-Schmidt / Bures / induced
//! measures, product mixed states, and random dynamical (Choi) matrices.
//!
//! All generators consume entropy in a pinned order, so a seeded source
//! replays draws exactly; tests rely on that to expose internal factors.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::entropy::EntropySource;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, kron, kron_vec, partial_trace, qr_unitary, ComplexMatrix, Subsystem,
};
use crate::randkit::{ginibre_matrix, random_simplex};

/// Unit-norm and trace tolerances for state types.
pub const NORM_TOL: f64 = 1e-12;
/// Max-elementwise unitarity tolerance.
pub const UNITARY_TOL: f64 = 1e-10;
/// Density-matrix eigenvalues may dip this far below zero.
pub const PSD_EIG_TOL: f64 = 1e-10;
/// Hermiticity tolerance for dynamical matrices.
pub const DYNAMICAL_HERMITIAN_TOL: f64 = 1e-10;
/// Partial-trace-vs-identity tolerance for dynamical matrices.
pub const CPTP_TOL: f64 = 1e-8;

/// Unit-norm complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("empty state vector".into()));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr.sqrt() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "state vector norm {} is not 1",
                norm_sqr.sqrt()
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// The projector |phi><phi| as a density matrix.
    pub fn projector(&self) -> DensityMatrix {
        let n = self.dim();
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            self.amplitudes[i] * self.amplitudes[j].conj()
        });
        DensityMatrix::new(m).expect("projector of a unit vector is a valid state")
    }

    /// <self|other>.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Hermitian, positive semi-definite, unit-trace matrix.
///
/// Construction checks Hermiticity and trace; positivity is structural for
/// every generator here and re-checked by [`DensityMatrix::validate_full`]
/// at trust boundaries (file loads, validity suites).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let dev = matrix.hermitian_deviation();
        if dev > NORM_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = matrix.trace().expect("square");
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace {tr} is not 1"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eig(&self.matrix)?.eigenvalues)
    }

    /// tr(rho^2); for Hermitian rho this is the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        let f = self.matrix.frobenius_norm();
        f * f
    }

    /// Full invariant check including the eigenvalue positivity bound.
    pub fn validate_full(&self) -> Result<()> {
        let min = self.eigenvalues()?[0];
        if min < -PSD_EIG_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }
}

/// Matrix with `||U^dag U - I||_max <= 1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let n = matrix.rows();
        let gram = &matrix.conj_transpose() * &matrix;
        let dev = (&gram - &ComplexMatrix::identity(n)).max_abs();
        if dev > UNITARY_TOL {
            return Err(Error::InvalidParameter(format!(
                "matrix is not unitary (||U^dag U - I||_max = {dev:e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// Dynamical (Choi) matrix of a quantum channel on an n-dimensional system:
/// an n^2 x n^2 positive matrix whose partial trace over the first
/// subsystem is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    matrix: ComplexMatrix,
    system_dim: usize,
}

impl DynamicalMatrix {
    pub fn new(matrix: ComplexMatrix, system_dim: usize) -> Result<Self> {
        let d2 = system_dim * system_dim;
        if !matrix.is_square() || matrix.rows() != d2 {
            return Err(Error::DimensionMismatch(format!(
                "dynamical matrix for system dim {system_dim} must be {d2}x{d2}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > DYNAMICAL_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let marginal = partial_trace(&matrix, (system_dim, system_dim), Subsystem::First)?;
        let dev = (&marginal - &ComplexMatrix::identity(system_dim)).max_abs();
        if dev > CPTP_TOL {
            return Err(Error::InvalidParameter(format!(
                "partial trace deviates from identity by {dev:e}"
            )));
        }
        Ok(Self { matrix, system_dim })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    /// Full invariant check including positivity relative to the trace.
    pub fn validate_full(&self) -> Result<()> {
        let eig = hermitian_eig(&self.matrix)?;
        let trace: f64 = eig.eigenvalues.iter().sum();
        let min = eig.eigenvalues[0];
        if min < -1e-8 * trace {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }
}

/// Measure selector for mixed-state generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureSpec {
    Hs,
    Bures,
    Induced(usize),
}

impl MeasureSpec {
    /// Parse `hs`, `bures` or `induced:<K>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hs" | "HS" => Ok(MeasureSpec::Hs),
            "bures" | "Bures" => Ok(MeasureSpec::Bures),
            _ => {
                if let Some(k) = s.strip_prefix("induced:") {
                    let k: usize = k.parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad induced ancilla dimension in {s:?}"))
                    })?;
                    if k == 0 {
                        return Err(Error::InvalidParameter(
                            "induced measure needs ancilla dimension >= 1".into(),
                        ));
                    }
                    Ok(MeasureSpec::Induced(k))
                } else {
                    Err(Error::InvalidParameter(format!(
                        "unknown measure {s:?} (expected hs, bures or induced:<K>)"
                    )))
                }
            }
        }
    }
}

impl std::fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeasureSpec::Hs => write!(f, "hs"),
            MeasureSpec::Bures => write!(f, "bures"),
            MeasureSpec::Induced(k) => write!(f, "induced:{k}"),
        }
    }
}

/// Fubini-Study-distributed pure state: a uniform simplex point for the
/// squared moduli and independent uniform phases, with the first amplitude
/// kept real non-negative.
pub fn random_ket(src: &mut EntropySource, n: usize) -> Result<PureState> {
    if n == 0 {
        return Err(Error::InvalidParameter("ket dimension 0".into()));
    }
    let simplex = random_simplex(src, n)?;
    let w = simplex.weights();
    let mut amplitudes = Vec::with_capacity(n);
    amplitudes.push(Complex64::new(w[0].sqrt(), 0.0));
    for &wk in &w[1..] {
        let phase = src.read_double_in(0.0, 2.0 * PI)?;
        amplitudes.push(Complex64::from_polar(wk.sqrt(), phase));
    }
    PureState::new(amplitudes)
}

/// Tensor product of independent random kets, one per factor dimension.
pub fn random_product_ket(src: &mut EntropySource, dims: &[usize]) -> Result<PureState> {
    if dims.is_empty() {
        return Err(Error::InvalidParameter("no factor dimensions".into()));
    }
    let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
    for &d in dims {
        let factor = random_ket(src, d)?;
        amplitudes = kron_vec(&amplitudes, factor.amplitudes());
    }
    PureState::new(amplitudes)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with each Q column
/// re-phased by conj(R_jj)/|R_jj|, which makes the factorization the unique
/// one with positive-diagonal R.
pub fn random_unitary(src: &mut EntropySource, n: usize) -> Result<UnitaryMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("unitary dimension 0".into()));
    }
    for attempt in 0..2 {
        let g = ginibre_matrix(src, n, n)?;
        match qr_unitary(&g) {
            Ok((mut q, r)) => {
                for j in 0..n {
                    let d = r[(j, j)];
                    let phase = d.conj() / d.norm();
                    for i in 0..n {
                        q[(i, j)] *= phase;
                    }
                }
                return UnitaryMatrix::new(q);
            }
            // Rank deficiency has probability zero; re-draw once, then fail.
            Err(Error::RankDeficient) if attempt == 0 => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RankDeficient)
}

/// Kronecker product of independent Haar unitaries, one per factor.
pub fn random_local_unitary(src: &mut EntropySource, dims: &[usize]) -> Result<UnitaryMatrix> {
    if dims.is_empty() {
        return Err(Error::InvalidParameter("no factor dimensions".into()));
    }
    let mut out = ComplexMatrix::identity(1);
    for &d in dims {
        let factor = random_unitary(src, d)?;
        out = kron(&out, factor.matrix());
    }
    UnitaryMatrix::new(out)
}

/// Density matrix from the induced measure with ancilla dimension `k`:
/// G G^dag normalized by its trace, for an n x k Ginibre G.
///
/// `k = 1` is accepted and yields pure states (the Fubini-Study case).
pub fn random_state_induced(src: &mut EntropySource, n: usize, k: usize) -> Result<DensityMatrix> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter(
            "state and ancilla dimensions must be >= 1".into(),
        ));
    }
    let g = ginibre_matrix(src, n, k)?;
    let w = &g * &g.conj_transpose();
    let tr = w.trace().expect("square").re;
    if !(tr > 0.0) {
        return Err(Error::Degenerate("Ginibre Gram matrix has zero trace".into()));
    }
    DensityMatrix::new(w.scale_re(1.0 / tr))
}

/// Hilbert-Schmidt-distributed density matrix: the induced measure at k = n.
pub fn random_state_hs(src: &mut EntropySource, n: usize) -> Result<DensityMatrix> {
    random_state_induced(src, n, n)
}

/// Bures-distributed density matrix: (I+U) G G^dag (I+U^dag) normalized,
/// with Ginibre G and Haar U.
pub fn random_state_bures(src: &mut EntropySource, n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("state dimension 0".into()));
    }
    for _ in 0..2 {
        let g = ginibre_matrix(src, n, n)?;
        let u = random_unitary(src, n)?;
        let ipu = &ComplexMatrix::identity(n) + u.matrix();
        let m = &ipu * &g;
        let w = &m * &m.conj_transpose();
        let tr = w.trace().expect("square").re;
        if tr < 1e-300 {
            // I+U nearly annihilated G; probability-zero, re-draw once.
            continue;
        }
        return DensityMatrix::new(w.scale_re(1.0 / tr));
    }
    Err(Error::Degenerate(
        "Bures sample trace collapsed twice".into(),
    ))
}

/// Kronecker product of independent local density matrices, each drawn
/// according to `mu`, in factor order.
pub fn random_product_state(
    src: &mut EntropySource,
    dims: &[usize],
    mu: MeasureSpec,
) -> Result<DensityMatrix> {
    if dims.is_empty() {
        return Err(Error::InvalidParameter("no factor dimensions".into()));
    }
    if let MeasureSpec::Induced(0) = mu {
        return Err(Error::InvalidParameter("induced ancilla dimension 0".into()));
    }
    let mut out = ComplexMatrix::identity(1);
    for &d in dims {
        let factor = match mu {
            MeasureSpec::Hs => random_state_hs(src, d)?,
            MeasureSpec::Bures => random_state_bures(src, d)?,
            MeasureSpec::Induced(k) => random_state_induced(src, d, k)?,
        };
        out = kron(&out, factor.matrix());
    }
    DensityMatrix::new(out)
}

/// Random dynamical matrix for a channel on an n-dimensional system, with
/// `zero_eigenvalues` eigenvalues pinned to zero.
///
/// Construction: W = G G^dag for an n^2 x (n^2 - k) Ginibre G, then whiten
/// the ancilla marginal, D = (I (x) Y^{-1/2}) W (I (x) Y^{-1/2}) with
/// Y = tr_1 W. D is PSD of rank n^2 - k and tr_1 D = I.
pub fn random_dynamical_matrix(
    src: &mut EntropySource,
    n: usize,
    zero_eigenvalues: usize,
) -> Result<DynamicalMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("system dimension 0".into()));
    }
    let d2 = n * n;
    if zero_eigenvalues >= d2 {
        return Err(Error::InvalidParameter(format!(
            "can zero at most {} eigenvalues for system dimension {n}",
            d2 - 1
        )));
    }
    for _ in 0..2 {
        let g = ginibre_matrix(src, d2, d2 - zero_eigenvalues)?;
        let w = &g * &g.conj_transpose();
        let y = partial_trace(&w, (n, n), Subsystem::First)?;
        let eig = hermitian_eig(&y)?;
        let tr_y: f64 = eig.eigenvalues.iter().sum();
        if eig.eigenvalues[0] < 1e-12 * tr_y {
            // Singular ancilla marginal; probability-zero, re-draw once.
            continue;
        }
        let v = &eig.eigenvectors;
        let inv_sqrt_y = ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|m| v[(i, m)] * v[(j, m)].conj() / eig.eigenvalues[m].sqrt())
                .sum()
        });
        let whitener = kron(&ComplexMatrix::identity(n), &inv_sqrt_y);
        let d = &(&whitener * &w) * &whitener;
        return DynamicalMatrix::new(d, n);
    }
    Err(Error::SingularAncilla)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_test_uniform;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ket_dimension_one_is_exactly_one() {
        let mut src = EntropySource::deterministic(50);
        let ket = random_ket(&mut src, 1).unwrap();
        assert_eq!(ket.amplitudes(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn ket_norm_and_phase_convention() {
        let mut src = EntropySource::deterministic(51);
        for _ in 0..100 {
            let ket = random_ket(&mut src, 4).unwrap();
            let norm: f64 = ket.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert!((norm.sqrt() - 1.0).abs() <= 1e-12);
            let first = ket.amplitudes()[0];
            assert!(first.im == 0.0 && first.re >= 0.0);
        }
        assert!(matches!(
            random_ket(&mut src, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn qubit_ket_population_is_uniform() {
        let mut src = EntropySource::deterministic(52);
        let n = 100_000;
        let mut pops: Vec<f64> = Vec::with_capacity(n);
        for _ in 0..n {
            let ket = random_ket(&mut src, 2).unwrap();
            pops.push(ket.amplitudes()[0].norm_sqr());
        }
        let (_, p) = ks_test_uniform(&mut pops);
        assert!(p > 0.001, "KS p-value {p}");
    }

    #[test]
    fn ket_squared_moduli_have_simplex_means() {
        let mut src = EntropySource::deterministic(53);
        let n = 100_000;
        let dim = 4;
        let mut sums = vec![0.0f64; dim];
        for _ in 0..n {
            let ket = random_ket(&mut src, dim).unwrap();
            for (acc, a) in sums.iter_mut().zip(ket.amplitudes()) {
                *acc += a.norm_sqr();
            }
        }
        let sd = (3.0 / 80.0f64 / n as f64).sqrt();
        for acc in sums {
            assert!((acc / n as f64 - 0.25).abs() < 5.0 * sd);
        }
    }

    #[test]
    fn product_ket_shapes() {
        let mut src = EntropySource::deterministic(54);
        let ket = random_product_ket(&mut src, &[1, 1]).unwrap();
        assert_eq!(ket.amplitudes(), &[c(1.0, 0.0)]);

        let ket = random_product_ket(&mut src, &[2, 3]).unwrap();
        assert_eq!(ket.dim(), 6);
        let norm: f64 = ket.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!((norm.sqrt() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn product_ket_coefficient_matrix_is_rank_one() {
        let mut src = EntropySource::deterministic(55);
        let ket = random_product_ket(&mut src, &[2, 2]).unwrap();
        let x = ComplexMatrix::from_fn(2, 2, |i, j| ket.amplitudes()[i * 2 + j]);
        let gram = &x * &x.conj_transpose();
        let eig = hermitian_eig(&gram).unwrap();
        // second singular value = sqrt of the smaller Gram eigenvalue
        assert!(eig.eigenvalues[0].max(0.0).sqrt() < 1e-10);
        assert!((eig.eigenvalues[1].sqrt() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unitary_smallest_case_is_unimodular() {
        let mut src = EntropySource::deterministic(56);
        let u = random_unitary(&mut src, 1).unwrap();
        assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn unitary_defining_invariant() {
        let mut src = EntropySource::deterministic(57);
        let u = random_unitary(&mut src, 8).unwrap();
        let gram = &u.matrix().conj_transpose() * u.matrix();
        assert!((&gram - &ComplexMatrix::identity(8)).max_abs() <= 1e-10);
    }

    #[test]
    fn unitary_first_entry_moment() {
        let mut src = EntropySource::deterministic(58);
        let n = 10_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let u = random_unitary(&mut src, 2).unwrap();
            let x = u.matrix()[(0, 0)].norm_sqr();
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        let sem = (var / n as f64).sqrt();
        assert!((mean - 0.5).abs() < 5.0 * sem, "E|U_11|^2 = {mean}");
    }

    #[test]
    fn local_unitary_is_kron_of_replayed_factors() {
        let seed = 59;
        let mut src = EntropySource::deterministic(seed);
        let full = random_local_unitary(&mut src, &[2, 3]).unwrap();
        assert_eq!(full.dim(), 6);

        let mut replay = EntropySource::deterministic(seed);
        let a = random_unitary(&mut replay, 2).unwrap();
        let b = random_unitary(&mut replay, 3).unwrap();
        assert_eq!(*full.matrix(), kron(a.matrix(), b.matrix()));

        let single = random_local_unitary(&mut src, &[1]).unwrap();
        assert!((single.matrix()[(0, 0)].norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn induced_forced_and_rank_one_cases() {
        let mut src = EntropySource::deterministic(60);
        let rho = random_state_induced(&mut src, 1, 1).unwrap();
        assert!((rho.matrix()[(0, 0)] - c(1.0, 0.0)).norm() <= 1e-12);

        let rho = random_state_induced(&mut src, 2, 1).unwrap();
        let eig = rho.eigenvalues().unwrap();
        assert!(eig[0].abs() < 1e-10, "second eigenvalue {}", eig[0]);
        assert!((eig[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn induced_mean_purity_matches_closed_form() {
        let mut src = EntropySource::deterministic(61);
        let n = 10_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let p = random_state_induced(&mut src, 2, 2).unwrap().purity();
            sum += p;
            sumsq += p * p;
        }
        let mean = sum / n as f64;
        let sem = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        // E tr rho^2 = (N+K)/(NK+1) = 0.8 for N=K=2.
        assert!((mean - 0.8).abs() < 5.0 * sem, "mean purity {mean}");
    }

    #[test]
    fn induced_spectrum_matches_singular_values_of_internal_ginibre() {
        let seed = 62;
        let (n, k) = (2usize, 5usize);
        let mut src = EntropySource::deterministic(seed);
        let rho = random_state_induced(&mut src, n, k).unwrap();
        let mut spectrum = rho.eigenvalues().unwrap();
        spectrum.sort_by(|a, b| b.partial_cmp(a).unwrap());

        // Replay the internal G and take squared singular values from the
        // k x k Gram matrix instead.
        let mut replay = EntropySource::deterministic(seed);
        let g = ginibre_matrix(&mut replay, n, k).unwrap();
        let small_gram = &g.conj_transpose() * &g;
        let mut sv_sq = hermitian_eig(&small_gram).unwrap().eigenvalues;
        sv_sq.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let total: f64 = sv_sq.iter().sum();
        for (rho_eig, sv) in spectrum.iter().zip(&sv_sq) {
            assert!((rho_eig - sv / total).abs() < 1e-10);
        }
    }

    #[test]
    fn hs_special_cases() {
        let mut src = EntropySource::deterministic(63);
        let rho = random_state_hs(&mut src, 1).unwrap();
        assert!((rho.matrix()[(0, 0)] - c(1.0, 0.0)).norm() <= 1e-12);

        // Mean of the larger eigenvalue under the qubit HS measure is
        // the integral of 6x(2x-1)^2 over [1/2, 1], which is 7/8.
        let n = 10_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let eig = random_state_hs(&mut src, 2).unwrap().eigenvalues().unwrap();
            let lmax = eig[1];
            sum += lmax;
            sumsq += lmax * lmax;
        }
        let mean = sum / n as f64;
        let sem = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 0.875).abs() < 5.0 * sem, "mean lambda_max {mean}");
    }

    #[test]
    fn bures_forced_case_and_invariants() {
        let mut src = EntropySource::deterministic(64);
        let rho = random_state_bures(&mut src, 1).unwrap();
        assert!((rho.matrix()[(0, 0)] - c(1.0, 0.0)).norm() <= 1e-12);

        for _ in 0..50 {
            let rho = random_state_bures(&mut src, 3).unwrap();
            rho.validate_full().unwrap();
        }
    }

    #[test]
    fn bures_and_hs_purities_differ() {
        let mut src = EntropySource::deterministic(65);
        let n = 10_000;
        let (mut s1, mut q1, mut s2, mut q2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let p = random_state_hs(&mut src, 2).unwrap().purity();
            s1 += p;
            q1 += p * p;
            let p = random_state_bures(&mut src, 2).unwrap().purity();
            s2 += p;
            q2 += p * p;
        }
        let m1 = s1 / n as f64;
        let m2 = s2 / n as f64;
        let var1 = q1 / n as f64 - m1 * m1;
        let var2 = q2 / n as f64 - m2 * m2;
        let combined_sem = ((var1 + var2) / n as f64).sqrt();
        assert!(
            (m1 - m2).abs() > 5.0 * combined_sem,
            "HS mean purity {m1} vs Bures {m2} not separated"
        );
    }

    #[test]
    fn product_state_single_factor_replays_as_hs() {
        let seed = 66;
        let mut a = EntropySource::deterministic(seed);
        let mut b = EntropySource::deterministic(seed);
        let product = random_product_state(&mut a, &[2], MeasureSpec::Hs).unwrap();
        let plain = random_state_hs(&mut b, 2).unwrap();
        assert_eq!(product, plain);
    }

    #[test]
    fn product_state_partial_traces_return_factors() {
        let seed = 67;
        let mut src = EntropySource::deterministic(seed);
        let product = random_product_state(&mut src, &[2, 2], MeasureSpec::Hs).unwrap();

        let mut replay = EntropySource::deterministic(seed);
        let f1 = random_state_hs(&mut replay, 2).unwrap();
        let f2 = random_state_hs(&mut replay, 2).unwrap();

        let t2 = partial_trace(product.matrix(), (2, 2), Subsystem::Second).unwrap();
        assert!((&t2 - f1.matrix()).max_abs() < 1e-10);
        let t1 = partial_trace(product.matrix(), (2, 2), Subsystem::First).unwrap();
        assert!((&t1 - f2.matrix()).max_abs() < 1e-10);
    }

    #[test]
    fn product_state_induced_shape() {
        let mut src = EntropySource::deterministic(68);
        let rho = random_product_state(&mut src, &[2, 3], MeasureSpec::Induced(4)).unwrap();
        assert_eq!(rho.dim(), 6);
        let tr = rho.matrix().trace().unwrap();
        assert!((tr.re - 1.0).abs() <= 1e-12 && tr.im.abs() <= 1e-12);
    }

    #[test]
    fn dynamical_forced_case() {
        let mut src = EntropySource::deterministic(69);
        let d = random_dynamical_matrix(&mut src, 1, 0).unwrap();
        assert!((d.matrix()[(0, 0)] - c(1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn dynamical_trace_preservation_and_rank() {
        let mut src = EntropySource::deterministic(70);
        let d = random_dynamical_matrix(&mut src, 2, 0).unwrap();
        let marginal = partial_trace(d.matrix(), (2, 2), Subsystem::First).unwrap();
        assert!((&marginal - &ComplexMatrix::identity(2)).max_abs() <= 1e-8);
        let tr = d.matrix().trace().unwrap().re;
        assert!((tr - 2.0).abs() <= 1e-8);
        d.validate_full().unwrap();

        let d = random_dynamical_matrix(&mut src, 2, 2).unwrap();
        let eig = hermitian_eig(d.matrix()).unwrap();
        assert!(eig.eigenvalues[0].abs() < 1e-8 && eig.eigenvalues[1].abs() < 1e-8);
        assert!(eig.eigenvalues[2] > 1e-8 && eig.eigenvalues[3] > 1e-8);

        assert!(matches!(
            random_dynamical_matrix(&mut src, 2, 4),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn unitary_conjugation_preserves_purity_exactly() {
        let mut src = EntropySource::deterministic(71);
        let v = random_unitary(&mut src, 3).unwrap();
        for _ in 0..50 {
            let rho = random_state_hs(&mut src, 3).unwrap();
            let rotated = &(v.matrix() * rho.matrix()) * &v.matrix().conj_transpose();
            let p1 = rho.purity();
            let p2 = rotated.frobenius_norm().powi(2);
            assert!((p1 - p2).abs() <= 1e-12);
        }
    }

    #[test]
    fn measure_spec_parsing() {
        assert_eq!(MeasureSpec::parse("hs").unwrap(), MeasureSpec::Hs);
        assert_eq!(MeasureSpec::parse("bures").unwrap(), MeasureSpec::Bures);
        assert_eq!(
            MeasureSpec::parse("induced:4").unwrap(),
            MeasureSpec::Induced(4)
        );
        assert!(MeasureSpec::parse("induced:0").is_err());
        assert!(MeasureSpec::parse("haar").is_err());
        assert_eq!(MeasureSpec::Induced(4).to_string(), "induced:4");
    }

    #[test]
    fn generator_outputs_pass_type_invariants() {
        let mut src = EntropySource::deterministic(72);
        for n in [2usize, 3, 4] {
            for _ in 0..25 {
                random_state_hs(&mut src, n).unwrap().validate_full().unwrap();
                random_state_induced(&mut src, n, 2)
                    .unwrap()
                    .validate_full()
                    .unwrap();
                random_state_bures(&mut src, n).unwrap().validate_full().unwrap();
            }
        }
    }
}
