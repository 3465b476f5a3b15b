//! Statistical verification experiments: eigenvalue-distribution histograms
//! for Hilbert-Schmidt states and mean-fidelity-vs-K curves, each compared
//! against the closed-form predictions where they exist.
//!
//! Experiments accumulate into mergeable accumulators so the CLI can shard
//! them across independently seeded sources; merging is associative and the
//! final report depends only on the merged totals.

use serde::{Deserialize, Serialize};

use crate::entropy::EntropySource;
use crate::error::{Error, Result};
use crate::metrics::special::{kolmogorov_tail, regularized_gamma_q};
use crate::metrics::{fidelity, hs_normalization, mean_fidelity_2k};
use crate::qstates::{random_state_hs, random_state_induced};

/// Acceptance band half-width in standard errors for verdict rows.
pub const VERDICT_SIGMAS: f64 = 5.0;

/// One row of an experiment report: an abscissa, the empirical value, the
/// analytic prediction when one exists, the standard error, and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub x: f64,
    pub empirical: f64,
    pub analytic: Option<f64>,
    pub stderr: f64,
    pub pass: Option<bool>,
}

/// Serializable experiment outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub samples: u64,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    /// True when every row that has an analytic prediction passed.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass.unwrap_or(true))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    /// CSV with the same columns as the JSON rows; empty cells for absent
    /// analytic values and verdicts.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,empirical,analytic,stderr,pass\n");
        for r in &self.rows {
            let analytic = r.analytic.map(|a| format!("{a}")).unwrap_or_default();
            let pass = r.pass.map(|p| p.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.x, r.empirical, analytic, r.stderr, pass
            ));
        }
        out
    }
}

/// Chi-square goodness-of-fit statistic and p-value for observed counts
/// against cell probabilities. Degrees of freedom: cells - 1.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> (f64, f64) {
    assert_eq!(counts.len(), probs.len(), "counts/probs length mismatch");
    assert!(counts.len() >= 2, "need at least two cells");
    let total: u64 = counts.iter().sum();
    let mut chi2 = 0.0;
    for (&c, &p) in counts.iter().zip(probs) {
        let expected = total as f64 * p;
        assert!(expected > 0.0, "cell with zero expected count");
        let d = c as f64 - expected;
        chi2 += d * d / expected;
    }
    let dof = (counts.len() - 1) as f64;
    let p_value = regularized_gamma_q(dof / 2.0, chi2 / 2.0);
    (chi2, p_value)
}

/// Chi-square against the uniform distribution over the cells.
pub fn chi_square_uniform(counts: &[u64]) -> (f64, f64) {
    let probs = vec![1.0 / counts.len() as f64; counts.len()];
    chi_square_gof(counts, &probs)
}

/// One-sample Kolmogorov-Smirnov test against U[0,1). Sorts the sample in
/// place; returns the statistic D and the asymptotic p-value.
pub fn ks_test_uniform(samples: &mut [f64]) -> (f64, f64) {
    assert!(!samples.is_empty());
    samples.sort_by(|a, b| a.partial_cmp(b).expect("NaN in KS sample"));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let cdf = x.clamp(0.0, 1.0);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((cdf - lo).abs()).max((hi - cdf).abs());
    }
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    (d, kolmogorov_tail(lambda))
}

/// Accumulator for the eigenvalue-distribution experiment: a joint histogram
/// of all eigenvalues on [0,1] plus per-rank moment sums.
#[derive(Debug, Clone)]
pub struct EigenvalueAccumulator {
    dim: usize,
    bins: usize,
    counts: Vec<u64>,
    rank_sums: Vec<f64>,
    rank_sum_squares: Vec<f64>,
    samples: u64,
    max_simplex_deviation: f64,
}

impl EigenvalueAccumulator {
    pub fn new(dim: usize, bins: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(
                "eigenvalue experiment needs dimension >= 2".into(),
            ));
        }
        if bins < 10 {
            return Err(Error::InvalidParameter("need at least 10 bins".into()));
        }
        Ok(Self {
            dim,
            bins,
            counts: vec![0; bins],
            rank_sums: vec![0.0; dim],
            rank_sum_squares: vec![0.0; dim],
            samples: 0,
            max_simplex_deviation: 0.0,
        })
    }

    /// Draw `samples` Hilbert-Schmidt states and accumulate their spectra.
    pub fn accumulate(&mut self, src: &mut EntropySource, samples: u64) -> Result<()> {
        for _ in 0..samples {
            let rho = random_state_hs(src, self.dim)?;
            let eigenvalues = rho.eigenvalues()?;
            let sum: f64 = eigenvalues.iter().sum();
            let dev = (sum - 1.0)
                .abs()
                .max(-eigenvalues[0].min(0.0));
            self.max_simplex_deviation = self.max_simplex_deviation.max(dev);
            for (rank, &l) in eigenvalues.iter().enumerate() {
                let bin = ((l.clamp(0.0, 1.0) * self.bins as f64) as usize).min(self.bins - 1);
                self.counts[bin] += 1;
                self.rank_sums[rank] += l;
                self.rank_sum_squares[rank] += l * l;
            }
            self.samples += 1;
        }
        Ok(())
    }

    /// Merge a shard; associative and order-insensitive.
    pub fn merge(&mut self, other: &EigenvalueAccumulator) {
        assert_eq!((self.dim, self.bins), (other.dim, other.bins));
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.rank_sums.iter_mut().zip(&other.rank_sums) {
            *a += b;
        }
        for (a, b) in self
            .rank_sum_squares
            .iter_mut()
            .zip(&other.rank_sum_squares)
        {
            *a += b;
        }
        self.samples += other.samples;
        self.max_simplex_deviation = self.max_simplex_deviation.max(other.max_simplex_deviation);
    }

    /// Largest observed |sum(lambda) - 1| or negative-eigenvalue excursion.
    pub fn max_simplex_deviation(&self) -> f64 {
        self.max_simplex_deviation
    }

    pub fn into_report(self) -> ExperimentReport {
        let total = (self.samples * self.dim as u64).max(1) as f64;
        let mut rows = Vec::with_capacity(self.bins + self.dim);
        // Qubit case: exact marginal from the P_HS normalization,
        // density C (2x-1)^2 with CDF ((2x-1)^3 + 1)/2.
        let analytic_cdf = |x: f64| ((2.0 * x - 1.0).powi(3) + 1.0) / 2.0;
        for b in 0..self.bins {
            let lo = b as f64 / self.bins as f64;
            let hi = (b + 1) as f64 / self.bins as f64;
            let empirical = self.counts[b] as f64 / total;
            let analytic = (self.dim == 2).then(|| analytic_cdf(hi) - analytic_cdf(lo));
            let p_for_err = analytic.unwrap_or(empirical);
            let stderr = (p_for_err * (1.0 - p_for_err) / total).sqrt().max(1e-300);
            let pass = analytic.map(|a| (empirical - a).abs() <= VERDICT_SIGMAS * stderr);
            rows.push(ReportRow {
                x: (lo + hi) / 2.0,
                empirical,
                analytic,
                stderr,
                pass,
            });
        }
        if self.dim > 2 {
            // No closed-form marginal is attempted beyond the qubit case;
            // report the mean of each ascending eigenvalue instead.
            let n = self.samples.max(1) as f64;
            for rank in 0..self.dim {
                let mean = self.rank_sums[rank] / n;
                let var = (self.rank_sum_squares[rank] / n - mean * mean).max(0.0);
                rows.push(ReportRow {
                    x: (rank + 1) as f64,
                    empirical: mean,
                    analytic: None,
                    stderr: (var / n).sqrt(),
                    pass: None,
                });
            }
        }
        ExperimentReport {
            experiment: format!("eigenvalues(dim={})", self.dim),
            samples: self.samples,
            rows,
        }
    }
}

/// Accumulator for the mean-fidelity experiment over a list of ancilla
/// dimensions K.
#[derive(Debug, Clone)]
pub struct FidelityAccumulator {
    k_values: Vec<u64>,
    counts: Vec<u64>,
    sums: Vec<f64>,
    sum_squares: Vec<f64>,
}

impl FidelityAccumulator {
    pub fn new(k_values: &[u64]) -> Result<Self> {
        if k_values.is_empty() || k_values.contains(&0) {
            return Err(Error::InvalidParameter(
                "ancilla dimensions must be non-empty and >= 1".into(),
            ));
        }
        Ok(Self {
            k_values: k_values.to_vec(),
            counts: vec![0; k_values.len()],
            sums: vec![0.0; k_values.len()],
            sum_squares: vec![0.0; k_values.len()],
        })
    }

    /// Draw `pairs` independent pairs of one-qubit states under each
    /// mu_{2,K} and accumulate their fidelities.
    pub fn accumulate(&mut self, src: &mut EntropySource, pairs: u64) -> Result<()> {
        for (idx, &k) in self.k_values.clone().iter().enumerate() {
            for _ in 0..pairs {
                let a = random_state_induced(src, 2, k as usize)?;
                let b = random_state_induced(src, 2, k as usize)?;
                let f = fidelity(&a, &b)?;
                self.counts[idx] += 1;
                self.sums[idx] += f;
                self.sum_squares[idx] += f * f;
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &FidelityAccumulator) {
        assert_eq!(self.k_values, other.k_values);
        for i in 0..self.counts.len() {
            self.counts[i] += other.counts[i];
            self.sums[i] += other.sums[i];
            self.sum_squares[i] += other.sum_squares[i];
        }
    }

    pub fn into_report(self) -> Result<ExperimentReport> {
        let mut rows = Vec::with_capacity(self.k_values.len());
        let mut samples = 0;
        for (idx, &k) in self.k_values.iter().enumerate() {
            let n = self.counts[idx].max(1) as f64;
            samples += self.counts[idx];
            let mean = self.sums[idx] / n;
            let var = (self.sum_squares[idx] / n - mean * mean).max(0.0);
            let stderr = (var / n).sqrt().max(1e-300);
            let analytic = mean_fidelity_2k(k)?;
            rows.push(ReportRow {
                x: k as f64,
                empirical: mean,
                analytic: Some(analytic),
                stderr,
                pass: Some((mean - analytic).abs() <= VERDICT_SIGMAS * stderr),
            });
        }
        Ok(ExperimentReport {
            experiment: "mean-fidelity".into(),
            samples,
            rows,
        })
    }
}

/// Eigenvalue-distribution experiment: `samples` Hilbert-Schmidt draws of
/// dimension `n`, all eigenvalues histogrammed jointly over [0,1]; the
/// analytic qubit marginal is attached for n = 2 and ordered-eigenvalue
/// means for larger n.
pub fn eigenvalue_experiment(
    src: &mut EntropySource,
    n: usize,
    samples: u64,
    bins: usize,
) -> Result<ExperimentReport> {
    if samples < 100 {
        return Err(Error::InvalidParameter("need at least 100 samples".into()));
    }
    let mut acc = EigenvalueAccumulator::new(n, bins)?;
    acc.accumulate(src, samples)?;
    Ok(acc.into_report())
}

/// Mean-fidelity experiment: for each K, `pairs_per_k` independent pairs
/// under mu_{2,K}, compared against the closed-form mean at 5 standard
/// errors.
pub fn mean_fidelity_experiment(
    src: &mut EntropySource,
    k_values: &[u64],
    pairs_per_k: u64,
) -> Result<ExperimentReport> {
    if pairs_per_k < 10 {
        return Err(Error::InvalidParameter("need at least 10 pairs".into()));
    }
    let mut acc = FidelityAccumulator::new(k_values)?;
    acc.accumulate(src, pairs_per_k)?;
    acc.into_report()
}

/// Analytic density of the larger qubit eigenvalue under the HS measure,
/// 2 C_2 (2x-1)^2 on [1/2, 1]; exposed for the verification suites.
pub fn qubit_lambda_max_density(x: f64) -> f64 {
    if !(0.5..=1.0).contains(&x) {
        return 0.0;
    }
    let c2 = hs_normalization(2).expect("n = 2");
    2.0 * c2 * (2.0 * x - 1.0) * (2.0 * x - 1.0)
}
