//! Entropy-consuming sampling primitives beneath the quantum generators:
//! normal variates, simplex points, Ginibre matrices, random choice and
//! random graphs.
//!
//! Every draw has a fixed entropy budget (up to probability-zero re-draws),
//! so streams replay exactly under a seeded backend: `normal_array` filled
//! row-major consumes the same bytes as the equivalent sequence of
//! `normal_real` calls.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::entropy::EntropySource;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// A point of the standard simplex: non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    /// Validates the simplex invariants (entries >= 0, sum within 1e-12 of 1).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("empty simplex point".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::NotDistribution(
                "simplex weights must be non-negative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotDistribution(format!(
                "simplex weights sum to {sum}, not 1"
            )));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// One N(mean, stddev^2) variate via Box-Muller on two unit uniforms.
///
/// Each call consumes exactly one uniform pair (16 raw bytes); the second
/// Box-Muller branch is discarded so that array fills and sequential draws
/// are stream-for-stream identical. A unit uniform of exactly zero is
/// re-drawn to keep the logarithm finite.
pub fn normal_real(src: &mut EntropySource, mean: f64, stddev: f64) -> Result<f64> {
    if !(stddev > 0.0) || !stddev.is_finite() || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "normal distribution requires finite mean and stddev > 0, got N({mean}, {stddev})"
        )));
    }
    let mut u1 = src.read_double_unit()?;
    while u1 == 0.0 {
        u1 = src.read_double_unit()?;
    }
    let u2 = src.read_double_unit()?;
    let z = (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos();
    Ok(mean + stddev * z)
}

/// Row-major array of independent N(mean, stddev^2) variates with the given
/// shape.
pub fn normal_array(
    src: &mut EntropySource,
    mean: f64,
    stddev: f64,
    dims: &[usize],
) -> Result<RealArray> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidParameter(
            "array dims must be non-empty and positive".into(),
        ));
    }
    let count: usize = dims.iter().product();
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        data.push(normal_real(src, mean, stddev)?);
    }
    Ok(RealArray {
        dims: dims.to_vec(),
        data,
    })
}

/// Dense row-major real array, the result shape of [`normal_array`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealArray {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

/// Uniform point of the standard (n-1)-simplex: n Exp(1) draws normalized
/// by their sum (the flat-Dirichlet construction).
pub fn random_simplex(src: &mut EntropySource, n: usize) -> Result<SimplexPoint> {
    if n == 0 {
        return Err(Error::InvalidParameter("simplex dimension 0".into()));
    }
    if n == 1 {
        return SimplexPoint::new(vec![1.0]);
    }
    loop {
        let mut draws = Vec::with_capacity(n);
        let mut sum = 0.0;
        for _ in 0..n {
            // -ln(1-u) is finite for u in [0,1).
            let ei = -(1.0 - src.read_double_unit()?).ln();
            sum += ei;
            draws.push(ei);
        }
        if sum > 0.0 {
            let weights: Vec<f64> = draws.iter().map(|e| e / sum).collect();
            return SimplexPoint::new(weights);
        }
        // All draws were exactly zero; probability ~2^-53n, re-draw.
    }
}

/// Uniformly chosen element of a non-empty slice.
pub fn random_choice<'a, T>(src: &mut EntropySource, items: &'a [T]) -> Result<&'a T> {
    if items.is_empty() {
        return Err(Error::EmptyList);
    }
    let idx = src.read_int_in(0, items.len() as i64 - 1)?;
    Ok(&items[idx as usize])
}

/// Simple undirected graph with `v` vertices (labeled 1..=v) and `e`
/// distinct edges, uniform over all e-subsets of the possible edges.
///
/// Edge subsets are sampled with Floyd's algorithm over the C(v,2) edge
/// index space; the result is sorted with i < j in every pair.
pub fn random_graph(src: &mut EntropySource, v: u64, e: u64) -> Result<Vec<(u64, u64)>> {
    if v == 0 {
        return Err(Error::InvalidParameter("graph needs at least 1 vertex".into()));
    }
    let max = v * (v - 1) / 2;
    if e > max {
        return Err(Error::TooManyEdges { edges: e, max });
    }
    let mut chosen: HashSet<u64> = HashSet::with_capacity(e as usize);
    for j in (max - e)..max {
        let t = src.read_int_in(0, j as i64)? as u64;
        if chosen.contains(&t) {
            chosen.insert(j);
        } else {
            chosen.insert(t);
        }
    }
    let mut edges: Vec<(u64, u64)> = chosen.into_iter().map(|idx| unrank_edge(idx, v)).collect();
    edges.sort_unstable();
    Ok(edges)
}

/// Map an index in [0, C(v,2)) to the pair (i, j), 1 <= i < j <= v, in
/// lexicographic order.
fn unrank_edge(mut idx: u64, v: u64) -> (u64, u64) {
    let mut i = 1;
    loop {
        let row = v - i;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
        i += 1;
    }
}

/// Ginibre matrix: independent entries with standard-normal real and
/// imaginary parts, filled row-major.
pub fn ginibre_matrix(src: &mut EntropySource, m: usize, n: usize) -> Result<ComplexMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(
            "Ginibre matrix dimensions must be positive".into(),
        ));
    }
    let mut out = ComplexMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let re = normal_real(src, 0.0, 1.0)?;
            let im = normal_real(src, 0.0, 1.0)?;
            out[(i, j)] = Complex64::new(re, im);
        }
    }
    Ok(out)
}
