//! JSON document format for generated objects.
//!
//! One document per object: `{"kind", "dims", "measure", "data", "meta"}`
//! with complex entries encoded as `[re, im]` pairs, so files stay
//! unambiguous across languages. Batches are JSON lines. Loading re-checks
//! the type invariants of the encoded object at the module tolerances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::qstates::{DensityMatrix, DynamicalMatrix, PureState, UnitaryMatrix};
use crate::randkit::SimplexPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub backend: String,
    pub seed: Option<u64>,
    pub created: String,
}

/// Timestamp written under `--deterministic`.
pub const EPOCH_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub kind: String,
    pub dims: Vec<usize>,
    pub measure: Option<String>,
    pub data: Value,
    pub meta: Meta,
}

fn encode_complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn encode_vector(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|&z| encode_complex(z)).collect())
}

fn encode_matrix(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| encode_complex(m[(i, j)])).collect()))
            .collect(),
    )
}

fn decode_complex(v: &Value) -> Result<Complex64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::InvalidStateFile("complex entry is not a [re, im] pair".into()))?;
    let re = pair[0]
        .as_f64()
        .ok_or_else(|| Error::InvalidStateFile("non-numeric real part".into()))?;
    let im = pair[1]
        .as_f64()
        .ok_or_else(|| Error::InvalidStateFile("non-numeric imaginary part".into()))?;
    Ok(Complex64::new(re, im))
}

impl StateFile {
    pub fn from_ket(kind: &str, dims: &[usize], state: &PureState, meta: Meta) -> Self {
        StateFile {
            kind: kind.into(),
            dims: dims.to_vec(),
            measure: None,
            data: encode_vector(state.amplitudes()),
            meta,
        }
    }

    pub fn from_matrix(
        kind: &str,
        dims: &[usize],
        measure: Option<String>,
        matrix: &ComplexMatrix,
        meta: Meta,
    ) -> Self {
        StateFile {
            kind: kind.into(),
            dims: dims.to_vec(),
            measure,
            data: encode_matrix(matrix),
            meta,
        }
    }

    pub fn from_simplex(point: &SimplexPoint, meta: Meta) -> Self {
        StateFile {
            kind: "simplex".into(),
            dims: vec![point.len()],
            measure: None,
            data: json!(point.weights()),
            meta,
        }
    }

    pub fn from_graph(vertices: u64, edges: &[(u64, u64)], meta: Meta) -> Self {
        StateFile {
            kind: "graph".into(),
            dims: vec![vertices as usize, edges.len()],
            measure: None,
            data: Value::Array(edges.iter().map(|&(i, j)| json!([i, j])).collect()),
            meta,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("state file serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidStateFile(e.to_string()))
    }

    pub fn decode_vector(&self) -> Result<Vec<Complex64>> {
        let arr = self
            .data
            .as_array()
            .ok_or_else(|| Error::InvalidStateFile("data is not an array".into()))?;
        arr.iter().map(decode_complex).collect()
    }

    pub fn decode_matrix(&self) -> Result<ComplexMatrix> {
        let rows = self
            .data
            .as_array()
            .ok_or_else(|| Error::InvalidStateFile("data is not an array".into()))?;
        if rows.is_empty() {
            return Err(Error::InvalidStateFile("empty matrix".into()));
        }
        let mut decoded: Vec<Vec<Complex64>> = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row
                .as_array()
                .ok_or_else(|| Error::InvalidStateFile("matrix row is not an array".into()))?;
            decoded.push(row.iter().map(decode_complex).collect::<Result<_>>()?);
        }
        let cols = decoded[0].len();
        if cols == 0 || decoded.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidStateFile("ragged matrix rows".into()));
        }
        Ok(ComplexMatrix::from_rows(&decoded))
    }

    fn decode_reals(&self) -> Result<Vec<f64>> {
        let arr = self
            .data
            .as_array()
            .ok_or_else(|| Error::InvalidStateFile("data is not an array".into()))?;
        arr.iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Error::InvalidStateFile("non-numeric entry".into()))
            })
            .collect()
    }

    fn decode_edges(&self) -> Result<Vec<(u64, u64)>> {
        let arr = self
            .data
            .as_array()
            .ok_or_else(|| Error::InvalidStateFile("data is not an array".into()))?;
        arr.iter()
            .map(|v| {
                let pair = v
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| Error::InvalidStateFile("edge is not a pair".into()))?;
                let i = pair[0]
                    .as_u64()
                    .ok_or_else(|| Error::InvalidStateFile("non-integer vertex".into()))?;
                let j = pair[1]
                    .as_u64()
                    .ok_or_else(|| Error::InvalidStateFile("non-integer vertex".into()))?;
                Ok((i, j))
            })
            .collect()
    }

    fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Re-validate the encoded object against its kind's type invariants.
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::InvalidStateFile("dims must be positive".into()));
        }
        match self.kind.as_str() {
            "ket" | "product-ket" => {
                let v = self.decode_vector()?;
                if v.len() != self.total_dim() {
                    return Err(Error::InvalidStateFile(format!(
                        "ket length {} does not match dims {:?}",
                        v.len(),
                        self.dims
                    )));
                }
                PureState::new(v)?;
            }
            "unitary" | "local-unitary" => {
                let m = self.decode_matrix()?;
                if m.rows() != self.total_dim() {
                    return Err(Error::InvalidStateFile("unitary side mismatch".into()));
                }
                UnitaryMatrix::new(m)?;
            }
            "state-hs" | "state-bures" | "state-induced" | "product-state" => {
                let m = self.decode_matrix()?;
                if m.rows() != self.total_dim() {
                    return Err(Error::InvalidStateFile("state side mismatch".into()));
                }
                DensityMatrix::new(m)?.validate_full()?;
            }
            "dynamical" => {
                if self.dims.len() != 1 {
                    return Err(Error::InvalidStateFile(
                        "dynamical matrices take a single system dimension".into(),
                    ));
                }
                let m = self.decode_matrix()?;
                DynamicalMatrix::new(m, self.dims[0])?.validate_full()?;
            }
            "ginibre" => {
                if self.dims.len() != 2 {
                    return Err(Error::InvalidStateFile(
                        "ginibre dims must be [rows, cols]".into(),
                    ));
                }
                let m = self.decode_matrix()?;
                if m.rows() != self.dims[0] || m.cols() != self.dims[1] {
                    return Err(Error::InvalidStateFile("ginibre shape mismatch".into()));
                }
                if m.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::InvalidStateFile("non-finite entry".into()));
                }
            }
            "simplex" => {
                let w = self.decode_reals()?;
                if w.len() != self.total_dim() {
                    return Err(Error::InvalidStateFile("simplex length mismatch".into()));
                }
                SimplexPoint::new(w)?;
            }
            "graph" => {
                if self.dims.len() != 2 {
                    return Err(Error::InvalidStateFile(
                        "graph dims must be [vertices, edges]".into(),
                    ));
                }
                let (v, e) = (self.dims[0] as u64, self.dims[1]);
                let edges = self.decode_edges()?;
                if edges.len() != e {
                    return Err(Error::InvalidStateFile("edge count mismatch".into()));
                }
                let mut seen = std::collections::HashSet::new();
                for &(i, j) in &edges {
                    if i == 0 || j == 0 || i >= j || j > v {
                        return Err(Error::InvalidStateFile(format!(
                            "edge ({i}, {j}) is not 1 <= i < j <= {v}"
                        )));
                    }
                    if !seen.insert((i, j)) {
                        return Err(Error::InvalidStateFile(format!(
                            "duplicate edge ({i}, {j})"
                        )));
                    }
                }
            }
            other => {
                return Err(Error::InvalidStateFile(format!("unknown kind {other:?}")));
            }
        }
        Ok(())
    }
}
