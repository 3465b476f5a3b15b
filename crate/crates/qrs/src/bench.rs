//! Throughput benchmark across entropy backends: per backend and sample
//! size, the wall time to generate that many unit-uniform doubles, reported
//! as the minimum over repeats after a warm-up draw.
//!
//! Remote or device failures mark the affected rows failed and the run
//! continues; absolute timings are hardware-bound and only the shape
//! (monotone growth with size) is asserted anywhere.

use serde::Serialize;

use crate::entropy::EntropySource;
use crate::error::{Error, Result};

/// Number of warm-up doubles drawn before timing a backend.
const WARMUP_DRAWS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    Failed,
}

/// One backend x size measurement.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub backend: String,
    pub size: u64,
    pub elapsed_s: f64,
    pub throughput_per_s: f64,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BenchRow {
    fn failed(backend: &str, size: u64, reason: String) -> Self {
        BenchRow {
            backend: backend.to_string(),
            size,
            elapsed_s: 0.0,
            throughput_per_s: 0.0,
            status: RowStatus::Failed,
            error: Some(reason),
        }
    }
}

/// Run the benchmark grid. `backend_specs` are entropy spec strings
/// (`prng:<seed>`, `os`, `dev:<path>`, `http:<url>`); sizes must be
/// non-empty and ascending; `repeats >= 1`.
pub fn run_bench(backend_specs: &[String], sizes: &[u64], repeats: u32) -> Result<Vec<BenchRow>> {
    if backend_specs.is_empty() {
        return Err(Error::InvalidParameter("no backends given".into()));
    }
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "sizes must be non-empty and strictly ascending".into(),
        ));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidParameter("sizes must be positive".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be >= 1".into()));
    }

    let mut rows = Vec::with_capacity(backend_specs.len() * sizes.len());
    for spec in backend_specs {
        let label = spec.clone();
        let mut src = match EntropySource::from_spec(spec) {
            Ok(src) => src,
            Err(e) => {
                for &size in sizes {
                    rows.push(BenchRow::failed(&label, size, e.to_string()));
                }
                continue;
            }
        };

        // Warm-up draw; failure here (short fixture, dead endpoint) fails
        // the whole backend.
        if let Err(e) = draw_doubles(&mut src, WARMUP_DRAWS) {
            for &size in sizes {
                rows.push(BenchRow::failed(&label, size, e.to_string()));
            }
            continue;
        }

        let mut dead: Option<String> = None;
        for &size in sizes {
            if let Some(reason) = &dead {
                rows.push(BenchRow::failed(&label, size, reason.clone()));
                continue;
            }
            let mut best: Option<f64> = None;
            let mut failure: Option<String> = None;
            for _ in 0..repeats {
                let start = std::time::Instant::now();
                match draw_doubles(&mut src, size) {
                    Ok(()) => {
                        let elapsed = start.elapsed().as_secs_f64().max(1e-9);
                        best = Some(best.map_or(elapsed, |b: f64| b.min(elapsed)));
                    }
                    Err(e) => {
                        failure = Some(e.to_string());
                        break;
                    }
                }
            }
            match (best, failure) {
                (Some(elapsed), None) => rows.push(BenchRow {
                    backend: label.clone(),
                    size,
                    elapsed_s: elapsed,
                    throughput_per_s: size as f64 / elapsed,
                    status: RowStatus::Ok,
                    error: None,
                }),
                (_, Some(reason)) => {
                    // A stream that ran dry stays dry for larger sizes.
                    rows.push(BenchRow::failed(&label, size, reason.clone()));
                    dead = Some(reason);
                }
                (None, None) => unreachable!("repeats >= 1"),
            }
        }
    }
    Ok(rows)
}

fn draw_doubles(src: &mut EntropySource, count: u64) -> Result<()> {
    for _ in 0..count {
        std::hint::black_box(src.read_double_unit()?);
    }
    Ok(())
}

/// CSV with the pinned header `backend,size,elapsed_s,throughput_per_s,status`.
///
/// With `redact_timings` the elapsed and throughput columns are zeroed,
/// which makes seeded runs byte-identical for golden-file testing.
pub fn rows_to_csv(rows: &[BenchRow], redact_timings: bool) -> String {
    let mut out = String::from("backend,size,elapsed_s,throughput_per_s,status\n");
    for r in rows {
        let status = match r.status {
            RowStatus::Ok => "ok",
            RowStatus::Failed => "failed",
        };
        if redact_timings {
            out.push_str(&format!("{},{},0,0,{}\n", r.backend, r.size, status));
        } else {
            out.push_str(&format!(
                "{},{},{:.9},{:.3},{}\n",
                r.backend, r.size, r.elapsed_s, r.throughput_per_s, status
            ));
        }
    }
    out
}

/// JSON array mirroring the rows.
pub fn rows_to_json(rows: &[BenchRow], redact_timings: bool) -> String {
    if redact_timings {
        let redacted: Vec<BenchRow> = rows
            .iter()
            .map(|r| BenchRow {
                elapsed_s: 0.0,
                throughput_per_s: 0.0,
                ..r.clone()
            })
            .collect();
        serde_json::to_string(&redacted).expect("bench rows serialize")
    } else {
        serde_json::to_string(rows).expect("bench rows serialize")
    }
}
