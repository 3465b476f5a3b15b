//! Random quantum states from pluggable entropy sources.
//!
//! The crate generates random pure states, Haar unitaries, density matrices
//! under the Hilbert-Schmidt, Bures and induced measures, and random
//! dynamical (Choi) matrices, all driven by an interchangeable entropy
//! backend: a seeded deterministic generator, OS entropy, a byte-stream
//! device path, or a remote QRNG service over HTTP.
//!
//! On top of the generators sit closed-form verification experiments
//! (eigenvalue densities, mean qubit fidelity) and a throughput benchmark
//! harness for the entropy backends; the `qrs` binary exposes all of it.
//!
//! ```no_run
//! use qrs::entropy::EntropySource;
//! use qrs::qstates::random_state_hs;
//!
//! let mut src = EntropySource::deterministic(42);
//! let rho = random_state_hs(&mut src, 4).unwrap();
//! assert_eq!(rho.dim(), 4);
//! ```

pub mod bench;
pub mod cli;
pub mod entropy;
mod error;
pub mod linalg;
pub mod metrics;
pub mod qstates;
pub mod randkit;
pub mod statefile;
pub mod stats;

pub use error::{Error, Result};
