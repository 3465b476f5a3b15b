//! Uniform abstraction over randomness backends.
//!
//! An [`EntropySource`] supplies raw bytes and unbiased scaled reads
//! (integers in a range, doubles in `[0,1)`) from one of four backends:
//!
//! * `prng` — deterministic SplitMix64 stream, seeded; bit-identical across
//!   runs and platforms;
//! * `os` — operating-system entropy;
//! * `dev` — any readable byte-stream path (hardware character device or a
//!   recorded-entropy fixture file), consumed sequentially;
//! * `http` — a remote QRNG service speaking the small protocol documented
//!   in [`http`] (module docs).
//!
//! Sources are single-owner: reads require `&mut self` and a source is never
//! shared internally. [`SharedEntropySource`] wraps a source in a mutex for
//! the cases where sharing is wanted.

mod http;
mod prng;

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use http::RemoteClient;
use prng::SplitMix64;

/// Default timeout for remote backends constructed from a spec string.
pub const DEFAULT_REMOTE_TIMEOUT_MS: u64 = 5000;

/// Environment variable consulted by the CLI when no `--entropy` flag is given.
pub const ENTROPY_ENV_VAR: &str = "QRS_ENTROPY";

/// Which backend a source draws from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    DeterministicPrng { seed: u64 },
    OsEntropy,
    ByteStreamDevice { path: PathBuf },
    RemoteQrng { endpoint: String, timeout_ms: u64 },
}

impl Backend {
    /// Short label used in descriptors, bench rows and report metadata.
    pub fn kind(&self) -> &'static str {
        match self {
            Backend::DeterministicPrng { .. } => "prng",
            Backend::OsEntropy => "os",
            Backend::ByteStreamDevice { .. } => "device",
            Backend::RemoteQrng { .. } => "remote",
        }
    }

    /// Seed, when the backend is deterministic.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Backend::DeterministicPrng { seed } => Some(*seed),
            _ => None,
        }
    }
}

/// Backend metadata: kind label, library version and, for device-class
/// backends, the device identification trio.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDescriptor {
    pub backend_kind: String,
    pub library_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub serial_number: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device_id: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device_type: Option<String>,
}

/// Buffered SplitMix64 byte stream. Buffering makes the stream independent
/// of how reads are chunked: read_bytes(3) then read_bytes(5) yields the
/// same 8 bytes as a single read_bytes(8).
#[derive(Debug, Clone)]
struct PrngState {
    gen: SplitMix64,
    buf: [u8; 8],
    pos: usize,
}

impl PrngState {
    fn new(seed: u64) -> Self {
        Self {
            gen: SplitMix64::new(seed),
            buf: [0; 8],
            pos: 8,
        }
    }

    fn fill(&mut self, out: &mut [u8]) {
        let mut i = 0;
        while i < out.len() && self.pos < 8 {
            out[i] = self.buf[self.pos];
            self.pos += 1;
            i += 1;
        }
        while out.len() - i >= 8 {
            out[i..i + 8].copy_from_slice(&self.gen.next_u64().to_le_bytes());
            i += 8;
        }
        if i < out.len() {
            self.buf = self.gen.next_u64().to_le_bytes();
            self.pos = 0;
            while i < out.len() {
                out[i] = self.buf[self.pos];
                self.pos += 1;
                i += 1;
            }
        }
    }
}

#[derive(Debug)]
enum Inner {
    Prng(PrngState),
    Os,
    Device(File),
    Remote(RemoteClient),
}

/// A single-owner stream of randomness with scaled-read helpers.
#[derive(Debug)]
pub struct EntropySource {
    backend: Backend,
    inner: Inner,
    byte_counter: u64,
}

impl EntropySource {
    /// Deterministic backend; equal seeds produce identical byte streams.
    pub fn deterministic(seed: u64) -> Self {
        Self {
            backend: Backend::DeterministicPrng { seed },
            inner: Inner::Prng(PrngState::new(seed)),
            byte_counter: 0,
        }
    }

    /// Operating-system entropy.
    pub fn os_entropy() -> Self {
        Self {
            backend: Backend::OsEntropy,
            inner: Inner::Os,
            byte_counter: 0,
        }
    }

    /// Byte-stream device backend reading sequentially from `path`.
    ///
    /// The path is opened eagerly; a missing or unreadable path is
    /// `DeviceUnavailable`.
    pub fn byte_stream_device(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path)
            .map_err(|e| Error::DeviceUnavailable(format!("{}: {e}", path.display())))?;
        Ok(Self {
            backend: Backend::ByteStreamDevice { path },
            inner: Inner::Device(file),
            byte_counter: 0,
        })
    }

    /// Remote QRNG service backend. Reachability is checked on first use.
    pub fn remote_qrng(endpoint: impl Into<String>, timeout_ms: u64) -> Result<Self> {
        let endpoint = endpoint.into();
        if endpoint.is_empty() {
            return Err(Error::InvalidEntropySpec {
                spec: "http:".into(),
                reason: "empty endpoint URL".into(),
            });
        }
        let client = RemoteClient::new(&endpoint, Duration::from_millis(timeout_ms));
        Ok(Self {
            backend: Backend::RemoteQrng {
                endpoint,
                timeout_ms,
            },
            inner: Inner::Remote(client),
            byte_counter: 0,
        })
    }

    /// Parse a backend spec string: `prng:<seed>`, `os`, `dev:<path>` or
    /// `http:<url>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        if spec == "os" {
            return Ok(Self::os_entropy());
        }
        if let Some(seed) = spec.strip_prefix("prng:") {
            let seed: u64 = seed.parse().map_err(|_| Error::InvalidEntropySpec {
                spec: spec.into(),
                reason: "seed must be an unsigned 64-bit integer".into(),
            })?;
            return Ok(Self::deterministic(seed));
        }
        if let Some(path) = spec.strip_prefix("dev:") {
            if path.is_empty() {
                return Err(Error::InvalidEntropySpec {
                    spec: spec.into(),
                    reason: "empty device path".into(),
                });
            }
            return Self::byte_stream_device(path);
        }
        if let Some(url) = spec.strip_prefix("http:") {
            if url.is_empty() {
                return Err(Error::InvalidEntropySpec {
                    spec: spec.into(),
                    reason: "empty endpoint URL".into(),
                });
            }
            return Self::remote_qrng(url, DEFAULT_REMOTE_TIMEOUT_MS);
        }
        Err(Error::InvalidEntropySpec {
            spec: spec.into(),
            reason: "expected prng:<seed>, os, dev:<path> or http:<url>".into(),
        })
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Raw bytes consumed so far, including rejection-sampling overhead.
    pub fn byte_counter(&self) -> u64 {
        self.byte_counter
    }

    /// Read exactly `out.len()` raw bytes into `out`.
    pub fn fill_bytes(&mut self, out: &mut [u8]) -> Result<()> {
        if out.is_empty() {
            return Ok(());
        }
        match &mut self.inner {
            Inner::Prng(state) => state.fill(out),
            Inner::Os => {
                getrandom::fill(out)
                    .map_err(|e| Error::DeviceUnavailable(format!("os entropy: {e}")))?;
            }
            Inner::Device(file) => {
                let mut got = 0;
                while got < out.len() {
                    match file.read(&mut out[got..]) {
                        Ok(0) => {
                            return Err(Error::ShortRead {
                                requested: out.len(),
                                got,
                            })
                        }
                        Ok(k) => got += k,
                        Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
                        Err(e) => {
                            return Err(Error::DeviceUnavailable(format!("device read: {e}")))
                        }
                    }
                }
            }
            Inner::Remote(client) => {
                let body = client.fetch_bytes(out.len())?;
                out.copy_from_slice(&body);
            }
        }
        self.byte_counter += out.len() as u64;
        Ok(())
    }

    /// Read exactly `n` raw bytes.
    pub fn read_bytes(&mut self, n: usize) -> Result<Vec<u8>> {
        let mut out = vec![0u8; n];
        self.fill_bytes(&mut out)?;
        Ok(out)
    }

    /// Uniform integer in the inclusive range `[lo, hi]`.
    ///
    /// Scaling is by rejection on the smallest sufficient byte width, so the
    /// result carries no modulo bias. Requires `hi - lo < 2^32`.
    pub fn read_int_in(&mut self, lo: i64, hi: i64) -> Result<i64> {
        if lo > hi {
            return Err(Error::InvalidRange {
                lo: lo as f64,
                hi: hi as f64,
            });
        }
        let span = (hi as i128) - (lo as i128);
        if span >= 1i128 << 32 {
            return Err(Error::InvalidRange {
                lo: lo as f64,
                hi: hi as f64,
            });
        }
        let range = span as u64 + 1;
        if range == 1 {
            return Ok(lo);
        }
        let width = scaled_width(range);
        let threshold = scaled_threshold(range);
        let mut buf = [0u8; 8];
        loop {
            self.fill_bytes(&mut buf[..width])?;
            let mut raw = [0u8; 8];
            raw[..width].copy_from_slice(&buf[..width]);
            let x = u64::from_le_bytes(raw);
            if x < threshold {
                return Ok(lo + (x % range) as i64);
            }
        }
    }

    /// Uniform double on the dyadic grid in `[0, 1)`: the top 53 bits of 8
    /// raw bytes (little-endian), divided by 2^53.
    pub fn read_double_unit(&mut self) -> Result<f64> {
        let mut buf = [0u8; 8];
        self.fill_bytes(&mut buf)?;
        let x = u64::from_le_bytes(buf);
        Ok((x >> 11) as f64 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn read_double_in(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidRange { lo, hi });
        }
        let v = lo + (hi - lo) * self.read_double_unit()?;
        // Guard the half-open contract against rounding at the top end.
        Ok(if v >= hi { f64_before(hi) } else { v })
    }

    /// Backend metadata. Never fails for local backends; the remote backend
    /// queries its `/info` endpoint.
    pub fn describe(&self) -> Result<SourceDescriptor> {
        let version = env!("CARGO_PKG_VERSION").to_string();
        let desc = match (&self.backend, &self.inner) {
            (Backend::ByteStreamDevice { path }, _) => SourceDescriptor {
                backend_kind: "device".into(),
                library_version: version,
                serial_number: Some(path.display().to_string()),
                device_id: Some(0),
                device_type: Some("byte-stream".into()),
            },
            (Backend::RemoteQrng { .. }, Inner::Remote(client)) => {
                let info = client.fetch_info()?;
                SourceDescriptor {
                    backend_kind: "remote".into(),
                    library_version: info.version,
                    serial_number: Some(info.serial),
                    device_id: Some(0),
                    device_type: Some(info.device_type),
                }
            }
            (backend, _) => SourceDescriptor {
                backend_kind: backend.kind().into(),
                library_version: version,
                serial_number: None,
                device_id: None,
                device_type: None,
            },
        };
        Ok(desc)
    }
}

/// Smallest byte width whose space covers `range` values.
pub(crate) fn scaled_width(range: u64) -> usize {
    debug_assert!(range >= 2 && range <= 1 << 32);
    let mut width = 1;
    while width < 4 && (1u64 << (8 * width)) < range {
        width += 1;
    }
    width
}

/// Largest multiple of `range` within the sampled byte-width space; raw
/// draws at or above it are rejected, so accepted draws are exactly uniform.
pub(crate) fn scaled_threshold(range: u64) -> u64 {
    let total = 1u64 << (8 * scaled_width(range));
    total - total % range
}

fn f64_before(x: f64) -> f64 {
    // Largest double strictly below x (x finite, > 0 in our use).
    f64::from_bits(x.to_bits() - 1)
}

/// Mutex-guarded adapter for sharing one source between threads.
///
/// Each read locks for the duration of the call, so interleavings are
/// serialized but their order is up to the scheduler; deterministic seeded
/// runs should keep one owner per source instead.
#[derive(Debug, Clone)]
pub struct SharedEntropySource(Arc<Mutex<EntropySource>>);

impl SharedEntropySource {
    pub fn new(src: EntropySource) -> Self {
        Self(Arc::new(Mutex::new(src)))
    }

    pub fn read_bytes(&self, n: usize) -> Result<Vec<u8>> {
        self.0.lock().expect("entropy source poisoned").read_bytes(n)
    }

    pub fn read_int_in(&self, lo: i64, hi: i64) -> Result<i64> {
        self.0
            .lock()
            .expect("entropy source poisoned")
            .read_int_in(lo, hi)
    }

    pub fn read_double_unit(&self) -> Result<f64> {
        self.0
            .lock()
            .expect("entropy source poisoned")
            .read_double_unit()
    }

    pub fn read_double_in(&self, lo: f64, hi: f64) -> Result<f64> {
        self.0
            .lock()
            .expect("entropy source poisoned")
            .read_double_in(lo, hi)
    }

    pub fn describe(&self) -> Result<SourceDescriptor> {
        self.0.lock().expect("entropy source poisoned").describe()
    }

    pub fn byte_counter(&self) -> u64 {
        self.0.lock().expect("entropy source poisoned").byte_counter()
    }
}
