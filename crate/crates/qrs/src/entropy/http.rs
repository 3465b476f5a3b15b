//! HTTP client for the remote QRNG protocol.
//!
//! The service exposes two endpoints:
//!
//! * `GET {endpoint}/randbytes?n=<count>` -> `200`, `application/octet-stream`,
//!   body of exactly `<count>` bytes;
//! * `GET {endpoint}/info` -> `200`, JSON `{"version", "serial", "device_type"}`.
//!
//! Any non-200 status, transport failure, or timeout maps to
//! [`Error::DeviceUnavailable`].

use std::time::Duration;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
pub(crate) struct RemoteInfo {
    pub version: String,
    pub serial: String,
    pub device_type: String,
}

#[derive(Debug)]
pub(crate) struct RemoteClient {
    endpoint: String,
    agent: ureq::Agent,
}

impl RemoteClient {
    pub(crate) fn new(endpoint: &str, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        Self {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            agent: config.into(),
        }
    }

    fn get(&self, path: &str, limit: u64) -> Result<Vec<u8>> {
        let url = format!("{}{}", self.endpoint, path);
        let mut response = self
            .agent
            .get(&url)
            .call()
            .map_err(|e| Error::DeviceUnavailable(format!("{url}: {e}")))?;
        let status = response.status().as_u16();
        if status != 200 {
            return Err(Error::DeviceUnavailable(format!(
                "{url}: unexpected status {status}"
            )));
        }
        response
            .body_mut()
            .with_config()
            .limit(limit)
            .read_to_vec()
            .map_err(|e| Error::DeviceUnavailable(format!("{url}: body read failed: {e}")))
    }

    pub(crate) fn fetch_bytes(&self, n: usize) -> Result<Vec<u8>> {
        let body = self.get(&format!("/randbytes?n={n}"), n as u64 + 1)?;
        match body.len() {
            len if len == n => Ok(body),
            len if len < n => Err(Error::ShortRead {
                requested: n,
                got: len,
            }),
            _ => Err(Error::DeviceUnavailable(format!(
                "{}/randbytes: body longer than the {n} bytes requested",
                self.endpoint
            ))),
        }
    }

    pub(crate) fn fetch_info(&self) -> Result<RemoteInfo> {
        let body = self.get("/info", 1 << 20)?;
        serde_json::from_slice(&body).map_err(|e| {
            Error::DeviceUnavailable(format!("{}/info: malformed metadata: {e}", self.endpoint))
        })
    }
}
