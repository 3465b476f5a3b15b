//! Minimal in-process HTTP server speaking the remote-QRNG protocol, for
//! exercising the `http:` backend without a network.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

/// How the mock responds to `/randbytes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    /// Serve exactly the requested bytes.
    Normal,
    /// Serve half the requested bytes (protocol violation).
    ShortBody,
    /// Respond with this HTTP status and no useful body.
    Status(u16),
}

pub struct MockQrng {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
    pub requests_info: Arc<AtomicBool>,
}

/// Deterministic body pattern so clients can assert content.
pub fn pattern_bytes(n: usize) -> Vec<u8> {
    (0..n).map(|i| (i.wrapping_mul(7).wrapping_add(13) % 256) as u8).collect()
}

impl MockQrng {
    pub fn start(behavior: Behavior) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock server");
        let addr = listener.local_addr().unwrap();
        let shutdown = Arc::new(AtomicBool::new(false));
        let requests_info = Arc::new(AtomicBool::new(false));
        let flag = shutdown.clone();
        let info_flag = requests_info.clone();
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let _ = serve_one(stream, behavior, &info_flag);
            }
        });
        MockQrng {
            addr,
            shutdown,
            handle: Some(handle),
            requests_info,
        }
    }

    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Entropy spec string for this server.
    pub fn spec(&self) -> String {
        format!("http:{}", self.endpoint())
    }
}

impl Drop for MockQrng {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve_one(mut stream: TcpStream, behavior: Behavior, info_flag: &AtomicBool) -> std::io::Result<()> {
    stream.set_read_timeout(Some(std::time::Duration::from_secs(5)))?;
    let mut buf = Vec::new();
    let mut byte = [0u8; 1];
    // Read until the end of the request headers.
    while !buf.ends_with(b"\r\n\r\n") && buf.len() < 8192 {
        match stream.read(&mut byte)? {
            0 => break,
            _ => buf.push(byte[0]),
        }
    }
    let request = String::from_utf8_lossy(&buf);
    let path = request
        .lines()
        .next()
        .and_then(|line| line.split_whitespace().nth(1))
        .unwrap_or("/")
        .to_string();

    if let Behavior::Status(code) = behavior {
        let response = format!(
            "HTTP/1.1 {code} Error\r\nContent-Length: 0\r\nConnection: close\r\n\r\n"
        );
        stream.write_all(response.as_bytes())?;
        return Ok(());
    }

    if path == "/info" {
        info_flag.store(true, Ordering::SeqCst);
        let body =
            r#"{"version":"mock-1.2","serial":"QRS-MOCK-0001","device_type":"mock-qrng"}"#;
        let response = format!(
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        );
        stream.write_all(response.as_bytes())?;
    } else if let Some(query) = path.strip_prefix("/randbytes?n=") {
        let n: usize = query.parse().unwrap_or(0);
        let body = match behavior {
            Behavior::ShortBody => pattern_bytes(n / 2),
            _ => pattern_bytes(n),
        };
        let header = format!(
            "HTTP/1.1 200 OK\r\nContent-Type: application/octet-stream\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
            body.len()
        );
        stream.write_all(header.as_bytes())?;
        stream.write_all(&body)?;
    } else {
        let response =
            "HTTP/1.1 404 Not Found\r\nContent-Length: 0\r\nConnection: close\r\n\r\n";
        stream.write_all(response.as_bytes())?;
    }
    Ok(())
}

/// A local address with no listener behind it, for unreachable-endpoint
/// tests.
pub fn dead_endpoint() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}")
}
