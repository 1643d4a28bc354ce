//! A tiny in-process chat-completions server for tests and offline runs.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

/// What the server answers to one request.
#[derive(Clone, Debug, PartialEq)]
pub enum MockReply {
    /// 200 with the given assistant content.
    Content(String),
    /// An error status with a short body.
    Status(u16),
    /// Wait, then answer with the content.
    Slow(Duration, String),
    /// 200 with a body that is not a chat response.
    Malformed,
}

struct Shared {
    replies: Vec<MockReply>,
    served: AtomicUsize,
    bodies: Mutex<Vec<String>>,
    stop: AtomicBool,
}

/// Serves replies in order, repeating the last one once the list runs out.
/// Stops when dropped.
pub struct MockServer {
    addr: SocketAddr,
    shared: Arc<Shared>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(replies: Vec<MockReply>) -> std::io::Result<MockServer> {
        assert!(!replies.is_empty(), "mock server needs at least one reply");
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let shared = Arc::new(Shared {
            replies,
            served: AtomicUsize::new(0),
            bodies: Mutex::new(Vec::new()),
            stop: AtomicBool::new(false),
        });
        let worker = shared.clone();
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if worker.stop.load(Ordering::SeqCst) {
                    break;
                }
                if let Ok(stream) = stream {
                    let _ = serve(stream, &worker);
                }
            }
        });
        Ok(MockServer {
            addr,
            shared,
            handle: Some(handle),
        })
    }

    pub fn content(text: impl Into<String>) -> std::io::Result<MockServer> {
        MockServer::start(vec![MockReply::Content(text.into())])
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Requests answered so far.
    pub fn served(&self) -> usize {
        self.shared.served.load(Ordering::SeqCst)
    }

    /// Request bodies in arrival order.
    pub fn bodies(&self) -> Vec<String> {
        self.shared.bodies.lock().map(|b| b.clone()).unwrap_or_default()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.shared.stop.store(true, Ordering::SeqCst);
        // wake the accept loop
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn serve(stream: TcpStream, shared: &Shared) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut length = 0usize;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let trimmed = line.trim_end();
        if trimmed.is_empty() {
            break;
        }
        if let Some((name, value)) = trimmed.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; length];
    reader.read_exact(&mut body)?;
    if let Ok(mut bodies) = shared.bodies.lock() {
        bodies.push(String::from_utf8_lossy(&body).into_owned());
    }
    let n = shared.served.fetch_add(1, Ordering::SeqCst);
    let reply = shared.replies[n.min(shared.replies.len() - 1)].clone();
    let (status, payload) = match reply {
        MockReply::Content(text) => (200, completion(&text)),
        MockReply::Status(code) => (code, r#"{"error":"mock failure"}"#.to_string()),
        MockReply::Slow(delay, text) => {
            std::thread::sleep(delay);
            (200, completion(&text))
        }
        MockReply::Malformed => (200, "this is not json".to_string()),
    };
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status} Mock\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    )?;
    stream.flush()
}

fn completion(text: &str) -> String {
    serde_json::json!({
        "choices": [{"index": 0, "message": {"role": "assistant", "content": text}}],
        "usage": {"prompt_tokens": 10, "completion_tokens": 1},
    })
    .to_string()
}
