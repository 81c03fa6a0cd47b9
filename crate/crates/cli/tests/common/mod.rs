#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

pub fn equate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equate"))
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str]) -> Output {
    let out = equate(args);
    assert!(
        out.status.success(),
        "equate {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Small synthetic inputs plus the bundle and snapshot built from them.
pub struct Fixture {
    pub dir: TempDir,
}

impl Fixture {
    pub fn inputs(&self) -> PathBuf {
        self.dir.path().join("in")
    }
    pub fn bundle(&self) -> PathBuf {
        self.dir.path().join("bundle/bundle.json")
    }
    pub fn snapshot(&self) -> PathBuf {
        self.dir.path().join("snap/snapshot.json")
    }
}

pub fn build_fixture(n_languages: usize) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let n = n_languages.to_string();
    ok(&["synth", "--out", p(&root.join("in")), "--n-languages", &n, "--n-countries", "20"]);
    ok(&["ingest", "--input-dir", p(&root.join("in")), "--out", p(&root.join("bundle"))]);
    ok(&["snapshot", "--bundle", p(&root.join("bundle/bundle.json")), "--out", p(&root.join("snap"))]);
    Fixture { dir }
}

pub fn shared() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| build_fixture(300))
}

/// Plain HTTP/1.1 GET; returns (status line, headers+body text).
pub fn http_get(addr: &str, path: &str) -> (String, Vec<u8>) {
    use std::io::{Read, Write};
    let mut s = std::net::TcpStream::connect(addr).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut buf = Vec::new();
    s.read_to_end(&mut buf).unwrap();
    split_response(&buf)
}

/// Splits a raw HTTP/1.1 response into its head and decoded body.
pub fn split_response(buf: &[u8]) -> (String, Vec<u8>) {
    let split = buf.windows(4).position(|w| w == b"\r\n\r\n").expect("header terminator");
    let head = String::from_utf8_lossy(&buf[..split]).into_owned();
    let mut body = buf[split + 4..].to_vec();
    if head.to_ascii_lowercase().contains("transfer-encoding: chunked") {
        body = dechunk(&body);
    }
    (head, body)
}

/// Header value from a response head, matched case-insensitively.
pub fn header<'a>(head: &'a str, name: &str) -> Option<&'a str> {
    head.lines().skip(1).find_map(|l| {
        let (k, v) = l.split_once(':')?;
        k.trim().eq_ignore_ascii_case(name).then(|| v.trim())
    })
}

/// Every file under `dir`, keyed by relative path.
pub fn all_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn dechunk(mut b: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    loop {
        let eol = b.windows(2).position(|w| w == b"\r\n").unwrap();
        let size = usize::from_str_radix(std::str::from_utf8(&b[..eol]).unwrap().trim(), 16).unwrap();
        if size == 0 {
            return out;
        }
        out.extend_from_slice(&b[eol + 2..eol + 2 + size]);
        b = &b[eol + 2 + size + 2..];
    }
}

/// Runs `equate serve` on a free port until dropped.
pub struct Server {
    pub child: std::process::Child,
    pub addr: String,
}

impl Server {
    pub fn start(snapshot: &Path) -> Server {
        let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let addr = format!("127.0.0.1:{port}");
        let child = Command::new(env!("CARGO_BIN_EXE_equate"))
            .args(["serve", "--snapshot", p(snapshot), "--addr", &addr])
            .stderr(std::process::Stdio::null())
            .spawn()
            .unwrap();
        for _ in 0..200 {
            if std::net::TcpStream::connect(&addr).is_ok() {
                return Server { child, addr };
            }
            std::thread::sleep(std::time::Duration::from_millis(25));
        }
        panic!("server did not start");
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        self.child.kill().ok();
        self.child.wait().ok();
    }
}
