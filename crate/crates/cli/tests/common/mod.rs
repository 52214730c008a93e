#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dare_testkit::test_manifest;

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dare"));
    c.env_remove("DARE_CONFIG").env_remove("RUST_LOG");
    c
}

/// A config in `dir` pointing at the bundled lexicons.
pub fn write_config(dir: &Path) -> PathBuf {
    let manifest = test_manifest().canonicalize().unwrap();
    let path = dir.join("dare.toml");
    std::fs::write(
        &path,
        format!(
            "lexicon_manifest = {:?}\n[service]\nbind = \"127.0.0.1:0\"\nruns_dir = \"runs\"\n",
            manifest.display().to_string()
        ),
    )
    .unwrap();
    path
}

pub fn run(config: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .unwrap()
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// One HTTP/1.1 request over a fresh connection; returns status and body.
pub fn http(addr: &str, method: &str, path: &str, body: Option<&[u8]>) -> (u16, String) {
    let mut s = TcpStream::connect(addr).unwrap();
    let body = body.unwrap_or(b"");
    let head = format!(
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    );
    s.write_all(head.as_bytes()).unwrap();
    let _ = s.write_all(body);
    let mut raw = Vec::new();
    let _ = s.read_to_end(&mut raw);
    let text = String::from_utf8_lossy(&raw).to_string();
    let status = text
        .split(' ')
        .nth(1)
        .and_then(|c| c.parse().ok())
        .unwrap_or(0);
    let body = text
        .split_once("\r\n\r\n")
        .map(|(_, b)| b.to_string())
        .unwrap_or_default();
    (status, body)
}
