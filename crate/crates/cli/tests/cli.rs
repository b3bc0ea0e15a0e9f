use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn msrforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msrforge"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn msrforge")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = msrforge(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn bundle(dir: &Path, r: &str, q: &str, name: &str) {
    let base = format!("{name}.base");
    ok(dir, &["gen-base", "--r", r, "--q", q, "--seed", "1", "-o", &base]);
    ok(dir, &["transform", "--base", &base, "-o", name]);
}

fn pseudo_random(len: usize) -> Vec<u8> {
    let mut x: u32 = 0x1234_5678;
    (0..len)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 17;
            x ^= x << 5;
            x as u8
        })
        .collect()
}

#[test]
fn blueprint_shows_paired_layout() {
    let tmp = TempDir::new().unwrap();
    let out = ok(tmp.path(), &["blueprint", "--r", "3", "--a", "-1"]);
    assert!(out.contains("P0 I1: -g1^(1) + g1^(0)\n"));
    assert_eq!(out.lines().count(), 9);
}

#[test]
fn generated_bundle_verifies() {
    let tmp = TempDir::new().unwrap();
    bundle(tmp.path(), "2", "5", "b.txt");
    let out = ok(tmp.path(), &["verify", "--bundle", "b.txt"]);
    assert_eq!(out, "mds: pass\nrepair: pass\nstructure: pass\n");
    ok(tmp.path(), &["verify", "--bundle", "b.txt", "--level", "base"]);
}

#[test]
fn minus_one_sugar() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["gen-base", "--r", "2", "--q", "5", "-o", "base.txt"]);
    ok(d, &["transform", "--base", "base.txt", "--a", "-1", "-o", "b.txt"]);
    assert!(fs::read_to_string(d.join("b.txt")).unwrap().contains("\ntheta 4\n"));
    let out = msrforge(d, &["transform", "--base", "base.txt", "--a", "1"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn tampered_bundle_fails_verification() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    bundle(d, "2", "5", "b.txt");
    let text = fs::read_to_string(d.join("b.txt")).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    // First row of A 0 0 becomes a copy of the second one.
    lines[4] = lines[5].clone();
    fs::write(d.join("t.txt"), lines.join("\n") + "\n").unwrap();
    let out = msrforge(d, &["verify", "--bundle", "t.txt"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("mds: FAIL"));
    assert!(stdout.contains("failed sub-block-singular"));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("msrforge: verification: sub-block-singular"));

    let out = msrforge(d, &["encode", "--bundle", "t.txt", "--in", "t.txt", "--out", "c"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parse_and_io_errors() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("junk.txt"), "hello\n").unwrap();
    let out = msrforge(d, &["verify", "--bundle", "junk.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("msrforge: parse: line 1"));
    let out = msrforge(d, &["verify", "--bundle", "missing.txt"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn encode_repair_reconstruct_round_trip() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    bundle(d, "2", "256", "b.txt");
    let data = pseudo_random(10_000);
    fs::write(d.join("file.bin"), &data).unwrap();
    ok(d, &["encode", "--bundle", "b.txt", "--in", "file.bin", "--out", "chunks"]);
    for node in 0..5 {
        let path = d.join(format!("chunks/file.bin.node{node}.bin"));
        let before = fs::read(&path).unwrap();
        fs::remove_file(&path).unwrap();
        let out = ok(d, &["repair", "--bundle", "b.txt", "--dir", "chunks", "--node", &node.to_string()]);
        assert!(out.starts_with(&format!("repair node={node} helpers=4 ")));
        assert!(out.contains(" optimal=true"));
        assert_eq!(fs::read(&path).unwrap(), before);
    }
    ok(d, &["reconstruct", "--bundle", "b.txt", "--dir", "chunks", "--nodes", "4,0,2", "-o", "out.bin"]);
    assert_eq!(fs::read(d.join("out.bin")).unwrap(), data);
    let out = Command::new(env!("CARGO_BIN_EXE_msrforge"))
        .current_dir(d)
        .args(["reconstruct", "--bundle", "b.txt", "--dir", "chunks", "--nodes", "1,3,2"])
        .output()
        .unwrap();
    assert_eq!(out.stdout, data);
}

#[test]
fn encode_refuses_non_byte_fields() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    bundle(d, "2", "5", "b.txt");
    fs::write(d.join("file.bin"), b"abc").unwrap();
    let out = msrforge(d, &["encode", "--bundle", "b.txt", "--in", "file.bin", "--out", "c"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("GF(256)"));
}

#[test]
fn simulate_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    bundle(d, "2", "5", "b.txt");
    fs::write(d.join("ops.txt"), "fail 0\nread 3\nfail 4\nread 2\nrepair 0\n").unwrap();
    let out = msrforge(d, &["simulate", "--bundle", "b.txt", "--stripes", "20", "--script", "ops.txt"]);
    assert_eq!(out.status.code(), Some(4), "repair with two failures must be refused");
    fs::write(d.join("ops.txt"), "fail 0\nread 3\nrepair 0\nfail 4\nrepair 4\n").unwrap();
    let args = ["simulate", "--bundle", "b.txt", "--stripes", "20", "--script", "ops.txt", "--seed", "9", "--kv"];
    let first = ok(d, &args);
    assert_eq!(first, ok(d, &args));
    assert!(first.contains("read stripe=3 failed=1 ok=true\n"));
    assert!(first.contains("\nratio=1.000000\n"));
    assert!(first.contains("\ndownloaded=320\n"));
    let human = ok(d, &args[..9]);
    assert!(human.contains("bandwidth ratio: 1.000000"));
}
