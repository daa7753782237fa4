#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

pub fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphereforge"))
        .current_dir(dir)
        .env_remove("SPHEREFORGE_THREADS")
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

/// Runs every subcommand in a fresh directory with the given thread count.
pub fn full_pipeline(threads: &str) -> Vec<(String, Vec<u8>)> {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let steps: [&[&str]; 9] = [
        &["design-uniform", "--d", "3", "--t", "3", "--r", "120", "--seed", "8", "--out", "u.json"],
        &["design-weighted", "--circle", "5", "--out", "c5.json"],
        &["design-weighted", "--points", "pts.txt", "--k", "4", "--out", "w.json"],
        &["verify", "c5.json", "--t", "3", "--out", "v.json"],
        &["instance", "--design", "c5.json", "--n", "8", "--seed", "9", "--count", "500", "--out", "i.json", "--samples", "s.csv"],
        &["sample", "--instance", "i.json", "--count", "300", "--seed", "2", "--out", "a.csv"],
        &["sample", "--null", "8", "--count", "300", "--seed", "2", "--out", "n.csv"],
        &["sq", "--instance", "i.json", "--degrees", "1,3,5", "--budget", "20000", "--seed", "3", "--out", "q.json", "--csv", "q.csv"],
        &["power", "--design", "c5.json", "--n", "8", "--degrees", "2,5", "--runs", "3", "--budget", "5000", "--out", "p.csv", "--record", "p.json"],
    ];
    let pts: String = (0..60)
        .map(|i| {
            let a = i as f64 * 0.7;
            let b = (i as f64 * 1.3).sin();
            let n = (1.0 + b * b).sqrt();
            format!("{} {} {}\n", a.cos() / n, a.sin() / n, b / n)
        })
        .collect();
    std::fs::write(d.join("pts.txt"), pts).unwrap();
    for args in steps {
        let mut full = vec!["--threads", threads];
        full.extend_from_slice(args);
        let out = run(d, &full);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    snapshot(d)
}

