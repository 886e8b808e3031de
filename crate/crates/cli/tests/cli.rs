use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn qdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdp")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn demo_pair_with_validation_exits_zero() {
    let out = tempfile::tempdir().unwrap();
    let (r, q) = (data("demo_ref.fasta"), data("demo_query.fasta"));
    let o = qdp(&[
        "run", "--reference", path_str(&r), "--query", path_str(&q),
        "--validate", "--shots", "20000", "--out", path_str(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("method1 PASS"));
    assert!(stdout.contains("method2 PASS"));
    let report: serde_like::Report = serde_like::read(&out.path().join("report.json"));
    assert!((11..=12).contains(&report.width));
    for f in ["report.csv", "circuit.qasm", "validation_method1.json", "validation_method2.json"] {
        assert!(out.path().join(f).exists(), "{f} missing");
    }
}

/// Just enough JSON digging to avoid a serde dependency in this crate.
mod serde_like {
    use std::path::Path;

    pub struct Report {
        pub width: usize,
    }

    pub fn read(path: &Path) -> Report {
        let text = std::fs::read_to_string(path).unwrap();
        let resources = &text[text.find("\"resources\"").unwrap()..];
        let w = &resources[resources.find("\"width\":").unwrap() + 8..];
        let digits: String = w.trim_start().chars().take_while(char::is_ascii_digit).collect();
        Report {
            width: digits.parse().unwrap(),
        }
    }
}

#[test]
fn unknown_backend_exits_two() {
    let out = tempfile::tempdir().unwrap();
    let o = qdp(&[
        "estimate", "--reference", path_str(&data("demo_ref.fasta")),
        "--backend", "no-such-machine", "--out", path_str(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config"));
}

#[test]
fn invalid_symbol_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.fa");
    std::fs::write(&bad, ">x\nACGN\n").unwrap();
    let o = qdp(&["build", "--reference", path_str(&bad), "--out", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 3"));
}

#[test]
fn compare_modes_reports_brute_and_minimized() {
    let out = tempfile::tempdir().unwrap();
    let o = qdp(&[
        "compare-modes", "--reference", path_str(&data("small_example.fasta")),
        "--out", path_str(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let row = stdout.lines().find(|l| l.starts_with("reference,")).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[2], "8");
    assert!(cols[3].parse::<usize>().unwrap() < 8);
    assert_eq!(cols[4], "24");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let r = data("demo_ref.fasta");
    for dir in [&a, &b] {
        let o = qdp(&[
            "run", "--reference", path_str(&r), "--backend", "superconducting-53",
            "--out", path_str(dir.path()),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["report.json", "report.csv", "circuit.qasm"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn every_verb_runs() {
    let out = tempfile::tempdir().unwrap();
    let r = data("demo_ref.fasta");
    for (verb, artifact) in [
        ("encode", "neqr.qasm"),
        ("build", "qpr.qasm"),
        ("transpile", "transpiled.json"),
        ("simulate", "simulation.json"),
        ("validate", "validation_method1.json"),
    ] {
        let o = qdp(&[
            verb, "--reference", path_str(&r), "--shots", "2000", "--mcx-mode", "single-ancilla",
            "--out", path_str(out.path()),
        ]);
        assert_eq!(o.status.code(), Some(0), "{verb}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.path().join(artifact).exists(), "{verb} did not write {artifact}");
    }
}
