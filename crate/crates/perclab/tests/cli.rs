//! Drives the compiled binary through its subcommands and checks files,
//! exit codes and reproducibility from manifests.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn perclab(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perclab"))
        .args(args)
        .arg("--out")
        .arg(out_dir)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}"))
}

#[test]
fn simulate_counts_and_determinism() {
    let dir = TempDir::new().unwrap();
    let out = perclab(
        &[
            "simulate",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=1.0",
            "--set",
            "tree.depth=3",
            "--set",
            "tree.seed=5",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let summary = read(dir.path(), "summary.txt");
    assert!(summary.contains("count_1=4"));
    assert!(summary.contains("count_2=16"));
    assert!(summary.contains("count_3=64"));
    assert!(summary.contains("survived=1"));
    let tree_a = read(dir.path(), "tree.txt");

    // depth 0: only the root
    let dir0 = TempDir::new().unwrap();
    let out = perclab(
        &[
            "simulate",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=0.4",
            "--set",
            "tree.depth=0",
        ],
        dir0.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(read(dir0.path(), "summary.txt").contains("count_0=1"));

    // identical seed: identical dump bytes
    let dir2 = TempDir::new().unwrap();
    let out = perclab(
        &[
            "simulate",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=1.0",
            "--set",
            "tree.depth=3",
            "--set",
            "tree.seed=5",
        ],
        dir2.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(tree_a, read(dir2.path(), "tree.txt"));
}

#[test]
fn unknown_key_rejected_by_name() {
    let dir = TempDir::new().unwrap();
    let out = perclab(
        &[
            "simulate",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=0.5",
            "--set",
            "bogus.key=1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bogus.key"), "{err}");
}

#[test]
fn certify_exit_codes() {
    // certified: exit 0 and a record
    let dir = TempDir::new().unwrap();
    let out = perclab(
        &[
            "certify",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=0.75",
            "--set",
            "certify.angles=pi/3",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let cert_file = read(dir.path(), "certificates.jsonl");
    assert!(cert_file.starts_with("{\"format\":\"perclab-certificates\""));
    assert!(cert_file.contains("\"certified\":true"));

    // not-found: exit 3, record echoes r_max
    let dir = TempDir::new().unwrap();
    let out = perclab(
        &[
            "certify",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=0.4",
            "--set",
            "certify.angles=pi/4",
            "--set",
            "certify.r_max=4",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let cert_file = read(dir.path(), "certificates.jsonl");
    assert!(cert_file.contains("\"certified\":false"));
    assert!(cert_file.contains("\"r_max\":4"));

    // axis angle: exit 2 (outside the oblique domain)
    let dir = TempDir::new().unwrap();
    let out = perclab(
        &[
            "certify",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=0.75",
            "--set",
            "certify.angles=pi/2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("axis"), "{err}");

    // budget cut: exit 4
    let dir = TempDir::new().unwrap();
    let out = perclab(
        &[
            "certify",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=0.75",
            "--set",
            "certify.angles=pi/3",
            "--set",
            "certify.budget=2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn certify_then_replay_chain() {
    let certs = TempDir::new().unwrap();
    let out = perclab(
        &[
            "certify",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=1.0",
            "--set",
            "certify.angles=1.1",
        ],
        certs.path(),
    );
    assert_eq!(out.status.code(), Some(0));

    let replay_dir = TempDir::new().unwrap();
    let cert_path = certs.path().join("certificates.jsonl");
    let out = perclab(
        &[
            "replay",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=1.0",
            "--set",
            "tree.depth=6",
            "--set",
            "tree.seed=0",
            "--set",
            &format!("replay.cert={}", cert_path.display()),
            "--set",
            "replay.n_max=2",
        ],
        replay_dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let replay_file = read(replay_dir.path(), "replay.jsonl");
    assert!(replay_file.starts_with("{\"format\":\"perclab-replay\""));
    assert!(replay_file.contains("\"passed\":true"));
}

#[test]
fn sweep_small_range() {
    let dir = TempDir::new().unwrap();
    let out = perclab(
        &[
            "sweep",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=0.9",
            "--set",
            "sweep.start=1.0",
            "--set",
            "sweep.end=1.01",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sweep_file = read(dir.path(), "sweep.jsonl");
    assert!(sweep_file.starts_with("{\"format\":\"perclab-sweep\""));
    assert!(sweep_file.contains("\"j_lo\""));
    assert!(!sweep_file.contains("failure_at"));
}

#[test]
fn campaign_outputs_and_manifest_reproducibility() {
    let dir = TempDir::new().unwrap();
    let args = [
        "campaign",
        "--set",
        "matrix.m=2",
        "--set",
        "matrix.p=0.8",
        "--set",
        "campaign.depth=6",
        "--set",
        "campaign.count_depth=4",
        "--set",
        "campaign.trials=25",
        "--set",
        "campaign.seed=9",
        "--set",
        "campaign.angles=1.2",
    ];
    let out = perclab(&args, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "results.csv");
    assert!(csv.starts_with("#format perclab-campaign-csv v1"));
    assert!(read(dir.path(), "aggregates.json").contains("survival_frequency"));

    // re-running from the manifest alone reproduces the outputs
    let dir2 = TempDir::new().unwrap();
    let manifest_path = dir.path().join("manifest.txt");
    let out = Command::new(env!("CARGO_BIN_EXE_perclab"))
        .args(["campaign", "--config"])
        .arg(&manifest_path)
        .arg("--out")
        .arg(dir2.path())
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv, read(dir2.path(), "results.csv"));
    assert_eq!(
        read(dir.path(), "aggregates.json"),
        read(dir2.path(), "aggregates.json")
    );
}

#[test]
fn render_golden_behavior() {
    let dir = TempDir::new().unwrap();
    let args = [
        "render",
        "--set",
        "matrix.m=2",
        "--set",
        "matrix.p=1.0",
        "--set",
        "tree.depth=2",
        "--set",
        "tree.seed=0",
        "--set",
        "render.angle=pi/3",
    ];
    let out = perclab(&args, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = read(dir.path(), "figure.svg");
    // 16 level-2 squares plus the outline
    assert_eq!(svg.matches("<rect").count(), 17);

    // byte-identical on rerun
    let dir2 = TempDir::new().unwrap();
    let out = perclab(&args, dir2.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(svg, read(dir2.path(), "figure.svg"));

    // empty tree renders cleanly
    let dir3 = TempDir::new().unwrap();
    let out = perclab(
        &[
            "render",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=0.0",
            "--set",
            "tree.depth=2",
            "--set",
            "render.angle=1.0",
        ],
        dir3.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let svg = read(dir3.path(), "figure.svg");
    assert_eq!(svg.matches("<rect").count(), 1);

    // radial center form
    let dir4 = TempDir::new().unwrap();
    let out = perclab(
        &[
            "render",
            "--set",
            "matrix.m=2",
            "--set",
            "matrix.p=0.9",
            "--set",
            "tree.depth=3",
            "--set",
            "render.center=-10,-10",
            "--set",
            "render.kind=coradial",
        ],
        dir4.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
