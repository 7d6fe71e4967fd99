use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_fiberwalk");

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn ok_text(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn validate_reports_shape() {
    let v = ok_json(&["instance", "validate", &data("triangle.json")]);
    assert_eq!(v["d"], 2);
    assert_eq!(v["n_s"], 1);
    assert_eq!(v["bounding_box"][0], serde_json::json!(["0", "1"]));
}

#[test]
fn prepare_complete_and_moves() {
    let v = ok_json(&["prepare", &data("triangle.json")]);
    assert_eq!((v["n_h"].as_u64(), v["d_h"].as_u64()), (Some(15), Some(14)));
    assert!((v["lambda_h"].as_f64().unwrap() - 1.0 / 14.0).abs() < 1e-9);
    let v = ok_json(&[
        "prepare",
        &data("triangle.json"),
        "--strategy",
        "moves",
        "--moves",
        &data("unit_moves.txt"),
    ]);
    assert_eq!(v["d_h"], 4);
    assert_eq!(v["h_certified"], true);
}

#[test]
fn build_then_sample_from_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("b");
    let b = bundle.to_str().unwrap();
    let v = ok_json(&[
        "build",
        &data("triangle.json"),
        "-m",
        "4",
        "--seed",
        "3",
        "-o",
        b,
    ]);
    assert_eq!(v["num_vertices"], 240);
    assert_eq!(v["irrelevant_fraction"], "15/16");
    for f in ["instance.json", "h.rot", "e.rot", "manifest.json"] {
        assert!(bundle.join(f).exists(), "missing {f}");
    }
    let spec = ok_json(&["spectrum", b]);
    assert_eq!(spec["within_bound"], true);
    assert_eq!(spec["lambda_e"], spec["lambda_e_recomputed"]);

    // Sampling from the bundle matches rebuilding with the same seeds.
    let from_bundle = ok_text(&[
        "sample", b, "--count", "30", "--steps", "auto", "--seed", "9",
    ]);
    let rebuilt = ok_text(&[
        "sample",
        &data("triangle.json"),
        "-m",
        "4",
        "--count",
        "30",
        "--steps",
        "auto",
        "--seed",
        "9",
        "--build-seed",
        "3",
    ]);
    assert_eq!(from_bundle, rebuilt);
    let mut lines = from_bundle.lines();
    assert_eq!(lines.next(), Some("x1,x2"));
    for line in lines {
        let xy: Vec<i64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(xy[0] >= 0 && xy[1] >= 0 && xy[0] + xy[1] <= 4, "{line}");
    }
}

#[test]
fn sample_formats() {
    let v = ok_json(&[
        "sample",
        &data("triangle.json"),
        "-m",
        "4",
        "--count",
        "5",
        "--steps",
        "12",
        "--seed",
        "1",
        "--format",
        "json",
        "--unscale",
    ]);
    assert_eq!(v["steps"], 12);
    assert_eq!(v["points"].as_array().unwrap().len(), 5);
    let csv = ok_text(&[
        "sample",
        &data("triangle.json"),
        "-m",
        "4",
        "--count",
        "5",
        "--steps",
        "12",
        "--seed",
        "1",
        "--decimal",
        "--unscale",
    ]);
    for line in csv.lines().skip(1) {
        for x in line.split(',') {
            let x: f64 = x.parse().unwrap();
            assert!((0.0..=1.0).contains(&x));
        }
    }
}

#[test]
fn reduce_and_sample_tables() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let moves = dir.path().join("moves.txt");
    let map = dir.path().join("map.json");
    let v = ok_json(&[
        "reduce",
        "--design",
        &data("two_by_two_design.txt"),
        "--margins",
        &data("two_by_two_margins.txt"),
        "--moves",
        &data("two_by_two_moves.txt"),
        "-o",
        inst.to_str().unwrap(),
        "--moves-out",
        moves.to_str().unwrap(),
        "--map-out",
        map.to_str().unwrap(),
    ]);
    assert_eq!(v["d"], 1);
    assert_eq!(std::fs::read_to_string(&moves).unwrap(), "1 1\n1\n");
    let csv = ok_text(&[
        "sample",
        inst.to_str().unwrap(),
        "-m",
        "6",
        "--count",
        "40",
        "--steps",
        "30",
        "--seed",
        "2",
        "--lambda-target",
        "0.99",
        "--map",
        map.to_str().unwrap(),
    ]);
    for line in csv.lines().skip(1) {
        let x: Vec<i64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(x.len(), 4);
        assert!(x.iter().all(|&c| c >= 0));
        assert_eq!(
            (x[0] + x[1], x[2] + x[3], x[0] + x[2], x[1] + x[3]),
            (6, 6, 6, 6)
        );
    }
}

#[test]
fn diagnostics_commands() {
    let w = ok_json(&[
        "diagnose",
        "witness",
        &data("unit_interval.json"),
        "-m",
        "63",
        "--omega",
        "1",
        "--moves",
        &data("step_move.txt"),
    ]);
    assert_eq!(w["n"], 64);
    assert!(w["residual"].as_f64().unwrap() <= 0.1);
    assert!(w.get("w").is_none());

    let c = ok_json(&[
        "diagnose",
        "cut",
        &data("triangle.json"),
        "-m",
        "4",
        "--normal",
        "1,0",
        "--offset",
        "2",
        "--ell",
        "1/2",
    ]);
    // Points with x = 2 on the 15-point fiber: (2,0), (2,1), (2,2).
    assert_eq!(c["fraction"], "1/5");

    let g = ok_json(&[
        "diagnose",
        "gap",
        &data("unit_interval.json"),
        "--m",
        "3,5,9",
        "--baseline-moves",
        &data("step_move.txt"),
        "--seed",
        "1",
        "--lambda-target",
        "0.99",
    ]);
    for row in g.as_array().unwrap() {
        let m = row["m"].as_f64().unwrap();
        let want = (std::f64::consts::PI / (m + 1.0)).cos();
        assert!((row["lambda_baseline"].as_f64().unwrap() - want).abs() < 1e-6);
        assert!(
            row["lambda_zigzag"].as_f64().unwrap()
                <= row["lambda_e"].as_f64().unwrap() + row["lambda_h"].as_f64().unwrap() + 1e-6
        );
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(
        run(&["build", &data("triangle.json")]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["instance", "validate", "/nonexistent.json"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    // 2 x1 + 2 x2 = 1 has no integer solution.
    let design = dir.path().join("a.txt");
    let margins = dir.path().join("b.txt");
    std::fs::write(&design, "1 2\n2 2\n").unwrap();
    std::fs::write(&margins, "1 1\n1\n").unwrap();
    let out = run(&[
        "reduce",
        "--design",
        design.to_str().unwrap(),
        "--margins",
        margins.to_str().unwrap(),
        "-o",
        dir.path().join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let wide = dir.path().join("wide.txt");
    std::fs::write(&wide, "2 2\n2 0\n0 2\n").unwrap();
    let out = run(&[
        "prepare",
        &data("triangle.json"),
        "--strategy",
        "moves",
        "--moves",
        wide.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "build",
        &data("triangle.json"),
        "-m",
        "4",
        "--seed",
        "1",
        "--lambda-target",
        "0.0001",
    ]);
    assert_eq!(out.status.code(), Some(3));
    // lambda_E + lambda_H >= 1 leaves no automatic step count.
    let out = run(&[
        "sample",
        &data("unit_interval.json"),
        "-m",
        "3",
        "--count",
        "1",
        "--steps",
        "auto",
        "--seed",
        "1",
        "--lambda-target",
        "0.99",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&[
        "sample",
        &data("triangle.json"),
        "-m",
        "4",
        "--count",
        "1",
        "--steps",
        "many",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn base_bundle_needs_m_for_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("base");
    let b = b.to_str().unwrap();
    ok_json(&["prepare", &data("triangle.json"), "-o", b]);
    assert!(!Path::new(b).join("e.rot").exists());
    assert_eq!(
        run(&["sample", b, "--count", "2", "--steps", "5", "--seed", "1"])
            .status
            .code(),
        Some(1)
    );
    let csv = ok_text(&[
        "sample", b, "-m", "2", "--count", "2", "--steps", "5", "--seed", "1",
    ]);
    assert_eq!(csv.lines().count(), 3);
}
