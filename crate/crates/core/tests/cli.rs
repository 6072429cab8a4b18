use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use texsyn::pgm::{read_pgm, write_pgm, PgmFormat, PgmImage};

fn texsyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_texsyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_input(dir: &Path) -> String {
    let (w, h) = (24, 20);
    let img = PgmImage {
        width: w,
        height: h,
        maxval: 255,
        levels: (0..w * h).map(|i| ((i * 37 + i / w * 11) % 256) as u16).collect(),
    };
    let path = dir.join("in.pgm");
    fs::write(&path, write_pgm(&img, PgmFormat::Binary)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn synthesize_writes_identical_files_for_identical_argv() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(dir.path());
    let mut outputs = Vec::new();
    for name in ["a.pgm", "b.pgm"] {
        let out = dir.path().join(name);
        let res = texsyn(&[
            "synthesize",
            "--input",
            &input,
            "--output",
            out.to_str().unwrap(),
            "--w",
            "3",
            "--scheme",
            "spiral",
            "--weights",
            "kernel",
            "--b",
            "0.05",
            "--rng-seed",
            "42",
            "--out-width",
            "30",
            "--out-height",
            "26",
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        assert!(res.stdout.is_empty());
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let img = read_pgm(&outputs[0]).unwrap();
    assert_eq!((img.width, img.height, img.maxval), (30, 26, 255));
    let input_levels: std::collections::HashSet<u16> = read_pgm(&fs::read(&input).unwrap())
        .unwrap()
        .levels
        .into_iter()
        .collect();
    assert!(img.levels.iter().all(|l| input_levels.contains(l)));
}

#[test]
fn uniform_rule_and_ascii_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(dir.path());
    let out = dir.path().join("u.pgm");
    let res = texsyn(&[
        "synthesize",
        "--input",
        &input,
        "--output",
        out.to_str().unwrap(),
        "--w",
        "2",
        "--weights",
        "uniform",
        "--epsilon",
        "0.1",
        "--ascii",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let bytes = fs::read(&out).unwrap();
    assert!(bytes.starts_with(b"P2"));
    let img = read_pgm(&bytes).unwrap();
    assert_eq!((img.width, img.height), (24, 20));
}

#[test]
fn missing_input_is_a_runtime_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.pgm");
    let out = dir.path().join("out.pgm");
    let res = texsyn(&[
        "synthesize",
        "--input",
        missing.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--w",
        "3",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("nope.pgm"));
    assert!(!out.exists());
}

#[test]
fn malformed_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pgm");
    fs::write(&bad, b"P7 1 1 255 0").unwrap();
    let out = dir.path().join("out.pgm");
    let res = texsyn(&[
        "synthesize",
        "--input",
        bad.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--w",
        "2",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("bad.pgm"));
}

#[test]
fn usage_errors() {
    assert_eq!(
        texsyn(&["synthesize", "--input", "x", "--output", "y"]).status.code(),
        Some(2)
    );
    assert_eq!(
        texsyn(&["synthesize", "--input", "x", "--output", "y", "--w", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        texsyn(&[
            "synthesize",
            "--input",
            "x",
            "--output",
            "y",
            "--w",
            "3",
            "--epsilon",
            "-1"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        texsyn(&[
            "synthesize",
            "--input",
            "x",
            "--output",
            "y",
            "--w",
            "3",
            "--scheme",
            "zigzag"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(texsyn(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(texsyn(&["--help"]).status.code(), Some(0));
}

#[test]
fn consistency_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.json");
    let res = texsyn(&[
        "consistency",
        "--sizes",
        "8,16",
        "--replicates",
        "2",
        "--out-side",
        "20",
        "--rng-seed",
        "5",
        "--csv",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(res.stdout.is_empty());
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("scheme,T,b,replicate,statistic,value"));
    assert_eq!(lines.count(), 2 * 2 * 2);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "consistency");
    assert_eq!(summary["summary"].as_array().unwrap().len(), 4);
}

#[test]
fn counterexample_with_spec_file_and_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("iid.json");
    let iid = texsyn::lab::MmmSpec::iid(vec![0.0, 1.0], vec![0.3, 0.7], 2).unwrap();
    fs::write(&spec, iid.to_json().unwrap()).unwrap();
    let res = texsyn(&[
        "counterexample",
        "--spec",
        spec.to_str().unwrap(),
        "--sizes",
        "8",
        "--replicates",
        "1",
        "--out-side",
        "8",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("does not exhibit the counterexample"));

    let res = texsyn(&[
        "counterexample",
        "--sizes",
        "12",
        "--replicates",
        "2",
        "--out-side",
        "12",
        "--cmi-samples",
        "500",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(summary["constants"]["cmi_true"].as_f64().unwrap() > 0.01);
}
