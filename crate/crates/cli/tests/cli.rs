use std::path::PathBuf;
use std::process::{Command, Output};

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn hypo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn model(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn grushin_basis_has_heisenberg_relations() {
    let o = hypo(&["--model", &model("grushin.json"), "basis"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dimension"], 3);
    assert_eq!(v["words"].as_array().unwrap().len(), 3);
    let c = v["structure_constants"].as_array().unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!((c[0]["i"].as_u64(), c[0]["j"].as_u64(), c[0]["k"].as_u64()), (Some(1), Some(2), Some(3)));
    assert_eq!(c[0]["c"], "1");
}

#[test]
fn brackets_lists_anchored_fields() {
    let o = hypo(&["--model", &model("grushin.json"), "brackets"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,label,degree,field");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].ends_with(",2,1*d2"), "{}", lines[3]);
}

#[test]
fn hypo_check_reports_failure_at_the_axis() {
    let o = hypo(&["--model", &model("grushin.json"), "hypo-check", "--op", &model("d_ell_3.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("NOT maximal hypoelliptic at (0, 0)"), "{text}");
    assert!(text.contains("NOT maximal hypoelliptic at (0, 1)"), "{text}");
    assert!(!text.contains("NOT maximal hypoelliptic at (1, 0)"), "{text}");

    let o = hypo(&["--model", &model("grushin.json"), "hypo-check", "--op", &model("d_ell_2.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("NOT"));
}

#[test]
fn exact_symbol_on_a_character() {
    let o = hypo(&[
        "--model",
        &model("grushin.json"),
        "symbol",
        "--op",
        &model("d_ell_3.json"),
        "--point",
        "0,0",
        "--rep",
        "char:1,2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().nth(1).unwrap().split(',').next(), Some("-5"));
}

#[test]
fn malformed_model_names_the_schema_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"dimension": 2, "step": 2, "fields": [[[{"coeff": "1", "exponents": [0, 0]}], [{"coeff": "x", "exponents": [1, 0]}]]]}"#,
    )
    .unwrap();
    let o = hypo(&["--model", bad.to_str().unwrap(), "basis"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("$.fields[0][1][0].coeff"), "{err}");

    let o = hypo(&["--model", dir.path().join("missing.json").to_str().unwrap(), "basis"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(hypo(&["--model", &model("grushin.json"), "nope"]).status.code(), Some(1));
    assert_eq!(hypo(&["basis"]).status.code(), Some(1));
    let o = hypo(&["--model", &model("grushin.json"), "cones", "--point", "1,2,3"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(hypo(&["--help"]).status.code(), Some(0));
}

#[test]
fn solver_failure_exits_three() {
    let o = hypo(&[
        "--model",
        &model("grushin.json"),
        "cc-dist",
        "--from",
        "0,0",
        "--to",
        "0,1",
        "--steps",
        "2",
        "--restarts",
        "1",
        "--tol",
        "1e-14",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("d{i}.csv"));
            let o = hypo(&[
                "--model",
                &model("grushin.json"),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "7",
                "cc-dist",
                "--from",
                "0,0",
                "--to",
                "1/2,1/4",
            ]);
            assert_eq!(o.status.code(), Some(0));
            assert!(o.stdout.is_empty());
            std::fs::read(out).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);

    let a = hypo(&["--model", &model("grushin.json"), "cones", "--point", "0,0"]);
    let b = hypo(&["--model", &model("grushin.json"), "cones", "--point", "0,0"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn estimate_prints_header_and_classification() {
    let o = hypo(&[
        "--model",
        &model("grushin-torus.json"),
        "estimate",
        "--op",
        &model("d_ell_0.json"),
        "--test",
        &model("x1_squared.json"),
        "--K",
        "8,16,24,32",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# finite-K check"));
    assert_eq!(lines.next(), Some("K,C_K,spillover,slope,classification"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",bounded")), "{text}");
}

#[test]
fn hn_reports_both_definitions() {
    let o = hypo(&["--model", &model("grushin.json"), "hn", "--point", "0,0", "--functional", "0,0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["def2"]["member"], true);
    assert_eq!(v["def1"]["member"], true);
    let o = hypo(&["--model", &model("grushin.json"), "hn", "--point", "1,0", "--functional", "0,0,1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["def2"]["member"], false);
}
