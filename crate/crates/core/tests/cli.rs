use std::path::PathBuf;
use std::process::{Command, Output};

fn groups_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("groups")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vagrowth"))
        .args(args)
        .output()
        .expect("spawn vagrowth")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json stdout")
}

fn path(name: &str) -> String {
    groups_dir().join(name).to_str().unwrap().to_string()
}

#[test]
fn validate_accepts_bundled_groups() {
    for name in ["zn.json", "z_phi_neg.json", "dihedral.json", "klein.json"] {
        let out = run(&["validate", &path(name)]);
        assert!(out.status.success(), "{name}");
        assert_eq!(stdout_json(&out)["valid"], serde_json::json!(true));
    }
}

#[test]
fn validate_reports_broken_associativity() {
    let src = std::fs::read_to_string(path("klein.json")).unwrap();
    let mut desc: serde_json::Value = serde_json::from_str(&src).unwrap();
    for m in desc["mult"].as_array_mut().unwrap() {
        if m["left"] == "b" && m["right"] == "b" {
            m["x"] = serde_json::json!([3, 1]);
        }
    }
    let dir = std::env::temp_dir().join("vagrowth-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("assoc.json");
    std::fs::write(&file, desc.to_string()).unwrap();
    let out = run(&["validate", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["valid"], serde_json::json!(false));
    let text = v["errors"].to_string();
    assert!(text.contains("associativity"), "{text}");
    assert!(text.contains("(b, b, b)"), "{text}");
}

#[test]
fn growth_zn_closed_form() {
    let out = run(&["growth", &path("zn.json"), "--terms", "5"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["num"], serde_json::json!([1, 2, 1]));
    assert_eq!(v["den"], serde_json::json!([1, -3, 3, -1]));
    assert_eq!(v["coefficients"], serde_json::json!([1, 5, 13, 25, 41]));
}

#[test]
fn twisted_z_negation_closed_form() {
    let out = run(&["twisted", &path("z_phi_neg.json"), "--endo", "neg", "--terms", "4"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["num"], serde_json::json!([1, 1]));
    assert_eq!(v["den"], serde_json::json!([1, -1]));
    assert_eq!(v["coefficients"], serde_json::json!([1, 2, 2, 2]));
    assert_eq!(v["patterns"], serde_json::json!(1));
}

#[test]
fn relative_even_class() {
    let out = run(&[
        "relative",
        &path("z_phi_neg.json"),
        "--endo",
        "neg",
        "--element",
        "",
        "--terms",
        "6",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["coefficients"], serde_json::json!([1, 1, 3, 3, 5, 5]));
}

#[test]
fn emitted_series_round_trips() {
    let out = run(&["growth", &path("zn.json"), "--terms", "10"]);
    let v = stdout_json(&out);
    let to_poly = |key: &str| {
        vagrowth::ratfun::Polynomial::new(
            v[key]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| c.as_i64().unwrap().into())
                .collect(),
        )
    };
    let s = vagrowth::ratfun::RationalSeries::new(to_poly("num"), to_poly("den")).unwrap();
    let coeffs: Vec<i64> = s
        .expand(10)
        .unwrap()
        .iter()
        .map(|c| i64::try_from(c).unwrap())
        .collect();
    assert_eq!(serde_json::json!(coeffs), v["coefficients"]);
}

#[test]
fn oracle_csv_table() {
    let out = run(&["oracle", &path("z_phi_neg.json"), "--endo", "neg", "--radius", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "radius,beta,classes\n0,1,1\n1,3,2\n2,5,2\n3,7,2\n");
}

#[test]
fn check_agrees_on_small_examples() {
    for (name, endo) in [("z_phi_neg.json", "neg"), ("z_phi_neg.json", "dbl"), ("zn.json", "id")] {
        let out = run(&["check", &path(name), "--endo", endo, "--radius", "6"]);
        assert!(out.status.success(), "{name} {endo}: {:?}", out);
    }
}

#[test]
fn exit_codes() {
    let dir = std::env::temp_dir().join("vagrowth-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("malformed.json");
    std::fs::write(&file, "{\"n\": 0}").unwrap();
    let out = run(&["growth", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["twisted", &path("zn.json"), "--endo", "nope"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["growth", &path("klein.json"), "--pattern-cap", "2"]);
    assert_eq!(out.status.code(), Some(3));
}
