//! End-to-end checks of the `wf` binary: subcommand output, exit codes,
//! config precedence.

use std::io::Write;
use std::process::Command;

fn wf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wf"))
}

fn run_json(args: &[&str]) -> serde_json::Value {
    let out = wf().args(args).output().expect("spawn wf");
    assert!(
        out.status.success(),
        "wf {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

#[test]
fn group_twisted_1_2_is_z2() {
    let v = run_json(&["group", "1", "2", "twisted"]);
    assert_eq!(v["rank"], 0);
    assert_eq!(v["torsion"], serde_json::json!([2]));
}

#[test]
fn group_dump_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rel.mtx");
    let _ = run_json(&["group", "1", "2", "twisted", "--dump-matrix", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate integer general"));
    let counts: Vec<usize> = text
        .lines()
        .nth(1)
        .unwrap()
        .split_whitespace()
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(counts[1], 2); // generators of T²∞(1)
}

#[test]
fn eta_apply_sums_over_roots() {
    let v = run_json(&["eta", "apply", "<(1,2),3>"]);
    assert_eq!(v["degree"], 1);
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 3);
    // X₃⊗[X₁,X₂] appears with coefficient +1
    assert!(terms
        .iter()
        .any(|t| t["bracket"] == "(3,(1,2))" && t["coeff"] == 1));
}

#[test]
fn milnor_whitehead_and_longitude_flag() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"m":2,"n":2,"items":[{{"omega":1,"inf":"(1,2)"}}]}}"#).unwrap();
    let v = run_json(&["milnor", f.path().to_str().unwrap()]);
    assert_eq!(v["n"], 2);
    assert_eq!(v["total"]["terms"].as_array().unwrap().len(), 2);
    let l1 = run_json(&["milnor", f.path().to_str().unwrap(), "--longitude", "1"]);
    assert_eq!(l1["degree"], 3);
}

#[test]
fn arf_classical() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"m":1,"n":2,"items":[{{"omega":1,"inf":"(1,1)"}}]}}"#).unwrap();
    let v = run_json(&["arf", f.path().to_str().unwrap()]);
    assert_eq!(v["arf"]["k"], 1);
    assert_eq!(v["arf"]["terms"], serde_json::json!(["1"]));
}

#[test]
fn realize_borromean() {
    let v = run_json(&["realize", "<(1,2),3>"]);
    let steps = v["steps"].as_array().unwrap();
    assert_eq!(steps[0]["op"], "start-hopf");
    assert_eq!(steps[1]["op"], "bing-double");
    assert_eq!(steps[1]["component"], 2);
}

#[test]
fn validation_exit_code_2() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"m":2,"n":1,"items":[{{"omega":1,"inf":"1"}}]}}"#).unwrap();
    let out = wf().args(["milnor", f.path().to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_exit_code_3() {
    let out = wf()
        .args(["group", "3", "6", "twisted", "--generator-cap", "50"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn ranks_agree_both_routes() {
    let v = run_json(&["ranks", "3", "3"]);
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["dn_rank_formula"], row["dn_rank_kernel"]);
    }
}

#[test]
fn config_file_env_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("wf.toml");
    std::fs::write(&cfg, "generator_cap = 10\n").unwrap();
    // file alone: cap 10 → resource error
    let out = wf()
        .args(["--config", cfg.to_str().unwrap(), "group", "2", "4", "twisted"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // env overrides file
    let out = wf()
        .args(["--config", cfg.to_str().unwrap(), "group", "2", "4", "twisted"])
        .env("WF_GENERATOR_CAP", "100000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    // flag overrides env
    let out = wf()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--generator-cap",
            "10",
            "group",
            "2",
            "4",
            "twisted",
        ])
        .env("WF_GENERATOR_CAP", "100000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn thread_count_does_not_change_output() {
    let a = wf().args(["--threads", "1", "eta", "audit", "2", "2"]).output().unwrap();
    let b = wf().args(["--threads", "4", "eta", "audit", "2", "2"]).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn text_output_mode() {
    let out = wf().args(["--output", "text", "group", "1", "2", "twisted"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rank: 0"));
    assert!(text.contains("torsion: [2]"));
}

#[test]
fn eta_kernel_reports_generators() {
    let v = run_json(&["eta", "kernel", "2", "2"]);
    assert_eq!(v["rank"], 0);
    assert_eq!(v["torsion"], serde_json::json!([2, 2]));
    assert_eq!(v["verified"], true);
    let gens = v["symmetric_generators"].as_array().unwrap();
    assert_eq!(gens.len(), 2);
}

#[test]
fn milnor_order0_reports_linking_matrix() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(
        f,
        r#"{{"m":2,"n":0,"items":[{{"eps":1,"tree":"<1,2>"}},{{"omega":3,"inf":"1"}}]}}"#
    )
    .unwrap();
    let v = run_json(&["milnor", f.path().to_str().unwrap()]);
    assert_eq!(v["linking_matrix"], serde_json::json!([[3, 1], [1, 0]]));
}

#[test]
fn eta_apply_explicit_component_count() {
    // <1,2> over m=3 lands in a 3-component tensor space; labels above the
    // expression's maximum stay legal.
    let v = run_json(&["eta", "apply", "<1,2>", "--m", "3"]);
    assert_eq!(v["degree"], 0);
    assert_eq!(v["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn negative_twisting_accepted() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"m":2,"n":2,"items":[{{"omega":-1,"inf":"(1,2)"}}]}}"#).unwrap();
    let v = run_json(&["milnor", f.path().to_str().unwrap()]);
    // η is linear in ω: each coefficient is the negative of the ω=+1 case.
    for t in v["total"]["terms"].as_array().unwrap() {
        assert_eq!(t["coeff"], 1);
    }
}
