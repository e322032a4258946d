use serde_json::Value;
use std::process::{Command, Output};

fn pfg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfg")).args(args).output().expect("run pfg")
}

fn json_line(out: &Output) -> Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn params_reports_default_tower() {
    let out = pfg(&["params"]);
    assert!(out.status.success());
    let v = json_line(&out);
    assert_eq!(v["N_v"], 144);
    assert_eq!(v["N_u"], 82944);
}

#[test]
fn params_file_selects_small_tower() {
    let dir = std::env::temp_dir().join(format!("pfg-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("small.toml");
    std::fs::write(&path, "m_base = 4\nk_mult = 2\n").unwrap();
    let out = pfg(&["--params-file", path.to_str().unwrap(), "params"]);
    assert!(out.status.success());
    assert_eq!(json_line(&out)["N_v"], 16);
}

#[test]
fn gauss_sum_brute_and_closed_agree() {
    let out = pfg(&["gauss-sum", "--a", "-2", "--b", "4", "--M", "144"]);
    assert!(out.status.success());
    let v = json_line(&out);
    assert_eq!(v["agree"], true);
    assert!(v["coeff_normal_form"].as_str().unwrap().contains("e8^"));
}

#[test]
fn complex_backend_agrees() {
    let out = pfg(&["--backend", "complex", "gauss-sum", "--a", "3", "--b", "-3", "--M", "576"]);
    assert!(out.status.success());
    assert_eq!(json_line(&out)["agree"], true);
}

#[test]
fn errors_exit_with_one() {
    let out = pfg(&["gauss-sum", "--a", "5", "--M", "16"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json_line(&out)["error"].is_string());
    let out = pfg(&["qe", "--expr", "sum x . e(x^3/2N @V)"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn inner_of_descriptors() {
    let s = r#"{"domain":"V","coeff":"1","form":[-1,0,0],"p_param":0}"#;
    let out = pfg(&["inner", "--state1", s, "--state2", s, "--kind", "e"]);
    assert!(out.status.success());
    assert_eq!(json_line(&out)["normal_form"], "6 * sqrt(2) * j^0 * e8^7 * e(0)");
}

#[test]
fn evolve_emits_descriptor() {
    let s = r#"{"domain":"V","coeff":"1/12","form":[-1,0,0],"p_param":0}"#;
    let out = pfg(&["evolve", "--t", "2", "--state", s]);
    assert!(out.status.success());
    let v = json_line(&out);
    assert_eq!(v["state"]["domain"], "V");
    assert!(v["state"]["form"].is_array());
}

#[test]
fn checks_pass() {
    for args in [
        &["weyl-check"][..],
        &["wick-check", "--pairs", "5", "--kind", "e"],
        &["wick-check", "--pairs", "5", "--kind", "h"],
        &["qe", "--expr", "int a . e((-a^2 + 2*a*x)/2N @V)", "--assign", "x=5"],
    ] {
        let out = pfg(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn limit_and_ho_report_values() {
    let v = json_line(&pfg(&["limit", "--A", "2", "--kind", "h", "--N-seq", "144,576"]));
    assert_eq!(v["finite_values"].as_array().unwrap().len(), 2);
    let v = json_line(&pfg(&["ho", "--omega", "1", "--t", "0.5", "--x", "0.2", "--x0", "-0.1"]));
    assert!(v["kernel"]["re"].is_number());
    let out = pfg(&["ho", "--omega", "1", "--t", "0", "--x", "0", "--x0", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sm_compose_renders_kernels() {
    let v = json_line(&pfg(&["sm-compose", "--A", "-1", "--B", "1", "--C", "-1"]));
    assert!(v["composed"].as_str().unwrap().contains("@U"));
}
