use std::process::{Command, Output};

use serde_json::Value;

fn endslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_endslab")).args(args).env_remove("ENDSLAB_BUDGET").output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn growth_csv_carries_manifest() {
    let out = endslab(&["growth", "--group", r#"{"family":"z"}"#, "--rmax", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let (first, body) = text.split_once('\n').unwrap();
    let manifest: Value = serde_json::from_str(first.strip_prefix("# manifest: ").unwrap()).unwrap();
    assert_eq!(manifest["command"], "growth");
    assert_eq!(manifest["budget"]["used"], 21);
    assert_eq!(body.lines().next(), Some("r,sphere_size,ball_size"));
    assert!(body.lines().skip(2).all(|l| l.split(',').nth(1) == Some("2")));
    assert_eq!(body.lines().count(), 12);
}

#[test]
fn growth_at_radius_zero() {
    let out = endslab(&["growth", "--group", r#"{"family":"free","k":2}"#, "--rmax", "0", "--format", "json"]);
    let rows = json_of(&out)["report"]["rows"].clone();
    assert_eq!(rows, serde_json::json!([{"r": 0, "sphere_size": 1, "ball_size": 1}]));
}

#[test]
fn group_spec_from_file() {
    let path = std::env::temp_dir().join(format!("endslab-group-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"family":"product","left":{"family":"z"},"right":{"family":"cyclic_finite","m":2}}"#)
        .unwrap();
    let out = endslab(&["ends", "--group", path.to_str().unwrap(), "--rmax", "6"]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["report"]["classification"], "two");
}

#[test]
fn invalid_input_exits_2() {
    assert_eq!(
        endslab(&["growth", "--group", r#"{"family":"lamplighter","m":1}"#, "--rmax", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(endslab(&["growth", "--group", "{not json", "--rmax", "3"]).status.code(), Some(2));
    assert_eq!(endslab(&["end-depth", "--group", r#"{"family":"z"}"#, "--rmax", "0"]).status.code(), Some(2));
    let out = endslab(&["glpartition", "--input", "/nonexistent/space.json", "--a", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"exit_code\":2"));
}

#[test]
fn budget_flag_and_env() {
    let args = ["growth", "--group", r#"{"family":"free","k":3}"#, "--rmax", "20"];
    let mut with_flag = args.to_vec();
    with_flag.extend(["--budget", "1000"]);
    assert_eq!(endslab(&with_flag).status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_endslab")).args(args).env("ENDSLAB_BUDGET", "1000").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn end_depth_flags_two_ended_groups() {
    let out = endslab(&["end-depth", "--group", r#"{"family":"z"}"#, "--rmax", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = &json_of(&out)["report"];
    assert_eq!(report["profile"]["not_one_ended"], true);
    assert!(report["profile"]["warnings"][0].as_str().unwrap().starts_with("NotOneEnded"));
}

#[test]
fn criterion_demonstration_on_z() {
    let out = endslab(&["classify", "--group", r#"{"family":"z"}"#, "--mode", "criterion", "--a", "3", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["report"]["kind"], "demonstration_only");
}

#[test]
fn real_valued_metric_space() {
    let path = std::env::temp_dir().join(format!("endslab-space-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"points":["x","y","z"],"distances":[[0,0.5,900.25],[0.5,0,899.75],[900.25,899.75,0]]}"#)
        .unwrap();
    let out = endslab(&["glpartition", "--input", path.to_str().unwrap(), "--a", "3"]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(0));
    let p = &json_of(&out)["report"]["partition"];
    assert_eq!(p["blocks"], serde_json::json!([["x", "y"], ["z"]]));
    assert_eq!(p["D"], 1.0);
}

#[test]
fn timing_is_opt_in() {
    let args = ["growth", "--group", r#"{"family":"z"}"#, "--rmax", "3", "--format", "json"];
    assert!(json_of(&endslab(&args))["manifest"].get("wall_time_ms").is_none());
    let mut timed = args.to_vec();
    timed.push("--timing");
    assert!(json_of(&endslab(&timed))["manifest"]["wall_time_ms"].is_u64());
}
