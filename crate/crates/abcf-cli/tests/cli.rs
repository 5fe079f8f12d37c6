use serde_json::Value;
use std::process::{Command, Output};

fn abcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abcf")).args(args).env_remove("ABCF_SEED").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn echoed_config(out: &Output) -> String {
    let err = String::from_utf8_lossy(&out.stderr);
    err.lines().find_map(|l| l.strip_prefix("config: ")).expect("config echo").to_string()
}

#[test]
fn expand_example() {
    let out = abcf(&["expand", "--a", "-1/2", "--b", "1/2", "--x", "2/5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["digits"], serde_json::json!([0, -2, 2]));
}

#[test]
fn cycle_example() {
    let out = abcf(&["cycle", "--a", "-4/5", "--b", "2/5", "--which", "b"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["classification"], "Strong");
    assert_eq!(v["end"], "2");
}

#[test]
fn attractor_json_has_four_boxes() {
    let out = abcf(&["attractor", "--a", "-1", "--b", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["upper"].as_array().unwrap().len(), 2);
    assert_eq!(v["lower"].as_array().unwrap().len(), 2);
    assert_eq!(v["upper"][1]["x_lo"], "-1");
    assert_eq!(v["upper"][1]["y_f"], 1.0);
}

#[test]
fn usage_errors_exit_with_one() {
    let out = abcf(&["attractor", "--a", "-1/5", "--b", "2/5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("b - a >= 1"));
    let out = abcf(&["cycle", "--a", "1/2", "--b", "2", "--which", "a"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a <= 0"));
    assert_eq!(abcf(&["nonsense"]).status.code(), Some(1));
    assert_eq!(abcf(&["cycle", "--which", "b"]).status.code(), Some(1));
    assert_eq!(abcf(&["--help"]).status.code(), Some(0));
}

#[test]
fn failed_verification_exits_with_two() {
    // an impossible inside fraction forces the oracle check to fail
    let out = abcf(&["oracle", "--a", "-1", "--b", "1", "--points", "2000", "--min-inside", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn verify_passes_on_four_fifths_example() {
    let out = abcf(&["verify", "--a", "-4/5", "--b", "2/5", "--scan-grid", "20", "--scan-cap", "1000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["tiles"], true);
    assert_eq!(v["scan"]["coverage"], 1.0);
}

#[test]
fn measures_outside_simple_case_is_rejected() {
    let out = abcf(&["measures", "--a", "-4/5", "--b", "2/5", "--points", "100"]);
    assert_eq!(out.status.code(), Some(1));
    let out = abcf(&["measures", "--a", "-7/10", "--b", "4/5", "--points", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["report"]["ks_stat"].is_null());
    assert!((v["report"]["nu_mass"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn seed_env_overrides_flag_and_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("one.svg");
    let p2 = dir.path().join("two.svg");
    let p3 = dir.path().join("three.svg");
    let base = ["plot", "--a", "-4/5", "--b", "2/5", "--points", "3000", "--seed", "5"];
    let run = |path: &std::path::Path, env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_abcf"));
        c.args(base).args(["--out", path.to_str().unwrap()]).env_remove("ABCF_SEED");
        if let Some(s) = env {
            c.env("ABCF_SEED", s);
        }
        c.output().unwrap()
    };
    let o1 = run(&p1, None);
    let o2 = run(&p2, Some("6"));
    let o3 = run(&p3, Some("5"));
    assert!(o1.status.success() && o2.status.success() && o3.status.success());
    assert!(echoed_config(&o2).contains("\"seed\":6"));
    let (s1, s2, s3) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap(), std::fs::read(&p3).unwrap());
    assert_eq!(s1, s3);
    assert_ne!(s1, s2);
}

#[test]
fn echoed_config_replays_to_same_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cloud.svg");
    let out = abcf(&["plot", "--a", "-1/2", "--b", "1/2", "--points", "2000", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let first = std::fs::read(&out_path).unwrap();
    std::fs::remove_file(&out_path).unwrap();
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, echoed_config(&out)).unwrap();
    let replay = abcf(&["replay", cfg_path.to_str().unwrap()]);
    assert!(replay.status.success());
    assert_eq!(std::fs::read(&out_path).unwrap(), first);
}

#[test]
fn golden_preset_and_float_mode() {
    let out = abcf(&["cycle", "--preset", "golden-edge", "--which", "b"]);
    assert_eq!(json(&out)["classification"], "PeriodicNoCycle");
    let out = abcf(&["cycle", "--preset", "golden", "--mode", "float", "--which", "b"]);
    assert_eq!(out.status.code(), Some(1));
    let out = abcf(&["expand", "--mode", "float", "--a", "-1", "--b", "0", "--x", "-0.5", "--max-digits", "5"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn exceptional_short_plan() {
    let out = abcf(&["exceptional", "--plan", "m=3;2x1,1x2,1x3,1x2,1x2", "--target", "1e-6", "--finiteness-cap", "300"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["finiteness"]["ExceptionalSuspect"].is_object());
    assert!(v["enclosure"]["width_f"].as_f64().unwrap() < 1e-6);
}

#[test]
fn shallow_plan_is_not_flagged() {
    // three generations leave a rational representative whose orbits close up
    let out = abcf(&["exceptional", "--plan", "m=3;2x1,1x2,1x3", "--finiteness-cap", "300"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["finiteness"], "Finite");
}
