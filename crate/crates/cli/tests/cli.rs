use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn jet_scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/jet.toml")
}

fn tvroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tvroute"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(cmd: &str, scenario: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec![
        cmd,
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let o = tvroute(&args);
    assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
}

fn error_json(o: &Output) -> Value {
    assert!(!o.status.success());
    serde_json::from_slice(&o.stderr).expect("stderr is one JSON object")
}

fn write_scenario(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("s.toml");
    fs::write(&p, body).unwrap();
    p
}

const STILL: &str = r#"
[field]
kind = "uniform"
u = 0.0
v = 0.0

[grid]
bounds = [0.0, 0.0, 4.0, 2.0]
cell = 0.5

[vehicle]
speed = 0.8

[mission]
starts = [[0.0, 1.0]]
goal = [4.0, 1.0]
"#;

#[test]
fn still_water_plan_costs_distance_over_speed() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), STILL);
    let out = dir.path().join("out");
    run_ok("plan", &sc, &out, &[]);
    let stats: Value = serde_json::from_str(&fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    let tt = stats[0]["travel_time"].as_f64().unwrap();
    assert!((tt - 4.0 / 0.8).abs() < 1e-12);
    let csv = fs::read_to_string(out.join("route_sp1.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("idx,x,y,t_arrival"));
}

#[test]
fn manifest_lists_every_artifact_with_its_digest() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(dir.path(), STILL);
    let out = dir.path().join("out");
    run_ok("smooth", &sc, &out, &["--algo", "tve", "--tol", "1e-5"]);
    let m: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "smooth");
    assert_eq!(m["algo"], "tve");
    assert_eq!(m["tol"].as_f64(), Some(1e-5));
    assert_eq!(m["scenario"]["search"]["delta_phi_max_deg"].as_f64(), Some(36.0));
    assert!(m["scenario"]["search"]["v_current_max"].is_number());
    let files = m["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["route_sp1.csv", "smoothed_sp1.csv", "smooth.json"]);
    for f in files {
        let bytes = fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn every_subcommand_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let sc = jet_scenario();
    for cmd in ["plan", "smooth", "departure", "oracle", "bench"] {
        let a = dir.path().join(format!("{cmd}-a"));
        let b = dir.path().join(format!("{cmd}-b"));
        let extra: &[&str] = if cmd == "oracle" { &["--start", "3"] } else { &[] };
        run_ok(cmd, &sc, &a, extra);
        let jobs: Vec<&str> = extra.iter().copied().chain(["--jobs", "2"]).collect();
        run_ok(cmd, &sc, &b, &jobs);
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(names.len() >= 2, "{cmd} wrote {names:?}");
        for n in names {
            assert_eq!(
                fs::read(a.join(&n)).unwrap(),
                fs::read(b.join(&n)).unwrap(),
                "{cmd}: {n:?} differs"
            );
        }
    }
}

#[test]
fn missing_scenario_is_reported_as_json() {
    let o = tvroute(&["plan", "--scenario", "/nonexistent/x.toml", "--out", "/tmp/unused"]);
    let e = error_json(&o);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(e["error"]["kind"], "invalid_input");
    assert!(e["error"]["message"].as_str().unwrap().contains("x.toml"));
}

#[test]
fn invalid_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cases = [
        (STILL.replace("goal = [4.0, 1.0]", "goal = [9.0, 1.0]"), "mission.goal"),
        (STILL.replace("speed = 0.8", "speed = -1.0"), "vehicle"),
        (
            STILL.replace(
                "cell = 0.5",
                "cell = 0.5\nsectors = 3\n[search]\ndelta_phi_max_deg = 0.0",
            ),
            "search.delta_phi_max_deg",
        ),
        (STILL.replace("cell = 0.5", "cel = 0.5"), "cel"),
        (format!("{STILL}\n[step]\ntol = -1.0\n"), "step"),
    ];
    for (body, field) in cases {
        let sc = write_scenario(dir.path(), &body);
        let o = tvroute(&[
            "plan",
            "--scenario",
            sc.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        let e = error_json(&o);
        let msg = e["error"]["message"].as_str().unwrap();
        assert!(msg.contains(field), "{field}: {msg}");
    }
}

#[test]
fn unreachable_goal_is_a_search_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = STILL
        .replace("u = 0.0\nv = 0.0", "u = 0.0\nv = 2.0")
        .replace("goal = [4.0, 1.0]", "goal = [4.0, 0.0]");
    let sc = write_scenario(dir.path(), &body);
    let out = dir.path().join("out");
    let o = tvroute(&[
        "plan",
        "--scenario",
        sc.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--algo",
        "tve",
    ]);
    let e = error_json(&o);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(e["error"]["kind"], "search");
}

#[test]
fn bad_flags_are_rejected() {
    let sc = jet_scenario();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let base = [
        "plan",
        "--scenario",
        sc.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    let o = tvroute(&[&base[..], &["--start", "6"]].concat());
    assert!(error_json(&o)["error"]["message"].as_str().unwrap().contains("--start"));
    let o = tvroute(&[&base[..], &["--tol", "0"]].concat());
    assert!(error_json(&o)["error"]["message"].as_str().unwrap().contains("--tol"));
    let o = tvroute(&[&base[..], &["--algo", "bogus"]].concat());
    assert!(!o.status.success());
}

#[test]
fn gridded_field_scenario_loads_relative_path() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,z,y,x,u,v\n");
    for t in [0.0, 10.0] {
        for y in [0.0, 1.0, 2.0] {
            for x in [0.0, 2.0, 4.0] {
                csv.push_str(&format!("{t},0,{y},{x},0.2,0\n"));
            }
        }
    }
    fs::write(dir.path().join("flow.csv"), csv).unwrap();
    let body = STILL.replace(
        "kind = \"uniform\"\nu = 0.0\nv = 0.0",
        "kind = \"grid\"\npath = \"flow.csv\"",
    );
    let sc = write_scenario(dir.path(), &body);
    let out = dir.path().join("out");
    run_ok("plan", &sc, &out, &[]);
    let stats: Value = serde_json::from_str(&fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    let tt = stats[0]["travel_time"].as_f64().unwrap();
    assert!((tt - 4.0 / 1.0).abs() < 1e-9, "{tt}");
    let m: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let vmax = m["scenario"]["search"]["v_current_max"].as_f64().unwrap();
    assert!((vmax - 0.2 * 1.01).abs() < 1e-12);
}
