use std::process::{Command, Output};

fn eavesdrop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eavesdrop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(eavesdrop(&["incoherent", "--steps", "3"]).status.code(), Some(0));
    assert_eq!(
        eavesdrop(&["incoherent", "--d-min", "0.3", "--d-max", "0.1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(eavesdrop(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(eavesdrop(&["coherent", "--objective", "speed"]).status.code(), Some(1));

    let broken = write(
        &dir,
        "broken.json",
        r#"{"type":"coherent","A":0.9,"A1":0.9,"A2":0.9,"B":0.1,"B1":0,"B2":0,"B3":0,"C":0,"C1":0,"C2":0}"#,
    );
    let out = eavesdrop(&["simulate", &broken, "--shots", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("relation 1"));
    assert_eq!(eavesdrop(&["validate", &broken]).status.code(), Some(2));

    let ok = write(&dir, "ok.json", r#"{"type":"incoherent","D":0.25,"D1":0.125}"#);
    assert_eq!(eavesdrop(&["validate", &ok]).status.code(), Some(0));
    let missing = dir.path().join("absent.json");
    assert_eq!(
        eavesdrop(&["validate", missing.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("curve.csv");
    let printed = eavesdrop(&["incoherent", "--steps", "11"]).stdout;
    let out = eavesdrop(&["incoherent", "--steps", "11", "--out", target.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(std::fs::read(&target).unwrap(), printed);
}

#[test]
fn simulate_json_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(&dir, "opt.json", r#"{"type":"incoherent","D":0.25,"D1":0.125}"#);
    let args = ["simulate", &file, "--shots", "20000", "--seed", "3", "--format", "json"];
    let a = eavesdrop(&args);
    assert_eq!(a.stdout, eavesdrop(&args).stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["seed"], 3);
        if let Some(z) = v["z_score"].as_f64() {
            assert!(z.abs() <= 3.0, "{line}");
        }
    }
}
