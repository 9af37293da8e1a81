use std::path::Path;
use std::process::{Command, Output};

fn surflab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surflab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn combi_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let o = surflab(dir.path(), &["combi", "--n", "2", "--s", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["results"][0]["kind"], "combi");
    assert_eq!(r["results"][0]["count"], "6");
    assert_eq!(r["results"][0]["bound"]["holds"], true);
}

#[test]
fn lyapunov_subcommand_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = surflab(dir.path(), &["lyapunov", "--system", "cat", "--n", "200"]);
    assert!(o.status.success());
    let chi = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    let r = report(dir.path());
    let got = r["results"][0]["exponents"][0].as_f64().unwrap();
    assert!((got - chi).abs() < 1e-6);
    assert!(dir.path().join("0_lyapunov_trace.csv").exists());
    assert!(dir.path().join("metadata.json").exists());
}

#[test]
fn run_config_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"version": 1, "seed": 5, "pipeline": [
            {"kind": "oscille", "random": 10},
            {"kind": "combi", "n": 4, "s": 3}
        ]}"#,
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(surflab(&a, &["run", cfg.to_str().unwrap()]).status.success());
    assert!(surflab(&b, &["run", cfg.to_str().unwrap()]).status.success());
    let ra = std::fs::read(a.join("report.json")).unwrap();
    let rb = std::fs::read(b.join("report.json")).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(report(&a)["results"][0]["failures"], 0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, r#"{"version": 1, "seed": 5, "pipeline": []}"#).unwrap();
    let o = surflab(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pipeline"));

    let cfg = dir.path().join("broken.json");
    std::fs::write(&cfg, "{\"version\": 1,\n \"seed\": 5,\n \"pipeline\": [{\"kind\": \"combi\", \"n\": \"two\"}]}").unwrap();
    let o = surflab(dir.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = surflab(dir.path(), &["bounds", "--system", "cat", "--r", "1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = surflab(dir.path(), &["lyapunov", "--system", "henon", "--x", "1.9,1.9", "--n", "20"]);
    assert_eq!(o.status.code(), Some(3));
}
