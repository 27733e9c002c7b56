use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "rank = 2\ntorus_n = 8\ns_intervals = 24\ns_len = 3\ndt = 2e-3\nt_end = 0.1\nmonitor_every = 10\nsnapshots = true\n";

fn g2hym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_g2hym")).args(args).env("SOURCE_DATE_EPOCH", "1700000000").output().unwrap()
}

fn flow(dir: &Path, cfg: &str) -> Output {
    let c = dir.join("run.cfg");
    fs::write(&c, cfg).unwrap();
    let out = dir.join("out");
    g2hym(&["flow-run", "--config", c.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

#[test]
fn algebra_selftest_passes() {
    let o = g2hym(&["algebra-selftest"]);
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("identities checked") && !s.contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(g2hym(&["flow-run", "--config", "missing.cfg", "--out", "x"]).status.code(), Some(2));
    assert_eq!(g2hym(&["algebra-selftest", "--bogus"]).status.code(), Some(2));
    assert_eq!(g2hym(&["monad", "--c", "0"]).status.code(), Some(2));
    assert_eq!(g2hym(&[]).status.code(), Some(2));
}

#[test]
fn flow_run_then_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let o = flow(tmp.path(), SMALL);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("out");
    for f in ["manifest.json", "trace.csv", "trace.json", "final.bin", "final.bin.json", "config.cfg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(csv.starts_with("t,step,sup_e,"));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], true);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    for d in ["energy", "n-functional", "claim"] {
        let o = g2hym(&["diagnostics", d, "--trace", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{d}: {}", String::from_utf8_lossy(&o.stderr));
        let _: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    }
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(flow(a.path(), SMALL).status.success());
    assert!(flow(b.path(), SMALL).status.success());
    for f in ["manifest.json", "trace.csv", "trace.json", "final.bin"] {
        assert_eq!(fs::read(a.path().join("out").join(f)).unwrap(), fs::read(b.path().join("out").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn failed_monitor_exits_one_with_its_name() {
    // A non-flat reference metric with no twist has no e^{−s} envelope.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{SMALL}twist_amplitude = 0\nh0 = smooth\nh0_amplitude = 0.3\nmonitors = decay\n");
    let o = flow(tmp.path(), &cfg);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("decay"));
    let m = fs::read_to_string(tmp.path().join("out/manifest.json")).unwrap();
    assert!(m.contains("\"passed\": false"));
}

#[test]
fn monad_report() {
    let o = g2hym(&["monad", "--c", "1", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rank"], 2);
    assert_eq!(v["chern"]["coeffs"], serde_json::json!(["1", "0", "1", "0"]));
    assert_eq!(v["exactness"]["composition_vanishes"], true);
    assert_eq!(v["exactness"]["full_rank_points"], 100);
}
