use std::path::Path;
use std::process::{Command, Output};

fn conewave(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(args)
        .current_dir(dir)
        .env_remove("CONEWAVE_THREADS")
        .output()
        .expect("binary runs")
}

fn manifest(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("manifest is JSON")
}

#[test]
fn bounds_csv_has_hash_header_and_exact_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = conewave(&["bounds", "--d", "3", "--alpha-grid", "0.1:3.9:0.1", "--q", "2", "-o", "b.csv"], dir.path());
    assert!(out.status.success());
    let m = manifest(&out);
    let text = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let hash = m["config_hash"].as_str().unwrap();
    assert!(text.starts_with(&format!("# config_hash={hash}\n")));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    let header: Vec<&str> = rows[0].split(',').collect();
    let lo = header.iter().position(|h| *h == "beta_lower_cho").unwrap();
    let hi = header.iter().position(|h| *h == "beta_upper_cho").unwrap();
    assert_eq!(rows.len(), 40);
    for row in &rows[1..] {
        let c: Vec<&str> = row.split(',').collect();
        let (a, b): (f64, f64) = (c[lo].parse().unwrap(), c[hi].parse().unwrap());
        assert!((a - b).abs() <= 1e-12, "{row}");
    }
}

#[test]
fn decay_scan_point_mass() {
    let dir = tempfile::tempdir().unwrap();
    let out = conewave(&["decay-scan", "--measure", "point", "--d", "2", "--R", "4:64"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&out);
    let beta = m["summary"]["beta_hat"].as_f64().unwrap();
    assert!(beta.abs() <= 0.05, "{beta}");
    // Default output name is derived from the subcommand and hash.
    let name = format!("decay-scan-{}.csv", m["config_hash"].as_str().unwrap());
    assert!(dir.path().join(name).exists());
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["decoupling-check", "--seed", "9", "--trials", "2", "--points", "3000"];
    let a = conewave(&[&args[..], &["-o", "a.csv"]].concat(), dir.path());
    let b = conewave(&[&args[..], &["-o", "b.csv"]].concat(), dir.path());
    assert!(a.status.success() && b.status.success());
    let fa = std::fs::read(dir.path().join("a.csv")).unwrap();
    let fb = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Missing seed on a randomized run.
    assert_eq!(conewave(&["decoupling-check"], dir.path()).status.code(), Some(2));
    // Out-of-range parameter.
    assert_eq!(conewave(&["bounds", "--d", "1"], dir.path()).status.code(), Some(2));
    // Unknown flag, rejected by the parser.
    assert_eq!(conewave(&["bounds", "--nope"], dir.path()).status.code(), Some(2));
    // Pixel budget guard.
    let out = conewave(&["kakeya-check", "--seed", "1", "--delta", "0.001"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    // Nothing written on failure.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# bounds run\nd = 4\nq = 4\nalpha_grid = 1:2:0.5\n").unwrap();
    let out = conewave(&["bounds", "--config", "run.cfg", "--d", "5", "-o", "x.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&out);
    assert_eq!(m["config"]["d"], "5");
    assert_eq!(m["config"]["q"], "4");
    assert_eq!(m["config"]["alpha-grid"], "1:2:0.5");
    assert_eq!(m["summary"]["points"], 3);

    std::fs::write(dir.path().join("bad.cfg"), "d = four\n").unwrap();
    assert_eq!(conewave(&["bounds", "--config", "bad.cfg"], dir.path()).status.code(), Some(2));
    assert_eq!(conewave(&["bounds", "--config", "missing.cfg"], dir.path()).status.code(), Some(2));
}

#[test]
fn json_output_and_env_threads() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(["lattice-counterexample", "--R", "16", "--eps", "0.1", "--rho", "0.1", "--format", "json", "-o", "c.json"])
        .current_dir(dir.path())
        .env("CONEWAVE_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(manifest(&out)["threads"], 2);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(v["subcommand"], "lattice-counterexample");
    assert!(v["summary"]["pairing"]["modulus"].as_f64().unwrap() > 0.0);
    assert_eq!(v["config_hash"], manifest(&out)["config_hash"]);
}
