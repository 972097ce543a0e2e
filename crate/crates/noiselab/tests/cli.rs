use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_noiselab"));
    c.env_remove("NOISELAB_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn only_subdir(root: &Path) -> PathBuf {
    let dirs: Vec<_> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).filter(|p| p.is_dir()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn lln_run_writes_manifest_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run(&["run", "--experiment", "lln_fb", "--jmax", "8", "--trials", "20", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let dir = only_subdir(&out);
    let name = dir.file_name().unwrap().to_string_lossy().into_owned();
    assert!(name.starts_with("lln_fb-"), "{name}");
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["verdict"], "pass");
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["config"]["jmax"], 8);
    assert!(!manifest["files"].as_array().unwrap().is_empty());
    assert!(dir.join("summary.json").exists());

    let r = run(&["report", dir.to_str().unwrap()]);
    assert_eq!(code(&r), 0);
    assert!(String::from_utf8_lossy(&r.stdout).contains("verdict: PASS"));
}

#[test]
fn report_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    // verdict is irrelevant here, only the checksums matter
    let o = run(&["run", "--experiment", "lln_besov", "--jmax", "6", "--trials", "5", "--out", tmp.path().to_str().unwrap()]);
    assert!(matches!(code(&o), 0 | 1));
    let dir = only_subdir(tmp.path());
    let (name, mut bytes) = csv_files(&dir).remove(0);
    bytes.push(b'\n');
    fs::write(dir.join(name), bytes).unwrap();
    assert_eq!(code(&run(&["report", dir.to_str().unwrap()])), 6);
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("r{i}"));
        let o = run(&[
            "run", "--experiment", "tail", "--jmax", "6", "--trials", "200", "--seed", "7", "--threads", threads, "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        outs.push(csv_files(&only_subdir(&out)));
    }
    assert!(!outs[0].is_empty());
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn env_var_sets_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["run", "--experiment", "lln_besov", "--jmax", "5", "--trials", "3"])
        .env("NOISELAB_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(matches!(code(&o), 0 | 1));
    only_subdir(tmp.path());
}

#[test]
fn config_file_and_flag_overlay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "experiment = \"lln_fb\"\njmax = 6\ntrials = 4\nseed = 3\n").unwrap();
    let out = tmp.path().join("o");
    let o = run(&["--config", cfg.to_str().unwrap(), "run", "--trials", "6", "--out", out.to_str().unwrap()]);
    assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_slice(&fs::read(only_subdir(&out).join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["trials"], 6);
    assert_eq!(m["config"]["jmax"], 6);
    assert_eq!(m["seed"], 3);
}

#[test]
fn error_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    // q outside its domain
    assert_eq!(code(&run(&["run", "--experiment", "lln_fb", "--q", "0.5", "--out", out])), 2);
    // cutoff too small for jmax
    assert_eq!(code(&run(&["run", "--experiment", "lln_fb", "--jmax", "6", "--cutoff", "64", "--out", out])), 2);
    assert_eq!(code(&run(&["run", "--experiment", "nope"])), 2);
    assert_eq!(code(&run(&["--config", "/nonexistent/x.toml", "run"])), 5);
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "experiment = \"lln_fb\"\nbogus_key = 1\n").unwrap();
    assert_eq!(code(&run(&["--config", bad.to_str().unwrap(), "run", "--out", out])), 6);
    assert_eq!(code(&run(&["norm", "--input", "/nonexistent/f.json", "--s", "0", "--p", "2"])), 5);
    let garbage = tmp.path().join("g.json");
    fs::write(&garbage, "{\"d\": 1}").unwrap();
    assert_eq!(code(&run(&["norm", "--input", garbage.to_str().unwrap(), "--s", "0", "--p", "2"])), 6);
    assert_eq!(code(&run(&["sample", "--d", "3", "--cutoff", "100000"])), 4);
}

#[test]
fn hand_written_field_norm() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("f.json");
    // single mode k=1 with unit amplitude: block j=0 under the sharp profile
    fs::write(&f, r#"{"d": 1, "N": 4, "coefficients": [[[1], 1.0, 0.0]]}"#).unwrap();
    let o = run(&["norm", "--input", f.to_str().unwrap(), "--s", "0", "--p", "2", "--q", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let value = v["value"].as_f64().unwrap();
    let expected = (2.0 * std::f64::consts::PI).sqrt();
    assert!((value - expected).abs() < 1e-12, "{value}");

    let o = run(&["norm", "--input", f.to_str().unwrap(), "--s", "0", "--p", "2", "--space", "fourier_besov"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["sharp_value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn sample_then_norm() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("w.json");
    let o = run(&["--seed", "11", "sample", "--d", "2", "--cutoff", "8", "--output", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let again = run(&["--seed", "11", "sample", "--d", "2", "--cutoff", "8"]);
    assert_eq!(String::from_utf8_lossy(&again.stdout).trim(), fs::read_to_string(&f).unwrap().trim());
    let o = run(&["norm", "--input", f.to_str().unwrap(), "--s", "-1", "--p", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0);
}
