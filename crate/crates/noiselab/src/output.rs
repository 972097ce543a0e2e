//! Run directories: CSV tables, `summary.json` and `manifest.json`, all
//! written through a temp file and a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{AppError, Result};
use crate::experiments::{Assertion, ExperimentOutput, ExperimentSummary, Verdict};

pub const SCHEMA_VERSION: u32 = 1;
pub const OUT_ENV: &str = "NOISELAB_OUT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub experiment: String,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub verdict: Verdict,
    pub assertions: Vec<Assertion>,
    pub files: Vec<FileEntry>,
}

/// `--out`, then `$NOISELAB_OUT`, then `./out`.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("out"),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        AppError::io(path, e)
    })
}

fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn fresh_dir(root: &Path, stem: &str) -> Result<PathBuf> {
    fs::create_dir_all(root).map_err(|e| AppError::io(root, e))?;
    for n in 0.. {
        let name = if n == 0 { stem.to_string() } else { format!("{stem}-{n}") };
        let dir = root.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(AppError::io(&dir, e)),
        }
    }
    unreachable!()
}

/// Writes every table, the summary and finally the manifest.
pub fn write_run(cfg: &ExperimentConfig, out: &ExperimentOutput, root: &Path, started: DateTime<Utc>) -> Result<(PathBuf, RunManifest)> {
    let hash = cfg.hash();
    let stem = format!("{}-{}-{}", cfg.experiment.name(), &hash[..8], started.format("%Y%m%dT%H%M%S%3fZ"));
    let dir = fresh_dir(root, &stem)?;
    let mut files = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        atomic_write(&dir.join(&name), &bytes)?;
        files.push(FileEntry { name, sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 });
        Ok(())
    };
    for t in &out.tables {
        put(format!("{}.csv", t.name), t.to_csv())?;
    }
    put("summary.json".into(), summary_json(&out.summary).into_bytes())?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        experiment: cfg.experiment.name().into(),
        config: serde_json::from_str(&cfg.canonical_json()).expect("config json"),
        config_hash: hash,
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").into(),
        started: timestamp(started),
        finished: timestamp(Utc::now()),
        verdict: out.summary.verdict,
        assertions: out.summary.assertions.clone(),
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest json");
    atomic_write(&dir.join("manifest.json"), text.as_bytes())?;
    Ok((dir, manifest))
}

pub fn summary_json(s: &ExperimentSummary) -> String {
    serde_json::to_string_pretty(s).expect("summary json")
}

/// Loads a manifest and checks every listed file against its checksum.
pub fn verify(dir: &Path) -> Result<RunManifest> {
    let path = dir.join("manifest.json");
    if !path.exists() {
        return Err(AppError::MissingConfig(path));
    }
    let text = fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| AppError::Schema { what: "manifest".into(), msg: e.to_string() })?;
    for f in &m.files {
        let p = dir.join(&f.name);
        let bytes = fs::read(&p).map_err(|e| AppError::io(&p, e))?;
        let got = sha256_hex(&bytes);
        if got != f.sha256 {
            return Err(AppError::Integrity(format!("{} has sha256 {got}, manifest says {}", f.name, f.sha256)));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        atomic_write(&p, b"one").unwrap();
        atomic_write(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn sha_known_value() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn root_precedence() {
        assert_eq!(output_root(Some(Path::new("x"))), PathBuf::from("x"));
    }
}
