//! Run manifests and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use crate::config::LabConfig;

pub fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let res = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    res
}

/// Collects what one subcommand run produced.
pub struct Run {
    pub command: String,
    started: u128,
    pub outputs: Vec<PathBuf>,
    pub summary: Map<String, Value>,
}

impl Run {
    pub fn start(command: &str) -> Self {
        Self { command: command.into(), started: unix_ms(), outputs: Vec::new(), summary: Map::new() }
    }

    /// Atomically writes an output file and records it.
    pub fn emit(&mut self, path: PathBuf, bytes: &[u8]) -> std::io::Result<()> {
        write_atomic(&path, bytes)?;
        self.outputs.push(path);
        Ok(())
    }

    pub fn record(&mut self, key: &str, value: Value) {
        self.summary.insert(key.into(), value);
    }

    pub fn manifest_path(&self, cfg: &LabConfig) -> PathBuf {
        cfg.out.join(format!("{}.manifest.json", self.command))
    }

    pub fn finish(&self, cfg: &LabConfig, threads: usize, exit_status: i32, error: Option<&str>) -> std::io::Result<PathBuf> {
        let config: Map<String, Value> = cfg.pairs().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect();
        let m = json!({
            "tool": "signlab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config_hash": cfg.hash(),
            "config": config,
            "threads": threads,
            "started_unix_ms": self.started,
            "finished_unix_ms": unix_ms(),
            "outputs": self.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "summary": self.summary,
            "exit_status": exit_status,
            "error": error,
        });
        let path = self.manifest_path(cfg);
        let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}
