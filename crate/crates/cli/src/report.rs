use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::Failure;

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub file: String,
    pub schema: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

/// Output directory plus the manifest being accumulated for it.
pub struct Bundle {
    dir: PathBuf,
    started: Instant,
    started_unix: u64,
    tables: Vec<Table>,
    pub checks: Vec<Check>,
    timings: Vec<(String, f64)>,
    pub summary: serde_json::Map<String, Value>,
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, body: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

impl Bundle {
    pub fn new(dir: PathBuf) -> Result<Self, Failure> {
        fs::create_dir_all(&dir).map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))?;
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Bundle {
            dir,
            started: Instant::now(),
            started_unix,
            tables: Vec::new(),
            checks: Vec::new(),
            timings: Vec::new(),
            summary: serde_json::Map::new(),
        })
    }

    fn write(&self, file: &str, body: &[u8]) -> Result<(), Failure> {
        let path = self.dir.join(file);
        write_atomic(&path, body).map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
    }

    /// CSV payload; the schema is its header line.
    pub fn csv(&mut self, file: &str, body: String) -> Result<(), Failure> {
        let schema = body.lines().next().unwrap_or("").to_string();
        self.write(file, body.as_bytes())?;
        self.tables.push(Table { file: file.into(), schema });
        Ok(())
    }

    pub fn json(&mut self, file: &str, value: &Value) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
        self.write(file, text.as_bytes())?;
        self.tables.push(Table { file: file.into(), schema: "json".into() });
        Ok(())
    }

    pub fn check(&mut self, name: impl Into<String>, value: f64, tolerance: f64, pass: bool) {
        self.checks.push(Check { name: name.into(), pass, value, tolerance });
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timings.push((stage.into(), t.elapsed().as_secs_f64()));
        out
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn status_csv(&self) -> String {
        let mut s = String::from("check,pass,value,tolerance\n");
        for c in &self.checks {
            s.push_str(&format!("{},{},{:.16e},{:.16e}\n", c.name, c.pass, c.value, c.tolerance));
        }
        s
    }

    pub fn finish(mut self, command: &str, config: &Value, exit_code: i32) -> Result<(), Failure> {
        let body = self.status_csv();
        self.csv("status.csv", body)?;
        let timings: serde_json::Map<String, Value> = self.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let manifest = json!({
            "command": command,
            "config": config,
            "versions": { "dbar-core": dbar_core::VERSION, "dbar-cli": env!("CARGO_PKG_VERSION") },
            "threads": rayon::current_num_threads(),
            "started_unix": self.started_unix,
            "elapsed_s": self.started.elapsed().as_secs_f64(),
            "timings_s": timings,
            "tables": self.tables,
            "status": self.checks,
            "summary": self.summary,
            "exit_code": exit_code,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
        self.write("manifest.json", text.as_bytes())
    }
}
