use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::Fail;

/// Writes `<out>/<subcommand>.csv` and `<out>/<subcommand>.json`.
///
/// The CSV starts with two `#` lines: the resolved config and a timestamp.
/// Everything below them depends only on the config.
pub struct Reporter {
    config: RunConfig,
    timestamp: u64,
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Fail {
    Fail::Io(format!("{}: {e}", path.display()))
}

impl Reporter {
    pub fn new(config: &RunConfig) -> Result<Self, Fail> {
        fs::create_dir_all(&config.out).map_err(|e| io_fail(&config.out, e))?;
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Reporter { config: config.clone(), timestamp })
    }

    fn path(&self, ext: &str) -> PathBuf {
        self.config.out.join(format!("{}.{ext}", self.config.subcommand))
    }

    pub fn csv<T: Serialize>(&self, rows: &[T]) -> Result<PathBuf, Fail> {
        let path = self.path("csv");
        let mut file = fs::File::create(&path).map_err(|e| io_fail(&path, e))?;
        let echo = serde_json::to_string(&self.config).expect("config serializes");
        writeln!(file, "# config {echo}").map_err(|e| io_fail(&path, e))?;
        writeln!(file, "# timestamp {}", self.timestamp).map_err(|e| io_fail(&path, e))?;
        let mut w = csv::Writer::from_writer(file);
        for r in rows {
            w.serialize(r).map_err(|e| io_fail(&path, e))?;
        }
        w.flush().map_err(|e| io_fail(&path, e))?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, summary: &T) -> Result<PathBuf, Fail> {
        #[derive(Serialize)]
        struct Doc<'a, T> {
            config: &'a RunConfig,
            timestamp: u64,
            summary: &'a T,
        }
        let path = self.path("json");
        let doc = Doc { config: &self.config, timestamp: self.timestamp, summary };
        let text = serde_json::to_string_pretty(&doc).expect("summary serializes");
        fs::write(&path, text + "\n").map_err(|e| io_fail(&path, e))?;
        Ok(path)
    }
}
