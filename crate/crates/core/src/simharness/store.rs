//! Append-only result store: one JSON line per finished cell, keyed by the
//! configuration hash. Re-running a stored configuration is a lookup.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, PowerRow, PowerTable};
use crate::error::{Error, Result};

pub const STORE_FILE: &str = "cells.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub hash: String,
    pub config: ExperimentConfig,
    pub rows: Vec<PowerRow>,
}

#[derive(Debug, Clone)]
pub struct ResultStore {
    path: PathBuf,
}

impl ResultStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self { path: dir.as_ref().join(STORE_FILE) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// All records by hash. A torn final line (interrupted write) is
    /// ignored; corruption anywhere else is an error.
    pub fn load(&self) -> Result<HashMap<String, CellRecord>> {
        let text = match fs::read_to_string(&self.path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(HashMap::new()),
            Err(e) => return Err(e.into()),
        };
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let mut out = HashMap::new();
        for (i, line) in lines.iter().enumerate() {
            match serde_json::from_str::<CellRecord>(line) {
                Ok(r) => {
                    out.insert(r.hash.clone(), r);
                }
                Err(_) if i + 1 == lines.len() && !text.ends_with('\n') => {}
                Err(e) => {
                    return Err(Error::Io(format!("{}: line {}: {e}", self.path.display(), i + 1)));
                }
            }
        }
        Ok(out)
    }

    pub fn get(&self, hash: &str) -> Result<Option<CellRecord>> {
        Ok(self.load()?.remove(hash))
    }

    pub fn append(&self, config: &ExperimentConfig, table: &PowerTable) -> Result<()> {
        let record = CellRecord { hash: config.hash(), config: config.clone(), rows: table.rows.clone() };
        let mut line = serde_json::to_string(&record).map_err(|e| Error::Io(e.to_string()))?;
        line.push('\n');
        // Drop a torn tail left by an interrupted write before appending.
        if let Ok(existing) = fs::read(&self.path) {
            if !existing.is_empty() && !existing.ends_with(b"\n") {
                let keep = existing.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
                OpenOptions::new().write(true).open(&self.path)?.set_len(keep as u64)?;
            }
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        f.write_all(line.as_bytes())?;
        f.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simharness::tests::small_config;
    use crate::simharness::run_experiment;

    #[test]
    fn round_trip_and_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::open(dir.path()).unwrap();
        assert!(store.load().unwrap().is_empty());
        let c = small_config();
        let t = run_experiment(&c).unwrap();
        store.append(&c, &t).unwrap();
        let got = store.get(&c.hash()).unwrap().unwrap();
        assert_eq!(got.rows, t.rows);
        assert_eq!(got.config, c);

        let mut f = OpenOptions::new().append(true).open(store.path()).unwrap();
        f.write_all(b"{\"hash\":\"tor").unwrap();
        assert_eq!(store.load().unwrap().len(), 1);
        let mut c2 = c.clone();
        c2.master_seed = 99;
        store.append(&c2, &t).unwrap();
        assert_eq!(store.load().unwrap().len(), 2);
    }
}
