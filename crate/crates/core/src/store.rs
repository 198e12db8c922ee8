//! One JSON document per chart run, replaced atomically by write-rename.
//!
//! Writers to the same id are serialized by a per-id lock; readers see the
//! last committed file.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, PoisonError};

use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::monitor::ChartState;

#[derive(Debug)]
pub struct JsonStore {
    root: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-')
}

impl JsonStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(JsonStore {
            root,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, id: &str) -> Result<PathBuf> {
        if !valid_id(id) {
            return Err(Error::NotFound(id.to_string()));
        }
        Ok(self.root.join(format!("{id}.json")))
    }

    fn lock_for(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(PoisonError::into_inner);
        locks.entry(id.to_string()).or_default().clone()
    }

    fn write(&self, state: &ChartState) -> Result<()> {
        let path = self.path(&state.id)?;
        let mut tmp = NamedTempFile::new_in(&self.root)?;
        serde_json::to_writer_pretty(&mut tmp, state)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }

    pub fn insert(&self, state: &ChartState) -> Result<()> {
        let lock = self.lock_for(&state.id);
        let _guard = lock.lock().unwrap_or_else(PoisonError::into_inner);
        self.write(state)
    }

    pub fn get(&self, id: &str) -> Result<ChartState> {
        let path = self.path(id)?;
        match fs::read(&path) {
            Ok(bytes) => Ok(serde_json::from_slice(&bytes)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::NotFound(id.to_string())),
            Err(e) => Err(e.into()),
        }
    }

    /// Read-modify-write under the id's lock. Nothing is written when `f` fails.
    pub fn update<T>(&self, id: &str, f: impl FnOnce(&mut ChartState) -> Result<T>) -> Result<T> {
        let lock = self.lock_for(id);
        let _guard = lock.lock().unwrap_or_else(PoisonError::into_inner);
        let mut state = self.get(id)?;
        let out = f(&mut state)?;
        self.write(&state)?;
        Ok(out)
    }

    /// All runs, most recently updated first; ties break on id.
    pub fn list(&self) -> Result<Vec<ChartState>> {
        let mut states = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let path = entry?.path();
            let Some(id) = path
                .file_name()
                .and_then(|s| s.to_str())
                .and_then(|s| s.strip_suffix(".json"))
            else {
                continue;
            };
            if !valid_id(id) {
                continue;
            }
            match self.get(id) {
                Ok(state) => states.push(state),
                // Removed between read_dir and read.
                Err(Error::NotFound(_)) => {}
                Err(e) => return Err(e),
            }
        }
        states.sort_by(|a, b| b.updated_at.cmp(&a.updated_at).then_with(|| a.id.cmp(&b.id)));
        Ok(states)
    }
}
