//! File-backed document store.
//!
//! ```text
//! <root>/compositions/<id>.doc        composition document, stored verbatim
//! <root>/compositions/<id>.meta       owner and sharing flag
//! <root>/runs/<id>/record.doc         run record
//! <root>/runs/<id>/composition.doc    document as submitted
//! <root>/runs/<id>/outputs/*          files written by the run
//! ```
//!
//! Every file is written to a temporary sibling and renamed into place.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: unreadable record: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("run {run_id}: cannot go from {from} to {to}")]
    Transition {
        run_id: String,
        from: RunStatus,
        to: RunStatus,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", uuid::Uuid::new_v4().simple()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}

pub fn new_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric())
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct CompositionMeta {
    pub owner: String,
    pub shared: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Queued,
    Running,
    Succeeded,
    Failed,
}

impl RunStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, RunStatus::Succeeded | RunStatus::Failed)
    }

    /// Position in queued -> running -> terminal.
    pub fn rank(self) -> u8 {
        match self {
            RunStatus::Queued => 0,
            RunStatus::Running => 1,
            RunStatus::Succeeded | RunStatus::Failed => 2,
        }
    }

    pub fn can_become(self, next: RunStatus) -> bool {
        matches!(
            (self, next),
            (RunStatus::Queued, RunStatus::Running)
                | (RunStatus::Running, RunStatus::Succeeded)
                | (RunStatus::Running, RunStatus::Failed)
        )
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Queued => "queued",
            RunStatus::Running => "running",
            RunStatus::Succeeded => "succeeded",
            RunStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunRecord {
    pub run_id: String,
    pub composition_id: String,
    pub owner: String,
    /// Submission order, used to rebuild the FIFO queue after a restart.
    pub sequence: u64,
    pub status: RunStatus,
    pub submitted: DateTime<Utc>,
    pub started: Option<DateTime<Utc>>,
    pub finished: Option<DateTime<Utc>>,
    pub message: String,
    pub t_final: Option<f64>,
    /// Output files relative to the run's output directory.
    pub outputs: Vec<String>,
}

/// The on-disk store. Writes are serialized; reads go straight to disk.
#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    write_lock: Mutex<()>,
}

impl Store {
    pub fn open(root: &Path) -> Result<Store, StoreError> {
        for dir in [root.join("compositions"), root.join("runs")] {
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        Ok(Store {
            root: root.to_path_buf(),
            write_lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, ()> {
        self.write_lock.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn composition_path(&self, id: &str, ext: &str) -> Result<PathBuf, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::NotFound(format!("composition {id}")));
        }
        Ok(self.root.join("compositions").join(format!("{id}.{ext}")))
    }

    pub fn run_dir(&self, id: &str) -> Result<PathBuf, StoreError> {
        if !valid_id(id) {
            return Err(StoreError::NotFound(format!("run {id}")));
        }
        Ok(self.root.join("runs").join(id))
    }

    pub fn outputs_dir(&self, id: &str) -> Result<PathBuf, StoreError> {
        Ok(self.run_dir(id)?.join("outputs"))
    }

    fn read_file(path: &Path, what: String) -> Result<Vec<u8>, StoreError> {
        match fs::read(path) {
            Ok(bytes) => Ok(bytes),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::NotFound(what)),
            Err(e) => Err(StoreError::Io {
                path: path.to_path_buf(),
                source: e,
            }),
        }
    }

    fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: String) -> Result<T, StoreError> {
        let bytes = Self::read_file(path, what)?;
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StoreError> {
        let bytes = serde_json::to_vec_pretty(value).expect("records serialize");
        write_atomic(path, &bytes)
    }

    pub fn create_composition(&self, owner: &str, document: &[u8]) -> Result<String, StoreError> {
        let id = new_id();
        let _guard = self.lock();
        // metadata first: a document without one is never visible
        Self::write_json(
            &self.composition_path(&id, "meta")?,
            &CompositionMeta {
                owner: owner.to_string(),
                shared: false,
            },
        )?;
        write_atomic(&self.composition_path(&id, "doc")?, document)?;
        Ok(id)
    }

    pub fn composition(&self, id: &str) -> Result<(CompositionMeta, Vec<u8>), StoreError> {
        let what = format!("composition {id}");
        let doc = Self::read_file(&self.composition_path(id, "doc")?, what.clone())?;
        let meta = Self::read_json(&self.composition_path(id, "meta")?, what)?;
        Ok((meta, doc))
    }

    pub fn replace_composition(&self, id: &str, document: &[u8]) -> Result<(), StoreError> {
        let _guard = self.lock();
        let path = self.composition_path(id, "doc")?;
        if !path.exists() {
            return Err(StoreError::NotFound(format!("composition {id}")));
        }
        write_atomic(&path, document)
    }

    pub fn share_composition(&self, id: &str) -> Result<CompositionMeta, StoreError> {
        let _guard = self.lock();
        let path = self.composition_path(id, "meta")?;
        let mut meta: CompositionMeta = Self::read_json(&path, format!("composition {id}"))?;
        meta.shared = true;
        Self::write_json(&path, &meta)?;
        Ok(meta)
    }

    /// Stores a new queued run with its own copy of the document.
    pub fn create_run(
        &self,
        composition_id: &str,
        owner: &str,
        document: &[u8],
        sequence: u64,
    ) -> Result<RunRecord, StoreError> {
        let id = new_id();
        let dir = self.run_dir(&id)?;
        let record = RunRecord {
            run_id: id,
            composition_id: composition_id.to_string(),
            owner: owner.to_string(),
            sequence,
            status: RunStatus::Queued,
            submitted: Utc::now(),
            started: None,
            finished: None,
            message: String::new(),
            t_final: None,
            outputs: Vec::new(),
        };
        let _guard = self.lock();
        write_atomic(&dir.join("composition.doc"), document)?;
        Self::write_json(&dir.join("record.doc"), &record)?;
        Ok(record)
    }

    pub fn run(&self, id: &str) -> Result<RunRecord, StoreError> {
        Self::read_json(&self.run_dir(id)?.join("record.doc"), format!("run {id}"))
    }

    pub fn run_document(&self, id: &str) -> Result<Vec<u8>, StoreError> {
        Self::read_file(
            &self.run_dir(id)?.join("composition.doc"),
            format!("run {id}"),
        )
    }

    /// Applies `change` to the stored record, refusing any status change
    /// outside queued -> running -> terminal.
    pub fn update_run(
        &self,
        id: &str,
        change: impl FnOnce(&mut RunRecord),
    ) -> Result<RunRecord, StoreError> {
        let _guard = self.lock();
        let path = self.run_dir(id)?.join("record.doc");
        let mut record: RunRecord = Self::read_json(&path, format!("run {id}"))?;
        let before = record.status;
        change(&mut record);
        if record.status != before && !before.can_become(record.status) {
            return Err(StoreError::Transition {
                run_id: id.to_string(),
                from: before,
                to: record.status,
            });
        }
        Self::write_json(&path, &record)?;
        Ok(record)
    }

    /// Every readable run record. Directories without a record (a crash
    /// between creating the directory and writing the record) are skipped.
    pub fn runs(&self) -> Result<Vec<RunRecord>, StoreError> {
        let dir = self.root.join("runs");
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let entry = entry.map_err(io_err(&dir))?;
            let Some(id) = entry.file_name().to_str().map(str::to_string) else {
                continue;
            };
            match self.run(&id) {
                Ok(r) => out.push(r),
                Err(StoreError::NotFound(_)) => {}
                Err(e) => return Err(e),
            }
        }
        out.sort_by_key(|r| r.sequence);
        Ok(out)
    }

    /// Reads one output file; `name` must be listed in the run's manifest.
    pub fn run_output(&self, id: &str, name: &str) -> Result<Vec<u8>, StoreError> {
        let record = self.run(id)?;
        if !record.outputs.iter().any(|o| o == name) {
            return Err(StoreError::NotFound(format!("output {name} of run {id}")));
        }
        Self::read_file(
            &self.outputs_dir(id)?.join(name),
            format!("output {name} of run {id}"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_round_trip_is_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let doc = b"{ \"title\" : \"x\" }\n";
        let id = store.create_composition("ann", doc).unwrap();
        let (meta, back) = store.composition(&id).unwrap();
        assert_eq!(back, doc);
        assert_eq!(meta.owner, "ann");
        assert!(!meta.shared);
        assert!(store.share_composition(&id).unwrap().shared);
        assert!(matches!(
            store.composition("nope"),
            Err(StoreError::NotFound(_))
        ));
        assert!(matches!(
            store.composition("../x"),
            Err(StoreError::NotFound(_))
        ));
    }

    #[test]
    fn status_order_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let r = store.create_run("c", "ann", b"{}", 1).unwrap();
        let err = store
            .update_run(&r.run_id, |r| r.status = RunStatus::Succeeded)
            .unwrap_err();
        assert!(matches!(err, StoreError::Transition { .. }));
        store
            .update_run(&r.run_id, |r| r.status = RunStatus::Running)
            .unwrap();
        store
            .update_run(&r.run_id, |r| r.status = RunStatus::Failed)
            .unwrap();
        assert!(store
            .update_run(&r.run_id, |r| r.status = RunStatus::Running)
            .is_err());
    }

    #[test]
    fn no_temporary_files_are_left() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let id = store.create_composition("a", b"{}").unwrap();
        store.replace_composition(&id, b"{ }").unwrap();
        let names: Vec<String> = fs::read_dir(dir.path().join("compositions"))
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names.len(), 2, "{names:?}");
        assert!(names.iter().all(|n| !n.ends_with(".tmp")));
    }

    #[test]
    fn runs_come_back_in_submission_order() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        for seq in [3, 1, 2] {
            store.create_run("c", "a", b"{}", seq).unwrap();
        }
        fs::create_dir_all(dir.path().join("runs").join("halfwritten")).unwrap();
        let seqs: Vec<u64> = store.runs().unwrap().iter().map(|r| r.sequence).collect();
        assert_eq!(seqs, vec![1, 2, 3]);
    }
}
