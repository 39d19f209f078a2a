//! Append-only line-delimited JSON persistence, replayed on startup.
//!
//! `analyses.jsonl` holds one [`AnalysisRecord`] per line.
//! `corrections.jsonl` holds [`CorrectionEvent`]s: submissions, and markers
//! recording which corrections a retrain consumed. Versioned models live in
//! `models/` and merged training corpora in `corpora/`.

use std::collections::{HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use turkpos::tagger::{Source, TaggedDocument};
use turkpos::Correction;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub source: Source,
    /// Hex SHA-256 of the submitted text.
    pub input_hash: String,
    pub result: TaggedDocument,
    pub model_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum CorrectionEvent {
    Submitted(Correction),
    Consumed {
        ids: Vec<String>,
        model_version: String,
        at: DateTime<Utc>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectionRecord {
    #[serde(flatten)]
    pub correction: Correction,
    /// Model version whose training included this correction.
    pub consumed_by: Option<String>,
}

struct Log<T> {
    file: File,
    items: T,
}

pub struct Store {
    dir: PathBuf,
    analyses: RwLock<Log<HashMap<String, Arc<AnalysisRecord>>>>,
    corrections: Mutex<Log<Vec<CorrectionRecord>>>,
}

const ANALYSES: &str = "analyses.jsonl";
const CORRECTIONS: &str = "corrections.jsonl";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        for sub in [dir.clone(), dir.join("models"), dir.join("corpora")] {
            fs::create_dir_all(&sub).map_err(io_err(&sub))?;
        }

        let path = dir.join(ANALYSES);
        let mut analyses = HashMap::new();
        for record in replay::<AnalysisRecord>(&path)? {
            analyses.insert(record.id.clone(), Arc::new(record));
        }

        let path = dir.join(CORRECTIONS);
        let mut corrections: Vec<CorrectionRecord> = Vec::new();
        for event in replay::<CorrectionEvent>(&path)? {
            match event {
                CorrectionEvent::Submitted(correction) => corrections.push(CorrectionRecord {
                    correction,
                    consumed_by: None,
                }),
                CorrectionEvent::Consumed { ids, model_version, .. } => {
                    let ids: HashSet<String> = ids.into_iter().collect();
                    for c in corrections.iter_mut().filter(|c| ids.contains(&c.correction.id)) {
                        c.consumed_by = Some(model_version.clone());
                    }
                }
            }
        }

        Ok(Self {
            analyses: RwLock::new(Log {
                file: append_handle(&dir.join(ANALYSES))?,
                items: analyses,
            }),
            corrections: Mutex::new(Log {
                file: append_handle(&dir.join(CORRECTIONS))?,
                items: corrections,
            }),
            dir,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn models_dir(&self) -> PathBuf {
        self.dir.join("models")
    }

    pub fn model_path(&self, version: u64) -> PathBuf {
        self.models_dir().join(format!("model-v{version}.blstm"))
    }

    pub fn merged_corpus_path(&self, version: u64) -> PathBuf {
        self.dir.join("corpora").join(format!("merged-v{version}.tsv"))
    }

    /// Highest model version present in the models directory.
    pub fn latest_model_version(&self) -> Result<Option<u64>, StoreError> {
        let dir = self.models_dir();
        let mut latest = None;
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let name = entry.map_err(io_err(&dir))?.file_name();
            let version = name
                .to_str()
                .and_then(|n| n.strip_prefix("model-v"))
                .and_then(|n| n.strip_suffix(".blstm"))
                .and_then(|n| n.parse::<u64>().ok());
            latest = latest.max(version);
        }
        Ok(latest)
    }

    pub fn insert_analysis(&self, record: AnalysisRecord) -> Result<Arc<AnalysisRecord>, StoreError> {
        let mut log = self.analyses.write().expect("analysis lock poisoned");
        append(&mut log.file, &record, &self.dir.join(ANALYSES))?;
        let record = Arc::new(record);
        log.items.insert(record.id.clone(), Arc::clone(&record));
        Ok(record)
    }

    pub fn analysis(&self, id: &str) -> Option<Arc<AnalysisRecord>> {
        self.analyses
            .read()
            .expect("analysis lock poisoned")
            .items
            .get(id)
            .cloned()
    }

    pub fn analysis_count(&self) -> usize {
        self.analyses.read().expect("analysis lock poisoned").items.len()
    }

    /// Validates and appends under one lock, so `check` sees every earlier
    /// submission.
    pub fn submit_correction<E>(
        &self,
        check: impl FnOnce(&[CorrectionRecord]) -> Result<Correction, E>,
    ) -> Result<Result<CorrectionRecord, E>, StoreError> {
        let mut log = self.corrections.lock().expect("correction lock poisoned");
        let correction = match check(&log.items) {
            Ok(c) => c,
            Err(e) => return Ok(Err(e)),
        };
        append(
            &mut log.file,
            &CorrectionEvent::Submitted(correction.clone()),
            &self.dir.join(CORRECTIONS),
        )?;
        let record = CorrectionRecord {
            correction,
            consumed_by: None,
        };
        log.items.push(record.clone());
        Ok(Ok(record))
    }

    pub fn corrections(&self) -> Vec<CorrectionRecord> {
        self.corrections.lock().expect("correction lock poisoned").items.clone()
    }

    pub fn correction(&self, id: &str) -> Option<CorrectionRecord> {
        let log = self.corrections.lock().expect("correction lock poisoned");
        log.items.iter().find(|c| c.correction.id == id).cloned()
    }

    pub fn pending_count(&self) -> usize {
        let log = self.corrections.lock().expect("correction lock poisoned");
        log.items.iter().filter(|c| c.consumed_by.is_none()).count()
    }

    pub fn mark_consumed(&self, ids: &[String], model_version: &str) -> Result<(), StoreError> {
        let mut log = self.corrections.lock().expect("correction lock poisoned");
        let event = CorrectionEvent::Consumed {
            ids: ids.to_vec(),
            model_version: model_version.to_string(),
            at: Utc::now(),
        };
        append(&mut log.file, &event, &self.dir.join(CORRECTIONS))?;
        let ids: HashSet<&String> = ids.iter().collect();
        for c in log.items.iter_mut().filter(|c| ids.contains(&c.correction.id)) {
            c.consumed_by = Some(model_version.to_string());
        }
        Ok(())
    }
}

fn append_handle(path: &Path) -> Result<File, StoreError> {
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))
}

fn append<T: Serialize>(file: &mut File, item: &T, path: &Path) -> Result<(), StoreError> {
    let mut line = serde_json::to_vec(item).expect("store records serialize");
    line.push(b'\n');
    file.write_all(&line)
        .and_then(|()| file.sync_data())
        .map_err(io_err(path))
}

/// Every complete line of `path`. A final line without a newline is the
/// remnant of an interrupted append; it is cut off so later appends start
/// on a fresh line.
fn replay<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut out = Vec::new();
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut number = 0;
    let mut complete: u64 = 0;
    loop {
        line.clear();
        let read = reader.read_line(&mut line).map_err(io_err(path))?;
        if read == 0 {
            break;
        }
        number += 1;
        if !line.ends_with('\n') {
            tracing::warn!(path = %path.display(), line = number, "dropping truncated final record");
            OpenOptions::new()
                .write(true)
                .open(path)
                .and_then(|f| f.set_len(complete))
                .map_err(io_err(path))?;
            break;
        }
        complete += read as u64;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| StoreError::Corrupt {
            path: path.to_path_buf(),
            line: number,
            source,
        })?;
        out.push(item);
    }
    Ok(out)
}
