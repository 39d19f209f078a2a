use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use turkpos::corpus::{self, CorpusError};
use turkpos::nn::{deserialize, serialize, NnError};
use turkpos::trainer::{merge_corrections, train, TrainError};
use turkpos::BlstmModel;

use crate::config::ServiceConfig;
use crate::store::{Store, StoreError};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("model file {path}: {source}")]
    Model { path: PathBuf, source: NnError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("base corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Train(#[from] TrainError),
}

/// An immutable model snapshot. Requests hold an `Arc` for their whole
/// lifetime, so a swap never affects work already in flight.
#[derive(Debug)]
pub struct ServingModel {
    pub model: BlstmModel,
    pub version: u64,
}

impl ServingModel {
    pub fn label(&self) -> String {
        format!("v{}", self.version)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Idle,
    Running,
    Succeeded,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub state: JobState,
    pub job_id: Option<String>,
    pub started_at: Option<DateTime<Utc>>,
    pub finished_at: Option<DateTime<Utc>>,
    /// Corrections pending when the job started.
    pub corrections: usize,
    pub model_version: Option<String>,
    pub corpus_sentences: Option<usize>,
    pub error: Option<String>,
}

impl JobStatus {
    fn idle() -> Self {
        Self {
            state: JobState::Idle,
            job_id: None,
            started_at: None,
            finished_at: None,
            corrections: 0,
            model_version: None,
            corpus_sentences: None,
            error: None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RetrainRejected {
    #[error("a retrain job is already running")]
    AlreadyRunning,
    #[error("no pending corrections to merge")]
    NothingPending,
    #[error("no base corpus configured")]
    NoCorpus,
}

pub struct AppState {
    config: ServiceConfig,
    store: Store,
    model: RwLock<Option<Arc<ServingModel>>>,
    job: Mutex<JobStatus>,
}

impl AppState {
    /// Opens the store and loads the newest versioned model, falling back to
    /// `model_path` (registered as version 1).
    pub fn open(config: ServiceConfig) -> Result<Arc<Self>, ServiceError> {
        let store = Store::open(&config.store_dir)?;
        let model = match store.latest_model_version()? {
            Some(version) => Some(load_model(store.model_path(version), version)?),
            None => match &config.model_path {
                Some(path) => {
                    let loaded = load_model(path.clone(), 1)?;
                    let target = store.model_path(1);
                    fs::copy(path, &target).map_err(|source| ServiceError::Io { path: target, source })?;
                    Some(loaded)
                }
                None => None,
            },
        };
        match &model {
            Some(m) => tracing::info!(version = %m.label(), "serving model"),
            None => tracing::warn!("no model configured; analysis endpoints answer 503"),
        }
        Ok(Arc::new(Self {
            config,
            store,
            model: RwLock::new(model.map(Arc::new)),
            job: Mutex::new(JobStatus::idle()),
        }))
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn model(&self) -> Option<Arc<ServingModel>> {
        self.model.read().expect("model lock poisoned").clone()
    }

    pub fn job_status(&self) -> JobStatus {
        self.job.lock().expect("job lock poisoned").clone()
    }

    /// Marks a job as running and trains on a blocking thread. Must be
    /// called from within a Tokio runtime.
    pub fn start_retrain(self: &Arc<Self>) -> Result<JobStatus, RetrainRejected> {
        let mut job = self.job.lock().expect("job lock poisoned");
        if job.state == JobState::Running {
            return Err(RetrainRejected::AlreadyRunning);
        }
        if self.config.corpus_path.is_none() {
            return Err(RetrainRejected::NoCorpus);
        }
        let pending = self.store.pending_count();
        if pending == 0 {
            return Err(RetrainRejected::NothingPending);
        }
        *job = JobStatus {
            state: JobState::Running,
            job_id: Some(uuid::Uuid::new_v4().to_string()),
            started_at: Some(Utc::now()),
            corrections: pending,
            ..JobStatus::idle()
        };
        let status = job.clone();
        drop(job);

        let state = Arc::clone(self);
        tokio::task::spawn_blocking(move || {
            let result = state.retrain();
            let mut job = state.job.lock().expect("job lock poisoned");
            job.finished_at = Some(Utc::now());
            match result {
                Ok((version, sentences)) => {
                    tracing::info!(version = %format!("v{version}"), sentences, "retrain finished");
                    job.state = JobState::Succeeded;
                    job.model_version = Some(format!("v{version}"));
                    job.corpus_sentences = Some(sentences);
                }
                Err(e) => {
                    tracing::error!(error = %e, "retrain failed");
                    job.state = JobState::Failed;
                    job.error = Some(e.to_string());
                }
            }
        });
        Ok(status)
    }

    /// Retrains from scratch on the base corpus plus every correction ever
    /// submitted, then publishes the result as the next model version.
    fn retrain(&self) -> Result<(u64, usize), ServiceError> {
        let corpus_path = self
            .config
            .corpus_path
            .as_ref()
            .expect("checked before the job started");
        let base = corpus::load(corpus_path)?;
        let records = self.store.corrections();
        let pending: Vec<String> = records
            .iter()
            .filter(|r| r.consumed_by.is_none())
            .map(|r| r.correction.id.clone())
            .collect();
        let corrections: Vec<_> = records.into_iter().map(|r| r.correction).collect();
        let analyses: HashMap<&str, _> = corrections
            .iter()
            .filter_map(|c| Some((c.analysis_id.as_str(), self.store.analysis(&c.analysis_id)?)))
            .collect();
        let merged = merge_corrections(&base, &corrections, |id| analyses.get(id).map(|r| &r.result))?;

        let current = self.model().map_or(0, |m| m.version);
        let version = current.max(self.store.latest_model_version()?.unwrap_or(0)) + 1;
        corpus::save(self.store.merged_corpus_path(version), &merged)?;

        let outcome = train::<f64>(&merged, &self.config.train)?;
        let path = self.store.model_path(version);
        let staging = path.with_extension("blstm.partial");
        fs::write(&staging, serialize(&outcome.model))
            .and_then(|()| fs::rename(&staging, &path))
            .map_err(|source| ServiceError::Io {
                path: path.clone(),
                source,
            })?;

        let serving = Arc::new(ServingModel {
            model: outcome.model,
            version,
        });
        *self.model.write().expect("model lock poisoned") = Some(serving);
        self.store.mark_consumed(&pending, &format!("v{version}"))?;
        Ok((version, merged.len()))
    }
}

fn load_model(path: PathBuf, version: u64) -> Result<ServingModel, ServiceError> {
    let bytes = fs::read(&path).map_err(|source| ServiceError::Io {
        path: path.clone(),
        source,
    })?;
    let model = deserialize(&bytes).map_err(|source| ServiceError::Model { path, source })?;
    Ok(ServingModel { model, version })
}
