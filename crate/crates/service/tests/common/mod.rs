#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use tempfile::TempDir;
use tokio::sync::oneshot;
use turkpos::corpus;
use turkpos::nn::serialize;
use turkpos::trainer::{train, TrainConfig};
use turkpos::LabeledCorpus;
use turkpos_service::{serve_on, AppState, JobState, JobStatus, ServiceConfig};

pub fn small_train_config() -> TrainConfig {
    TrainConfig {
        epochs: 60,
        learning_rate: 0.01,
        embed_dim: 16,
        hidden_dim: 16,
        ..TrainConfig::default()
    }
}

/// Seed corpus and an initial model trained on it, written into `dir`.
pub fn seed_files(dir: &Path, config: &TrainConfig) -> (PathBuf, PathBuf) {
    let corpus_path = dir.join("seed.tsv");
    let model_path = dir.join("seed.blstm");
    let seed = LabeledCorpus::sample();
    corpus::save(&corpus_path, &seed).unwrap();
    let outcome = train::<f64>(&seed, config).unwrap();
    std::fs::write(&model_path, serialize(&outcome.model)).unwrap();
    (corpus_path, model_path)
}

pub struct TestServer {
    pub base: String,
    pub client: reqwest::Client,
    pub state: Arc<AppState>,
    pub config: ServiceConfig,
    shutdown: Option<oneshot::Sender<()>>,
    handle: Option<tokio::task::JoinHandle<()>>,
}

impl TestServer {
    pub async fn start(config: ServiceConfig) -> Self {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr: SocketAddr = listener.local_addr().unwrap();
        let state = AppState::open(config.clone()).unwrap();
        let (tx, rx) = oneshot::channel();
        let handle = tokio::spawn({
            let state = Arc::clone(&state);
            async move {
                serve_on(listener, state, async {
                    let _ = rx.await;
                })
                .await
                .unwrap();
            }
        });
        Self {
            base: format!("http://{addr}"),
            client: reqwest::Client::new(),
            state,
            config,
            shutdown: Some(tx),
            handle: Some(handle),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    pub async fn stop(mut self) {
        let _ = self.shutdown.take().unwrap().send(());
        self.handle.take().unwrap().await.unwrap();
    }

    pub async fn wait_for_job(&self, timeout: Duration) -> JobStatus {
        let deadline = tokio::time::Instant::now() + timeout;
        loop {
            let status: JobStatus = self
                .client
                .get(self.url("/api/admin/retrain"))
                .send()
                .await
                .unwrap()
                .json()
                .await
                .unwrap();
            if status.state != JobState::Running {
                return status;
            }
            assert!(
                tokio::time::Instant::now() < deadline,
                "retrain did not finish in {timeout:?}"
            );
            tokio::time::sleep(Duration::from_millis(50)).await;
        }
    }
}

/// A temporary directory holding seed files, and a config pointing at them.
pub fn seeded_config(train: TrainConfig) -> (TempDir, ServiceConfig) {
    let dir = tempfile::tempdir().unwrap();
    let (corpus_path, model_path) = seed_files(dir.path(), &train);
    let config = ServiceConfig {
        model_path: Some(model_path),
        corpus_path: Some(corpus_path),
        store_dir: dir.path().join("store"),
        train,
        ..ServiceConfig::default()
    };
    (dir, config)
}
