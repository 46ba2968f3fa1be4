//! Dataset files and live API ingestion.

pub mod fetch;
pub mod format;

use std::path::PathBuf;

use thiserror::Error;

use crate::model::ModelError;

pub use fetch::{fetch_repo, ApiClient, ApiClientConfig, FetchError, FetchedRepo, Listing};
pub use format::{
    load_corpus, manifest_for, manifest_path, parse_corpus, render_corpus, save_corpus, DatasetManifest, SCHEMA_VERSION,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: duplicate repository id `{repo_id}`")]
    DuplicateRepoId { line: usize, repo_id: String },
    #[error("line {line}: event for `{repo_id}` predates repository creation")]
    EventBeforeCreation { line: usize, repo_id: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}
