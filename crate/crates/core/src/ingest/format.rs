//! JSON-lines dataset files.
//!
//! Each line is either a repository object or an event object:
//!
//! ```text
//! {"repo_id":"R1","full_name":"o/r","created_at":"2017-12-01T00:00:00Z","primary_language":"Rust","size_kb":10,"owner_followers":3,"forks_total":54,"stars_total":45,"watchers_total":7,"follower_ids":["f1"]}
//! {"repo_id":"R1","kind":"fork","occurred_at":"2018-01-01T01:00:00Z","delta":1}
//! ```
//!
//! A `<stem>.manifest.json` sidecar records the schema version, capture
//! time, repository count and source.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::model::{Corpus, DatasetSource, PopularityEvent, RepoRecord, Timestamp};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub captured_at: Timestamp,
    pub repo_count: usize,
    pub source: DatasetSource,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Line {
    Repo(RepoRecord),
    Event(PopularityEvent),
}

// Guesses the intended line type so the error names the failing field.
fn describe_untyped(value: &serde_json::Value) -> String {
    match value.as_object() {
        Some(obj) if obj.contains_key("kind") || obj.contains_key("occurred_at") => {
            match serde_json::from_value::<PopularityEvent>(value.clone()) {
                Err(e) => format!("invalid event object: {e}"),
                Ok(_) => "invalid event object".to_string(),
            }
        }
        Some(_) => match serde_json::from_value::<RepoRecord>(value.clone()) {
            Err(e) => format!("invalid repository object: {e}"),
            Ok(_) => "invalid repository object".to_string(),
        },
        None => "expected a JSON object".to_string(),
    }
}

/// Sidecar path: `data.jsonl` becomes `data.manifest.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

/// Parses dataset text. `manifest` supplies the capture time when present.
pub fn parse_corpus(text: &str, interval_days: u32, manifest: Option<&DatasetManifest>) -> Result<Corpus, IngestError> {
    let mut repos: Vec<(usize, RepoRecord)> = Vec::new();
    let mut events: Vec<(usize, PopularityEvent)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| IngestError::Parse {
            line,
            reason: e.to_string(),
        })?;
        match serde_json::from_value::<Line>(value.clone()) {
            Ok(Line::Repo(r)) => repos.push((line, r)),
            Ok(Line::Event(e)) => {
                if e.delta == 0 {
                    return Err(IngestError::Parse {
                        line,
                        reason: "event delta must be nonzero".into(),
                    });
                }
                events.push((line, e))
            }
            Err(_) => {
                return Err(IngestError::Parse {
                    line,
                    reason: describe_untyped(&value),
                })
            }
        }
    }
    if repos.is_empty() {
        return Err(IngestError::Parse {
            line: text.lines().count().max(1),
            reason: "dataset contains no repository lines".into(),
        });
    }

    let mut created: HashMap<&str, crate::model::Timestamp> = HashMap::new();
    for (line, r) in &repos {
        if created.insert(&r.repo_id, r.created_at).is_some() {
            return Err(IngestError::DuplicateRepoId {
                line: *line,
                repo_id: r.repo_id.clone(),
            });
        }
    }
    for (line, e) in &events {
        match created.get(e.repo_id.as_str()) {
            None => {
                return Err(IngestError::Parse {
                    line: *line,
                    reason: format!("event references unknown repository `{}`", e.repo_id),
                })
            }
            Some(&c) if e.occurred_at < c => {
                return Err(IngestError::EventBeforeCreation {
                    line: *line,
                    repo_id: e.repo_id.clone(),
                })
            }
            _ => {}
        }
    }

    if let Some(m) = manifest {
        if m.schema_version != SCHEMA_VERSION {
            return Err(IngestError::Manifest(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        if m.repo_count != repos.len() {
            return Err(IngestError::Manifest(format!(
                "manifest lists {} repositories but the dataset has {}",
                m.repo_count,
                repos.len()
            )));
        }
    }

    let mut corpus = Corpus::new(
        repos.into_iter().map(|(_, r)| r).collect(),
        events.into_iter().map(|(_, e)| e).collect(),
        interval_days,
    )?;
    if let Some(m) = manifest {
        corpus = corpus.with_captured_at(m.captured_at).with_source(m.source);
    }
    Ok(corpus)
}

/// Loads a dataset file and its manifest sidecar when one exists.
pub fn load_corpus(path: &Path, interval_days: u32) -> Result<Corpus, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let sidecar = manifest_path(path);
    let manifest = match fs::read_to_string(&sidecar) {
        Ok(s) => Some(
            serde_json::from_str::<DatasetManifest>(&s)
                .map_err(|e| IngestError::Manifest(format!("{}: {e}", sidecar.display())))?,
        ),
        Err(e) if e.kind() == io::ErrorKind::NotFound => None,
        Err(e) => {
            return Err(IngestError::Io {
                path: sidecar,
                source: e,
            })
        }
    };
    parse_corpus(&text, interval_days, manifest.as_ref())
}

pub fn manifest_for(corpus: &Corpus) -> DatasetManifest {
    DatasetManifest {
        schema_version: SCHEMA_VERSION,
        captured_at: corpus.captured_at(),
        repo_count: corpus.repos().len(),
        source: corpus.source(),
    }
}

/// Canonical dataset text: repositories by id, then events in
/// `(occurred_at, repo_id, kind)` order.
pub fn render_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for r in corpus.repos() {
        out.push_str(&serde_json::to_string(r).expect("repository serializes"));
        out.push('\n');
    }
    for e in corpus.events() {
        out.push_str(&serde_json::to_string(e).expect("event serializes"));
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), IngestError> {
    let io_err = |e| IngestError::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(bytes).map_err(io_err)?;
    f.sync_all().map_err(io_err)
}

/// Writes the dataset and its manifest sidecar.
pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<DatasetManifest, IngestError> {
    let manifest = manifest_for(corpus);
    write_file(path, render_corpus(corpus).as_bytes())?;
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write_file(&manifest_path(path), json.as_bytes())?;
    Ok(manifest)
}
