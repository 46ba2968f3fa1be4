//! Output files. Everything a command produces is staged in memory and
//! committed at the end, so a failed run leaves no partial files behind.

use std::fs;
use std::path::{Path, PathBuf};

use popscore::ingest::SCHEMA_VERSION;
use popscore::model::{Corpus, DatasetSource, Timestamp};
use popscore::report::OUTPUT_SCHEMA_VERSION;
use serde::Serialize;

use crate::error::{CliError, ErrorKind};

/// Sidecar holding the resolved configuration: `out.csv` -> `out.meta.json`.
pub fn meta_path(output: &Path) -> PathBuf {
    output.with_extension("meta.json")
}

#[derive(Debug, Serialize)]
pub struct InputProvenance {
    pub path: PathBuf,
    pub captured_at: Timestamp,
    pub source: DatasetSource,
    pub repo_count: usize,
    pub event_count: usize,
    pub grid_epoch: Timestamp,
    pub interval_days: u32,
    pub interval_count: usize,
}

impl InputProvenance {
    pub fn of(path: &Path, corpus: &Corpus) -> Self {
        InputProvenance {
            path: path.to_path_buf(),
            captured_at: corpus.captured_at(),
            source: corpus.source(),
            repo_count: corpus.repos().len(),
            event_count: corpus.events().len(),
            grid_epoch: corpus.grid().epoch,
            interval_days: corpus.grid().interval_days,
            interval_count: corpus.grid().interval_count,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunMeta<C: Serialize, S: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub output_schema_version: u32,
    pub dataset_schema_version: u32,
    pub command: &'static str,
    pub config: C,
    pub input: Option<InputProvenance>,
    pub summary: S,
}

impl<C: Serialize, S: Serialize> RunMeta<C, S> {
    pub fn new(command: &'static str, config: C, input: Option<InputProvenance>, summary: S) -> Self {
        RunMeta {
            tool: env!("CARGO_BIN_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            output_schema_version: OUTPUT_SCHEMA_VERSION,
            dataset_schema_version: SCHEMA_VERSION,
            command,
            config,
            input,
            summary,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Default)]
pub struct Staged {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Staged {
    pub fn add(&mut self, path: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.files.push((path.into(), contents.into()));
    }

    /// Writes every file to a temporary sibling, then renames them into
    /// place once all writes succeeded.
    pub fn commit(self) -> Result<(), CliError> {
        let mut temps = Vec::with_capacity(self.files.len());
        for (path, bytes) in &self.files {
            let tmp = temp_sibling(path);
            if let Err(e) = fs::write(&tmp, bytes) {
                for t in temps.iter().chain([&tmp]) {
                    let _ = fs::remove_file(t);
                }
                return Err(write_error(path, e));
            }
            temps.push(tmp);
        }
        for (tmp, (path, _)) in temps.iter().zip(&self.files) {
            fs::rename(tmp, path).map_err(|e| write_error(path, e))?;
        }
        Ok(())
    }
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp"))
}

fn write_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::new(ErrorKind::Write, format!("{}: {e}", path.display()))
}
