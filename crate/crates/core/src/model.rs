//! Shared domain types: repository records, popularity events, the
//! community-wide time grid, the corpus container and event binning.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("cannot build a time grid from an empty event set")]
    EmptyEventSet,
    #[error("interval length must be a positive number of days")]
    InvalidIntervalLength,
    #[error("event at {timestamp} lies outside the grid [{start}, {end})")]
    EventOutsideGrid {
        timestamp: Timestamp,
        start: Timestamp,
        end: Timestamp,
    },
    #[error("duplicate repository id `{0}`")]
    DuplicateRepoId(String),
    #[error("event references unknown repository `{0}`")]
    UnknownRepo(String),
    #[error("event for `{repo_id}` at {occurred_at} predates repository creation at {created_at}")]
    EventBeforeCreation {
        repo_id: String,
        occurred_at: Timestamp,
        created_at: Timestamp,
    },
    #[error("event for `{0}` has a zero delta")]
    ZeroDelta(String),
    #[error("invalid timestamp `{0}`")]
    InvalidTimestamp(String),
}

/// UTC instant with whole-second resolution, rendered as `YYYY-MM-DDTHH:MM:SSZ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

impl Timestamp {
    pub const fn from_secs(secs: i64) -> Self {
        Timestamp(secs)
    }

    pub const fn secs(self) -> i64 {
        self.0
    }

    /// Truncates to 00:00:00 UTC of the same day.
    pub fn floor_to_day(self) -> Self {
        Timestamp(self.0.div_euclid(SECONDS_PER_DAY) * SECONDS_PER_DAY)
    }

    pub fn plus_days(self, days: i64) -> Self {
        Timestamp(self.0 + days * SECONDS_PER_DAY)
    }

    /// Whole and fractional days from `earlier` to `self`.
    pub fn days_since(self, earlier: Timestamp) -> f64 {
        (self.0 - earlier.0) as f64 / SECONDS_PER_DAY as f64
    }

    pub fn now() -> Self {
        Timestamp(Utc::now().timestamp())
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match DateTime::<Utc>::from_timestamp(self.0, 0) {
            Some(dt) => f.write_str(&dt.to_rfc3339_opts(SecondsFormat::Secs, true)),
            None => write!(f, "@{}", self.0),
        }
    }
}

impl FromStr for Timestamp {
    type Err = ModelError;

    /// Accepts any RFC 3339 timestamp; offsets are normalized to UTC and
    /// sub-second digits are dropped.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DateTime::parse_from_rfc3339(s)
            .map(|dt| Timestamp(dt.timestamp()))
            .map_err(|_| ModelError::InvalidTimestamp(s.to_string()))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Kind of a timestamped popularity event. Watchers have no timeline and
/// only appear as snapshot counts on [`RepoRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Fork,
    Star,
}

impl EventKind {
    pub const ALL: [EventKind; 2] = [EventKind::Fork, EventKind::Star];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Fork => "fork",
            EventKind::Star => "star",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Static repository metadata plus the snapshot indicator counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoRecord {
    pub repo_id: String,
    pub full_name: String,
    pub created_at: Timestamp,
    pub primary_language: Option<String>,
    pub size_kb: u64,
    pub owner_followers: u64,
    pub forks_total: u64,
    pub stars_total: u64,
    pub watchers_total: u64,
    /// Identifiers of the owner's followers; used to build the follower graph.
    #[serde(default)]
    pub follower_ids: Vec<String>,
}

fn default_delta() -> i64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopularityEvent {
    pub repo_id: String,
    pub kind: EventKind,
    pub occurred_at: Timestamp,
    /// +1 for live data; negative values model unstars in synthetic data.
    #[serde(default = "default_delta")]
    pub delta: i64,
}

impl PopularityEvent {
    pub fn new(repo_id: impl Into<String>, kind: EventKind, occurred_at: Timestamp, delta: i64) -> Self {
        PopularityEvent {
            repo_id: repo_id.into(),
            kind,
            occurred_at,
            delta,
        }
    }

    fn sort_key(&self) -> (Timestamp, &str, EventKind, i64) {
        (self.occurred_at, &self.repo_id, self.kind, self.delta)
    }
}

/// Fixed-width half-open intervals `[epoch + i*len, epoch + (i+1)*len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub epoch: Timestamp,
    pub interval_days: u32,
    pub interval_count: usize,
}

impl TimeGrid {
    pub fn new(epoch: Timestamp, interval_days: u32, interval_count: usize) -> Result<Self, ModelError> {
        if interval_days == 0 {
            return Err(ModelError::InvalidIntervalLength);
        }
        Ok(TimeGrid {
            epoch,
            interval_days,
            interval_count,
        })
    }

    /// Smallest grid anchored at the UTC midnight preceding the earliest
    /// timestamp that still covers the latest one.
    pub fn covering<I>(timestamps: I, interval_days: u32) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = Timestamp>,
    {
        if interval_days == 0 {
            return Err(ModelError::InvalidIntervalLength);
        }
        let mut bounds: Option<(Timestamp, Timestamp)> = None;
        for ts in timestamps {
            bounds = Some(match bounds {
                None => (ts, ts),
                Some((lo, hi)) => (lo.min(ts), hi.max(ts)),
            });
        }
        let (earliest, latest) = bounds.ok_or(ModelError::EmptyEventSet)?;
        let epoch = earliest.floor_to_day();
        let width = interval_days as i64 * SECONDS_PER_DAY;
        let interval_count = ((latest.secs() - epoch.secs()) / width + 1) as usize;
        Ok(TimeGrid {
            epoch,
            interval_days,
            interval_count,
        })
    }

    pub fn interval_seconds(&self) -> i64 {
        self.interval_days as i64 * SECONDS_PER_DAY
    }

    pub fn interval_start(&self, index: usize) -> Timestamp {
        Timestamp(self.epoch.secs() + index as i64 * self.interval_seconds())
    }

    /// Exclusive upper bound of the last interval.
    pub fn end(&self) -> Timestamp {
        self.interval_start(self.interval_count)
    }

    pub fn interval_of(&self, ts: Timestamp) -> Result<usize, ModelError> {
        if ts < self.epoch || ts >= self.end() {
            return Err(ModelError::EventOutsideGrid {
                timestamp: ts,
                start: self.epoch,
                end: self.end(),
            });
        }
        Ok(((ts.secs() - self.epoch.secs()) / self.interval_seconds()) as usize)
    }
}

/// Builds the minimal grid covering `events`.
pub fn build_grid(events: &[PopularityEvent], interval_days: u32) -> Result<TimeGrid, ModelError> {
    TimeGrid::covering(events.iter().map(|e| e.occurred_at), interval_days)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    #[default]
    File,
    LiveApi,
}

/// A validated set of repositories and their events on a shared grid.
///
/// Repositories are kept sorted by `repo_id` and events by
/// `(occurred_at, repo_id, kind, delta)`, so two corpora built from the same
/// multisets compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    repos: Vec<RepoRecord>,
    events: Vec<PopularityEvent>,
    grid: TimeGrid,
    captured_at: Timestamp,
    source: DatasetSource,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Validates the records and builds the grid. When there are no events,
    /// repository creation times seed the grid instead.
    pub fn new(
        mut repos: Vec<RepoRecord>,
        mut events: Vec<PopularityEvent>,
        interval_days: u32,
    ) -> Result<Self, ModelError> {
        repos.sort_by(|a, b| a.repo_id.cmp(&b.repo_id));
        let mut index = HashMap::with_capacity(repos.len());
        for (i, repo) in repos.iter().enumerate() {
            if index.insert(repo.repo_id.clone(), i).is_some() {
                return Err(ModelError::DuplicateRepoId(repo.repo_id.clone()));
            }
        }
        for event in &events {
            let repo = index
                .get(&event.repo_id)
                .map(|&i| &repos[i])
                .ok_or_else(|| ModelError::UnknownRepo(event.repo_id.clone()))?;
            if event.delta == 0 {
                return Err(ModelError::ZeroDelta(event.repo_id.clone()));
            }
            if event.occurred_at < repo.created_at {
                return Err(ModelError::EventBeforeCreation {
                    repo_id: event.repo_id.clone(),
                    occurred_at: event.occurred_at,
                    created_at: repo.created_at,
                });
            }
        }
        events.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

        let grid = if events.is_empty() {
            TimeGrid::covering(repos.iter().map(|r| r.created_at), interval_days)?
        } else {
            build_grid(&events, interval_days)?
        };
        let captured_at = events
            .last()
            .map(|e| e.occurred_at)
            .into_iter()
            .chain(repos.iter().map(|r| r.created_at))
            .max()
            .expect("grid construction guarantees at least one timestamp");

        Ok(Corpus {
            repos,
            events,
            grid,
            captured_at,
            source: DatasetSource::File,
            index,
        })
    }

    pub fn with_captured_at(mut self, captured_at: Timestamp) -> Self {
        self.captured_at = captured_at;
        self
    }

    pub fn with_source(mut self, source: DatasetSource) -> Self {
        self.source = source;
        self
    }

    /// Same repositories and events on a grid of a different interval length.
    pub fn regrid(&self, interval_days: u32) -> Result<Corpus, ModelError> {
        let grid = if self.events.is_empty() {
            TimeGrid::covering(self.repos.iter().map(|r| r.created_at), interval_days)?
        } else {
            build_grid(&self.events, interval_days)?
        };
        let mut corpus = self.clone();
        corpus.grid = grid;
        Ok(corpus)
    }

    pub fn repos(&self) -> &[RepoRecord] {
        &self.repos
    }

    pub fn events(&self) -> &[PopularityEvent] {
        &self.events
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Reference time for repository ages. Defaults to the latest event.
    pub fn captured_at(&self) -> Timestamp {
        self.captured_at
    }

    pub fn source(&self) -> DatasetSource {
        self.source
    }

    pub fn repo(&self, repo_id: &str) -> Option<&RepoRecord> {
        self.index.get(repo_id).map(|&i| &self.repos[i])
    }

    pub fn repo_ids(&self) -> impl Iterator<Item = &str> {
        self.repos.iter().map(|r| r.repo_id.as_str())
    }

    /// Age of a repository in days at capture time.
    pub fn age_days(&self, repo: &RepoRecord) -> f64 {
        self.captured_at.days_since(repo.created_at)
    }
}

/// Signed per-repository, per-interval event sums for each kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinnedCounts {
    repo_ids: Vec<String>,
    index: HashMap<String, usize>,
    interval_count: usize,
    forks: Vec<i64>,
    stars: Vec<i64>,
}

impl BinnedCounts {
    /// Bins `events` for the listed repositories on `grid`.
    pub fn from_events(repo_ids: Vec<String>, events: &[PopularityEvent], grid: &TimeGrid) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(repo_ids.len());
        for (i, id) in repo_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(ModelError::DuplicateRepoId(id.clone()));
            }
        }
        let cells = repo_ids.len() * grid.interval_count;
        let mut forks = vec![0i64; cells];
        let mut stars = vec![0i64; cells];
        for event in events {
            let r = *index
                .get(&event.repo_id)
                .ok_or_else(|| ModelError::UnknownRepo(event.repo_id.clone()))?;
            let t = grid.interval_of(event.occurred_at)?;
            let cell = r * grid.interval_count + t;
            match event.kind {
                EventKind::Fork => forks[cell] += event.delta,
                EventKind::Star => stars[cell] += event.delta,
            }
        }
        Ok(BinnedCounts {
            repo_ids,
            index,
            interval_count: grid.interval_count,
            forks,
            stars,
        })
    }

    /// Builds counts directly from per-repository interval series. Every
    /// series must have the same length.
    pub fn from_series(rows: Vec<(String, Vec<i64>, Vec<i64>)>) -> Result<Self, ModelError> {
        let interval_count = rows.first().map_or(0, |r| r.1.len());
        let mut repo_ids = Vec::with_capacity(rows.len());
        let mut forks = Vec::with_capacity(rows.len() * interval_count);
        let mut stars = Vec::with_capacity(rows.len() * interval_count);
        let mut seen = HashSet::new();
        for (id, f, s) in rows {
            if !seen.insert(id.clone()) {
                return Err(ModelError::DuplicateRepoId(id));
            }
            assert!(
                f.len() == interval_count && s.len() == interval_count,
                "series for `{id}` does not match the interval count"
            );
            repo_ids.push(id);
            forks.extend(f);
            stars.extend(s);
        }
        let index = repo_ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();
        Ok(BinnedCounts {
            repo_ids,
            index,
            interval_count,
            forks,
            stars,
        })
    }

    pub fn repo_ids(&self) -> &[String] {
        &self.repo_ids
    }

    pub fn interval_count(&self) -> usize {
        self.interval_count
    }

    pub fn repo_index(&self, repo_id: &str) -> Option<usize> {
        self.index.get(repo_id).copied()
    }

    /// Interval series for one repository and kind, by row index.
    pub fn series(&self, row: usize, kind: EventKind) -> &[i64] {
        let range = row * self.interval_count..(row + 1) * self.interval_count;
        match kind {
            EventKind::Fork => &self.forks[range],
            EventKind::Star => &self.stars[range],
        }
    }

    pub fn get(&self, row: usize, interval: usize, kind: EventKind) -> i64 {
        self.series(row, kind)[interval]
    }

    pub fn repo_total(&self, row: usize, kind: EventKind) -> i64 {
        self.series(row, kind).iter().sum()
    }

    /// Community-wide sum for one interval.
    pub fn interval_total(&self, interval: usize, kind: EventKind) -> i64 {
        (0..self.repo_ids.len()).map(|r| self.get(r, interval, kind)).sum()
    }

    pub fn grand_total(&self, kind: EventKind) -> i64 {
        match kind {
            EventKind::Fork => self.forks.iter().sum(),
            EventKind::Star => self.stars.iter().sum(),
        }
    }

    /// Multiplies every count by `factor`.
    pub fn scaled(&self, factor: i64) -> BinnedCounts {
        let mut out = self.clone();
        out.forks.iter_mut().for_each(|v| *v *= factor);
        out.stars.iter_mut().for_each(|v| *v *= factor);
        out
    }
}

/// Bins the corpus events on the corpus grid.
pub fn bin_events(corpus: &Corpus) -> Result<BinnedCounts, ModelError> {
    BinnedCounts::from_events(
        corpus.repos.iter().map(|r| r.repo_id.clone()).collect(),
        &corpus.events,
        &corpus.grid,
    )
}
