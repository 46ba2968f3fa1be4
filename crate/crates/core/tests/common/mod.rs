//! Independent reference computations used by the integration and
//! acceptance tests. Nothing here calls into the scoring, stats or graph
//! implementations it is compared against.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use popscore::model::{Corpus, EventKind, SECONDS_PER_DAY};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Fork and star counts per interval as printed in the four-repository
/// worked example.
pub const EXAMPLE_FORKS: [[i64; 5]; 4] = [
    [15, 20, 3, 9, 7],
    [10, 10, 5, 3, 30],
    [5, 8, 4, 10, 15],
    [14, 12, 10, 5, 5],
];
pub const EXAMPLE_STARS: [[i64; 5]; 4] = [
    [6, 12, 2, 15, 10],
    [6, 5, 6, 5, 8],
    [1, 3, 4, 22, 20],
    [12, 14, 10, 13, 6],
];

/// Printed per-interval and total scores for R1..R4 (two-decimal rounding).
pub const PRINTED_SCORES: [[f64; 5]; 4] = [
    [4.08, 7.25, 0.57, 5.71, 4.43],
    [2.98, 3.44, 1.28, 1.9, 10.5],
    [1.23, 2.56, 0.92, 7.93, 9.15],
    [4.64, 5.63, 2.32, 4.57, 2.89],
];
pub const PRINTED_TOTALS: [f64; 4] = [22.04, 20.1, 21.79, 20.05];

/// Interval and overall scores straight from raw events: each interval is
/// scanned by timestamp range, weights are community sums over the overall
/// community sum. Returns `repo_id -> (interval scores, overall)`.
pub fn brute_force_scores(corpus: &Corpus) -> BTreeMap<String, (Vec<f64>, f64)> {
    let grid = corpus.grid();
    let width = grid.interval_days as i64 * SECONDS_PER_DAY;
    let start = |t: usize| grid.epoch.secs() + t as i64 * width;
    let in_interval = |secs: i64, t: usize| secs >= start(t) && secs < start(t) + width;

    let count = |repo: Option<&str>, kind: EventKind, t: Option<usize>| -> i64 {
        corpus
            .events()
            .iter()
            .filter(|e| e.kind == kind)
            .filter(|e| repo.is_none_or(|r| e.repo_id == r))
            .filter(|e| t.is_none_or(|t| in_interval(e.occurred_at.secs(), t)))
            .map(|e| e.delta)
            .sum()
    };
    let weight = |kind: EventKind, t: usize| -> f64 {
        let total = count(None, kind, None);
        if total <= 0 {
            0.0
        } else {
            count(None, kind, Some(t)) as f64 / total as f64
        }
    };

    let mut out = BTreeMap::new();
    for repo in corpus.repos() {
        let id = repo.repo_id.as_str();
        let scores: Vec<f64> = (0..grid.interval_count)
            .map(|t| {
                weight(EventKind::Fork, t) * count(Some(id), EventKind::Fork, Some(t)) as f64
                    + weight(EventKind::Star, t) * count(Some(id), EventKind::Star, Some(t)) as f64
            })
            .collect();
        let overall = scores.iter().sum();
        out.insert(repo.repo_id.clone(), (scores, overall));
    }
    out
}

/// Slope, intercept and r from raw-sum normal equations solved by
/// Cramer's rule.
pub fn normal_equations(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    // [n  sx ] [b0]   [sy ]
    // [sx sxx] [b1] = [sxy]
    let det = n * sxx - sx * sx;
    let intercept = (sy * sxx - sx * sxy) / det;
    let slope = (n * sxy - sx * sy) / det;
    let r = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
    (slope, intercept, r)
}

/// Two-mode overlap coefficient by exhaustive enumeration of every
/// same-side node pair.
pub fn brute_force_latapy(rows: &[(&str, &[&str])]) -> f64 {
    let mut repos: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut followers: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (r, fs) in rows {
        let entry = repos.entry(r.to_string()).or_default();
        for f in *fs {
            entry.insert(f.to_string());
            followers.entry(f.to_string()).or_default().insert(r.to_string());
        }
    }
    let side_total = |side: &BTreeMap<String, BTreeSet<String>>| -> f64 {
        let mut total = 0.0;
        for (u, nu) in side {
            let mut sum = 0.0;
            let mut peers = 0usize;
            for (v, nv) in side {
                if u == v {
                    continue;
                }
                let shared = nu.intersection(nv).count();
                if shared == 0 {
                    continue;
                }
                sum += shared as f64 / nu.union(nv).count() as f64;
                peers += 1;
            }
            if peers > 0 {
                total += sum / peers as f64;
            }
        }
        total
    };
    let nodes = repos.len() + followers.len();
    (side_total(&repos) + side_total(&followers)) / nodes as f64
}

/// Number of fixed-width intervals covering `span_days` from a midnight
/// epoch with half-open bounds.
pub fn interval_count_oracle(span_days: i64, width_days: i64) -> i64 {
    span_days / width_days + 1
}

pub mod strategies {
    use popscore::model::{Corpus, EventKind, PopularityEvent, RepoRecord, Timestamp, SECONDS_PER_DAY};
    use proptest::prelude::*;

    // 2018-01-01T00:00:00Z
    pub const BASE: i64 = 1_514_764_800;

    pub fn repo(id: String, followers: Vec<String>, totals: (u64, u64, u64)) -> RepoRecord {
        RepoRecord {
            repo_id: id,
            full_name: "owner/name".into(),
            created_at: Timestamp::from_secs(BASE),
            primary_language: None,
            size_kb: 1,
            owner_followers: followers.len() as u64,
            forks_total: totals.0,
            stars_total: totals.1,
            watchers_total: totals.2,
            follower_ids: followers,
        }
    }

    fn raw_event() -> impl Strategy<Value = (usize, bool, i64, i64)> {
        (
            0usize..6,
            any::<bool>(),
            0i64..150 * SECONDS_PER_DAY,
            prop_oneof![4 => 1i64..4, 1 => -2i64..0],
        )
    }

    /// Small random corpora: up to six repositories, events over ~150 days,
    /// occasional negative deltas when `allow_negative`.
    pub fn corpus(allow_negative: bool) -> impl Strategy<Value = Corpus> {
        (1usize..7, prop::collection::vec(raw_event(), 1..60), 1u32..40).prop_map(move |(n, raw, days)| {
            let repos: Vec<RepoRecord> = (0..n)
                .map(|i| {
                    repo(
                        format!("r{i}"),
                        vec![format!("f{}", i % 3)],
                        (i as u64, 2 * i as u64, 1),
                    )
                })
                .collect();
            let events: Vec<PopularityEvent> = raw
                .into_iter()
                .map(|(r, fork, offset, delta)| {
                    let delta = if allow_negative { delta } else { delta.abs() };
                    PopularityEvent::new(
                        format!("r{}", r % n),
                        if fork { EventKind::Fork } else { EventKind::Star },
                        Timestamp::from_secs(BASE + offset),
                        delta,
                    )
                })
                .collect();
            Corpus::new(repos, events, days).expect("generated corpus is valid")
        })
    }

    /// Bipartite adjacency rows: repository id to follower ids.
    pub fn adjacency() -> impl Strategy<Value = Vec<(String, Vec<String>)>> {
        prop::collection::vec(prop::collection::vec(0u8..12, 0..6), 1..10).prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, fs)| (format!("r{i}"), fs.into_iter().map(|f| format!("f{f}")).collect()))
                .collect()
        })
    }
}
