//! Community-weighted popularity scoring.
//!
//! For each interval `t` the fork weight is the share of all community forks
//! that arrived in `t` (stars likewise). A repository's interval score is
//! `fork_weight[t] * forks[t] + star_weight[t] * stars[t]` and its overall
//! score is the sum over intervals.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{bin_events, BinnedCounts, Corpus, EventKind, ModelError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoringError {
    #[error("unknown repository `{0}`")]
    UnknownRepo(String),
    #[error("interval {index} out of range (grid has {count} intervals)")]
    IntervalOutOfRange { index: usize, count: usize },
    #[error("weight table covers {weights} intervals but counts cover {counts}")]
    WeightShapeMismatch { weights: usize, counts: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Per-interval fork and star weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub fork_weights: Vec<f64>,
    pub star_weights: Vec<f64>,
}

impl WeightTable {
    /// Every weight set to 1: scores a repository in isolation from the
    /// community.
    pub fn ones(interval_count: usize) -> Self {
        WeightTable {
            fork_weights: vec![1.0; interval_count],
            star_weights: vec![1.0; interval_count],
        }
    }

    pub fn interval_count(&self) -> usize {
        self.fork_weights.len()
    }

    pub fn weights(&self, kind: EventKind) -> &[f64] {
        match kind {
            EventKind::Fork => &self.fork_weights,
            EventKind::Star => &self.star_weights,
        }
    }
}

/// How interval weights are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    #[default]
    Community,
    Ones,
}

impl WeightMode {
    pub fn table(self, binned: &BinnedCounts) -> WeightTable {
        match self {
            WeightMode::Community => compute_weights(binned),
            WeightMode::Ones => WeightTable::ones(binned.interval_count()),
        }
    }
}

fn share_of_total(binned: &BinnedCounts, kind: EventKind) -> Vec<f64> {
    let total = binned.grand_total(kind);
    (0..binned.interval_count())
        .map(|t| {
            if total <= 0 {
                0.0
            } else {
                binned.interval_total(t, kind) as f64 / total as f64
            }
        })
        .collect()
}

/// Interval weights from community-wide totals. An indicator whose overall
/// total is not positive gets all-zero weights.
pub fn compute_weights(binned: &BinnedCounts) -> WeightTable {
    WeightTable {
        fork_weights: share_of_total(binned, EventKind::Fork),
        star_weights: share_of_total(binned, EventKind::Star),
    }
}

/// Score of one repository and interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub repo_id: String,
    pub interval_scores: Vec<f64>,
    pub overall: f64,
}

fn check_shape(binned: &BinnedCounts, weights: &WeightTable) -> Result<(), ScoringError> {
    let counts = binned.interval_count();
    if weights.fork_weights.len() != counts || weights.star_weights.len() != counts {
        return Err(ScoringError::WeightShapeMismatch {
            weights: weights.interval_count(),
            counts,
        });
    }
    Ok(())
}

fn row_of(binned: &BinnedCounts, repo: &str) -> Result<usize, ScoringError> {
    binned
        .repo_index(repo)
        .ok_or_else(|| ScoringError::UnknownRepo(repo.to_string()))
}

fn interval_score(binned: &BinnedCounts, weights: &WeightTable, row: usize, t: usize) -> f64 {
    weights.fork_weights[t] * binned.get(row, t, EventKind::Fork) as f64
        + weights.star_weights[t] * binned.get(row, t, EventKind::Star) as f64
}

pub fn wtps_interval(binned: &BinnedCounts, weights: &WeightTable, repo: &str, t: usize) -> Result<f64, ScoringError> {
    check_shape(binned, weights)?;
    let row = row_of(binned, repo)?;
    if t >= binned.interval_count() {
        return Err(ScoringError::IntervalOutOfRange {
            index: t,
            count: binned.interval_count(),
        });
    }
    Ok(interval_score(binned, weights, row, t))
}

pub fn wtps_overall(binned: &BinnedCounts, weights: &WeightTable, repo: &str) -> Result<ScoreCard, ScoringError> {
    check_shape(binned, weights)?;
    let row = row_of(binned, repo)?;
    Ok(score_row(binned, weights, row))
}

fn score_row(binned: &BinnedCounts, weights: &WeightTable, row: usize) -> ScoreCard {
    let interval_scores: Vec<f64> = (0..binned.interval_count())
        .map(|t| interval_score(binned, weights, row, t))
        .collect();
    let overall = interval_scores.iter().sum();
    ScoreCard {
        repo_id: binned.repo_ids()[row].clone(),
        interval_scores,
        overall,
    }
}

/// Score cards for every repository, in `binned` row order.
pub fn score_all(binned: &BinnedCounts, weights: &WeightTable) -> Result<Vec<ScoreCard>, ScoringError> {
    check_shape(binned, weights)?;
    Ok((0..binned.repo_ids().len())
        .map(|row| score_row(binned, weights, row))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indicator {
    Forks,
    Stars,
    Watchers,
    Wtps,
}

impl Indicator {
    pub const ALL: [Indicator; 4] = [Indicator::Forks, Indicator::Stars, Indicator::Watchers, Indicator::Wtps];

    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::Forks => "forks",
            Indicator::Stars => "stars",
            Indicator::Watchers => "watchers",
            Indicator::Wtps => "wtps",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "forks" => Ok(Indicator::Forks),
            "stars" => Ok(Indicator::Stars),
            "watchers" => Ok(Indicator::Watchers),
            "wtps" => Ok(Indicator::Wtps),
            other => Err(format!("unknown indicator `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub repo_id: String,
    pub value: f64,
    /// 1-based competition rank: tied values share the lower number.
    pub rank: usize,
}

/// Exact overall score as a fraction with a denominator shared by every
/// repository: `(sum_t F_t*f_t) * S + (sum_t S_t*s_t) * F` over `F * S`.
/// Ordering on the numerator is exact and unaffected by uniform scaling.
fn exact_wtps_numerators(binned: &BinnedCounts, mode: WeightMode) -> Vec<i128> {
    let rows = binned.repo_ids().len();
    match mode {
        WeightMode::Ones => (0..rows)
            .map(|r| (binned.repo_total(r, EventKind::Fork) + binned.repo_total(r, EventKind::Star)) as i128)
            .collect(),
        WeightMode::Community => {
            let per_interval = |kind| -> Vec<i128> {
                (0..binned.interval_count())
                    .map(|t| binned.interval_total(t, kind) as i128)
                    .collect()
            };
            let fork_t = per_interval(EventKind::Fork);
            let star_t = per_interval(EventKind::Star);
            let fork_total = binned.grand_total(EventKind::Fork) as i128;
            let star_total = binned.grand_total(EventKind::Star) as i128;
            (0..rows)
                .map(|r| {
                    let dot = |kind, community: &[i128]| -> i128 {
                        binned
                            .series(r, kind)
                            .iter()
                            .zip(community)
                            .map(|(&own, &all)| own as i128 * all)
                            .sum()
                    };
                    let fork_part = if fork_total > 0 {
                        dot(EventKind::Fork, &fork_t) * star_total.max(1)
                    } else {
                        0
                    };
                    let star_part = if star_total > 0 {
                        dot(EventKind::Star, &star_t) * fork_total.max(1)
                    } else {
                        0
                    };
                    fork_part + star_part
                })
                .collect()
        }
    }
}

/// Descending ranking with ties broken by ascending repository id.
/// `keys` orders the entries; `values` is what gets reported.
fn competition_rank<K: Ord + Copy>(ids: &[String], keys: &[K], values: &[f64]) -> Vec<RankEntry> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| keys[b].cmp(&keys[a]).then_with(|| ids[a].cmp(&ids[b])));
    let mut out: Vec<RankEntry> = Vec::with_capacity(order.len());
    for (pos, &i) in order.iter().enumerate() {
        let rank = match pos {
            0 => 1,
            _ if keys[order[pos - 1]] == keys[i] => out[pos - 1].rank,
            _ => pos + 1,
        };
        out.push(RankEntry {
            repo_id: ids[i].clone(),
            value: values[i],
            rank,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct TotalF64(f64);

impl Eq for TotalF64 {}

impl PartialOrd for TotalF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TotalF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Ranks arbitrary `(repo_id, value)` pairs.
pub fn rank_values(entries: &[(String, f64)]) -> Vec<RankEntry> {
    let ids: Vec<String> = entries.iter().map(|e| e.0.clone()).collect();
    let values: Vec<f64> = entries.iter().map(|e| e.1).collect();
    let keys: Vec<TotalF64> = values.iter().map(|&v| TotalF64(v)).collect();
    competition_rank(&ids, &keys, &values)
}

/// Ranks a corpus under an indicator using community weights.
pub fn rank(corpus: &Corpus, indicator: Indicator) -> Result<Vec<RankEntry>, ScoringError> {
    rank_with_mode(corpus, indicator, WeightMode::Community)
}

/// Forks, stars and watchers rank by snapshot totals; WTPS ranks by the
/// exact overall score under `mode`.
pub fn rank_with_mode(corpus: &Corpus, indicator: Indicator, mode: WeightMode) -> Result<Vec<RankEntry>, ScoringError> {
    let snapshot = |f: fn(&crate::model::RepoRecord) -> u64| -> Vec<RankEntry> {
        let ids: Vec<String> = corpus.repos().iter().map(|r| r.repo_id.clone()).collect();
        let keys: Vec<u64> = corpus.repos().iter().map(f).collect();
        let values: Vec<f64> = keys.iter().map(|&k| k as f64).collect();
        competition_rank(&ids, &keys, &values)
    };
    Ok(match indicator {
        Indicator::Forks => snapshot(|r| r.forks_total),
        Indicator::Stars => snapshot(|r| r.stars_total),
        Indicator::Watchers => snapshot(|r| r.watchers_total),
        Indicator::Wtps => {
            let binned = bin_events(corpus)?;
            rank_binned(&binned, mode)
        }
    })
}

/// WTPS ranking straight from binned counts.
pub fn rank_binned(binned: &BinnedCounts, mode: WeightMode) -> Vec<RankEntry> {
    let weights = mode.table(binned);
    let cards = score_all(binned, &weights).expect("weight table built from the same counts");
    let values: Vec<f64> = cards.iter().map(|c| c.overall).collect();
    let keys = exact_wtps_numerators(binned, mode);
    competition_rank(binned.repo_ids(), &keys, &values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthPattern {
    Stagnant,
    GainedThenLost,
    SustainedGrowth,
}

impl GrowthPattern {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthPattern::Stagnant => "stagnant",
            GrowthPattern::GainedThenLost => "gained_then_lost",
            GrowthPattern::SustainedGrowth => "sustained_growth",
        }
    }
}

/// Growth classifier thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthThresholds {
    /// Below this many events (sum of |delta|) a repository is stagnant.
    pub min_activity: u64,
    /// Relative drop from peak to final cumulative count that marks a loss.
    pub loss_fraction: f64,
    /// Share of active intervals with positive net delta needed for growth.
    pub growth_fraction: f64,
}

impl Default for GrowthThresholds {
    fn default() -> Self {
        GrowthThresholds {
            min_activity: 10,
            loss_fraction: 0.2,
            growth_fraction: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEvidence {
    pub peak_cumulative: i64,
    pub final_cumulative: i64,
    /// Fraction of active intervals with a positive net delta.
    pub active_interval_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthLabel {
    pub label: GrowthPattern,
    pub evidence: GrowthEvidence,
}

/// Labels one interval series. Active intervals run from the first interval
/// with a nonzero delta to the end of the grid.
pub fn classify_series(deltas: &[i64], thresholds: &GrowthThresholds) -> GrowthLabel {
    let mut cumulative = 0i64;
    let mut peak = 0i64;
    for &d in deltas {
        cumulative += d;
        peak = peak.max(cumulative);
    }
    let activity: u64 = deltas.iter().map(|d| d.unsigned_abs()).sum();
    let active = deltas.iter().position(|&d| d != 0).map_or(&[][..], |i| &deltas[i..]);
    let active_interval_fraction = if active.is_empty() {
        0.0
    } else {
        active.iter().filter(|&&d| d > 0).count() as f64 / active.len() as f64
    };
    let evidence = GrowthEvidence {
        peak_cumulative: peak,
        final_cumulative: cumulative,
        active_interval_fraction,
    };

    let label = if activity < thresholds.min_activity {
        GrowthPattern::Stagnant
    } else if peak > 0 && (peak - cumulative) as f64 > thresholds.loss_fraction * peak as f64 {
        GrowthPattern::GainedThenLost
    } else if cumulative > 0 && active_interval_fraction >= thresholds.growth_fraction {
        GrowthPattern::SustainedGrowth
    } else {
        GrowthPattern::Stagnant
    };
    GrowthLabel { label, evidence }
}

pub fn classify_growth(
    binned: &BinnedCounts,
    repo: &str,
    kind: EventKind,
    thresholds: &GrowthThresholds,
) -> Result<GrowthLabel, ScoringError> {
    let row = row_of(binned, repo)?;
    Ok(classify_series(binned.series(row, kind), thresholds))
}
