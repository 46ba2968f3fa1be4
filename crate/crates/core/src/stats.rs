//! Pearson correlation, simple least-squares lines and five-number
//! summaries, plus the interval-length sweep built on them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{bin_events, Corpus, RepoRecord};
use crate::scoring::{compute_weights, score_all, Indicator, ScoringError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two paired samples, got {0}")]
    TooFewSamples(usize),
    #[error("correlation is undefined for a constant series")]
    DegenerateInput,
    #[error("cannot summarize an empty series")]
    EmptyInput,
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub pearson_r: f64,
    pub sample_count: usize,
}

struct Moments {
    mean_x: f64,
    mean_y: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

fn moments(x: &[f64], y: &[f64]) -> Result<Moments, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewSamples(x.len()));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateInput);
    }
    Ok(Moments {
        mean_x,
        mean_y,
        sxx,
        syy,
        sxy,
    })
}

/// Product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let m = moments(x, y)?;
    Ok((m.sxy / (m.sxx.sqrt() * m.syy.sqrt())).clamp(-1.0, 1.0))
}

/// Least-squares line of `y` on `x`.
pub fn ols_line(x: &[f64], y: &[f64]) -> Result<RegressionResult, StatsError> {
    let m = moments(x, y)?;
    let slope = m.sxy / m.sxx;
    Ok(RegressionResult {
        slope,
        intercept: m.mean_y - slope * m.mean_x,
        pearson_r: (m.sxy / (m.sxx.sqrt() * m.syy.sqrt())).clamp(-1.0, 1.0),
        sample_count: x.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub minimum: f64,
    pub first_quartile: f64,
    pub median: f64,
    pub third_quartile: f64,
    pub maximum: f64,
    pub mean: f64,
    /// Values beyond 1.5 IQR from the quartiles.
    pub outlier_count: usize,
}

/// Quantile by linear interpolation between closest ranks: position
/// `p * (n - 1)` in the sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<DistributionSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (low, high) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    Ok(DistributionSummary {
        minimum: sorted[0],
        first_quartile: q1,
        median: quantile(&sorted, 0.5),
        third_quartile: q3,
        maximum: sorted[sorted.len() - 1],
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        outlier_count: sorted.iter().filter(|&&v| v < low || v > high).count(),
    })
}

/// Snapshot value of a repository property used as a regression target.
pub fn snapshot_value(indicator: Indicator, repo: &RepoRecord) -> Option<f64> {
    match indicator {
        Indicator::Forks => Some(repo.forks_total as f64),
        Indicator::Stars => Some(repo.stars_total as f64),
        Indicator::Watchers => Some(repo.watchers_total as f64),
        Indicator::Wtps => None,
    }
}

/// Overall community-weighted score per repository, in corpus order.
pub fn overall_scores(corpus: &Corpus) -> Result<Vec<f64>, StatsError> {
    let binned = bin_events(corpus).map_err(ScoringError::from)?;
    let weights = compute_weights(&binned);
    Ok(score_all(&binned, &weights)?.into_iter().map(|c| c.overall).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub interval_days: u32,
    pub indicator: Indicator,
    pub result: RegressionResult,
}

pub const DEFAULT_SWEEP_DAYS: [u32; 4] = [30, 21, 14, 7];

/// Re-scores the corpus for each interval length and regresses the forks,
/// stars and watchers totals on the overall score (score on the x axis).
pub fn interval_sweep(corpus: &Corpus, interval_days_list: &[u32]) -> Result<Vec<SweepRow>, StatsError> {
    let mut rows = Vec::with_capacity(interval_days_list.len() * 3);
    for &days in interval_days_list {
        let regridded = corpus.regrid(days).map_err(ScoringError::from)?;
        let scores = overall_scores(&regridded)?;
        for indicator in [Indicator::Forks, Indicator::Stars, Indicator::Watchers] {
            let y: Vec<f64> = regridded
                .repos()
                .iter()
                .filter_map(|r| snapshot_value(indicator, r))
                .collect();
            rows.push(SweepRow {
                interval_days: days,
                indicator,
                result: ols_line(&scores, &y)?,
            });
        }
    }
    Ok(rows)
}

/// Repository properties correlated against the overall score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepoProperty {
    AgeDays,
    OwnerFollowers,
    SizeKb,
    Forks,
    Stars,
    Watchers,
}

impl RepoProperty {
    pub const ALL: [RepoProperty; 6] = [
        RepoProperty::AgeDays,
        RepoProperty::OwnerFollowers,
        RepoProperty::SizeKb,
        RepoProperty::Forks,
        RepoProperty::Stars,
        RepoProperty::Watchers,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RepoProperty::AgeDays => "age_days",
            RepoProperty::OwnerFollowers => "owner_followers",
            RepoProperty::SizeKb => "size_kb",
            RepoProperty::Forks => "forks",
            RepoProperty::Stars => "stars",
            RepoProperty::Watchers => "watchers",
        }
    }

    pub fn values(self, corpus: &Corpus) -> Vec<f64> {
        corpus
            .repos()
            .iter()
            .map(|r| match self {
                RepoProperty::AgeDays => corpus.age_days(r),
                RepoProperty::OwnerFollowers => r.owner_followers as f64,
                RepoProperty::SizeKb => r.size_kb as f64,
                RepoProperty::Forks => r.forks_total as f64,
                RepoProperty::Stars => r.stars_total as f64,
                RepoProperty::Watchers => r.watchers_total as f64,
            })
            .collect()
    }
}
