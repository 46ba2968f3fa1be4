//! CSV renderings of results. Column orders are part of the output format
//! and only change together with [`OUTPUT_SCHEMA_VERSION`].
//!
//! | table        | columns |
//! |--------------|---------|
//! | scores       | `repo_id,indicator,interval_index,value` |
//! | ranks        | `repo_id,indicator,interval_index,value,rank` |
//! | weights      | `interval_index,interval_start,fork_weight,star_weight` |
//! | sweep        | `interval_days,indicator,slope,intercept,pearson_r,sample_count` |
//! | correlations | `x,y,pearson_r,slope,intercept,sample_count,note` |
//! | growth       | `repo_id,indicator,label,peak_cumulative,final_cumulative,active_interval_fraction` |
//! | summary      | `feature,minimum,first_quartile,median,third_quartile,maximum,mean,outlier_count` |
//! | deletion     | `measure,coefficient_kind,step,removed_repo_id,value` |
//!
//! Interval rows use a numeric `interval_index`; whole-history rows use
//! `overall`. Floats are written in shortest round-trip form.

use crate::graph::DeletionSeries;
use crate::model::{EventKind, TimeGrid};
use crate::scoring::{GrowthLabel, Indicator, RankEntry, ScoreCard, WeightTable};
use crate::stats::{DistributionSummary, RegressionResult, StatsError, SweepRow};

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

pub const OVERALL: &str = "overall";

fn table<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn scores_csv(cards: &[ScoreCard]) -> String {
    table(
        ["repo_id", "indicator", "interval_index", "value"],
        cards.iter().flat_map(|c| {
            c.interval_scores
                .iter()
                .enumerate()
                .map(|(t, &v)| [c.repo_id.clone(), "wtps".into(), t.to_string(), num(v)])
                .chain(std::iter::once([
                    c.repo_id.clone(),
                    "wtps".into(),
                    OVERALL.into(),
                    num(c.overall),
                ]))
        }),
    )
}

pub fn ranks_csv(indicator: Indicator, entries: &[RankEntry]) -> String {
    table(
        ["repo_id", "indicator", "interval_index", "value", "rank"],
        entries.iter().map(|e| {
            [
                e.repo_id.clone(),
                indicator.to_string(),
                OVERALL.into(),
                num(e.value),
                e.rank.to_string(),
            ]
        }),
    )
}

pub fn weights_csv(grid: &TimeGrid, weights: &WeightTable) -> String {
    table(
        ["interval_index", "interval_start", "fork_weight", "star_weight"],
        (0..weights.interval_count()).map(|t| {
            [
                t.to_string(),
                grid.interval_start(t).to_string(),
                num(weights.fork_weights[t]),
                num(weights.star_weights[t]),
            ]
        }),
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    table(
        [
            "interval_days",
            "indicator",
            "slope",
            "intercept",
            "pearson_r",
            "sample_count",
        ],
        rows.iter().map(|r| {
            [
                r.interval_days.to_string(),
                r.indicator.to_string(),
                num(r.result.slope),
                num(r.result.intercept),
                num(r.result.pearson_r),
                r.result.sample_count.to_string(),
            ]
        }),
    )
}

/// One correlation row; degenerate inputs keep their row with an empty
/// value and the reason in `note`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub x: String,
    pub y: String,
    pub result: Result<RegressionResult, StatsError>,
}

pub fn correlations_csv(rows: &[CorrelationRow]) -> String {
    table(
        ["x", "y", "pearson_r", "slope", "intercept", "sample_count", "note"],
        rows.iter().map(|r| match &r.result {
            Ok(fit) => [
                r.x.clone(),
                r.y.clone(),
                num(fit.pearson_r),
                num(fit.slope),
                num(fit.intercept),
                fit.sample_count.to_string(),
                String::new(),
            ],
            Err(e) => [
                r.x.clone(),
                r.y.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                e.to_string(),
            ],
        }),
    )
}

pub fn growth_csv(rows: &[(String, EventKind, GrowthLabel)]) -> String {
    table(
        [
            "repo_id",
            "indicator",
            "label",
            "peak_cumulative",
            "final_cumulative",
            "active_interval_fraction",
        ],
        rows.iter().map(|(id, kind, g)| {
            let indicator = match kind {
                EventKind::Fork => Indicator::Forks,
                EventKind::Star => Indicator::Stars,
            };
            [
                id.clone(),
                indicator.to_string(),
                g.label.as_str().to_string(),
                g.evidence.peak_cumulative.to_string(),
                g.evidence.final_cumulative.to_string(),
                num(g.evidence.active_interval_fraction),
            ]
        }),
    )
}

pub fn summary_csv(rows: &[(String, DistributionSummary)]) -> String {
    table(
        [
            "feature",
            "minimum",
            "first_quartile",
            "median",
            "third_quartile",
            "maximum",
            "mean",
            "outlier_count",
        ],
        rows.iter().map(|(name, s)| {
            [
                name.clone(),
                num(s.minimum),
                num(s.first_quartile),
                num(s.median),
                num(s.third_quartile),
                num(s.maximum),
                num(s.mean),
                s.outlier_count.to_string(),
            ]
        }),
    )
}

/// Step 0 is the intact graph and has an empty `removed_repo_id`.
pub fn deletion_csv(series: &[DeletionSeries]) -> String {
    table(
        ["measure", "coefficient_kind", "step", "removed_repo_id", "value"],
        series.iter().flat_map(|s| {
            s.values.iter().enumerate().map(move |(step, &v)| {
                [
                    s.measure.as_str().to_string(),
                    s.coefficient_kind.to_string(),
                    step.to_string(),
                    step.checked_sub(1).map(|i| s.removed[i].clone()).unwrap_or_default(),
                    num(v),
                ]
            })
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_rows_end_with_overall() {
        let csv = scores_csv(&[ScoreCard {
            repo_id: "R1".into(),
            interval_scores: vec![1.5, 2.0],
            overall: 3.5,
        }]);
        assert_eq!(
            csv,
            "repo_id,indicator,interval_index,value\nR1,wtps,0,1.5\nR1,wtps,1,2\nR1,wtps,overall,3.5\n"
        );
    }

    #[test]
    fn ids_with_commas_are_quoted() {
        let csv = ranks_csv(
            Indicator::Stars,
            &[RankEntry {
                repo_id: "a,b".into(),
                value: 3.0,
                rank: 1,
            }],
        );
        assert!(csv.contains("\"a,b\",stars,overall,3,1"));
    }
}
