mod common;

use common::{brute_force_scores, fixture, EXAMPLE_FORKS, EXAMPLE_STARS, PRINTED_SCORES, PRINTED_TOTALS};
use popscore::ingest::{load_corpus, render_corpus};
use popscore::model::{bin_events, EventKind};
use popscore::scoring::{
    classify_growth, compute_weights, rank, rank_with_mode, score_all, wtps_interval, wtps_overall, GrowthPattern,
    GrowthThresholds, Indicator, WeightMode, WeightTable,
};

fn ids(entries: &[popscore::scoring::RankEntry]) -> Vec<&str> {
    entries.iter().map(|e| e.repo_id.as_str()).collect()
}

#[test]
fn fixture_loads_with_expected_totals() {
    let corpus = load_corpus(&fixture("worked_example.jsonl"), 30).unwrap();
    assert_eq!(corpus.repos().len(), 4);
    let total = |kind| -> i64 { corpus.events().iter().filter(|e| e.kind == kind).map(|e| e.delta).sum() };
    assert_eq!(total(EventKind::Fork), 200);
    assert_eq!(total(EventKind::Star), 180);
    assert_eq!(corpus.grid().interval_count, 5);
    assert_eq!(corpus.grid().epoch.to_string(), "2018-01-01T00:00:00Z");
}

#[test]
fn binned_series_match_counts() {
    let corpus = load_corpus(&fixture("worked_example.jsonl"), 30).unwrap();
    let binned = bin_events(&corpus).unwrap();
    for i in 0..4 {
        let row = binned.repo_index(&format!("R{}", i + 1)).unwrap();
        assert_eq!(binned.series(row, EventKind::Fork), EXAMPLE_FORKS[i]);
        assert_eq!(binned.series(row, EventKind::Star), EXAMPLE_STARS[i]);
    }
}

#[test]
fn fixture_file_is_canonical() {
    let path = fixture("worked_example.jsonl");
    let corpus = load_corpus(&path, 30).unwrap();
    assert_eq!(render_corpus(&corpus), std::fs::read_to_string(path).unwrap());
}

#[test]
fn scores_match_raw_event_oracle() {
    let corpus = load_corpus(&fixture("worked_example.jsonl"), 30).unwrap();
    let binned = bin_events(&corpus).unwrap();
    let weights = compute_weights(&binned);
    let oracle = brute_force_scores(&corpus);
    for card in score_all(&binned, &weights).unwrap() {
        let (intervals, overall) = &oracle[&card.repo_id];
        for (a, b) in card.interval_scores.iter().zip(intervals) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((card.overall - overall).abs() < 1e-9);
    }
    // recomputed values from the weights and counts
    assert!((wtps_interval(&binned, &weights, "R1", 0).unwrap() - 4.133_333_333_333_333).abs() < 1e-9);
    assert!((wtps_interval(&binned, &weights, "R2", 4).unwrap() - 10.505_555_555_555_555).abs() < 1e-9);
    assert!((wtps_overall(&binned, &weights, "R1").unwrap().overall - 19_991.0 / 900.0).abs() < 1e-9);
}

#[test]
fn scores_track_rounded_reference_values() {
    let corpus = load_corpus(&fixture("worked_example.jsonl"), 30).unwrap();
    let binned = bin_events(&corpus).unwrap();
    let weights = compute_weights(&binned);
    for i in 0..4 {
        let card = wtps_overall(&binned, &weights, &format!("R{}", i + 1)).unwrap();
        for (t, (got, printed)) in card.interval_scores.iter().zip(PRINTED_SCORES[i]).enumerate() {
            assert!((got - printed).abs() <= 0.15, "R{} t{}", i + 1, t + 1);
        }
        assert!((card.overall - PRINTED_TOTALS[i]).abs() <= 0.25);
    }
}

#[test]
fn unit_weights_reduce_to_raw_totals() {
    let corpus = load_corpus(&fixture("worked_example.jsonl"), 30).unwrap();
    let binned = bin_events(&corpus).unwrap();
    let ones = WeightTable::ones(binned.interval_count());
    for repo in corpus.repos() {
        let card = wtps_overall(&binned, &ones, &repo.repo_id).unwrap();
        assert_eq!(card.overall, (repo.forks_total + repo.stars_total) as f64);
    }
    let ranked = rank_with_mode(&corpus, Indicator::Wtps, WeightMode::Ones).unwrap();
    assert_eq!(ids(&ranked), ["R4", "R1", "R3", "R2"]);
}

#[test]
fn rankings_by_indicator() {
    let corpus = load_corpus(&fixture("worked_example.jsonl"), 30).unwrap();
    let forks = rank(&corpus, Indicator::Forks).unwrap();
    assert_eq!(ids(&forks), ["R2", "R1", "R4", "R3"]);
    assert_eq!(
        forks.iter().map(|e| e.value).collect::<Vec<_>>(),
        [58.0, 54.0, 46.0, 42.0]
    );
    let stars = rank(&corpus, Indicator::Stars).unwrap();
    assert_eq!(ids(&stars), ["R4", "R3", "R1", "R2"]);
    let wtps = rank(&corpus, Indicator::Wtps).unwrap();
    assert_eq!(ids(&wtps), ["R1", "R3", "R4", "R2"]);
    assert_eq!(
        ids(&rank(&corpus, Indicator::Watchers).unwrap()),
        ["R3", "R4", "R1", "R2"]
    );
}

#[test]
fn growth_of_steady_repository() {
    let corpus = load_corpus(&fixture("worked_example.jsonl"), 30).unwrap();
    let binned = bin_events(&corpus).unwrap();
    let label = classify_growth(&binned, "R3", EventKind::Fork, &GrowthThresholds::default()).unwrap();
    assert_eq!(label.label, GrowthPattern::SustainedGrowth);
    assert!(classify_growth(&binned, "R9", EventKind::Fork, &GrowthThresholds::default()).is_err());
}

#[test]
fn zero_star_corpus_has_zero_star_weights() {
    let corpus = load_corpus(&fixture("worked_example.jsonl"), 30).unwrap();
    let forks_only: Vec<_> = corpus
        .events()
        .iter()
        .filter(|e| e.kind == EventKind::Fork)
        .cloned()
        .collect();
    let corpus = popscore::Corpus::new(corpus.repos().to_vec(), forks_only, 30).unwrap();
    let weights = compute_weights(&bin_events(&corpus).unwrap());
    assert!(weights.star_weights.iter().all(|&w| w == 0.0));
    assert!((weights.fork_weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}
