use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use popscore::graph::{
    build_graph, clustering_coefficient, default_steps, deletion_experiment, measure_scores, CoefficientKind,
    DeletionMeasure, FollowerGraph,
};
use popscore::ingest::fetch::TOKEN_ENV_VAR;
use popscore::ingest::{load_corpus, manifest_for, manifest_path, render_corpus, ApiClient, ApiClientConfig};
use popscore::model::{bin_events, Corpus, DatasetSource, EventKind, Timestamp};
use popscore::report::{self, CorrelationRow};
use popscore::scoring::{
    classify_growth, compute_weights, rank_with_mode, score_all, GrowthThresholds, Indicator, WeightMode, WeightTable,
};
use popscore::stats::{interval_sweep, ols_line, overall_scores, summarize as summarize_values, RepoProperty};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::output::{meta_path, InputProvenance, RunMeta, Staged};
use crate::{
    ClassifyArgs, CoefficientArg, DataArgs, FetchArgs, GraphBuildArgs, GraphDeletionArgs, IndicatorArg, IngestArgs,
    MeasureArg, RankArgs, SampleArgs, ScoreArgs, SeriesArg, SweepArgs,
};

impl From<IndicatorArg> for Indicator {
    fn from(a: IndicatorArg) -> Self {
        match a {
            IndicatorArg::Forks => Indicator::Forks,
            IndicatorArg::Stars => Indicator::Stars,
            IndicatorArg::Watchers => Indicator::Watchers,
            IndicatorArg::Wtps => Indicator::Wtps,
        }
    }
}

impl From<CoefficientArg> for CoefficientKind {
    fn from(a: CoefficientArg) -> Self {
        match a {
            CoefficientArg::GlobalTransitivity => CoefficientKind::GlobalTransitivity,
            CoefficientArg::AverageLocal => CoefficientKind::AverageLocal,
            CoefficientArg::BipartiteLatapy => CoefficientKind::BipartiteLatapy,
        }
    }
}

impl From<MeasureArg> for DeletionMeasure {
    fn from(a: MeasureArg) -> Self {
        match a {
            MeasureArg::Wtps => DeletionMeasure::Wtps,
            MeasureArg::Stars => DeletionMeasure::Stars,
            MeasureArg::Forks => DeletionMeasure::Forks,
            MeasureArg::Watchers => DeletionMeasure::Watchers,
        }
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

/// Loads the input after checking that no output would overwrite it.
fn load(input: &Path, interval_days: u32, outputs: &[&Path]) -> Result<Corpus, CliError> {
    if !input.is_file() {
        return Err(CliError::config(format!(
            "input file `{}` does not exist",
            input.display()
        )));
    }
    let protected = [input.to_path_buf(), manifest_path(input)];
    for out in outputs {
        if protected.iter().any(|p| same_file(p, out)) {
            return Err(CliError::config(format!(
                "output `{}` would overwrite an input file",
                out.display()
            )));
        }
    }
    Ok(load_corpus(input, interval_days)?)
}

fn stage_with_meta<C: Serialize, S: Serialize>(
    mut staged: Staged,
    output: &Path,
    command: &'static str,
    config: C,
    input: Option<InputProvenance>,
    summary: S,
) -> Result<(), CliError> {
    staged.add(
        meta_path(output),
        RunMeta::new(command, config, input, summary).to_json(),
    );
    staged.commit()
}

fn outputs_of(primary: &Path, extra: &[&Option<PathBuf>]) -> Vec<PathBuf> {
    let mut out = vec![primary.to_path_buf(), meta_path(primary)];
    out.extend(extra.iter().filter_map(|p| p.as_ref().cloned()));
    out
}

fn load_for(data: &DataArgs, outputs: &[PathBuf]) -> Result<Corpus, CliError> {
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    load(&data.input, data.interval_days, &refs)
}

pub fn ingest(a: IngestArgs) -> Result<(), CliError> {
    let outputs = vec![
        a.data.output.clone(),
        manifest_path(&a.data.output),
        meta_path(&a.data.output),
    ];
    let corpus = load_for(&a.data, &outputs)?;
    let mut staged = Staged::default();
    staged.add(&a.data.output, render_corpus(&corpus));
    staged.add(manifest_path(&a.data.output), pretty(&manifest_for(&corpus)));
    let summary = json!({ "repositories": corpus.repos().len(), "events": corpus.events().len() });
    let input = InputProvenance::of(&a.data.input, &corpus);
    stage_with_meta(staged, &a.data.output, "ingest", &a, Some(input), summary)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

pub fn fetch(a: FetchArgs) -> Result<(), CliError> {
    let token = std::env::var(TOKEN_ENV_VAR).ok().filter(|t| !t.is_empty());
    let config = ApiClientConfig {
        base_url: a.base_url.trim_end_matches('/').to_string(),
        auth_token: token.clone(),
        requests_per_hour_cap: a.requests_per_hour,
        page_size: a.page_size,
        retry_limit: a.retry_limit,
        fetch_followers: !a.no_followers,
    };
    for slug in &a.repos {
        if slug.split('/').filter(|p| !p.is_empty()).count() != 2 {
            return Err(CliError::config(format!("`{slug}` is not of the form owner/name")));
        }
    }
    let client = ApiClient::live(config)?;
    let mut records = Vec::new();
    let mut events = Vec::new();
    let mut truncated = BTreeMap::new();
    for slug in &a.repos {
        let mut fetched = client.fetch_repo(slug)?;
        if !a.allow_truncated {
            fetched = fetched.require_complete()?;
        }
        if !fetched.truncated.is_empty() {
            truncated.insert(slug.clone(), fetched.truncated.clone());
        }
        records.push(fetched.record);
        events.extend(fetched.events);
    }
    let corpus = Corpus::new(records, events, 30)?
        .with_captured_at(Timestamp::now())
        .with_source(DatasetSource::LiveApi);

    let mut staged = Staged::default();
    staged.add(&a.output, render_corpus(&corpus));
    staged.add(manifest_path(&a.output), pretty(&manifest_for(&corpus)));
    let summary = json!({
        "authenticated": token.is_some(),
        "repositories": corpus.repos().len(),
        "events": corpus.events().len(),
        "truncated": truncated,
    });
    stage_with_meta(staged, &a.output, "fetch", &a, None, summary)
}

pub fn score(a: ScoreArgs) -> Result<(), CliError> {
    let corpus = load_for(&a.data, &outputs_of(&a.data.output, &[&a.weights_output]))?;
    let binned = bin_events(&corpus)?;
    let (weights, mode) = if a.weights_one {
        (WeightTable::ones(binned.interval_count()), "ones")
    } else {
        (compute_weights(&binned), "community")
    };
    let cards = score_all(&binned, &weights)?;
    let mut staged = Staged::default();
    staged.add(&a.data.output, report::scores_csv(&cards));
    if let Some(path) = &a.weights_output {
        staged.add(path, report::weights_csv(corpus.grid(), &weights));
    }
    let summary = json!({ "repositories": cards.len(), "weights": mode });
    let input = InputProvenance::of(&a.data.input, &corpus);
    stage_with_meta(staged, &a.data.output, "score", &a, Some(input), summary)
}

pub fn rank(a: RankArgs) -> Result<(), CliError> {
    let corpus = load_for(&a.data, &outputs_of(&a.data.output, &[]))?;
    let indicator = Indicator::from(a.indicator);
    let mode = if a.weights_one {
        WeightMode::Ones
    } else {
        WeightMode::Community
    };
    let entries = rank_with_mode(&corpus, indicator, mode)?;
    let mut staged = Staged::default();
    staged.add(&a.data.output, report::ranks_csv(indicator, &entries));
    let summary = json!({ "repositories": entries.len() });
    let input = InputProvenance::of(&a.data.input, &corpus);
    stage_with_meta(staged, &a.data.output, "rank", &a, Some(input), summary)
}

pub fn correlate(a: DataArgs) -> Result<(), CliError> {
    let corpus = load_for(&a, &outputs_of(&a.output, &[]))?;
    let scores = overall_scores(&corpus)?;
    let rows: Vec<CorrelationRow> = RepoProperty::ALL
        .iter()
        .map(|p| CorrelationRow {
            x: Indicator::Wtps.to_string(),
            y: p.as_str().to_string(),
            result: ols_line(&scores, &p.values(&corpus)),
        })
        .collect();
    let mut staged = Staged::default();
    staged.add(&a.output, report::correlations_csv(&rows));
    let summary = json!({
        "pairs": rows.len(),
        "degenerate": rows.iter().filter(|r| r.result.is_err()).count(),
    });
    let input = InputProvenance::of(&a.input, &corpus);
    stage_with_meta(staged, &a.output, "correlate", &a, Some(input), summary)
}

pub fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let first = *a
        .intervals
        .first()
        .ok_or_else(|| CliError::config("no interval lengths given"))?;
    let corpus = load(&a.input, first, &[&a.output, &meta_path(&a.output)])?;
    let rows = interval_sweep(&corpus, &a.intervals)?;
    let mut staged = Staged::default();
    staged.add(&a.output, report::sweep_csv(&rows));
    let summary = json!({ "rows": rows.len() });
    let input = InputProvenance::of(&a.input, &corpus);
    stage_with_meta(staged, &a.output, "sweep", &a, Some(input), summary)
}

pub fn classify(a: ClassifyArgs) -> Result<(), CliError> {
    for (name, v) in [
        ("loss-fraction", a.loss_fraction),
        ("growth-fraction", a.growth_fraction),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::config(format!("--{name} must lie in [0, 1], got {v}")));
        }
    }
    let thresholds = GrowthThresholds {
        min_activity: a.min_activity,
        loss_fraction: a.loss_fraction,
        growth_fraction: a.growth_fraction,
    };
    let kinds: Vec<EventKind> = match a.indicator {
        Some(SeriesArg::Forks) => vec![EventKind::Fork],
        Some(SeriesArg::Stars) => vec![EventKind::Star],
        None => EventKind::ALL.to_vec(),
    };
    let corpus = load_for(&a.data, &outputs_of(&a.data.output, &[]))?;
    let binned = bin_events(&corpus)?;
    let mut rows = Vec::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for repo in corpus.repos() {
        for &kind in &kinds {
            let label = classify_growth(&binned, &repo.repo_id, kind, &thresholds)?;
            *counts.entry(label.label.as_str()).or_default() += 1;
            rows.push((repo.repo_id.clone(), kind, label));
        }
    }
    let mut staged = Staged::default();
    staged.add(&a.data.output, report::growth_csv(&rows));
    let summary = json!({ "labels": counts });
    let input = InputProvenance::of(&a.data.input, &corpus);
    stage_with_meta(staged, &a.data.output, "classify", &a, Some(input), summary)
}

fn sampled_graph(corpus: &Corpus, sample: &SampleArgs) -> FollowerGraph {
    let graph = build_graph(corpus);
    match sample.sample {
        Some(n) => graph.sample_repos(n, sample.seed),
        None => graph,
    }
}

pub fn graph_build(a: GraphBuildArgs) -> Result<(), CliError> {
    let corpus = load_for(&a.data, &outputs_of(&a.data.output, &[]))?;
    let graph = sampled_graph(&corpus, &a.sample);
    let coefficients: BTreeMap<&str, Option<f64>> = [
        CoefficientKind::GlobalTransitivity,
        CoefficientKind::AverageLocal,
        CoefficientKind::BipartiteLatapy,
    ]
    .into_iter()
    .map(|k| (k.as_str(), clustering_coefficient(&graph, k).ok()))
    .collect();
    let mut staged = Staged::default();
    staged.add(&a.data.output, graph.to_edge_list());
    let summary = json!({
        "repo_nodes": graph.repo_count(),
        "follower_nodes": graph.follower_count(),
        "edges": graph.edge_count(),
        "coefficients": coefficients,
    });
    let input = InputProvenance::of(&a.data.input, &corpus);
    stage_with_meta(staged, &a.data.output, "graph-build", &a, Some(input), summary)
}

pub fn graph_deletion(a: GraphDeletionArgs) -> Result<(), CliError> {
    let corpus = load_for(&a.data, &outputs_of(&a.data.output, &[&a.series_json]))?;
    let graph = sampled_graph(&corpus, &a.sample);
    let steps = a.steps.unwrap_or_else(|| default_steps(graph.repo_count()));
    let measures: Vec<DeletionMeasure> = if a.measures.is_empty() {
        DeletionMeasure::ALL.to_vec()
    } else {
        a.measures.iter().map(|&m| m.into()).collect()
    };
    let kind = CoefficientKind::from(a.coefficient);
    let mut series = Vec::with_capacity(measures.len());
    for measure in measures {
        let scores = measure_scores(&corpus, measure)?;
        series.push(deletion_experiment(&graph, &scores, steps, kind, measure)?);
    }
    let mut staged = Staged::default();
    staged.add(&a.data.output, report::deletion_csv(&series));
    if let Some(path) = &a.series_json {
        staged.add(path, pretty(&series));
    }
    let summary = json!({ "repo_nodes": graph.repo_count(), "steps": steps });
    let input = InputProvenance::of(&a.data.input, &corpus);
    stage_with_meta(staged, &a.data.output, "graph-deletion", &a, Some(input), summary)
}

pub fn summarize(a: DataArgs) -> Result<(), CliError> {
    let corpus = load_for(&a, &outputs_of(&a.output, &[]))?;
    let mut features = vec![(Indicator::Wtps.to_string(), overall_scores(&corpus)?)];
    features.extend(
        RepoProperty::ALL
            .iter()
            .map(|p| (p.as_str().to_string(), p.values(&corpus))),
    );
    let rows = features
        .into_iter()
        .map(|(name, values)| Ok((name, summarize_values(&values)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut staged = Staged::default();
    staged.add(&a.output, report::summary_csv(&rows));
    let summary = json!({ "features": rows.len() });
    let input = InputProvenance::of(&a.input, &corpus);
    stage_with_meta(staged, &a.output, "summarize", &a, Some(input), summary)
}
