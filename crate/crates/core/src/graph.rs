//! Repository–follower two-mode graph, clustering coefficients and the
//! popularity-ordered repository deletion experiment.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{bin_events, Corpus};
use crate::scoring::{compute_weights, score_all, ScoringError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("requested {steps} deletions but only {repos} repository nodes exist")]
    StepsExceedRepoCount { steps: usize, repos: usize },
    #[error("no score for repository `{0}`")]
    MissingScore(String),
}

/// Bipartite graph: repositories on one side, owner followers on the other.
///
/// Removing a repository drops its edges but keeps followers, even when they
/// become isolated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowerGraph {
    repo_ids: Vec<String>,
    follower_ids: Vec<String>,
    repo_adj: Vec<BTreeSet<usize>>,
    follower_adj: Vec<BTreeSet<usize>>,
    repo_alive: Vec<bool>,
}

/// Node handle. Repositories and followers live in separate index spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Node {
    Repo(usize),
    Follower(usize),
}

impl FollowerGraph {
    /// Builds a graph from `(repo_id, follower_ids)` rows. Repeated follower
    /// ids within a row collapse into one edge.
    pub fn from_adjacency<'a, I, F>(rows: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, F)>,
        F: IntoIterator<Item = &'a str>,
    {
        let mut repos: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (repo, followers) in rows {
            repos
                .entry(repo.to_string())
                .or_default()
                .extend(followers.into_iter().map(str::to_string));
        }
        let follower_ids: Vec<String> = repos
            .values()
            .flatten()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let follower_index: HashMap<&str, usize> =
            follower_ids.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();

        let mut repo_adj = Vec::with_capacity(repos.len());
        let mut follower_adj = vec![BTreeSet::new(); follower_ids.len()];
        for (r, followers) in repos.values().enumerate() {
            let mut adj = BTreeSet::new();
            for f in followers {
                let fi = follower_index[f.as_str()];
                adj.insert(fi);
                follower_adj[fi].insert(r);
            }
            repo_adj.push(adj);
        }
        let repo_alive = vec![true; repos.len()];
        FollowerGraph {
            repo_ids: repos.into_keys().collect(),
            follower_ids,
            repo_adj,
            follower_adj,
            repo_alive,
        }
    }

    pub fn repo_count(&self) -> usize {
        self.repo_alive.iter().filter(|&&a| a).count()
    }

    pub fn follower_count(&self) -> usize {
        self.follower_ids.len()
    }

    pub fn node_count(&self) -> usize {
        self.repo_count() + self.follower_count()
    }

    pub fn edge_count(&self) -> usize {
        self.repo_adj.iter().map(BTreeSet::len).sum()
    }

    /// Remaining repository ids in ascending order.
    pub fn repo_ids(&self) -> impl Iterator<Item = &str> {
        self.repo_ids
            .iter()
            .zip(&self.repo_alive)
            .filter(|(_, &alive)| alive)
            .map(|(id, _)| id.as_str())
    }

    pub fn follower_ids(&self) -> &[String] {
        &self.follower_ids
    }

    pub fn contains_repo(&self, repo_id: &str) -> bool {
        self.repo_slot(repo_id).is_some()
    }

    fn repo_slot(&self, repo_id: &str) -> Option<usize> {
        self.repo_ids
            .binary_search_by(|id| id.as_str().cmp(repo_id))
            .ok()
            .filter(|&r| self.repo_alive[r])
    }

    pub fn repo_degree(&self, repo_id: &str) -> Option<usize> {
        self.repo_slot(repo_id).map(|r| self.repo_adj[r].len())
    }

    pub fn follower_degree(&self, follower_id: &str) -> Option<usize> {
        self.follower_ids
            .binary_search_by(|id| id.as_str().cmp(follower_id))
            .ok()
            .map(|f| self.follower_adj[f].len())
    }

    /// Follower ids adjacent to a repository.
    pub fn followers_of(&self, repo_id: &str) -> Option<Vec<&str>> {
        self.repo_slot(repo_id).map(|r| {
            self.repo_adj[r]
                .iter()
                .map(|&f| self.follower_ids[f].as_str())
                .collect()
        })
    }

    /// `(repo_id, follower_id)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.repo_ids.iter().enumerate().flat_map(move |(r, id)| {
            self.repo_adj[r]
                .iter()
                .map(move |&f| (id.as_str(), self.follower_ids[f].as_str()))
        })
    }

    /// Removes a repository node and its edges. Returns false when absent.
    pub fn remove_repo(&mut self, repo_id: &str) -> bool {
        let Some(r) = self.repo_slot(repo_id) else {
            return false;
        };
        for f in std::mem::take(&mut self.repo_adj[r]) {
            self.follower_adj[f].remove(&r);
        }
        self.repo_alive[r] = false;
        true
    }

    /// Subgraph on a uniform sample of `n` repositories.
    pub fn sample_repos(&self, n: usize, seed: u64) -> FollowerGraph {
        let alive: Vec<usize> = (0..self.repo_ids.len()).filter(|&r| self.repo_alive[r]).collect();
        if n >= alive.len() {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked: BTreeSet<usize> = sample(&mut rng, alive.len(), n).into_iter().map(|i| alive[i]).collect();
        FollowerGraph::from_adjacency(picked.iter().map(|&r| {
            (
                self.repo_ids[r].as_str(),
                self.repo_adj[r].iter().map(|&f| self.follower_ids[f].as_str()),
            )
        }))
    }

    /// One `repo_id follower_id` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (r, f) in self.edges() {
            out.push_str(r);
            out.push(' ');
            out.push_str(f);
            out.push('\n');
        }
        out
    }

    fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (0..self.repo_ids.len())
            .filter(|&r| self.repo_alive[r])
            .map(Node::Repo)
            .chain((0..self.follower_ids.len()).map(Node::Follower))
    }

    fn neighbors(&self, node: Node) -> Box<dyn Iterator<Item = Node> + '_> {
        match node {
            Node::Repo(r) => Box::new(self.repo_adj[r].iter().map(|&f| Node::Follower(f))),
            Node::Follower(f) => Box::new(self.follower_adj[f].iter().map(|&r| Node::Repo(r))),
        }
    }

    fn degree(&self, node: Node) -> usize {
        match node {
            Node::Repo(r) => self.repo_adj[r].len(),
            Node::Follower(f) => self.follower_adj[f].len(),
        }
    }

    fn adjacent(&self, a: Node, b: Node) -> bool {
        match (a, b) {
            (Node::Repo(r), Node::Follower(f)) | (Node::Follower(f), Node::Repo(r)) => self.repo_adj[r].contains(&f),
            _ => false,
        }
    }

    /// Number of linked pairs among the node's neighbours.
    fn neighbor_links(&self, node: Node) -> usize {
        let nbrs: Vec<Node> = self.neighbors(node).collect();
        let mut links = 0;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if self.adjacent(a, b) {
                    links += 1;
                }
            }
        }
        links
    }

    fn neighbor_set(&self, node: Node) -> &BTreeSet<usize> {
        match node {
            Node::Repo(r) => &self.repo_adj[r],
            Node::Follower(f) => &self.follower_adj[f],
        }
    }

    /// Mean pairwise neighbourhood overlap over the node's distance-2
    /// peers; 0 when it has none.
    fn overlap_coefficient(&self, node: Node) -> f64 {
        let own = self.neighbor_set(node);
        let mut peers = BTreeSet::new();
        for mid in self.neighbors(node) {
            peers.extend(self.neighbors(mid).filter(|&p| p != node));
        }
        if peers.is_empty() {
            return 0.0;
        }
        let total: f64 = peers
            .iter()
            .map(|&p| {
                let other = self.neighbor_set(p);
                let shared = own.intersection(other).count();
                let union = own.len() + other.len() - shared;
                shared as f64 / union as f64
            })
            .sum();
        total / peers.len() as f64
    }
}

/// Graph from corpus repositories and their `follower_ids`.
pub fn build_graph(corpus: &Corpus) -> FollowerGraph {
    FollowerGraph::from_adjacency(
        corpus
            .repos()
            .iter()
            .map(|r| (r.repo_id.as_str(), r.follower_ids.iter().map(String::as_str))),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    /// 3 * triangles / connected triples.
    GlobalTransitivity,
    /// Mean local coefficient over all nodes, 0 for degree < 2.
    AverageLocal,
    /// Mean over nodes of the average Jaccard overlap with distance-2 peers.
    #[default]
    BipartiteLatapy,
}

impl CoefficientKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CoefficientKind::GlobalTransitivity => "global_transitivity",
            CoefficientKind::AverageLocal => "average_local",
            CoefficientKind::BipartiteLatapy => "bipartite_latapy",
        }
    }
}

impl fmt::Display for CoefficientKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoefficientKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "global_transitivity" | "global" => Ok(CoefficientKind::GlobalTransitivity),
            "average_local" | "local" => Ok(CoefficientKind::AverageLocal),
            "bipartite_latapy" | "latapy" | "bipartite" => Ok(CoefficientKind::BipartiteLatapy),
            other => Err(format!("unknown coefficient kind `{other}`")),
        }
    }
}

pub fn clustering_coefficient(g: &FollowerGraph, kind: CoefficientKind) -> Result<f64, GraphError> {
    let node_count = g.node_count();
    if node_count == 0 {
        return Err(GraphError::EmptyGraph);
    }
    Ok(match kind {
        CoefficientKind::GlobalTransitivity => {
            let (mut closed, mut triples) = (0usize, 0usize);
            for node in g.nodes() {
                let d = g.degree(node);
                triples += d * d.saturating_sub(1) / 2;
                closed += g.neighbor_links(node);
            }
            // each triangle is seen once from each of its three corners
            if triples == 0 {
                0.0
            } else {
                closed as f64 / triples as f64
            }
        }
        CoefficientKind::AverageLocal => {
            let total: f64 = g
                .nodes()
                .map(|node| {
                    let d = g.degree(node);
                    if d < 2 {
                        0.0
                    } else {
                        g.neighbor_links(node) as f64 / (d * (d - 1) / 2) as f64
                    }
                })
                .sum();
            total / node_count as f64
        }
        CoefficientKind::BipartiteLatapy => {
            g.nodes().map(|node| g.overlap_coefficient(node)).sum::<f64>() / node_count as f64
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeletionMeasure {
    Wtps,
    Stars,
    Forks,
    Watchers,
}

impl DeletionMeasure {
    pub const ALL: [DeletionMeasure; 4] = [
        DeletionMeasure::Wtps,
        DeletionMeasure::Stars,
        DeletionMeasure::Forks,
        DeletionMeasure::Watchers,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DeletionMeasure::Wtps => "wtps",
            DeletionMeasure::Stars => "stars",
            DeletionMeasure::Forks => "forks",
            DeletionMeasure::Watchers => "watchers",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletionSeries {
    pub measure: DeletionMeasure,
    pub coefficient_kind: CoefficientKind,
    /// `values[0]` is the intact graph; one entry per deletion after that.
    pub values: Vec<f64>,
    pub removed: Vec<String>,
}

/// Per-repository values used to order deletions: snapshot totals, or the
/// overall community-weighted score for [`DeletionMeasure::Wtps`].
pub fn measure_scores(corpus: &Corpus, measure: DeletionMeasure) -> Result<HashMap<String, f64>, ScoringError> {
    if measure == DeletionMeasure::Wtps {
        let binned = bin_events(corpus)?;
        let cards = score_all(&binned, &compute_weights(&binned))?;
        return Ok(cards.into_iter().map(|c| (c.repo_id, c.overall)).collect());
    }
    Ok(corpus
        .repos()
        .iter()
        .map(|r| {
            let v = match measure {
                DeletionMeasure::Stars => r.stars_total,
                DeletionMeasure::Forks => r.forks_total,
                _ => r.watchers_total,
            };
            (r.repo_id.clone(), v as f64)
        })
        .collect())
}

/// Default number of deletions for corpus-scale runs.
pub fn default_steps(repo_count: usize) -> usize {
    repo_count.min(100)
}

/// Removes the highest-scoring remaining repository `steps` times (ties by
/// ascending id), recording the coefficient before and after each removal.
/// A graph emptied by the removals records 0.
pub fn deletion_experiment(
    g: &FollowerGraph,
    scores: &HashMap<String, f64>,
    steps: usize,
    kind: CoefficientKind,
    measure: DeletionMeasure,
) -> Result<DeletionSeries, GraphError> {
    let repos = g.repo_count();
    if steps > repos {
        return Err(GraphError::StepsExceedRepoCount { steps, repos });
    }
    let mut order: Vec<(&str, f64)> = g
        .repo_ids()
        .map(|id| {
            scores
                .get(id)
                .map(|&s| (id, s))
                .ok_or_else(|| GraphError::MissingScore(id.to_string()))
        })
        .collect::<Result<_, _>>()?;
    // each step removes the current maximum; with static scores that is the
    // descending order
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let removed: Vec<String> = order.iter().take(steps).map(|(id, _)| id.to_string()).collect();

    let mut work = g.clone();
    let mut values = Vec::with_capacity(steps + 1);
    values.push(clustering_coefficient(&work, kind)?);
    for id in &removed {
        work.remove_repo(id);
        values.push(match clustering_coefficient(&work, kind) {
            Err(GraphError::EmptyGraph) => 0.0,
            other => other?,
        });
    }
    Ok(DeletionSeries {
        measure,
        coefficient_kind: kind,
        values,
        removed,
    })
}
