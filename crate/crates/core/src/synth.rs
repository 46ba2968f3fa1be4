//! Seeded synthetic corpora for tests, benchmarks and demos.
//!
//! Community activity follows a yearly cycle on top of slow growth. Each
//! repository draws a lognormal popularity, a fork-to-star ratio and one of
//! three trajectories: steady, a single burst on top of steady activity
//! (half the events each), or gains followed by unstars.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};

use crate::model::{Corpus, EventKind, ModelError, PopularityEvent, RepoRecord, Timestamp, SECONDS_PER_DAY};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub repos: usize,
    /// Length of the observed history in days.
    pub span_days: u32,
    pub interval_days: u32,
    pub start: Timestamp,
    /// Median expected star count per repository.
    pub median_stars: f64,
    /// Share of repositories that later lose some stars.
    pub unstar_share: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            repos: 200,
            span_days: 720,
            interval_days: 30,
            // 2016-01-01T00:00:00Z
            start: Timestamp::from_secs(1_451_606_400),
            median_stars: 20.0,
            unstar_share: 0.1,
            seed: 7,
        }
    }
}

fn activity(day: f64, span: f64) -> f64 {
    1.0 + 0.5 * (2.0 * std::f64::consts::PI * day / 365.0).sin() + day / span
}

pub fn generate_corpus(params: &SynthParams) -> Result<Corpus, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let span = params.span_days as f64;
    let popularity = LogNormal::new(params.median_stars.ln(), 1.2).expect("valid lognormal");
    let burst_len = Exp::new(1.0 / 6.0).expect("valid rate");
    let max_activity = 2.5;

    let owners = (params.repos / 2).max(1);
    let follower_pool = params.repos * 3;
    let owner_followers: Vec<Vec<String>> = (0..owners)
        .map(|_| {
            let n = rng.random_range(0..12usize);
            let mut ids: Vec<String> = (0..n)
                .map(|_| format!("u{}", rng.random_range(0..follower_pool.max(1))))
                .collect();
            ids.sort();
            ids.dedup();
            ids
        })
        .collect();

    let mut repos = Vec::with_capacity(params.repos);
    let mut events = Vec::new();
    let at = |day: f64, rng: &mut ChaCha8Rng| -> Timestamp {
        let secs = (day * SECONDS_PER_DAY as f64) as i64 + rng.random_range(0..3600);
        Timestamp::from_secs(params.start.secs() + secs.min(params.span_days as i64 * SECONDS_PER_DAY - 1))
    };

    for i in 0..params.repos {
        let repo_id = format!("repo{i:05}");
        let created_day = rng.random_range(0.0..span * 0.8);
        let created_at = Timestamp::from_secs(params.start.secs() + (created_day * SECONDS_PER_DAY as f64) as i64);
        let stars = popularity.sample(&mut rng).min(3000.0).round() as usize;
        let forks = (stars as f64 * rng.random_range(0.1..0.6)).round() as usize;
        let trajectory: f64 = rng.random();
        let burst_start = rng.random_range(created_day..span);

        let draw_day = |rng: &mut ChaCha8Rng| -> f64 {
            if trajectory < 0.2 && rng.random::<f64>() < 0.5 {
                (burst_start + burst_len.sample(rng)).min(span - 1e-6)
            } else {
                loop {
                    let d = rng.random_range(created_day..span);
                    if rng.random::<f64>() * max_activity < activity(d, span) {
                        break d;
                    }
                }
            }
        };

        let mut star_days: Vec<f64> = (0..stars).map(|_| draw_day(&mut rng)).collect();
        let fork_days: Vec<f64> = (0..forks).map(|_| draw_day(&mut rng)).collect();
        star_days.sort_by(f64::total_cmp);

        let mut net_stars = stars as i64;
        for &d in &star_days {
            events.push(PopularityEvent::new(
                repo_id.clone(),
                EventKind::Star,
                at(d, &mut rng),
                1,
            ));
        }
        if trajectory >= 0.2 && trajectory < 0.2 + params.unstar_share && !star_days.is_empty() {
            // the second half of the history removes up to half the stars
            let lost = stars / 2;
            for &from in &star_days[..lost] {
                let d = rng.random_range(from.max(span / 2.0)..span);
                events.push(PopularityEvent::new(
                    repo_id.clone(),
                    EventKind::Star,
                    at(d, &mut rng),
                    -1,
                ));
            }
            net_stars -= lost as i64;
        }
        for &d in &fork_days {
            events.push(PopularityEvent::new(
                repo_id.clone(),
                EventKind::Fork,
                at(d, &mut rng),
                1,
            ));
        }

        let owner = rng.random_range(0..owners);
        let follower_ids = owner_followers[owner].clone();
        repos.push(RepoRecord {
            repo_id,
            full_name: format!("owner{owner}/project{i}"),
            created_at,
            primary_language: ["Rust", "Python", "Go", "JavaScript"]
                .get(rng.random_range(0..5))
                .map(|s| s.to_string()),
            size_kb: rng.random_range(1..50_000),
            owner_followers: follower_ids.len() as u64 + rng.random_range(0..20),
            forks_total: forks as u64,
            stars_total: net_stars.max(0) as u64,
            watchers_total: (net_stars.max(0) as f64 * rng.random_range(0.02..0.12)).round() as u64
                + rng.random_range(0..3),
            follower_ids,
        });
    }
    Corpus::new(repos, events, params.interval_days)
}
