//! Live ingestion from the GitHub REST API.
//!
//! Star timestamps come from the stargazer listing under the
//! `application/vnd.github.star+json` media type, fork timestamps from the
//! fork listing sorted oldest-first. Watchers have no timeline and are kept
//! as a snapshot count only.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde::Deserialize;
use thiserror::Error;

use crate::model::{EventKind, PopularityEvent, RepoRecord, Timestamp};

/// Environment variable read by the CLI for the API token.
pub const TOKEN_ENV_VAR: &str = "GITHUB_TOKEN";

const STAR_MEDIA_TYPE: &str = "application/vnd.github.star+json";
const JSON_MEDIA_TYPE: &str = "application/vnd.github+json";
const RATE_WINDOW: Duration = Duration::from_secs(3600);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FetchError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("rate limited; retry after {retry_after_secs}s")]
    RateLimited { retry_after_secs: u64 },
    #[error("authentication failed (HTTP {0})")]
    AuthFailure(u16),
    #[error("{listing} history for `{repo}` was truncated by the platform")]
    TruncatedHistory { repo: String, listing: Listing },
    #[error("HTTP {status} from {url}")]
    Http { status: u16, url: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("unexpected response body from {url}: {reason}")]
    Decode { url: String, reason: String },
    #[error("invalid client configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Listing {
    Stargazers,
    Forks,
    Followers,
}

impl std::fmt::Display for Listing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Listing::Stargazers => "stargazer",
            Listing::Forks => "fork",
            Listing::Followers => "follower",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiClientConfig {
    pub base_url: String,
    pub auth_token: Option<String>,
    /// Upper bound on requests in any sliding one-hour window, across all
    /// endpoints.
    pub requests_per_hour_cap: u32,
    /// Items per listing page, 1..=100.
    pub page_size: u32,
    /// Retries for rate-limit and server errors before giving up.
    pub retry_limit: u32,
    /// Also list the owner's followers (needed for the follower graph).
    pub fetch_followers: bool,
}

impl Default for ApiClientConfig {
    fn default() -> Self {
        ApiClientConfig {
            base_url: "https://api.github.com".into(),
            auth_token: None,
            requests_per_hour_cap: 5000,
            page_size: 100,
            retry_limit: 3,
            fetch_followers: true,
        }
    }
}

impl ApiClientConfig {
    pub fn validate(&self) -> Result<(), FetchError> {
        if !(1..=100).contains(&self.page_size) {
            return Err(FetchError::Config(format!(
                "page_size {} outside 1..=100",
                self.page_size
            )));
        }
        if self.requests_per_hour_cap == 0 {
            return Err(FetchError::Config("requests_per_hour_cap must be positive".into()));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(FetchError::Config(format!(
                "base_url `{}` is not an http(s) URL",
                self.base_url
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

/// Blocking GET transport.
pub trait Transport {
    fn get(&self, url: &str, headers: &[(String, String)]) -> Result<HttpResponse, FetchError>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new() -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .user_agent(concat!("popscore/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        UreqTransport { agent }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl Transport for UreqTransport {
    fn get(&self, url: &str, headers: &[(String, String)]) -> Result<HttpResponse, FetchError> {
        let mut req = self.agent.get(url);
        for (k, v) in headers {
            req = req.header(k.as_str(), v.as_str());
        }
        let mut resp = req.call().map_err(|e| FetchError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let headers = resp
            .headers()
            .iter()
            .map(|(k, v)| (k.as_str().to_string(), v.to_str().unwrap_or_default().to_string()))
            .collect();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| FetchError::Transport(e.to_string()))?;
        Ok(HttpResponse { status, headers, body })
    }
}

/// Monotonic time source; `sleep` may be simulated.
pub trait Clock {
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    start: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock { start: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.start.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Clock whose `sleep` advances time instantly.
#[derive(Default)]
pub struct ManualClock {
    now: Mutex<Duration>,
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.now.lock().expect("clock mutex poisoned")
    }

    fn sleep(&self, d: Duration) {
        *self.now.lock().expect("clock mutex poisoned") += d;
    }
}

/// Sliding-window request budget.
pub struct RateLimiter {
    cap: usize,
    window: Duration,
    sent: Mutex<VecDeque<Duration>>,
}

impl RateLimiter {
    pub fn new(cap: u32, window: Duration) -> Self {
        RateLimiter {
            cap: cap as usize,
            window,
            sent: Mutex::new(VecDeque::new()),
        }
    }

    /// Blocks (via `clock`) until a request may be sent, then records it.
    pub fn acquire(&self, clock: &dyn Clock) {
        let mut sent = self.sent.lock().expect("rate limiter mutex poisoned");
        loop {
            let now = clock.now();
            while sent.front().is_some_and(|&t| now.saturating_sub(t) >= self.window) {
                sent.pop_front();
            }
            if sent.len() < self.cap {
                sent.push_back(now);
                return;
            }
            let oldest = *sent.front().expect("non-empty at cap");
            clock.sleep(self.window - now.saturating_sub(oldest));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchedRepo {
    pub record: RepoRecord,
    pub events: Vec<PopularityEvent>,
    /// Listings the platform refused to page through completely.
    pub truncated: Vec<Listing>,
}

impl FetchedRepo {
    /// Fails when any event listing was truncated.
    pub fn require_complete(self) -> Result<FetchedRepo, FetchError> {
        match self.truncated.iter().find(|l| **l != Listing::Followers) {
            Some(&listing) => Err(FetchError::TruncatedHistory {
                repo: self.record.full_name.clone(),
                listing,
            }),
            None => Ok(self),
        }
    }
}

#[derive(Deserialize)]
struct RepoPayload {
    id: u64,
    full_name: String,
    created_at: Timestamp,
    language: Option<String>,
    #[serde(default)]
    size: u64,
    #[serde(default)]
    forks_count: u64,
    #[serde(default)]
    stargazers_count: u64,
    subscribers_count: Option<u64>,
    #[serde(default)]
    watchers_count: u64,
    owner: OwnerPayload,
}

#[derive(Deserialize)]
struct OwnerPayload {
    login: String,
}

#[derive(Deserialize)]
struct UserPayload {
    #[serde(default)]
    followers: u64,
}

#[derive(Deserialize)]
struct StarPayload {
    starred_at: Timestamp,
}

#[derive(Deserialize)]
struct ForkPayload {
    created_at: Timestamp,
}

#[derive(Deserialize)]
struct FollowerPayload {
    login: String,
}

enum PageOutcome<T> {
    Complete(Vec<T>),
    Truncated(Vec<T>),
}

pub struct ApiClient<T: Transport, C: Clock> {
    config: ApiClientConfig,
    transport: T,
    clock: C,
    limiter: RateLimiter,
}

impl ApiClient<UreqTransport, SystemClock> {
    pub fn live(config: ApiClientConfig) -> Result<Self, FetchError> {
        ApiClient::new(config, UreqTransport::new(), SystemClock::default())
    }
}

impl<T: Transport, C: Clock> ApiClient<T, C> {
    pub fn new(config: ApiClientConfig, transport: T, clock: C) -> Result<Self, FetchError> {
        config.validate()?;
        let limiter = RateLimiter::new(config.requests_per_hour_cap, RATE_WINDOW);
        Ok(ApiClient {
            config,
            transport,
            clock,
            limiter,
        })
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    fn headers(&self, accept: &str) -> Vec<(String, String)> {
        let mut h = vec![
            ("Accept".to_string(), accept.to_string()),
            ("X-GitHub-Api-Version".to_string(), "2022-11-28".to_string()),
        ];
        if let Some(token) = &self.config.auth_token {
            h.push(("Authorization".to_string(), format!("Bearer {token}")));
        }
        h
    }

    fn retry_after(resp: &HttpResponse) -> u64 {
        if let Some(secs) = resp.header("retry-after").and_then(|v| v.trim().parse().ok()) {
            return secs;
        }
        if let Some(reset) = resp
            .header("x-ratelimit-reset")
            .and_then(|v| v.trim().parse::<i64>().ok())
        {
            return (reset - Timestamp::now().secs()).max(1) as u64;
        }
        60
    }

    /// GET with rate accounting and retries. 422 is handed back to the
    /// caller, which treats it as a pagination cap.
    fn request(&self, path: &str, accept: &str) -> Result<HttpResponse, FetchError> {
        let url = format!("{}{}", self.config.base_url.trim_end_matches('/'), path);
        let headers = self.headers(accept);
        let mut attempt = 0;
        loop {
            self.limiter.acquire(&self.clock);
            let resp = self.transport.get(&url, &headers)?;
            let exhausted = resp.header("x-ratelimit-remaining").is_some_and(|v| v.trim() == "0");
            let wait = match resp.status {
                200..=299 | 422 => return Ok(resp),
                401 => return Err(FetchError::AuthFailure(401)),
                403 if !exhausted && resp.header("retry-after").is_none() => return Err(FetchError::AuthFailure(403)),
                403 | 429 => {
                    let secs = Self::retry_after(&resp);
                    if attempt >= self.config.retry_limit {
                        return Err(FetchError::RateLimited { retry_after_secs: secs });
                    }
                    secs
                }
                404 => return Err(FetchError::NotFound(path.to_string())),
                500..=599 if attempt < self.config.retry_limit => 1u64 << attempt.min(6),
                status => return Err(FetchError::Http { status, url }),
            };
            attempt += 1;
            self.clock.sleep(Duration::from_secs(wait));
        }
    }

    fn get_json<D: DeserializeOwned>(&self, path: &str, accept: &str) -> Result<D, FetchError> {
        let resp = self.request(path, accept)?;
        if resp.status == 422 {
            return Err(FetchError::Http {
                status: 422,
                url: path.to_string(),
            });
        }
        serde_json::from_str(&resp.body).map_err(|e| FetchError::Decode {
            url: path.to_string(),
            reason: e.to_string(),
        })
    }

    /// Walks `page=1,2,...` until a short page. A 422 mid-walk means the
    /// platform capped pagination.
    fn paginate<D: DeserializeOwned>(
        &self,
        path: &str,
        extra_query: &str,
        accept: &str,
    ) -> Result<PageOutcome<D>, FetchError> {
        let per_page = self.config.page_size;
        let mut items = Vec::new();
        for page in 1.. {
            let paged = format!("{path}?{extra_query}per_page={per_page}&page={page}");
            let resp = self.request(&paged, accept)?;
            if resp.status == 422 {
                return Ok(PageOutcome::Truncated(items));
            }
            let batch: Vec<D> = serde_json::from_str(&resp.body).map_err(|e| FetchError::Decode {
                url: paged.clone(),
                reason: e.to_string(),
            })?;
            let short = batch.len() < per_page as usize;
            items.extend(batch);
            if short {
                break;
            }
        }
        Ok(PageOutcome::Complete(items))
    }

    /// Fetches metadata, star and fork timelines, and owner followers for
    /// `owner/name`.
    pub fn fetch_repo(&self, owner_and_name: &str) -> Result<FetchedRepo, FetchError> {
        let (owner, name) = owner_and_name
            .split_once('/')
            .filter(|(o, n)| !o.is_empty() && !n.is_empty() && !n.contains('/'))
            .ok_or_else(|| FetchError::Config(format!("expected owner/name, got `{owner_and_name}`")))?;
        let base = format!("/repos/{owner}/{name}");
        let repo: RepoPayload = self.get_json(&base, JSON_MEDIA_TYPE)?;
        let user: UserPayload = self.get_json(&format!("/users/{}", repo.owner.login), JSON_MEDIA_TYPE)?;

        let repo_id = repo.id.to_string();
        let mut events = Vec::new();
        let mut truncated = Vec::new();

        if repo.stargazers_count > 0 {
            let stars = self.paginate::<StarPayload>(&format!("{base}/stargazers"), "", STAR_MEDIA_TYPE)?;
            let stars = match stars {
                PageOutcome::Complete(s) => s,
                PageOutcome::Truncated(s) => {
                    truncated.push(Listing::Stargazers);
                    s
                }
            };
            events.extend(
                stars
                    .into_iter()
                    .map(|s| PopularityEvent::new(repo_id.clone(), EventKind::Star, s.starred_at, 1)),
            );
        }
        if repo.forks_count > 0 {
            let forks = self.paginate::<ForkPayload>(&format!("{base}/forks"), "sort=oldest&", JSON_MEDIA_TYPE)?;
            let forks = match forks {
                PageOutcome::Complete(f) => f,
                PageOutcome::Truncated(f) => {
                    truncated.push(Listing::Forks);
                    f
                }
            };
            events.extend(
                forks
                    .into_iter()
                    .map(|f| PopularityEvent::new(repo_id.clone(), EventKind::Fork, f.created_at, 1)),
            );
        }
        let mut follower_ids = Vec::new();
        if self.config.fetch_followers && user.followers > 0 {
            let path = format!("/users/{}/followers", repo.owner.login);
            let followers = match self.paginate::<FollowerPayload>(&path, "", JSON_MEDIA_TYPE)? {
                PageOutcome::Complete(f) => f,
                PageOutcome::Truncated(f) => {
                    truncated.push(Listing::Followers);
                    f
                }
            };
            follower_ids = followers.into_iter().map(|f| f.login).collect();
        }

        Ok(FetchedRepo {
            record: RepoRecord {
                repo_id,
                full_name: repo.full_name,
                created_at: repo.created_at,
                primary_language: repo.language,
                size_kb: repo.size,
                owner_followers: user.followers,
                forks_total: repo.forks_count,
                stars_total: repo.stargazers_count,
                watchers_total: repo.subscribers_count.unwrap_or(repo.watchers_count),
                follower_ids,
            },
            events,
            truncated,
        })
    }
}

/// One-shot fetch against the live API.
pub fn fetch_repo(config: &ApiClientConfig, owner_and_name: &str) -> Result<FetchedRepo, FetchError> {
    ApiClient::live(config.clone())?.fetch_repo(owner_and_name)
}
