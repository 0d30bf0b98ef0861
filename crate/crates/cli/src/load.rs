//! Loading the working graph: local files plus, when allowed, HTTP(S) sources.

use std::time::Duration;

use sharedcanvas::graph::{fetch_closure, is_remote, FetchError, FetchPlan, Fetcher, FileFetcher};
use sharedcanvas::{Graph, GraphError};

/// Hops followed beyond the named files.
pub const DEFAULT_DEPTH: usize = 8;

pub const ALLOWLIST_VAR: &str = "SC_FETCH_ALLOWLIST";

/// Local fetcher that also speaks HTTP(S) when remote fetching is enabled.
pub struct RemoteFetcher {
    local: FileFetcher,
    allow_remote: bool,
    /// URI prefixes permitted for remote fetch; `None` permits any.
    allowlist: Option<Vec<String>>,
    agent: ureq::Agent,
}

impl RemoteFetcher {
    pub fn new(local: FileFetcher, allow_remote: bool, allowlist: Option<Vec<String>>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        RemoteFetcher {
            local,
            allow_remote,
            allowlist,
            agent,
        }
    }

    pub fn permits(&self, source: &str) -> bool {
        self.allow_remote
            && self
                .allowlist
                .as_ref()
                .is_none_or(|prefixes| prefixes.iter().any(|p| source.starts_with(p.as_str())))
    }
}

impl Fetcher for RemoteFetcher {
    fn fetch(&self, source: &str) -> Result<Vec<u8>, FetchError> {
        if !is_remote(source) {
            return self.local.fetch(source);
        }
        if !self.allow_remote {
            return Err(FetchError::Failed("remote fetching is disabled (use --allow-remote)".into()));
        }
        if !self.permits(source) {
            return Err(FetchError::Failed(format!("not permitted by {ALLOWLIST_VAR}")));
        }
        let mut resp = self.agent.get(source).call().map_err(|e| FetchError::Failed(e.to_string()))?;
        resp.body_mut().read_to_vec().map_err(|e| FetchError::Failed(e.to_string()))
    }
}

/// Parses a comma-separated prefix list; blank entries are ignored.
pub fn parse_allowlist(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

pub fn allowlist_from_env() -> Option<Vec<String>> {
    std::env::var(ALLOWLIST_VAR).ok().map(|v| parse_allowlist(&v))
}

/// Loads and merges `paths`, then follows aggregation references.
pub fn load(paths: &[String], allow_remote: bool) -> Result<Graph, GraphError> {
    let fetcher = RemoteFetcher::new(FileFetcher::for_roots(paths), allow_remote, allowlist_from_env());
    let plan = FetchPlan {
        roots: paths.to_vec(),
        allow_remote,
        max_depth: DEFAULT_DEPTH,
    };
    fetch_closure(&plan, &fetcher)
}
