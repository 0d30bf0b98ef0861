//! Reference closure over distributed SCX documents.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use super::{parse_manifest, Graph, GraphError};
use crate::exec::Execution;
use crate::finding::{codes, Finding};
use crate::model::NodeData;
use crate::uri::Uri;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchPlan {
    /// Source identifiers loaded unconditionally (paths or URIs).
    pub roots: Vec<String>,
    pub allow_remote: bool,
    /// Hops beyond the roots. `0` loads the roots only.
    pub max_depth: usize,
}

impl FetchPlan {
    pub fn local(roots: impl IntoIterator<Item = impl Into<String>>, max_depth: usize) -> Self {
        FetchPlan {
            roots: roots.into_iter().map(Into::into).collect(),
            allow_remote: false,
            max_depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FetchError {
    /// The identifier has no retrieval mechanism here (e.g. `urn:`).
    #[error("not dereferenceable")]
    NotDereferenceable,
    #[error("{0}")]
    Failed(String),
}

pub trait Fetcher: Sync {
    fn fetch(&self, source: &str) -> Result<Vec<u8>, FetchError>;
}

impl<F> Fetcher for F
where
    F: Fn(&str) -> Result<Vec<u8>, FetchError> + Sync,
{
    fn fetch(&self, source: &str) -> Result<Vec<u8>, FetchError> {
        self(source)
    }
}

/// Reads plain paths and `file:` URIs from disk.
///
/// Relative `file:` references resolve against `base`; plain relative paths
/// resolve against the working directory.
#[derive(Debug, Clone)]
pub struct FileFetcher {
    pub base: PathBuf,
}

impl FileFetcher {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        FileFetcher { base: base.into() }
    }

    /// Base directory taken from the first root path.
    pub fn for_roots(roots: &[String]) -> Self {
        let base = roots
            .first()
            .and_then(|r| Path::new(r).parent().map(Path::to_path_buf))
            .unwrap_or_default();
        FileFetcher { base }
    }

    fn path_for(&self, source: &str) -> Option<PathBuf> {
        if let Some(rest) = source.strip_prefix("file:") {
            let rest = rest.strip_prefix("//").unwrap_or(rest);
            let p = Path::new(rest);
            return Some(if p.is_absolute() { p.to_path_buf() } else { self.base.join(p) });
        }
        if has_scheme(source) {
            return None;
        }
        Some(PathBuf::from(source))
    }
}

impl Fetcher for FileFetcher {
    fn fetch(&self, source: &str) -> Result<Vec<u8>, FetchError> {
        let path = self.path_for(source).ok_or(FetchError::NotDereferenceable)?;
        std::fs::read(&path).map_err(|e| FetchError::Failed(format!("{}: {e}", path.display())))
    }
}

fn has_scheme(source: &str) -> bool {
    match source.find(':') {
        Some(pos) if pos > 1 => source[..pos]
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.')),
        _ => false,
    }
}

pub fn is_remote(source: &str) -> bool {
    source.starts_with("http://") || source.starts_with("https://")
}

/// Aggregation references (manifest sequences and discovery, range sequences,
/// layer and list members) that no node in the graph resolves.
fn unresolved_aggregation_refs(graph: &Graph) -> BTreeSet<Uri> {
    let mut refs = BTreeSet::new();
    for node in graph.nodes() {
        let candidates: Vec<&Uri> = match &node.data {
            NodeData::Manifest(m) => m.sequences.iter().chain(&m.discovery).collect(),
            NodeData::Range(r) => vec![&r.sequence],
            NodeData::Layer(l) => l.members.iter().collect(),
            NodeData::AnnotationList(l) => l.annotations.iter().collect(),
            _ => Vec::new(),
        };
        refs.extend(candidates.into_iter().filter(|u| !graph.contains(u.as_str())).cloned());
    }
    refs
}

pub fn fetch_closure(plan: &FetchPlan, fetcher: &dyn Fetcher) -> Result<Graph, GraphError> {
    fetch_closure_with(plan, fetcher, Execution::default())
}

/// Loads the roots, then follows unresolved aggregation references for up to
/// `max_depth` hops. Each hop's documents are fetched as one batch and merged
/// in source order, so the result does not depend on completion order.
pub fn fetch_closure_with(plan: &FetchPlan, fetcher: &dyn Fetcher, exec: Execution) -> Result<Graph, GraphError> {
    let load = |src: &String| -> Result<Graph, Result<FetchError, GraphError>> {
        let bytes = fetcher.fetch(src).map_err(Ok)?;
        parse_manifest(&bytes, src).map_err(Err)
    };

    let mut graph = Graph::new();
    let mut visited: BTreeSet<String> = BTreeSet::new();
    for (src, res) in plan.roots.iter().zip(exec.map(&plan.roots, load)) {
        visited.insert(src.clone());
        match res {
            Ok(g) => graph.merge_from(g)?,
            Err(Ok(e)) => {
                return Err(GraphError::RootFetch {
                    origin: src.clone(),
                    message: e.to_string(),
                })
            }
            Err(Err(e)) => return Err(e),
        }
    }

    let mut fetched_ok: BTreeSet<String> = BTreeSet::new();
    for _ in 0..plan.max_depth {
        let pending: Vec<String> = unresolved_aggregation_refs(&graph)
            .iter()
            .map(|u| u.document().to_string())
            .filter(|doc| plan.allow_remote || !is_remote(doc))
            .filter(|doc| !visited.contains(doc))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if pending.is_empty() {
            break;
        }
        visited.extend(pending.iter().cloned());
        for (src, res) in pending.iter().zip(exec.map(&pending, load)) {
            match res {
                Ok(g) => {
                    graph.merge_from(g)?;
                    fetched_ok.insert(src.clone());
                }
                Err(Ok(FetchError::NotDereferenceable)) => {}
                Err(Ok(FetchError::Failed(msg))) => {
                    graph.push_diagnostic(Finding::warning(codes::FETCH_FAILED, src.clone(), msg));
                }
                Err(Err(e)) => {
                    graph.push_diagnostic(Finding::warning(codes::FETCH_FAILED, src.clone(), e.to_string()));
                }
            }
        }
    }

    for u in unresolved_aggregation_refs(&graph) {
        if fetched_ok.contains(u.document()) {
            graph.push_diagnostic(Finding::warning(
                codes::FETCH_INCOMPLETE,
                u.to_string(),
                format!("{} was fetched but does not define this node", u.document()),
            ));
        }
    }
    Ok(graph)
}
