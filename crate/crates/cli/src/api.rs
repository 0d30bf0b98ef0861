//! Read-only JSON endpoints over an immutable graph snapshot.
//!
//! Routing is a pure function of (path, query) so responses are reproducible
//! byte for byte; `serve` only adapts it to HTTP.

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, StatusCode, Uri as HttpUri};
use axum::response::Response as HttpResponse;
use axum::Router;
use percent_encoding::percent_decode_str;
use serde_json::{json, Map, Value};
use sharedcanvas::geometry::{Polygon, Rect};
use sharedcanvas::graph::node_object;
use sharedcanvas::resolver::{align_painted, canvas_order, semantic_statements, ChoiceSelection};
use sharedcanvas::{Graph, Body as AnnotationBody, Constraint, SemanticStatement, Term, Uri};

use crate::layout::FlattenedLayout;

pub const MALFORMED_QUERY: &str = "E_MALFORMED_QUERY";
pub const NOT_FOUND: &str = "E_NOT_FOUND";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: Vec<u8>,
}

impl Response {
    fn json(status: u16, value: &Value) -> Self {
        let mut body = serde_json::to_vec_pretty(value).expect("json values serialize");
        body.push(b'\n');
        Response { status, body }
    }

    fn ok(value: &Value) -> Self {
        Response::json(200, value)
    }

    fn error(status: u16, code: &str, message: impl Into<String>) -> Self {
        Response::json(status, &json!({ "code": code, "message": message.into() }))
    }

    fn unknown(id: &str, what: &str) -> Self {
        Response::error(404, sharedcanvas::finding::codes::UNKNOWN_NODE, format!("no {what} {id}"))
    }

    fn malformed(message: impl Into<String>) -> Self {
        Response::error(400, MALFORMED_QUERY, message)
    }
}

pub struct Api {
    graph: Graph,
}

impl Api {
    pub fn new(graph: Graph) -> Self {
        Api { graph }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// `path` is the raw (still percent-encoded) request path.
    pub fn handle(&self, path: &str, query: Option<&str>) -> Response {
        let raw: Vec<&str> = path.trim_start_matches('/').split('/').collect();
        let mut segs = Vec::with_capacity(raw.len());
        for s in raw {
            match percent_decode_str(s).decode_utf8() {
                Ok(d) => segs.push(d.into_owned()),
                Err(_) => return Response::malformed("path segment is not UTF-8"),
            }
        }
        let params: Vec<(String, String)> = form_urlencoded::parse(query.unwrap_or("").as_bytes())
            .map(|(k, v)| (k.into_owned(), v.into_owned()))
            .collect();
        let segs: Vec<&str> = segs.iter().map(String::as_str).collect();
        match segs.as_slice() {
            ["manifest"] => self.manifest(),
            ["sequence", id] => self.sequence(id),
            ["canvas", id, "layout"] => self.layout(id, &params),
            ["canvas", id, "align"] => self.align(id, &params),
            ["text", id] => self.text(id),
            _ => Response::error(404, NOT_FOUND, format!("no endpoint {path}")),
        }
    }

    fn manifest(&self) -> Response {
        let Some((id, m)) = self.graph.manifests().next() else {
            return Response::error(404, sharedcanvas::finding::codes::UNKNOWN_NODE, "graph has no manifest");
        };
        let node = self.graph.node(id.as_str()).expect("listed manifest exists");
        let sequences: Vec<Value> = m
            .sequences
            .iter()
            .map(|s| match self.graph.node(s.as_str()) {
                Some(n) => Value::Object(node_object(n)),
                None => json!({ "id": s }),
            })
            .collect();
        let discovery: Vec<Value> = m
            .discovery
            .iter()
            .map(|d| {
                let mut entry = Map::new();
                entry.insert("id".into(), json!(d));
                let node = self.graph.node(d.as_str());
                entry.insert("loaded".into(), json!(node.is_some()));
                if let Some(n) = node {
                    entry.insert("type".into(), json!(n.type_name()));
                }
                Value::Object(entry)
            })
            .collect();
        Response::ok(&json!({
            "manifest": Value::Object(node_object(node)),
            "sequences": sequences,
            "discovery": discovery,
        }))
    }

    fn sequence(&self, id: &str) -> Response {
        let Ok(order) = canvas_order(&self.graph, id) else {
            return Response::unknown(id, "sequence");
        };
        let label = self.graph.sequence(id).and_then(|s| s.label.clone());
        let canvases: Vec<Value> = order
            .iter()
            .map(|c| {
                let mut entry = Map::new();
                entry.insert("id".into(), json!(c));
                if let Some(cv) = self.graph.canvas(c.as_str()) {
                    if let Some(l) = &cv.label {
                        entry.insert("label".into(), json!(l));
                    }
                    entry.insert("width".into(), real(cv.width));
                    entry.insert("height".into(), real(cv.height));
                }
                Value::Object(entry)
            })
            .collect();
        let mut out = Map::new();
        out.insert("id".into(), json!(id));
        if let Some(l) = label {
            out.insert("label".into(), json!(l));
        }
        out.insert("canvases".into(), Value::Array(canvases));
        Response::ok(&Value::Object(out))
    }

    fn layout(&self, id: &str, params: &[(String, String)]) -> Response {
        if self.graph.canvas(id).is_none() {
            return Response::unknown(id, "canvas");
        }
        let selection = match selection(params, &[]) {
            Ok(s) => s,
            Err(r) => return r,
        };
        match FlattenedLayout::build(&self.graph, id, &selection) {
            Ok((layout, _)) => Response {
                status: 200,
                body: layout.to_json(),
            },
            Err(e) => Response::error(400, e.code(), e.to_string()),
        }
    }

    fn align(&self, id: &str, params: &[(String, String)]) -> Response {
        if self.graph.canvas(id).is_none() {
            return Response::unknown(id, "canvas");
        }
        let selection = match selection(params, &["x", "y", "w", "h", "minFraction"]) {
            Ok(s) => s,
            Err(r) => return r,
        };
        let number = |key: &str| -> Result<Option<f64>, Response> {
            let mut vals = params.iter().filter(|(k, _)| k == key);
            let Some((_, v)) = vals.next() else { return Ok(None) };
            if vals.next().is_some() {
                return Err(Response::malformed(format!("{key} given more than once")));
            }
            match v.trim().parse::<f64>() {
                Ok(n) if n.is_finite() => Ok(Some(n)),
                _ => Err(Response::malformed(format!("{key}={v} is not a finite number"))),
            }
        };
        let mut rect = [0.0; 4];
        for (slot, key) in rect.iter_mut().zip(["x", "y", "w", "h"]) {
            match number(key) {
                Ok(Some(v)) => *slot = v,
                Ok(None) => return Response::malformed(format!("missing {key}")),
                Err(r) => return r,
            }
        }
        let min_fraction = match number("minFraction") {
            Ok(v) => v.unwrap_or(0.0),
            Err(r) => return r,
        };
        let query: Polygon = match Rect::new(rect[0], rect[1], rect[2], rect[3]) {
            Ok(r) => r.to_polygon(),
            Err(e) => return Response::malformed(format!("query region: {e}")),
        };
        let painted = match FlattenedLayout::build(&self.graph, id, &selection) {
            Ok((layout, _)) => layout.paintings,
            Err(e) => return Response::error(400, e.code(), e.to_string()),
        };
        match align_painted(&painted, &query, min_fraction, sharedcanvas::Execution::default()) {
            Ok(hits) => Response::ok(&json!({ "canvas": id, "hits": hits })),
            Err(e) => Response::error(400, e.code(), e.to_string()),
        }
    }

    /// The annotation's text (its body's, or failing that its first textual
    /// target's) and every text-offset segment of that text with the
    /// statements made about it.
    fn text(&self, id: &str) -> Response {
        let Some(ann) = self.graph.annotation(id) else {
            return Response::unknown(id, "annotation");
        };
        let body_ref = match &ann.body {
            Some(AnnotationBody::Resource(r)) => Some(r),
            _ => None,
        };
        let source = body_ref
            .into_iter()
            .chain(&ann.targets)
            .find(|r| self.chars(&r.resource).is_some());
        let Some(source) = source else {
            return Response::unknown(id, "text for annotation");
        };
        let full = self.chars(&source.resource).expect("checked above");
        let text = match &source.constraint {
            None => full.to_string(),
            Some(_) => match sharedcanvas::resolver::text_segment(&self.graph, source, full) {
                Ok(t) => t,
                Err(e) => return Response::error(400, e.code(), e.to_string()),
            },
        };

        let mut segments: Vec<(String, Value)> = Vec::new();
        for (_, a) in self.graph.annotations() {
            for t in &a.targets {
                let (Some(seg), Some(cid)) = (&t.id, &t.constraint) else { continue };
                if t.resource != source.resource || segments.iter().any(|(s, _)| s == seg.as_str()) {
                    continue;
                }
                let Some(Constraint::TextOffset { offset, length }) = self.graph.constraint(cid.as_str()) else {
                    continue;
                };
                let span = sharedcanvas::resolver::text_segment(&self.graph, t, full).ok();
                let statements: Vec<Value> = semantic_statements(&self.graph, seg.as_str())
                    .iter()
                    .map(statement)
                    .collect();
                segments.push((
                    seg.to_string(),
                    json!({
                        "id": seg,
                        "offset": offset,
                        "length": length,
                        "text": span,
                        "statements": statements,
                    }),
                ));
            }
        }
        segments.sort_by(|a, b| a.0.cmp(&b.0));
        Response::ok(&json!({
            "annotation": id,
            "resource": source.resource,
            "text": text,
            "segments": segments.into_iter().map(|(_, v)| v).collect::<Vec<_>>(),
        }))
    }

    fn chars(&self, resource: &Uri) -> Option<&str> {
        self.graph.foreign(resource.as_str()).and_then(|f| f.chars())
    }
}

fn statement(s: &SemanticStatement) -> Value {
    match &s.object {
        Term::Uri(u) => json!({ "subject": s.subject, "predicate": s.predicate, "object": u }),
        Term::Literal(l) => json!({ "subject": s.subject, "predicate": s.predicate, "literal": l }),
    }
}

fn real(v: f64) -> Value {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        json!(v as i64)
    } else {
        json!(v)
    }
}

/// `select=choice=option` pairs; any key outside `select` and `extra` is rejected.
fn selection(params: &[(String, String)], extra: &[&str]) -> Result<ChoiceSelection, Response> {
    let mut sel = ChoiceSelection::new();
    for (k, v) in params {
        if k == "select" {
            let (choice, option) = parse_pair(v).map_err(Response::malformed)?;
            sel = sel.with(choice, option);
        } else if !extra.contains(&k.as_str()) {
            return Err(Response::malformed(format!("unknown parameter {k}")));
        }
    }
    Ok(sel)
}

/// Parses `choice=option` into two URIs.
pub fn parse_pair(s: &str) -> Result<(Uri, Uri), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("{s}: expected choice=option"))?;
    let k = Uri::new(k).map_err(|e| format!("{s}: {e}"))?;
    let v = Uri::new(v).map_err(|e| format!("{s}: {e}"))?;
    Ok((k, v))
}

/// The HTTP adapter: every GET goes through [`Api::handle`].
pub fn router(api: Arc<Api>) -> Router {
    Router::new().fallback(move |method: Method, uri: HttpUri| {
        let api = Arc::clone(&api);
        async move {
            let r = if method == Method::GET {
                api.handle(uri.path(), uri.query())
            } else {
                Response::error(405, "E_METHOD", "the service is read-only; use GET")
            };
            HttpResponse::builder()
                .status(StatusCode::from_u16(r.status).expect("valid status"))
                .header(header::CONTENT_TYPE, "application/json; charset=utf-8")
                .header(header::ACCESS_CONTROL_ALLOW_ORIGIN, "*")
                .body(Body::from(r.body))
                .expect("valid response")
        }
    })
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, api: Arc<Api>) -> std::io::Result<()> {
    axum::serve(listener, router(api)).await
}

#[cfg(test)]
mod tests {
    use super::*;
    use sharedcanvas::graph::parse_manifest;

    fn api() -> Api {
        let src = r#"{"resources":[
            {"id":"urn:t:m","type":"Manifest","sequences":["urn:t:s"],"discovery":["urn:t:gone"]},
            {"id":"urn:t:s","type":"Sequence","canvases":["urn:t:c"],"label":"Book"},
            {"id":"urn:t:c","type":"Canvas","width":100,"height":50,"label":"f1"}]}"#;
        Api::new(parse_manifest(src.as_bytes(), "t").unwrap())
    }

    fn body(r: &Response) -> Value {
        serde_json::from_slice(&r.body).unwrap()
    }

    #[test]
    fn routes_decode_ids() {
        let a = api();
        let r = a.handle("/sequence/urn%3At%3As", None);
        assert_eq!(r.status, 200);
        assert_eq!(body(&r)["canvases"][0], json!({"id": "urn:t:c", "label": "f1", "width": 100, "height": 50}));
        let m = body(&a.handle("/manifest", None));
        assert_eq!(m["discovery"][0], json!({"id": "urn:t:gone", "loaded": false}));
        assert_eq!(m["sequences"][0]["label"], "Book");
    }

    #[test]
    fn unknown_things_are_404() {
        let a = api();
        for path in ["/sequence/urn%3At%3Ax", "/canvas/urn%3At%3Ax/layout", "/text/urn%3At%3Ax", "/nope"] {
            let r = a.handle(path, None);
            assert_eq!(r.status, 404, "{path}");
            assert!(body(&r)["code"].is_string());
        }
    }

    #[test]
    fn malformed_queries_are_400() {
        let a = api();
        let p = "/canvas/urn%3At%3Ac/align";
        for q in ["x=0&y=0&w=0&h=5", "x=0&y=0&w=5", "x=a&y=0&w=5&h=5", "x=0&y=0&w=5&h=5&bogus=1", "x=0&y=0&w=5&h=5&minFraction=2"] {
            assert_eq!(a.handle(p, Some(q)).status, 400, "{q}");
        }
        assert_eq!(a.handle(p, Some("x=0&y=0&w=5&h=5")).status, 200);
        assert_eq!(a.handle("/canvas/urn%3At%3Ac/layout", Some("select=nopair")).status, 400);
        assert_eq!(a.handle("/canvas/urn%3At%3Ac/layout", Some("select=urn:t:c%3Durn:t:x")).status, 400);
    }

    #[test]
    fn pair_parsing() {
        let (k, v) = parse_pair("urn:a:b=urn:a:c").unwrap();
        assert_eq!((k.as_str(), v.as_str()), ("urn:a:b", "urn:a:c"));
        assert!(parse_pair("urn:a:b").is_err());
    }
}
