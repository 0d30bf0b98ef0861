//! The `sc` subcommands. Each returns its exit status and writes only to the
//! given streams, so they can be driven from tests.

use std::io::Write;
use std::net::{Ipv4Addr, SocketAddr};
use std::sync::Arc;

use sharedcanvas::finding::codes;
use sharedcanvas::geometry::{parse_svg_path, Polygon, Rect};
use sharedcanvas::resolver::{align_painted, ChoiceSelection, ResolveError};
use sharedcanvas::{validate_graph, Execution, Finding, Graph, GraphError};

use crate::api::{parse_pair, Api};
use crate::layout::FlattenedLayout;
use crate::load::load;

pub const OK: i32 = 0;
/// Domain errors: invalid graphs, unknown canvases, merge conflicts.
pub const DOMAIN: i32 = 1;
/// Usage and parse errors.
pub const USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Scx,
    Svg,
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

fn load_error_status(e: &GraphError) -> i32 {
    if e.is_parse_failure() {
        USAGE
    } else {
        DOMAIN
    }
}

/// Loads `paths`, reporting a failure as one finding line on `err`.
fn load_or_report(paths: &[String], allow_remote: bool, err: &mut dyn Write) -> Result<Graph, i32> {
    load(paths, allow_remote).map_err(|e| {
        let _ = writeln!(err, "{}", e.to_finding());
        load_error_status(&e)
    })
}

fn selection(pairs: &[String]) -> Result<ChoiceSelection, String> {
    let mut sel = ChoiceSelection::new();
    for p in pairs {
        let (k, v) = parse_pair(p)?;
        sel = sel.with(k, v);
    }
    Ok(sel)
}

fn resolve_status(e: &ResolveError) -> i32 {
    match e {
        ResolveError::InvalidSelection { .. } | ResolveError::UnknownNode { .. } | ResolveError::FractionRange(_) => {
            USAGE
        }
        _ => DOMAIN,
    }
}

/// Prints every finding and a summary; errors (and, when strict, warnings)
/// make the run fail.
pub fn validate(paths: &[String], strict: bool, allow_remote: bool, out: &mut dyn Write) -> i32 {
    let (findings, status) = match load(paths, allow_remote) {
        Ok(g) => {
            let f = validate_graph(&g);
            let failing = f.iter().any(|x| x.is_error() || strict);
            (f, if failing { DOMAIN } else { OK })
        }
        Err(e) => (vec![e.to_finding()], load_error_status(&e)),
    };
    for f in &findings {
        let _ = writeln!(out, "{f}");
    }
    let errors = findings.iter().filter(|f| f.is_error()).count();
    let _ = writeln!(
        out,
        "{}, {}",
        plural(errors, "error"),
        plural(findings.len() - errors, "warning")
    );
    status
}

pub struct FlattenArgs<'a> {
    pub paths: &'a [String],
    pub canvas: &'a str,
    pub sequence: Option<&'a str>,
    pub select: &'a [String],
    pub format: Format,
    pub allow_remote: bool,
}

pub fn flatten(args: &FlattenArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let sel = match selection(args.select) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return USAGE;
        }
    };
    let graph = match load_or_report(args.paths, args.allow_remote, err) {
        Ok(g) => g,
        Err(status) => return status,
    };
    if let Err(status) = check_canvas(&graph, args.canvas, args.sequence, err) {
        return status;
    }
    let (layout, findings) = match FlattenedLayout::build(&graph, args.canvas, &sel) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "ERROR {} {}", e.code(), e);
            return resolve_status(&e);
        }
    };
    for f in &findings {
        let _ = writeln!(err, "{f}");
    }
    let _ = match args.format {
        Format::Scx => out.write_all(&layout.to_json()),
        Format::Svg => out.write_all(layout.to_svg().as_bytes()),
    };
    OK
}

/// The canvas must exist and, when a sequence is named, belong to it.
fn check_canvas(graph: &Graph, canvas: &str, sequence: Option<&str>, err: &mut dyn Write) -> Result<(), i32> {
    if graph.canvas(canvas).is_none() {
        let _ = writeln!(err, "{}", Finding::error(codes::UNKNOWN_NODE, canvas, "no such canvas"));
        return Err(DOMAIN);
    }
    if let Some(seq) = sequence {
        let Some(s) = graph.sequence(seq) else {
            let _ = writeln!(err, "{}", Finding::error(codes::UNKNOWN_NODE, seq, "no such sequence"));
            return Err(DOMAIN);
        };
        if !s.canvases.iter().any(|c| c.as_str() == canvas) {
            let _ = writeln!(
                err,
                "{}",
                Finding::error(codes::UNKNOWN_NODE, canvas, format!("not a canvas of sequence {seq}"))
            );
            return Err(DOMAIN);
        }
    }
    Ok(())
}

/// `x,y,w,h` or an SVG path.
pub fn parse_region(spec: &str) -> Result<Polygon, String> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() == 4 {
        let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
        if let Ok(n) = nums {
            return Rect::new(n[0], n[1], n[2], n[3])
                .map(|r| r.to_polygon())
                .map_err(|e| format!("region {spec}: {e}"));
        }
    }
    parse_svg_path(spec).map_err(|e| format!("region {spec}: {e}"))
}

pub struct AlignArgs<'a> {
    pub paths: &'a [String],
    pub canvas: &'a str,
    pub region: &'a str,
    pub min_fraction: f64,
    pub select: &'a [String],
    pub allow_remote: bool,
}

/// One line per hit: `layer annotation fraction area`, `-` for no layer.
pub fn align(args: &AlignArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let query = match parse_region(args.region) {
        Ok(q) => q,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return USAGE;
        }
    };
    if !(0.0..=1.0).contains(&args.min_fraction) {
        let _ = writeln!(err, "--min-fraction {} is outside [0, 1]", args.min_fraction);
        return USAGE;
    }
    let sel = match selection(args.select) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return USAGE;
        }
    };
    let graph = match load_or_report(args.paths, args.allow_remote, err) {
        Ok(g) => g,
        Err(status) => return status,
    };
    if let Err(status) = check_canvas(&graph, args.canvas, None, err) {
        return status;
    }
    let hits = FlattenedLayout::build(&graph, args.canvas, &sel)
        .and_then(|(l, _)| align_painted(&l.paintings, &query, args.min_fraction, Execution::default()));
    let hits = match hits {
        Ok(h) => h,
        Err(e) => {
            let _ = writeln!(err, "ERROR {} {}", e.code(), e);
            return resolve_status(&e);
        }
    };
    if hits.is_empty() {
        let _ = writeln!(out, "no hits");
    }
    for h in &hits {
        let layer = h.layer.as_ref().map_or("-", |l| l.as_str());
        let _ = writeln!(out, "{layer} {} {} {}", h.annotation, h.overlap_fraction, h.overlap_area);
    }
    OK
}

pub const DEFAULT_PORT: u16 = 8077;

/// Loads the snapshot, then serves it on localhost until interrupted.
pub fn serve(paths: &[String], port: u16, allow_remote: bool, err: &mut dyn Write) -> i32 {
    let graph = match load_or_report(paths, allow_remote, err) {
        Ok(g) => g,
        Err(status) => return status,
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "cannot start runtime: {e}");
            return DOMAIN;
        }
    };
    let api = Arc::new(Api::new(graph));
    let result = runtime.block_on(async {
        let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
        let listener = tokio::net::TcpListener::bind(addr).await?;
        let _ = writeln!(err, "listening on http://{}", listener.local_addr()?);
        crate::api::serve(listener, api).await
    });
    match result {
        Ok(()) => OK,
        Err(e) => {
            let _ = writeln!(err, "serve: {e}");
            DOMAIN
        }
    }
}
