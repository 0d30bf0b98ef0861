//! Invariant checks for individual nodes and whole graphs.
//!
//! Unresolvable references produce `W_EXTERNAL_REF` warnings since graphs are
//! routinely partial views of distributed data. Structural violations are
//! errors. Each violated invariant yields exactly one finding.

use crate::exec::Execution;
use crate::finding::{codes, Finding};
use crate::geometry::parse_svg_path;
use crate::graph::Graph;
use crate::model::*;
use crate::uri::Uri;

const PERCENT_SLACK: f64 = 1e-9;

struct Checker<'g> {
    graph: &'g Graph,
    subject: &'g Uri,
    out: Vec<Finding>,
}

impl<'g> Checker<'g> {
    fn error(&mut self, code: &'static str, message: impl Into<String>) {
        self.out.push(Finding::error(code, self.subject.as_str(), message));
    }

    fn warning(&mut self, code: &'static str, message: impl Into<String>) {
        self.out.push(Finding::warning(code, self.subject.as_str(), message));
    }

    /// Returns the referenced node when it exists.
    fn reference(&mut self, role: &str, target: &Uri) -> Option<&'g Node> {
        match self.graph.node(target.as_str()) {
            Some(n) => Some(n),
            None => {
                self.warning(codes::EXTERNAL_REF, format!("{role} {target} is not in the graph"));
                None
            }
        }
    }

    /// Reference that must resolve to one of `types` when it resolves at all.
    fn typed_reference(&mut self, role: &str, target: &Uri, types: &[&str]) -> Option<&'g Node> {
        let node = self.reference(role, target)?;
        if !types.contains(&node.type_name()) {
            self.error(
                codes::WRONG_NODE_TYPE,
                format!("{role} {target} is a {}, expected {}", node.type_name(), types.join(" or ")),
            );
            return None;
        }
        Some(node)
    }

    fn dimensions(&mut self, height: f64, width: f64) {
        for (name, v) in [("height", height), ("width", width)] {
            if !v.is_finite() || v <= 0.0 {
                self.error(codes::NONPOSITIVE_DIMENSION, format!("{name} must be positive, got {v}"));
            }
        }
    }

    fn resource_ref(&mut self, role: &str, r: &ResourceRef) -> Option<&'g Node> {
        if let Some(c) = &r.constraint {
            match &r.id {
                None => self.error(
                    codes::MISSING_SEGMENT_ID,
                    format!("constrained {role} on {} needs its own id", r.resource),
                ),
                Some(id) if *id == r.resource => self.error(
                    codes::SEGMENT_ID_EQUALS_RESOURCE,
                    format!("constrained {role} id {id} must differ from its resource"),
                ),
                Some(_) => {}
            }
            self.typed_reference(&format!("{role} constraint"), c, &[type_names::CONSTRAINT]);
        }
        self.reference(role, &r.resource)
    }

    fn annotation(&mut self, a: &Annotation) {
        if a.targets.is_empty() {
            self.error(codes::NO_TARGETS, "annotation has no targets");
        }
        for t in &a.targets {
            self.resource_ref("target", t);
        }
        let zone = a.kind == AnnotationKind::Zone;
        match &a.body {
            None => self.error(codes::MISSING_BODY, "annotation has no body"),
            Some(Body::Resource(r)) => {
                let body = self.resource_ref("body", r);
                if let Some(node) = body {
                    if zone && !matches!(node.data, NodeData::Zone(_)) {
                        self.error(
                            codes::ZONE_BODY_NOT_ZONE,
                            format!("zone annotation body {} is a {}", r.resource, node.type_name()),
                        );
                    }
                }
            }
            Some(Body::Choice(c)) => {
                let node = self.typed_reference("body choice", c, &[type_names::CHOICE]);
                if let Some(Node {
                    data: NodeData::Choice(choice),
                    ..
                }) = node
                {
                    if zone && choice.choice_kind != ChoiceKind::Zone {
                        self.error(codes::ZONE_BODY_NOT_ZONE, format!("zone annotation body choice {c} is not a zone choice"));
                    }
                }
            }
            Some(Body::Statement(_)) => {
                if zone {
                    self.error(codes::ZONE_BODY_NOT_ZONE, "zone annotation body is a statement");
                }
            }
        }
    }

    fn constraint(&mut self, c: &Constraint) {
        match *c {
            Constraint::Box { unit, x, y, w, h } => {
                if ![x, y, w, h].iter().all(|v| v.is_finite()) {
                    self.error(codes::NON_FINITE, "box coordinates must be finite");
                    return;
                }
                for (name, v) in [("w", w), ("h", h)] {
                    if v <= 0.0 {
                        self.error(codes::NONPOSITIVE_DIMENSION, format!("{name} must be positive, got {v}"));
                    }
                }
                match unit {
                    BoxUnit::Percent => {
                        for (name, v) in [("x", x), ("y", y)] {
                            if !(0.0..=100.0).contains(&v) {
                                self.error(codes::PERCENT_RANGE, format!("{name}={v} is outside 0..100"));
                            }
                        }
                        for (name, start, len) in [("x+w", x, w), ("y+h", y, h)] {
                            if (0.0..=100.0).contains(&start) && len > 0.0 && start + len > 100.0 + PERCENT_SLACK {
                                self.error(codes::PERCENT_OVERFLOW, format!("{name}={} exceeds 100", start + len));
                            }
                        }
                    }
                    BoxUnit::Pixel => {
                        for (name, v) in [("x", x), ("y", y)] {
                            if v < 0.0 {
                                self.error(codes::NEGATIVE_ORIGIN, format!("{name}={v} is negative"));
                            }
                        }
                    }
                }
            }
            Constraint::SvgPath { ref path } => {
                if let Err(e) = parse_svg_path(path) {
                    self.error(e.code(), e.to_string());
                }
            }
            Constraint::TextOffset { length, .. } => {
                if length == 0 {
                    self.error(codes::NONPOSITIVE_LENGTH, "text segment length must be positive");
                }
            }
        }
    }

    fn choice(&mut self, c: &Choice) {
        if c.options.is_empty() {
            self.error(codes::EMPTY_CHOICE, "choice has no options");
        }
        for o in &c.options {
            let node = self.reference("option", o);
            if c.choice_kind == ChoiceKind::Zone {
                if let Some(n) = node {
                    if !matches!(n.data, NodeData::Zone(_)) {
                        self.error(
                            codes::CHOICE_OPTION_NOT_ZONE,
                            format!("zone choice option {o} is a {}", n.type_name()),
                        );
                    }
                }
            }
        }
    }

    fn sequence(&mut self, s: &Sequence) {
        let mut seen = std::collections::BTreeSet::new();
        let mut reported = std::collections::BTreeSet::new();
        for c in &s.canvases {
            if !seen.insert(c) && reported.insert(c) {
                self.error(codes::DUPLICATE_CANVAS, format!("canvas {c} appears more than once"));
            }
        }
        for c in &s.canvases {
            if reported.contains(c) {
                continue;
            }
            self.typed_reference("canvas", c, &[type_names::CANVAS]);
        }
    }

    fn range(&mut self, r: &Range) {
        for c in &r.canvases {
            self.typed_reference("canvas", c, &[type_names::CANVAS]);
        }
        let seq = match self.typed_reference("sequence", &r.sequence, &[type_names::SEQUENCE]) {
            Some(Node {
                data: NodeData::Sequence(s),
                ..
            }) => s,
            _ => return,
        };
        let mut positions = Vec::new();
        for c in &r.canvases {
            match seq.canvases.iter().position(|x| x == c) {
                Some(p) => positions.push(p),
                None => self.error(
                    codes::RANGE_NOT_IN_SEQUENCE,
                    format!("canvas {c} is not in sequence {}", r.sequence),
                ),
            }
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            self.error(codes::RANGE_ORDER, format!("canvases are not in the order of {}", r.sequence));
        }
    }

    fn annotation_list(&mut self, l: &AnnotationList) {
        for a in &l.annotations {
            if let Some(Node {
                data: NodeData::Annotation(ann),
                ..
            }) = self.typed_reference("annotation", a, &[type_names::ANNOTATION])
            {
                if !l.list_kind.accepts(ann.kind) {
                    self.error(
                        codes::LIST_KIND_MISMATCH,
                        format!("{} annotation {a} in a {:?} list", ann.kind.as_str(), l.list_kind),
                    );
                }
            }
        }
    }

    fn layer(&mut self, l: &Layer) {
        if l.members.is_empty() {
            self.error(codes::EMPTY_LAYER, "layer has no members");
        }
        for m in &l.members {
            self.typed_reference("member", m, &[type_names::ANNOTATION, type_names::ANNOTATION_LIST]);
        }
    }

    fn manifest(&mut self, m: &Manifest) {
        if m.sequences.is_empty() {
            self.error(codes::NO_SEQUENCE, "manifest has no sequence");
        }
        for s in &m.sequences {
            self.typed_reference("sequence", s, &[type_names::SEQUENCE]);
        }
        for d in &m.discovery {
            self.typed_reference("discovery entry", d, &[type_names::ANNOTATION_LIST, type_names::LAYER]);
        }
    }
}

/// All invariant violations for one node.
pub fn validate_node(graph: &Graph, id: &Uri) -> Vec<Finding> {
    let Some(node) = graph.node(id.as_str()) else {
        return vec![Finding::error(codes::UNKNOWN_NODE, id.as_str(), "no such node")];
    };
    let mut c = Checker {
        graph,
        subject: &node.id,
        out: Vec::new(),
    };
    match &node.data {
        NodeData::Canvas(v) => c.dimensions(v.height, v.width),
        NodeData::Zone(z) => {
            c.dimensions(z.height, z.width);
            if !(0.0..360.0).contains(&z.reading_angle) {
                c.error(
                    codes::READING_ANGLE_RANGE,
                    format!("readingAngle {} is outside [0, 360)", z.reading_angle),
                );
            }
        }
        NodeData::Annotation(a) => c.annotation(a),
        NodeData::Constraint(k) => c.constraint(k),
        NodeData::Choice(k) => c.choice(k),
        NodeData::Sequence(s) => c.sequence(s),
        NodeData::Range(r) => c.range(r),
        NodeData::AnnotationList(l) => c.annotation_list(l),
        NodeData::Layer(l) => c.layer(l),
        NodeData::Manifest(m) => c.manifest(m),
        NodeData::Foreign(_) => {}
    }
    c.out
}

pub fn validate_graph(graph: &Graph) -> Vec<Finding> {
    validate_graph_with(graph, Execution::default())
}

/// Findings for every node in id order, followed by the graph's own
/// assembly diagnostics.
pub fn validate_graph_with(graph: &Graph, exec: Execution) -> Vec<Finding> {
    let ids: Vec<&Uri> = graph.ids().collect();
    let mut out = exec.flat_map(&ids, |id| validate_node(graph, id));
    out.extend(graph.diagnostics().iter().cloned());
    out
}
