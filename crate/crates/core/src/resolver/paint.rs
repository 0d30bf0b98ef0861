//! Painting annotations onto a canvas, and overlap-based alignment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{slice_chars, LayerIndex, ResolveError};
use crate::exec::Execution;
use crate::finding::{codes, Finding};
use crate::geometry::{
    intersection_area, resolve_constraint, sin_cos_degrees, vertex_arrays, Point, Polygon, Rect,
};
use crate::graph::Graph;
use crate::model::*;
use crate::uri::Uri;

/// Zones placed on zones beyond this depth are reported as a cycle.
pub const MAX_ZONE_DEPTH: usize = 8;

/// Chosen option per Choice. Choices without an entry use their first option.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChoiceSelection {
    pub selections: BTreeMap<Uri, Uri>,
}

impl ChoiceSelection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, choice: Uri, option: Uri) -> Self {
        self.selections.insert(choice, option);
        self
    }

    pub fn get(&self, choice: &str) -> Option<&Uri> {
        self.selections.get(choice)
    }

    /// Every entry must name a Choice in the graph and one of its options.
    pub fn check(&self, graph: &Graph) -> Result<(), ResolveError> {
        for (choice, option) in &self.selections {
            let c = graph.choice(choice.as_str()).ok_or_else(|| ResolveError::UnknownNode {
                id: choice.to_string(),
                expected: type_names::CHOICE,
            })?;
            if !c.options.contains(option) {
                return Err(ResolveError::InvalidSelection {
                    choice: choice.to_string(),
                    option: option.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// The constrained part of a body, e.g. the crop of an image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySegment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Uri>,
    pub constraint: Uri,
    /// In the body resource's own coordinates, when its size is known.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_region")]
    pub region: Option<Polygon>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct PaintedAnnotation {
    pub annotation: Uri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<Uri>,
    pub body_resource: Uri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_segment: Option<BodySegment>,
    pub canvas: Uri,
    #[serde(with = "vertex_arrays")]
    pub region: Polygon,
    /// Degrees clockwise, in `[0, 360)`.
    #[serde(serialize_with = "crate::model::ser_real")]
    pub rotation: f64,
    pub z_order: usize,
    /// Inline text of the body, narrowed by a text-offset body constraint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// A choice met while painting and the option in effect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ChoiceState {
    pub id: Uri,
    pub choice_kind: ChoiceKind,
    pub options: Vec<Uri>,
    pub selected: Uri,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaintOutput {
    pub canvas: Uri,
    pub width: f64,
    pub height: f64,
    /// Ordered by `z_order`.
    pub paintings: Vec<PaintedAnnotation>,
    /// Choices encountered, by id.
    pub choices: Vec<ChoiceState>,
    pub findings: Vec<Finding>,
}

mod opt_region {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::geometry::{vertex_arrays, Point, Polygon};

    struct Wrap<'a>(&'a Polygon);

    impl Serialize for Wrap<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            vertex_arrays::serialize(self.0, s)
        }
    }

    pub fn serialize<S: Serializer>(p: &Option<Polygon>, s: S) -> Result<S::Ok, S::Error> {
        match p {
            Some(p) => s.serialize_some(&Wrap(p)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Polygon>, D::Error> {
        let raw: Option<Vec<[f64; 2]>> = Option::deserialize(d)?;
        raw.map(|vs| Polygon::new(vs.into_iter().map(|[x, y]| Point::new(x, y)).collect()))
            .transpose()
            .map_err(serde::de::Error::custom)
    }
}

/// Positive-scale, rotation and translation map from a zone's local
/// coordinates to canvas coordinates.
#[derive(Debug, Clone, Copy)]
struct Frame {
    m: [f64; 4],
    t: [f64; 2],
    rotation: f64,
    identity: bool,
}

impl Frame {
    const IDENTITY: Frame = Frame {
        m: [1.0, 0.0, 0.0, 1.0],
        t: [0.0, 0.0],
        rotation: 0.0,
        identity: true,
    };

    /// Scales the zone onto the placement's bounding box, moves it to the
    /// box's top-left corner and rotates it about that corner.
    fn placement(bounds: Rect, zone: &Zone) -> Frame {
        let sx = bounds.w / zone.width;
        let sy = bounds.h / zone.height;
        let (sin, cos) = sin_cos_degrees(zone.reading_angle);
        Frame {
            m: [cos * sx, -sin * sy, sin * sx, cos * sy],
            t: [bounds.x, bounds.y],
            rotation: zone.reading_angle,
            identity: false,
        }
    }

    fn then(&self, inner: &Frame) -> Frame {
        if self.identity {
            return *inner;
        }
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = inner.m;
        let [tx, ty] = inner.t;
        Frame {
            m: [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h],
            t: [a * tx + b * ty + self.t[0], c * tx + d * ty + self.t[1]],
            rotation: normalize_angle(self.rotation + inner.rotation),
            identity: false,
        }
    }

    fn apply(&self, p: Point) -> Point {
        let [a, b, c, d] = self.m;
        Point::new(a * p.x + b * p.y + self.t[0], c * p.x + d * p.y + self.t[1])
    }

    fn map(&self, p: &Polygon) -> Polygon {
        if self.identity {
            p.clone()
        } else {
            p.map_rigid(|v| self.apply(v))
        }
    }
}

fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

type TargetEntry<'g> = (usize, &'g Uri, &'g Annotation, &'g ResourceRef);

struct Painter<'g> {
    graph: &'g Graph,
    selection: &'g ChoiceSelection,
    targets: BTreeMap<&'g str, Vec<TargetEntry<'g>>>,
    layers: LayerIndex,
    canvas: &'g Uri,
    width: f64,
    height: f64,
    paintings: Vec<PaintedAnnotation>,
    choices: BTreeMap<Uri, ChoiceState>,
    findings: Vec<Finding>,
}

impl<'g> Painter<'g> {
    fn finding(&mut self, f: Finding) {
        self.findings.push(f);
    }

    fn space(&mut self, space: &str, w: f64, h: f64, frame: Frame, depth: usize) {
        let Some(entries) = self.targets.get(space).cloned() else {
            return;
        };
        let whole = match Rect::new(0.0, 0.0, w, h) {
            Ok(r) => r.to_polygon(),
            Err(_) => {
                self.finding(Finding::error(
                    codes::NONPOSITIVE_DIMENSION,
                    space,
                    "cannot paint onto a space without positive size",
                ));
                return;
            }
        };
        for (rank, id, ann, target) in entries {
            let local = match &target.constraint {
                None => whole.clone(),
                Some(cid) => match self.graph.constraint(cid.as_str()) {
                    None => {
                        self.finding(Finding::error(
                            codes::UNRESOLVED_CONSTRAINT,
                            id.as_str(),
                            format!("target constraint {cid} is not in the graph"),
                        ));
                        continue;
                    }
                    Some(c) => match resolve_constraint(c, w, h) {
                        Ok(r) => r.polygon,
                        Err(e) => {
                            self.finding(Finding::error(e.code(), id.as_str(), format!("target {cid}: {e}")));
                            continue;
                        }
                    },
                },
            };
            match &ann.body {
                None | Some(Body::Statement(_)) => {}
                Some(Body::Resource(r)) => {
                    if let Some(zone) = self.graph.zone(r.resource.as_str()) {
                        self.place(&r.resource, zone, &local, frame, depth);
                    } else if ann.kind != AnnotationKind::Zone {
                        self.emit(rank, id, &r.resource, r.id.as_ref(), r.constraint.as_ref(), &local, frame);
                    }
                }
                Some(Body::Choice(cid)) => {
                    let Some(choice) = self.graph.choice(cid.as_str()) else {
                        continue;
                    };
                    let Some(selected) = self.selection.get(cid.as_str()).or(choice.default_option()) else {
                        continue;
                    };
                    self.choices.entry(cid.clone()).or_insert_with(|| ChoiceState {
                        id: cid.clone(),
                        choice_kind: choice.choice_kind,
                        options: choice.options.clone(),
                        selected: selected.clone(),
                    });
                    if let Some(zone) = self.graph.zone(selected.as_str()) {
                        self.place(selected, zone, &local, frame, depth);
                    } else if ann.kind != AnnotationKind::Zone {
                        self.emit(rank, id, selected, None, None, &local, frame);
                    }
                }
            }
        }
    }

    fn place(&mut self, zone_id: &Uri, zone: &Zone, local: &Polygon, frame: Frame, depth: usize) {
        if depth >= MAX_ZONE_DEPTH {
            self.finding(Finding::error(
                codes::ZONE_CYCLE,
                zone_id.as_str(),
                format!("zones nested deeper than {MAX_ZONE_DEPTH}"),
            ));
            return;
        }
        let child = frame.then(&Frame::placement(local.bounds(), zone));
        self.space(zone_id.as_str(), zone.width, zone.height, child, depth + 1);
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(
        &mut self,
        rank: usize,
        id: &Uri,
        body: &Uri,
        segment_id: Option<&Uri>,
        segment: Option<&Uri>,
        local: &Polygon,
        frame: Frame,
    ) {
        let region = frame.map(local);
        if !region.within(self.width, self.height) {
            self.finding(Finding::warning(
                codes::OUT_OF_BOUNDS,
                id.as_str(),
                format!("region extends outside {}", self.canvas),
            ));
        }
        let (layer, warning) = self.layers.layer_of(id.as_str());
        let layer = layer.cloned();
        if let Some(w) = warning {
            self.finding(w);
        }
        let body_node = self.graph.node(body.as_str());
        let segment_constraint = segment.and_then(|c| self.graph.constraint(c.as_str()));
        let mut text = match body_node.map(|n| &n.data) {
            Some(NodeData::Foreign(f)) => f.chars().map(str::to_string),
            _ => None,
        };
        if let (Some(full), Some(Constraint::TextOffset { offset, length })) = (&text, segment_constraint) {
            text = match slice_chars(full, *offset, *length) {
                Ok(t) => Some(t),
                Err(e) => {
                    self.finding(Finding::error(e.code(), id.as_str(), e.to_string()));
                    None
                }
            };
        }
        let body_segment = segment.map(|cid| BodySegment {
            id: segment_id.cloned(),
            constraint: cid.clone(),
            region: segment_constraint
                .filter(|c| c.is_spatial())
                .and_then(|c| {
                    let (w, h) = body_node.and_then(|n| dimensions(&n.data)).unwrap_or((f64::NAN, f64::NAN));
                    resolve_constraint(c, w, h).ok()
                })
                .map(|r| r.polygon),
        });
        self.paintings.push(PaintedAnnotation {
            annotation: id.clone(),
            layer,
            body_resource: body.clone(),
            body_segment,
            canvas: self.canvas.clone(),
            region,
            rotation: frame.rotation,
            z_order: rank,
            text,
        });
    }
}

/// Width and height of a space or of a foreign resource that declares them.
fn dimensions(data: &NodeData) -> Option<(f64, f64)> {
    match data {
        NodeData::Canvas(c) => Some((c.width, c.height)),
        NodeData::Zone(z) => Some((z.width, z.height)),
        NodeData::Foreign(f) => {
            let w = f.properties.get("width")?.as_f64()?;
            let h = f.properties.get("height")?.as_f64()?;
            Some((w, h))
        }
        _ => None,
    }
}

/// Resolves every annotation that lands on `canvas`, directly or through
/// zones and choices, into canvas-frame regions.
pub fn paint(graph: &Graph, canvas: &str, selection: &ChoiceSelection) -> Result<PaintOutput, ResolveError> {
    let (canvas_id, cv) = match graph.node(canvas) {
        Some(Node {
            id,
            data: NodeData::Canvas(c),
        }) => (id, c),
        _ => {
            return Err(ResolveError::UnknownNode {
                id: canvas.to_string(),
                expected: type_names::CANVAS,
            })
        }
    };
    selection.check(graph)?;

    let mut targets: BTreeMap<&str, Vec<TargetEntry>> = BTreeMap::new();
    for (rank, (id, ann)) in graph.annotations().enumerate() {
        for t in &ann.targets {
            targets.entry(t.resource.as_str()).or_default().push((rank, id, ann, t));
        }
    }
    let mut p = Painter {
        graph,
        selection,
        targets,
        layers: LayerIndex::build(graph),
        canvas: canvas_id,
        width: cv.width,
        height: cv.height,
        paintings: Vec::new(),
        choices: BTreeMap::new(),
        findings: Vec::new(),
    };
    p.space(canvas, cv.width, cv.height, Frame::IDENTITY, 0);

    let mut paintings = p.paintings;
    paintings.sort_by_key(|x| x.z_order);
    let mut findings = p.findings;
    findings.sort();
    findings.dedup();
    Ok(PaintOutput {
        canvas: canvas_id.clone(),
        width: cv.width,
        height: cv.height,
        paintings,
        choices: p.choices.into_values().collect(),
        findings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct AlignmentHit {
    pub annotation: Uri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<Uri>,
    #[serde(serialize_with = "crate::model::ser_real")]
    pub overlap_area: f64,
    /// Overlap divided by the query region's area.
    #[serde(serialize_with = "crate::model::ser_real")]
    pub overlap_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignOutput {
    /// Grouped by layer (layer id ascending, unaffiliated last); within a
    /// group by descending fraction, then annotation id.
    pub hits: Vec<AlignmentHit>,
    pub findings: Vec<Finding>,
}

impl AlignOutput {
    pub fn groups(&self) -> Vec<(Option<&Uri>, Vec<&AlignmentHit>)> {
        let mut out: Vec<(Option<&Uri>, Vec<&AlignmentHit>)> = Vec::new();
        for h in &self.hits {
            match out.last_mut() {
                Some((layer, v)) if *layer == h.layer.as_ref() => v.push(h),
                _ => out.push((h.layer.as_ref(), vec![h])),
            }
        }
        out
    }
}

/// Overlap below this share of the query area is treated as touching only.
const CONTACT_EPS: f64 = 1e-9;
const FRACTION_GRID: f64 = 1e12;

/// Scores already-painted annotations against a query region. An annotation
/// painted more than once counts with its largest overlap.
pub fn align_painted(
    paintings: &[PaintedAnnotation],
    query: &Polygon,
    min_fraction: f64,
    exec: Execution,
) -> Result<Vec<AlignmentHit>, ResolveError> {
    if !(0.0..=1.0).contains(&min_fraction) {
        return Err(ResolveError::FractionRange(min_fraction));
    }
    let query_area = query.area();
    let areas = exec.map(paintings, |p| intersection_area(query, &p.region));

    let mut best: BTreeMap<&Uri, (f64, Option<&Uri>)> = BTreeMap::new();
    for (p, area) in paintings.iter().zip(areas) {
        let entry = best.entry(&p.annotation).or_insert((area, p.layer.as_ref()));
        if area > entry.0 {
            entry.0 = area;
        }
    }
    let mut hits: Vec<AlignmentHit> = best
        .into_iter()
        .filter(|(_, (area, _))| *area > CONTACT_EPS * query_area)
        .map(|(id, (area, layer))| AlignmentHit {
            annotation: id.clone(),
            layer: layer.cloned(),
            overlap_area: area,
            overlap_fraction: (area / query_area).min(1.0),
        })
        .filter(|h| h.overlap_fraction >= min_fraction - CONTACT_EPS)
        .collect();
    // Fractions equal up to rounding noise tie, and fall back to id order.
    let fraction_key = |h: &AlignmentHit| (h.overlap_fraction * FRACTION_GRID).round() as i64;
    hits.sort_by(|a, b| {
        let layer_key = |h: &AlignmentHit| (h.layer.is_none(), h.layer.clone());
        layer_key(a)
            .cmp(&layer_key(b))
            .then(fraction_key(b).cmp(&fraction_key(a)))
            .then_with(|| a.annotation.cmp(&b.annotation))
    });
    Ok(hits)
}

pub fn align(
    graph: &Graph,
    canvas: &str,
    query: &Polygon,
    selection: &ChoiceSelection,
    min_fraction: f64,
) -> Result<AlignOutput, ResolveError> {
    align_with(graph, canvas, query, selection, min_fraction, Execution::default())
}

/// Annotations on `canvas` whose painted regions overlap `query`.
pub fn align_with(
    graph: &Graph,
    canvas: &str,
    query: &Polygon,
    selection: &ChoiceSelection,
    min_fraction: f64,
    exec: Execution,
) -> Result<AlignOutput, ResolveError> {
    let painted = paint(graph, canvas, selection)?;
    let hits = align_painted(&painted.paintings, query, min_fraction, exec)?;
    Ok(AlignOutput {
        hits,
        findings: painted.findings,
    })
}
