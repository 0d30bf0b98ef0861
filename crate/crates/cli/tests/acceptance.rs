//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;
use sharedcanvas::geometry::{intersection_area, inverse_map_box, parse_svg_path, Point, Polygon, Rect, Transform};
use sharedcanvas::graph::{merge, parse_manifest, serialize};
use sharedcanvas::resolver::{
    align, canvas_order, expand_template, paint, semantic_statements, text_segment, AlignmentHit, ChoiceSelection,
};
use sharedcanvas::*;
use sharedcanvas_cli::load::load;
use sharedcanvas_cli::Api;

type Outcome = Result<String, String>;
type Ring = Vec<(f64, f64)>;

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn graph_of(rels: &[&str]) -> Graph {
    let paths: Vec<String> = rels.iter().map(|r| fixture(r).display().to_string()).collect();
    load(&paths, false).unwrap()
}

fn expected(rel: &str) -> Value {
    serde_json::from_slice(&std::fs::read(fixture(rel)).unwrap()).unwrap()
}

fn u(s: impl Into<String>) -> Uri {
    Uri::new(s).unwrap()
}

fn nums(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn rect(v: &[f64]) -> Rect {
    Rect::new(v[0], v[1], v[2], v[3]).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// 1. Round trip over generated valid graphs.

/// Builds one valid graph touching every node type.
struct Gen {
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    n: usize,
}

impl Gen {
    fn id(&mut self, what: &str) -> Uri {
        self.n += 1;
        let style = self.rng.random_range(0..3);
        match style {
            0 => u(format!("urn:gen:{what}{}", self.n)),
            1 => u(format!("https://example.org/gen/{what}/{}", self.n)),
            _ => u(format!("urn:gen:{what}:{}:{}", self.rng.random_range(0..1000), self.n)),
        }
    }

    fn push(&mut self, id: Uri, data: NodeData) -> Uri {
        self.nodes.push(Node::new(id.clone(), data));
        id
    }

    fn real(&mut self, lo: f64, hi: f64) -> f64 {
        if self.rng.random_bool(0.5) {
            self.rng.random_range(lo.ceil() as i64..hi.floor() as i64) as f64
        } else {
            self.rng.random_range(lo..hi)
        }
    }

    fn label(&mut self) -> Option<String> {
        const PIECES: [&str; 8] = ["fol. ", "1r", "Brief", "é", "ß", "中文", "🜲", " \"q\" \\ "];
        self.rng.random_bool(0.6).then(|| {
            let n = self.rng.random_range(1..4);
            (0..n).map(|_| PIECES[self.rng.random_range(0..PIECES.len())]).collect()
        })
    }

    fn text(&mut self) -> (Uri, usize) {
        const WORDS: [&str; 6] = ["lieve", "vrouw", "Carel", "ĳs", "naïve", "中"];
        let n = self.rng.random_range(1..8);
        let chars: Vec<&str> = (0..n).map(|_| WORDS[self.rng.random_range(0..WORDS.len())]).collect();
        let chars = chars.join(" ");
        let len = chars.chars().count();
        let id = self.id("text");
        let mut props = serde_json::Map::new();
        props.insert("chars".into(), Value::from(chars));
        if self.rng.random_bool(0.3) {
            props.insert("language".into(), Value::from("nl"));
        }
        let id = self.push(id, NodeData::Foreign(Foreign { type_name: "Text".into(), properties: props }));
        (id, len)
    }

    /// A spatial constraint that fits inside `w`×`h`.
    fn spatial(&mut self, w: f64, h: f64) -> Uri {
        let c = match self.rng.random_range(0..3) {
            0 => {
                let bw = self.real(1.0, w);
                let bh = self.real(1.0, h);
                let x = self.rng.random_range(0.0..=(w - bw)).floor();
                let y = self.rng.random_range(0.0..=(h - bh)).floor();
                Constraint::Box { unit: BoxUnit::Pixel, x, y, w: bw.min(w - x), h: bh.min(h - y) }
            }
            1 => {
                let pw = self.real(1.0, 100.0);
                let ph = self.real(1.0, 100.0);
                let x = self.rng.random_range(0.0..=(100.0 - pw));
                let y = self.rng.random_range(0.0..=(100.0 - ph));
                Constraint::Box { unit: BoxUnit::Percent, x, y, w: pw, h: ph }
            }
            _ => {
                let (cx, cy, r) = (w / 2.0, h / 2.0, 0.45 * w.min(h));
                let k = self.rng.random_range(3..9);
                let step = TAU / k as f64;
                let pts: Vec<String> = (0..k)
                    .map(|i| {
                        let t = step * (i as f64 + self.rng.random_range(-0.3..0.3));
                        let rr = r * self.rng.random_range(0.5..1.0);
                        format!("{} {}", cx + rr * t.cos(), cy + rr * t.sin())
                    })
                    .collect();
                Constraint::SvgPath { path: format!("M {} Z", pts.join(" L ")) }
            }
        };
        let id = self.id("sel");
        self.push(id, NodeData::Constraint(c))
    }

    fn on(&mut self, target: &Uri, w: f64, h: f64) -> ResourceRef {
        if self.rng.random_bool(0.2) {
            return ResourceRef::whole(target.clone());
        }
        let c = self.spatial(w, h);
        let seg = self.id("seg");
        ResourceRef::constrained(seg, target.clone(), c)
    }

    fn annotation(&mut self, kind: AnnotationKind, body: Body, targets: Vec<ResourceRef>) -> Uri {
        let id = self.id("anno");
        self.push(id, NodeData::Annotation(Annotation { kind, body: Some(body), targets }))
    }

    fn graph(seed: u64) -> Graph {
        let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), nodes: Vec::new(), n: 0 };
        let mut canvases = Vec::new();
        for _ in 0..g.rng.random_range(1..5) {
            let (w, h) = (g.real(50.0, 3000.0), g.real(50.0, 3000.0));
            let label = g.label();
            let id = g.id("canvas");
            canvases.push((g.push(id, NodeData::Canvas(Canvas { height: h, width: w, label })), w, h));
        }
        let mut text_annos = Vec::new();
        let mut others = Vec::new();
        for (c, w, h) in canvases.clone() {
            let img = g.id("img");
            let mut props = serde_json::Map::new();
            props.insert("format".into(), Value::from("image/jpeg"));
            props.insert("width".into(), Value::from(w));
            let img = g.push(img, NodeData::Foreign(Foreign { type_name: "Image".into(), properties: props }));
            others.push(g.annotation(AnnotationKind::Image, Body::Resource(ResourceRef::whole(img)), vec![ResourceRef::whole(c.clone())]));

            // Rotated zone placed on the canvas, with text inside it.
            let (zw, zh) = (g.real(10.0, w), g.real(10.0, h));
            let angle = if g.rng.random_bool(0.5) { [0.0, 90.0, 180.0, 270.0][g.rng.random_range(0..4)] } else { g.rng.random_range(0.0..360.0) };
            let zid = g.id("zone");
            let zone = g.push(zid, NodeData::Zone(Zone { height: zh, width: zw, reading_angle: angle }));
            let place = g.on(&c, w, h);
            others.push(g.annotation(AnnotationKind::Zone, Body::Resource(ResourceRef::whole(zone.clone())), vec![place]));

            for _ in 0..g.rng.random_range(1..4) {
                let (t, len) = g.text();
                let body = if g.rng.random_bool(0.3) {
                    let off = g.rng.random_range(0..len as u64);
                    let cid = g.id("span");
                    let length = g.rng.random_range(1..=len as u64 - off);
                    let cid = g.push(cid, NodeData::Constraint(Constraint::TextOffset { offset: off, length }));
                    let seg = g.id("seg");
                    ResourceRef::constrained(seg, t, cid)
                } else {
                    ResourceRef::whole(t)
                };
                let (target, tw, th) = if g.rng.random_bool(0.5) { (zone.clone(), zw, zh) } else { (c.clone(), w, h) };
                let tref = g.on(&target, tw, th);
                text_annos.push(g.annotation(AnnotationKind::Text, Body::Resource(body), vec![tref]));
            }

            // A text choice and a zone choice.
            let (a, _) = g.text();
            let (b, _) = g.text();
            let cid = g.id("choice");
            let choice = g.push(cid, NodeData::Choice(Choice { choice_kind: ChoiceKind::Text, options: vec![a, b] }));
            let tref = g.on(&c, w, h);
            text_annos.push(g.annotation(AnnotationKind::Text, Body::Choice(choice), vec![tref]));
            let opts: Vec<Uri> = (0..2)
                .map(|_| {
                    let id = g.id("opt");
                    g.push(id, NodeData::Zone(Zone { height: zh, width: zw, reading_angle: 0.0 }))
                })
                .collect();
            let zc = g.id("zchoice");
            let zc = g.push(zc, NodeData::Choice(Choice { choice_kind: ChoiceKind::Zone, options: opts }));
            let place = g.on(&c, w, h);
            others.push(g.annotation(AnnotationKind::Zone, Body::Choice(zc), vec![place]));

            // A semantic statement about a text span.
            let (t, len) = g.text();
            let span = g.id("span");
            let span = g.push(span, NodeData::Constraint(Constraint::TextOffset { offset: 0, length: len as u64 }));
            let seg = g.id("seg");
            let object = if g.rng.random_bool(0.5) { Term::Uri(u("http://example.org/ns#Person")) } else { Term::Literal("a \"name\"".into()) };
            let stmt = SemanticStatement { subject: seg.clone(), predicate: u("http://example.org/ns#references"), object };
            others.push(g.annotation(AnnotationKind::Semantic, Body::Statement(stmt), vec![ResourceRef::constrained(seg, t, span)]));
            let (note, _) = g.text();
            let target = g.on(&c, w, h);
            others.push(g.annotation(AnnotationKind::Comment, Body::Resource(ResourceRef::whole(note)), vec![target]));
        }

        let mut order: Vec<Uri> = canvases.iter().map(|(c, _, _)| c.clone()).collect();
        order.shuffle(&mut g.rng);
        let seq_label = g.label();
        let seq = g.id("seq");
        let seq = g.push(seq, NodeData::Sequence(Sequence { canvases: order.clone(), label: seq_label }));
        let cut = g.rng.random_range(1..=order.len());
        let range_label = g.label();
        let range = g.id("range");
        g.push(range, NodeData::Range(Range { canvases: order[..cut].to_vec(), sequence: seq.clone(), label: range_label }));

        let list = g.id("list");
        let list = g.push(list, NodeData::AnnotationList(AnnotationList { list_kind: ListKind::Text, annotations: text_annos }));
        let mixed = g.id("list");
        let mixed = g.push(mixed, NodeData::AnnotationList(AnnotationList { list_kind: ListKind::Mixed, annotations: others.clone() }));
        let ly_label = g.label();
        let layer = g.id("layer");
        g.push(layer, NodeData::Layer(Layer { members: vec![list.clone()], label: ly_label }));
        let layer2 = g.id("layer");
        g.push(layer2, NodeData::Layer(Layer { members: others[..1].to_vec(), label: None }));

        let mut metadata = std::collections::BTreeMap::new();
        metadata.insert("title".to_string(), "Brieven ✉".to_string());
        let m_label = g.label();
        let m = g.id("manifest");
        g.push(m, NodeData::Manifest(Manifest { sequences: vec![seq], discovery: vec![list, mixed], metadata, label: m_label }));

        // An unknown node type, kept as is.
        let mut props = serde_json::Map::new();
        props.insert("nested".into(), serde_json::json!({"a": [1, 2.5, null, true], "b": "x"}));
        let f = g.id("x");
        g.push(f, NodeData::Foreign(Foreign { type_name: "ex:Provenance".into(), properties: props }));

        Graph::from_nodes(g.nodes, "generated").unwrap()
    }
}

fn round_trip() -> Outcome {
    let mut types = std::collections::BTreeSet::new();
    for seed in 0..200 {
        let g = Gen::graph(seed);
        let errors: Vec<String> = validate_graph(&g).iter().filter(|f| f.is_error()).map(|f| f.to_string()).collect();
        ensure(errors.is_empty(), || format!("graph {seed} is not valid: {errors:?}"))?;
        let bytes = serialize(&g);
        let back = parse_manifest(&bytes, "reread").map_err(|e| format!("graph {seed}: {e}"))?;
        ensure(g.same_structure(&back), || format!("graph {seed}: {:?}", g.first_difference(&back)))?;
        ensure(serialize(&back) == bytes, || format!("graph {seed}: second serialization differs"))?;
        types.extend(g.nodes().map(|n| n.type_name().to_string()));
    }
    Ok(format!("200 graphs, node types {}", types.into_iter().collect::<Vec<_>>().join("/")))
}

// ---------------------------------------------------------------------------
// 2, 3. Transforms.

fn rotation_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = Point::new(rng.random_range(-5000.0..5000.0), rng.random_range(-5000.0..5000.0));
        let o = Point::new(rng.random_range(-5000.0..5000.0), rng.random_range(-5000.0..5000.0));
        let t = Transform::rotation(rng.random_range(-360.0..360.0), o);
        worst = worst.max(t.inverse().apply(t.apply(p)).distance(p));
    }
    ensure(worst <= 1e-9, || format!("max error {worst:e}"))?;
    Ok(format!("1000 triples, max error {worst:e}"))
}

fn skew_recovery() -> Outcome {
    let g = graph_of(&["skew.json"]);
    let exp = expected("skew.expected.json");
    let origin = nums(&exp["rotation"]["origin"]);
    let t = Transform::rotation(exp["rotation"]["angle"].as_f64().unwrap(), Point::new(origin[0], origin[1]));
    let (mut corner, mut area): (f64, f64) = (0.0, 0.0);
    let boxes = exp["boxes"].as_array().unwrap();
    for b in boxes {
        let r = rect(&[b["x"].as_f64().unwrap(), b["y"].as_f64().unwrap(), b["w"].as_f64().unwrap(), b["h"].as_f64().unwrap()]);
        let mapped = inverse_map_box(&r, &t);
        for (m, c) in mapped.vertices().iter().zip(r.corners()) {
            corner = corner.max(t.apply(*m).distance(c));
        }
        area = area.max((mapped.area() - r.area()).abs());
        // The fixture carries the same polygons as authored path constraints.
        let ann = g.annotation(b["annotation"].as_str().unwrap()).ok_or("missing annotation")?;
        let cid = ann.targets[0].constraint.as_ref().ok_or("unconstrained target")?;
        let Some(Constraint::SvgPath { path }) = g.constraint(cid.as_str()) else {
            return Err(format!("{cid} is not a path"));
        };
        let authored = parse_svg_path(path).map_err(|e| e.to_string())?;
        let drift = authored.vertices().iter().zip(mapped.vertices()).map(|(a, m)| a.distance(*m)).fold(0.0, f64::max);
        ensure(drift <= 1e-9, || format!("{cid} differs from inverse_map_box by {drift:e}"))?;
    }
    ensure(corner <= 1e-6 && area <= 1e-9, || format!("corner error {corner:e}, area error {area:e}"))?;
    Ok(format!("{} boxes, corner error {corner:e}, area error {area:e}", boxes.len()))
}

// ---------------------------------------------------------------------------
// 4. Overlap against point sampling.

/// Crossing-number containment, independent of the clipping code.
fn inside(vs: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut c = false;
    let mut j = vs.len() - 1;
    for i in 0..vs.len() {
        let ((xi, yi), (xj, yj)) = (vs[i], vs[j]);
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            c = !c;
        }
        j = i;
    }
    c
}

fn sampled_overlap(a: &[(f64, f64)], b: &[(f64, f64)], seed: u64) -> (f64, f64) {
    let bb = |v: &[(f64, f64)]| {
        v.iter().fold((f64::MAX, f64::MAX, f64::MIN, f64::MIN), |acc, &(x, y)| {
            (acc.0.min(x), acc.1.min(y), acc.2.max(x), acc.3.max(y))
        })
    };
    let (a0, a1, a2, a3) = bb(a);
    let (b0, b1, b2, b3) = bb(b);
    let (x0, y0, x1, y1) = (a0.max(b0), a1.max(b1), a2.min(b2), a3.min(b3));
    if x0 >= x1 || y0 >= y1 {
        return (0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const N: usize = 1_000_000;
    let hits = (0..N)
        .filter(|_| {
            let (x, y) = (rng.random_range(x0..x1), rng.random_range(y0..y1));
            inside(a, x, y) && inside(b, x, y)
        })
        .count();
    let p = hits as f64 / N as f64;
    (p * (x1 - x0) * (y1 - y0), p)
}

fn convex_ring(rng: &mut ChaCha8Rng, cx: f64, cy: f64, r: f64) -> Ring {
    let n = rng.random_range(5..=12);
    let step = TAU / n as f64;
    let phase = rng.random_range(0.0..TAU);
    (0..n)
        .map(|i| {
            let t = phase + step * (i as f64 + rng.random_range(-0.4..0.4));
            (cx + r * t.cos(), cy + r * t.sin())
        })
        .collect()
}

fn overlap_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pairs: Vec<(Ring, Ring)> = (0..200)
        .map(|_| {
            let (ra, rb): (f64, f64) = (rng.random_range(20.0..300.0), rng.random_range(20.0..300.0));
            let off = 0.3 * ra.min(rb);
            let (cx, cy) = (rng.random_range(0.0..2000.0), rng.random_range(0.0..2000.0));
            let a = convex_ring(&mut rng, cx, cy, ra);
            let (dx, dy) = (rng.random_range(-off..off), rng.random_range(-off..off));
            let b = convex_ring(&mut rng, cx + dx, cy + dy, rb);
            (a, b)
        })
        .collect();
    let poly = |v: &[(f64, f64)]| Polygon::new(v.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap();
    let results: Vec<(f64, f64)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let (oracle, share) = sampled_overlap(a, b, 1000 + i as u64);
            let exact = intersection_area(&poly(a), &poly(b));
            ((exact - oracle).abs() / oracle, share)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let min_share = results.iter().map(|r| r.1).fold(1.0, f64::min);
    ensure(pairs.iter().all(|(a, b)| poly(a).is_convex() && poly(b).is_convex()), || "non-convex input".into())?;
    ensure(min_share >= 0.15, || format!("sampling share {min_share:.3} too small for a 1% estimate"))?;
    ensure(worst <= 0.01, || format!("max relative error {worst:.5}"))?;
    Ok(format!("200 pairs, 10^6 samples each, max relative error {worst:.5}"))
}

// ---------------------------------------------------------------------------
// 5, 10. Alignment on the letter.

fn letter_queries() -> (Value, Vec<(String, Polygon)>) {
    let exp = expected("letter.expected.json");
    let qs = exp["queries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|q| (q["line"].as_str().unwrap().to_string(), rect(&nums(&q["region"])).to_polygon()))
        .collect();
    (exp, qs)
}

fn letter_alignment() -> Outcome {
    let g = graph_of(&["letter.json"]);
    let (exp, qs) = letter_queries();
    let canvas = exp["canvas"].as_str().unwrap();
    for (q, (line, region)) in exp["queries"].as_array().unwrap().iter().zip(&qs) {
        let hits = align(&g, canvas, region, &ChoiceSelection::new(), 0.0).map_err(|e| e.to_string())?.hits;
        for (key, layer) in [("edition", "urn:ex:letter:Txt2Lyr"), ("translation", "urn:ex:letter:Txt3Lyr")] {
            let got: Vec<(String, f64, f64)> = hits
                .iter()
                .filter(|h| h.layer.as_ref().map(Uri::as_str) == Some(layer))
                .map(|h| (h.annotation.to_string(), h.overlap_area, h.overlap_fraction))
                .collect();
            let want: Vec<(String, f64, f64)> = q[key]
                .as_array()
                .unwrap()
                .iter()
                .map(|h| {
                    let s = h["annotation"].as_str().unwrap().to_string();
                    (s, h["overlapArea"].as_f64().unwrap(), h["overlapFraction"].as_f64().unwrap())
                })
                .collect();
            ensure(got == want, || format!("{line} {key}: got {got:?}, want {want:?}"))?;
        }
    }
    Ok(format!("{} line queries match", qs.len()))
}

fn no_layers() -> Outcome {
    let g = graph_of(&["letter.json"]);
    let mut bare = g.clone();
    let layers: Vec<Uri> = g.layers().map(|(id, _)| id.clone()).collect();
    for l in &layers {
        bare.remove(l.as_str());
    }
    let (exp, qs) = letter_queries();
    let canvas = exp["canvas"].as_str().unwrap();
    let sel = ChoiceSelection::new();
    let (a, b) = (paint(&g, canvas, &sel).map_err(|e| e.to_string())?, paint(&bare, canvas, &sel).map_err(|e| e.to_string())?);
    ensure(a.paintings.len() == b.paintings.len(), || "painting counts differ".into())?;
    for (x, y) in a.paintings.iter().zip(&b.paintings) {
        let mut y2 = y.clone();
        y2.layer = x.layer.clone();
        ensure(&y2 == x && y.layer.is_none(), || format!("{} paints differently", x.annotation))?;
    }
    let key = |hs: &[AlignmentHit]| {
        let mut v: Vec<(String, f64, f64)> =
            hs.iter().map(|h| (h.annotation.to_string(), h.overlap_area, h.overlap_fraction)).collect();
        v.sort_by(|p, q| p.0.cmp(&q.0));
        v
    };
    for (line, region) in &qs {
        let with = align(&g, canvas, region, &sel, 0.0).map_err(|e| e.to_string())?;
        let without = align(&bare, canvas, region, &sel, 0.0).map_err(|e| e.to_string())?;
        ensure(without.hits.iter().all(|h| h.layer.is_none()), || format!("{line}: layer on a layerless hit"))?;
        ensure(without.groups().len() <= 1, || format!("{line}: grouping present"))?;
        ensure(key(&with.hits) == key(&without.hits), || format!("{line}: hit sets differ"))?;
    }
    Ok(format!("{} layers removed; paintings and {} hit sets unchanged", layers.len(), qs.len()))
}

// ---------------------------------------------------------------------------
// 6–9, 11. Fixture scenarios.

fn margin_rotation() -> Outcome {
    let g = graph_of(&["margin.json"]);
    let exp = expected("margin.expected.json");
    let out = paint(&g, exp["canvas"].as_str().unwrap(), &ChoiceSelection::new()).map_err(|e| e.to_string())?;
    let note = out
        .paintings
        .iter()
        .find(|p| p.annotation.as_str() == exp["annotation"].as_str().unwrap())
        .ok_or("note not painted")?;
    let want: Vec<Point> = exp["region"].as_array().unwrap().iter().map(|p| Point::new(p[0].as_f64().unwrap(), p[1].as_f64().unwrap())).collect();
    ensure(note.region.len() == want.len(), || format!("{} vertices", note.region.len()))?;
    let err = note.region.vertices().iter().zip(&want).map(|(a, b)| a.distance(*b)).fold(0.0, f64::max);
    ensure(err <= 1e-9, || format!("vertex error {err:e}"))?;
    ensure(note.rotation == 270.0, || format!("rotation {}", note.rotation))?;
    Ok(format!("vertex error {err:e}, rotation {}", note.rotation))
}

fn fold_toggle() -> Outcome {
    let g = graph_of(&["fold.json"]);
    let canvas = "urn:ex:fold:outer";
    let folded = paint(&g, canvas, &ChoiceSelection::new().with(u("urn:ex:fold:flap"), u("urn:ex:fold:folded"))).map_err(|e| e.to_string())?;
    let open = paint(&g, canvas, &ChoiceSelection::new().with(u("urn:ex:fold:flap"), u("urn:ex:fold:unfolded"))).map_err(|e| e.to_string())?;
    let on = |zone: &str| g.annotations().filter(|(_, a)| a.targets.iter().any(|t| t.resource.as_str() == zone)).count();
    let (in_unfolded, in_folded) = (on("urn:ex:fold:unfolded"), on("urn:ex:fold:folded"));
    let base = g.annotations().filter(|(_, a)| a.targets.iter().any(|t| t.resource.as_str() == canvas && a.kind != AnnotationKind::Zone)).count();
    ensure(open.paintings.len() - folded.paintings.len() == in_unfolded, || {
        format!("{} vs {} paintings for {in_unfolded} annotations", open.paintings.len(), folded.paintings.len())
    })?;
    ensure(folded.paintings.len() == base && in_folded == 0, || format!("folded state paints {}", folded.paintings.len() - base))?;
    Ok(format!("unfolded {} paintings, folded {} (flap contributes 0)", open.paintings.len(), folded.paintings.len()))
}

fn shared_constraint() -> Outcome {
    let g = graph_of(&["shared.json"]);
    let exp = expected("shared.expected.json");
    let cid = exp["constraint"].as_str().unwrap();
    let check = |g: &Graph, key: &str| -> Result<(), String> {
        let uses = expand_template(g, cid).map_err(|e| e.to_string())?;
        ensure(uses.len() == 2, || format!("{} uses", uses.len()))?;
        for use_ in uses {
            let want = rect(&nums(&exp[key]["rects"][use_.canvas.as_str()])).to_polygon();
            ensure(use_.polygon == want, || format!("{key} {}: {:?}", use_.canvas, use_.polygon))?;
        }
        Ok(())
    };
    check(&g, "before")?;
    let p = nums(&exp["after"]["percent"]);
    let mut edited = g.clone();
    edited.replace(Node::new(u(cid), NodeData::Constraint(Constraint::Box { unit: BoxUnit::Percent, x: p[0], y: p[1], w: p[2], h: p[3] })));
    check(&edited, "after")?;
    Ok("2 canvases scale proportionally before and after the edit".into())
}

fn split_sequence() -> Outcome {
    let exp = expected("quire.expected.json");
    let want: Vec<Uri> = exp["order"].as_array().unwrap().iter().map(|v| u(v.as_str().unwrap())).collect();
    let seq = exp["sequence"].as_str().unwrap();
    let ab = graph_of(&["quire/part-a.json", "quire/part-b.json"]);
    let ba = graph_of(&["quire/part-b.json", "quire/part-a.json"]);
    ensure(canvas_order(&ab, seq).map_err(|e| e.to_string())? == want, || "order differs from authored".into())?;
    ensure(serialize(&ab) == serialize(&ba), || "merge depends on file order".into())?;
    // Shuffled node order within the parts changes nothing either.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let parts: Vec<Graph> = ["quire/part-a.json", "quire/part-b.json"].iter().map(|p| graph_of(&[p])).collect();
    for _ in 0..10 {
        let mut nodes: Vec<Vec<Node>> = parts.iter().map(|g| g.nodes().cloned().collect()).collect();
        nodes.iter_mut().for_each(|n| n.shuffle(&mut rng));
        nodes.shuffle(&mut rng);
        let merged = merge(nodes.into_iter().map(|n| Graph::from_nodes(n, "shuffled").unwrap())).map_err(|e| e.to_string())?;
        ensure(canvas_order(&merged, seq).map_err(|e| e.to_string())? == want, || "shuffled merge reorders".into())?;
    }
    Ok(format!("{} canvases in authored order across permutations", want.len()))
}

fn semantic_span() -> Outcome {
    let g = graph_of(&["sentence.json"]);
    let st = semantic_statements(&g, "urn:ex:sentence:ct2");
    ensure(st.len() == 1, || format!("{} statements", st.len()))?;
    ensure(
        st[0].predicate.as_str() == "http://example.org/ns#references"
            && st[0].object == Term::Uri(u("http://example.org/ns#Carel")),
        || format!("{:?}", st[0]),
    )?;
    let full = g.foreign("urn:ex:sentence:text").and_then(|f| f.chars()).ok_or("no text")?;
    let target = g
        .annotations()
        .flat_map(|(_, a)| &a.targets)
        .find(|t| t.id.as_ref().map(Uri::as_str) == Some("urn:ex:sentence:ct2"))
        .ok_or("no ct2 segment")?;
    let span = text_segment(&g, target, full).map_err(|e| e.to_string())?;
    ensure(span == "Carel", || format!("span {span:?}"))?;
    Ok(format!("references Carel; span {span:?}"))
}

// ---------------------------------------------------------------------------
// 12. CLI and service contract.

fn cli_contract() -> Outcome {
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_sc")).args(args).output().map(|o| o.status.code()).map_err(|e| e.to_string())
    };
    let f = |rel: &str| fixture(rel).display().to_string();
    let codes = [
        run(&["validate", &f("folio.json")])?,
        run(&["validate", &f("conflict/a.json"), &f("conflict/b.json")])?,
        run(&["validate", &f("broken.json")])?,
    ];
    ensure(codes == [Some(0), Some(1), Some(2)], || format!("exit codes {codes:?}"))?;

    let api = Arc::new(Api::new(graph_of(&["letter.json"])));
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).map_err(|e| e.to_string())?;
    let addr = listener.local_addr().map_err(|e| e.to_string())?;
    rt.spawn(sharedcanvas_cli::api::serve(listener, api));
    let url = format!("http://{addr}/canvas/urn%3Aex%3Aletter%3Ap1/layout");
    let get = || -> Result<Vec<u8>, String> {
        let mut r = ureq::get(&url).call().map_err(|e| e.to_string())?;
        r.body_mut().read_to_vec().map_err(|e| e.to_string())
    };
    let first = get()?;
    for _ in 0..10 {
        ensure(get()? == first, || "layout response changed between requests".into())?;
    }
    Ok(format!("exit codes 0/1/2; 11 identical layout responses of {} bytes", first.len()))
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 12] = [
        ("round-trip of generated graphs", round_trip),
        ("rotation identity", rotation_identity),
        ("skewed-frame box recovery", skew_recovery),
        ("overlap vs Monte-Carlo oracle", overlap_oracle),
        ("letter alignment hit sets", letter_alignment),
        ("rotated margin zone", margin_rotation),
        ("fold choice toggling", fold_toggle),
        ("shared percent constraint", shared_constraint),
        ("split sequence order", split_sequence),
        ("layerless compatibility", no_layers),
        ("semantic statement and span", semantic_span),
        ("CLI and service contract", cli_contract),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
