//! The flattened per-canvas layout handed to scripts and the viewer.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize, Serializer};
use sharedcanvas::resolver::{paint, ChoiceSelection, ChoiceState, PaintedAnnotation, ResolveError};
use sharedcanvas::{Finding, Graph, Uri};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerInfo {
    pub id: Uri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlattenedLayout {
    pub canvas: Uri,
    #[serde(serialize_with = "real")]
    pub width: f64,
    #[serde(serialize_with = "real")]
    pub height: f64,
    /// In zOrder.
    pub paintings: Vec<PaintedAnnotation>,
    /// Layers of the paintings above, by id.
    pub layers: Vec<LayerInfo>,
    pub choices: Vec<ChoiceState>,
}

/// Integral values print without a fraction, matching the SCX writer.
fn real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

impl FlattenedLayout {
    /// Paints `canvas` under `selection`. Findings raised while painting are
    /// returned alongside rather than embedded in the layout.
    pub fn build(graph: &Graph, canvas: &str, selection: &ChoiceSelection) -> Result<(Self, Vec<Finding>), ResolveError> {
        let out = paint(graph, canvas, selection)?;
        let used: BTreeSet<&Uri> = out.paintings.iter().filter_map(|p| p.layer.as_ref()).collect();
        let layers = used
            .into_iter()
            .map(|id| LayerInfo {
                id: id.clone(),
                label: graph.layer(id.as_str()).and_then(|l| l.label.clone()),
            })
            .collect();
        let layout = FlattenedLayout {
            canvas: out.canvas,
            width: out.width,
            height: out.height,
            paintings: out.paintings,
            layers,
            choices: out.choices,
        };
        Ok((layout, out.findings))
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("layout is always serializable");
        out.push(b'\n');
        out
    }

    pub fn from_json(bytes: &[u8]) -> serde_json::Result<Self> {
        serde_json::from_slice(bytes)
    }

    /// One `<g>` per painting: the region outline, plus the text for text bodies
    /// drawn at the region's first corner in the painting's rotation.
    pub fn to_svg(&self) -> String {
        let (w, h) = (num(self.width), num(self.height));
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-canvas="{}">"#,
            escape(self.canvas.as_str())
        );
        let _ = writeln!(s, r##"  <rect x="0" y="0" width="{w}" height="{h}" fill="none" stroke="#888"/>"##);
        for p in &self.paintings {
            let _ = write!(
                s,
                r#"  <g data-annotation="{}" data-z="{}""#,
                escape(p.annotation.as_str()),
                p.z_order
            );
            if let Some(layer) = &p.layer {
                let _ = write!(s, r#" data-layer="{}""#, escape(layer.as_str()));
            }
            let _ = writeln!(s, r#" data-rotation="{}">"#, num(p.rotation));
            let points: Vec<String> = p
                .region
                .vertices()
                .iter()
                .map(|v| format!("{},{}", num(v.x), num(v.y)))
                .collect();
            let stroke = if p.text.is_some() { "#c33" } else { "#36c" };
            let _ = writeln!(
                s,
                r#"    <polygon points="{}" fill="none" stroke="{stroke}"/>"#,
                points.join(" ")
            );
            if let (Some(text), Some(anchor)) = (&p.text, p.region.vertices().first()) {
                let (x, y) = (num(anchor.x), num(anchor.y));
                let _ = writeln!(
                    s,
                    r#"    <text x="{x}" y="{y}" dy="1em" transform="rotate({} {x} {y})">{}</text>"#,
                    num(p.rotation),
                    escape(text)
                );
            }
            s.push_str("  </g>\n");
        }
        s.push_str("</svg>\n");
        s
    }
}

fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}
