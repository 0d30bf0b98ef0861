//! Planar math in canvas space (origin top-left, y down).
//!
//! Angles are degrees clockwise as seen on screen. A polygon's vertices are
//! normalized to the same clockwise order, which corresponds to a positive
//! shoelace sum in y-down coordinates.

mod clip;
mod svg;

use serde::{Deserialize, Serialize};

pub use clip::{intersection_area, intersection_areas};
pub use svg::parse_svg_path;

use crate::finding::codes;
use crate::model::{BoxUnit, Constraint};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("unsupported path data: {0}")]
    SvgUnsupported(String),
    #[error("malformed path data: {0}")]
    SvgSyntax(String),
    #[error("polygon needs at least 3 distinct vertices and a non-zero area")]
    Degenerate,
    #[error("polygon edges cross")]
    SelfIntersecting,
    #[error("coordinate is not finite")]
    NonFinite,
    #[error("text-offset constraints have no spatial extent")]
    NotSpatial,
}

impl GeometryError {
    pub fn code(&self) -> &'static str {
        match self {
            GeometryError::SvgUnsupported(_) => codes::SVG_UNSUPPORTED,
            GeometryError::SvgSyntax(_) => codes::SVG_SYNTAX,
            GeometryError::Degenerate => codes::DEGENERATE,
            GeometryError::SelfIntersecting => codes::SELF_INTERSECTING,
            GeometryError::NonFinite => codes::NON_FINITE,
            GeometryError::NotSpatial => codes::NOT_SPATIAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Twice the signed area of triangle (a, b, c); positive when clockwise on screen.
#[inline]
pub(crate) fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Axis-aligned box. `w` and `h` are positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self, GeometryError> {
        if ![x, y, w, h].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(GeometryError::Degenerate);
        }
        Ok(Rect { x, y, w, h })
    }

    /// Top-left, top-right, bottom-right, bottom-left.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x, self.y),
            Point::new(self.x + self.w, self.y),
            Point::new(self.x + self.w, self.y + self.h),
            Point::new(self.x, self.y + self.h),
        ]
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::trusted(self.corners().to_vec())
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// A simple, implicitly closed polygon with clockwise (screen) orientation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates and normalizes: drops repeated and closing vertices, rejects
    /// degenerate or self-intersecting rings, and reverses counter-clockwise
    /// input while keeping the first vertex first.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if !vertices.iter().all(|p| p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut vs: Vec<Point> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if vs.last() != Some(&p) {
                vs.push(p);
            }
        }
        while vs.len() > 1 && vs.first() == vs.last() {
            vs.pop();
        }
        if vs.len() < 3 {
            return Err(GeometryError::Degenerate);
        }
        // All vertices (nearly) collinear: no interior at all.
        let scale = bounds_of(&vs).map_or(0.0, |b| b.w.max(b.h));
        let o = vs[0];
        let spread: f64 = vs.windows(2).map(|w| cross(o, w[0], w[1]).abs()).sum();
        if spread <= 1e-12 * scale * scale {
            return Err(GeometryError::Degenerate);
        }
        if !is_simple(&vs) {
            return Err(GeometryError::SelfIntersecting);
        }
        let signed = signed_area(&vs);
        if signed.abs() <= 1e-12 * scale * scale {
            return Err(GeometryError::Degenerate);
        }
        if signed < 0.0 {
            vs[1..].reverse();
        }
        Ok(Polygon { vertices: vs })
    }

    /// For vertex lists already known to be simple and clockwise, such as
    /// rotated or translated copies of a valid polygon.
    pub(crate) fn trusted(vertices: Vec<Point>) -> Self {
        debug_assert!(vertices.len() >= 3);
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Applies a map that preserves simplicity and orientation (rotation,
    /// translation, positive scaling).
    pub fn map_rigid(&self, f: impl Fn(Point) -> Point) -> Polygon {
        Polygon::trusted(self.vertices.iter().map(|p| f(*p)).collect())
    }

    pub fn bounds(&self) -> Rect {
        bounds_of(&self.vertices).expect("polygon has vertices")
    }

    pub fn area(&self) -> f64 {
        polygon_area(self)
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            cross(
                self.vertices[i],
                self.vertices[(i + 1) % n],
                self.vertices[(i + 2) % n],
            ) >= 0.0
        })
    }

    /// Whether every vertex lies inside `[0, w] x [0, h]` (with 1e-9 slack).
    pub fn within(&self, w: f64, h: f64) -> bool {
        const EPS: f64 = 1e-9;
        self.vertices
            .iter()
            .all(|p| p.x >= -EPS && p.y >= -EPS && p.x <= w + EPS && p.y <= h + EPS)
    }

    /// `M x y L x y ... Z` with shortest round-trip number formatting.
    pub fn to_svg_path(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.vertices.iter().enumerate() {
            out.push_str(if i == 0 { "M " } else { " L " });
            out.push_str(&format!("{} {}", p.x, p.y));
        }
        out.push_str(" Z");
        out
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let vs = Vec::<Point>::deserialize(d)?;
        Polygon::new(vs).map_err(serde::de::Error::custom)
    }
}

fn signed_area(vs: &[Point]) -> f64 {
    // Relative to the first vertex to keep products small.
    let o = vs[0];
    let mut sum = 0.0;
    for i in 1..vs.len() - 1 {
        sum += cross(o, vs[i], vs[i + 1]);
    }
    sum / 2.0
}

fn bounds_of(vs: &[Point]) -> Option<Rect> {
    let first = vs.first()?;
    let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.x, first.y);
    for p in vs {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    Some(Rect {
        x: x0,
        y: y0,
        w: x1 - x0,
        h: y1 - y0,
    })
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_touch(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn is_simple(vs: &[Point]) -> bool {
    let n = vs.len();
    for i in 0..n {
        let (a, b) = (vs[i], vs[(i + 1) % n]);
        // Adjacent edge folding back onto this one.
        let c = vs[(i + 2) % n];
        if cross(a, b, c) == 0.0 && (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y) < 0.0 {
            return false;
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_touch(a, b, vs[j], vs[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Absolute shoelace area.
pub fn polygon_area(p: &Polygon) -> f64 {
    signed_area(&p.vertices).abs()
}

/// Exact sine and cosine at quarter turns, so 90-degree rotations are exact.
pub(crate) fn sin_cos_degrees(angle: f64) -> (f64, f64) {
    let mut r = angle.rem_euclid(360.0);
    if r >= 360.0 {
        r -= 360.0;
    }
    match r {
        0.0 => (0.0, 1.0),
        90.0 => (1.0, 0.0),
        180.0 => (0.0, -1.0),
        270.0 => (-1.0, 0.0),
        r => r.to_radians().sin_cos(),
    }
}

/// Clockwise rotation by `angle` degrees about `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub angle: f64,
    pub origin: Point,
}

impl Transform {
    pub fn rotation(angle: f64, origin: Point) -> Self {
        Transform { angle, origin }
    }

    pub fn inverse(&self) -> Transform {
        Transform {
            angle: -self.angle,
            origin: self.origin,
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let (sin, cos) = sin_cos_degrees(self.angle);
        let dx = p.x - self.origin.x;
        let dy = p.y - self.origin.y;
        Point::new(
            self.origin.x + dx * cos - dy * sin,
            self.origin.y + dx * sin + dy * cos,
        )
    }
}

pub fn apply_transform(t: &Transform, p: Point) -> Point {
    t.apply(p)
}

/// Maps a box authored in the frame produced by `t` back to canvas space.
/// Vertices are the box's top-left, top-right, bottom-right, bottom-left
/// corners, each sent through the inverse rotation.
pub fn inverse_map_box(b: &Rect, t: &Transform) -> Polygon {
    let inv = t.inverse();
    Polygon::trusted(b.corners().iter().map(|p| inv.apply(*p)).collect())
}

/// A spatial constraint placed against a target of the given size.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRegion {
    pub polygon: Polygon,
    /// Some vertex falls outside the target; reported as a warning.
    pub out_of_bounds: bool,
}

pub fn resolve_constraint(c: &Constraint, target_w: f64, target_h: f64) -> Result<ResolvedRegion, GeometryError> {
    let polygon = match c {
        Constraint::Box {
            unit: BoxUnit::Pixel,
            x,
            y,
            w,
            h,
        } => Rect::new(*x, *y, *w, *h)?.to_polygon(),
        Constraint::Box {
            unit: BoxUnit::Percent,
            x,
            y,
            w,
            h,
        } => Rect::new(
            x * target_w / 100.0,
            y * target_h / 100.0,
            w * target_w / 100.0,
            h * target_h / 100.0,
        )?
        .to_polygon(),
        Constraint::SvgPath { path } => parse_svg_path(path)?,
        Constraint::TextOffset { .. } => return Err(GeometryError::NotSpatial),
    };
    let out_of_bounds = !polygon.within(target_w, target_h);
    Ok(ResolvedRegion { polygon, out_of_bounds })
}

/// Serde adapter writing a polygon as `[[x, y], ...]`, integral values
/// without a fractional part.
pub mod vertex_arrays {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::{Point, Polygon};

    struct Real(f64);

    impl Serialize for Real {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            crate::model::ser_real(&self.0, s)
        }
    }

    pub fn serialize<S: Serializer>(p: &Polygon, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(p.len()))?;
        for v in p.vertices() {
            seq.serialize_element(&[Real(v.x), Real(v.y)])?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Polygon, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Polygon::new(raw.into_iter().map(|[x, y]| Point::new(x, y)).collect()).map_err(serde::de::Error::custom)
    }
}
