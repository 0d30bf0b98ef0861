//! Intersection areas of simple polygons.
//!
//! When either polygon is convex the other is clipped against it directly
//! (Sutherland-Hodgman). Otherwise one polygon is ear-clipped into triangles
//! and the other is clipped against each; the triangles have disjoint
//! interiors, so the pieces sum to the overlap.

use super::{cross, Point, Polygon, Rect};
use crate::exec::Execution;

/// Clips `subject` to the half-plane left of the directed edge `a -> b`
/// (inside of a clockwise-on-screen polygon).
fn clip_half_plane(subject: &[Point], a: Point, b: Point) -> Vec<Point> {
    let n = subject.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let s = subject[i];
        let e = subject[(i + 1) % n];
        let ds = cross(a, b, s);
        let de = cross(a, b, e);
        let s_in = ds >= 0.0;
        let e_in = de >= 0.0;
        if s_in && e_in {
            out.push(e);
        } else if s_in != e_in {
            let t = ds / (ds - de);
            let mut p = Point::new(s.x + (e.x - s.x) * t, s.y + (e.y - s.y) * t);
            // Axis-aligned clip edges pin one coordinate exactly.
            if a.y == b.y {
                p.y = a.y;
            }
            if a.x == b.x {
                p.x = a.x;
            }
            out.push(p);
            if e_in {
                out.push(e);
            }
        }
    }
    out
}

fn ring_area(vs: &[Point]) -> f64 {
    if vs.len() < 3 {
        return 0.0;
    }
    let o = vs[0];
    let mut sum = 0.0;
    for i in 1..vs.len() - 1 {
        sum += cross(o, vs[i], vs[i + 1]);
    }
    (sum / 2.0).max(0.0)
}

/// Overlap of a clockwise simple ring with a clockwise convex ring.
fn convex_overlap(subject: &[Point], clip: &[Point]) -> f64 {
    let mut out = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if out.len() < 3 {
            return 0.0;
        }
        out = clip_half_plane(&out, clip[i], clip[(i + 1) % m]);
    }
    ring_area(&out)
}

/// Ear clipping of a clockwise simple ring. Collinear vertices are dropped
/// without emitting a triangle.
fn triangulate(vs: &[Point]) -> Vec<[Point; 3]> {
    let mut idx: Vec<usize> = (0..vs.len()).collect();
    let mut tris = Vec::with_capacity(vs.len().saturating_sub(2));
    let mut guard = 0;
    while idx.len() > 3 && guard < vs.len() * vs.len() {
        guard += 1;
        let n = idx.len();
        let mut clipped = false;
        for i in 0..n {
            let (ip, ic, inx) = (idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]);
            let (a, b, c) = (vs[ip], vs[ic], vs[inx]);
            let turn = cross(a, b, c);
            if turn == 0.0 {
                idx.remove(i);
                clipped = true;
                break;
            }
            if turn < 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&k| {
                if k == ip || k == ic || k == inx {
                    return false;
                }
                let p = vs[k];
                cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
            });
            if !blocked {
                tris.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            // Only reachable through rounding on nearly-degenerate input.
            break;
        }
    }
    if idx.len() == 3 {
        let t = [vs[idx[0]], vs[idx[1]], vs[idx[2]]];
        if cross(t[0], t[1], t[2]) > 0.0 {
            tris.push(t);
        }
    }
    tris
}

fn boxes_overlap(a: &Rect, b: &Rect) -> bool {
    a.x <= b.x + b.w && b.x <= a.x + a.w && a.y <= b.y + b.h && b.y <= a.y + a.h
}

fn tri_bounds(t: &[Point; 3]) -> Rect {
    let x0 = t[0].x.min(t[1].x).min(t[2].x);
    let y0 = t[0].y.min(t[1].y).min(t[2].y);
    let x1 = t[0].x.max(t[1].x).max(t[2].x);
    let y1 = t[0].y.max(t[1].y).max(t[2].y);
    Rect {
        x: x0,
        y: y0,
        w: x1 - x0,
        h: y1 - y0,
    }
}

fn ordered_first(a: &Polygon, b: &Polygon) -> bool {
    let key = |p: &Polygon| {
        p.vertices()
            .iter()
            .flat_map(|v| [v.x, v.y])
            .collect::<Vec<f64>>()
    };
    let (ka, kb) = (key(a), key(b));
    for (x, y) in ka.iter().zip(&kb) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o.is_lt(),
        }
    }
    ka.len() <= kb.len()
}

/// Area of `a ∩ b`. Symmetric, and never larger than either area.
pub fn intersection_area(a: &Polygon, b: &Polygon) -> f64 {
    // Fixed operand order keeps the result bit-for-bit symmetric.
    if !ordered_first(a, b) {
        return intersection_area(b, a);
    }
    if !boxes_overlap(&a.bounds(), &b.bounds()) {
        return 0.0;
    }
    // Clipping any simple subject against a convex polygon yields the right
    // area (bridging edges of a concave result enclose nothing), so only a
    // pair of non-convex polygons needs a decomposition.
    let raw = match (a.is_convex(), b.is_convex()) {
        (_, true) => convex_overlap(a.vertices(), b.vertices()),
        (true, false) => convex_overlap(b.vertices(), a.vertices()),
        (false, false) => {
            let a_bounds = a.bounds();
            triangulate(b.vertices())
                .iter()
                .filter(|t| boxes_overlap(&tri_bounds(t), &a_bounds))
                .map(|t| convex_overlap(a.vertices(), t))
                .sum()
        }
    };
    raw.min(a.area()).min(b.area())
}

/// Overlap of one query region with many polygons, in input order.
pub fn intersection_areas(exec: Execution, query: &Polygon, polygons: &[Polygon]) -> Vec<f64> {
    exec.map(polygons, |p| intersection_area(query, p))
}
