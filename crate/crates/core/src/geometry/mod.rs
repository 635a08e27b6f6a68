//! Exact planar shapes: signed distance, nearest boundary points, inradius and
//! boundary sampling.

pub mod catalog;
mod ellipse;
mod piece;
mod point;
mod shape;

pub use piece::{Loop, Piece, Projection};
pub use point::Point;
pub use shape::{Shape, ShapeKind};

use crate::error::{Error, Result};
use serde::Serialize;

/// Nearest boundary points of an interior point.
#[derive(Debug, Clone, Serialize)]
pub struct Footpoints {
    pub points: Vec<Point>,
    /// Diameter of the point set.
    pub spread: f64,
}

/// A local minimum of the distance from a query point along the boundary.
#[derive(Debug, Clone, Copy)]
pub struct Branch {
    pub point: Point,
    pub dist: f64,
}

const ELLIPSE_SAMPLES: usize = 512;
const FOCAL_SAMPLES: usize = 8;

fn spread_of(points: &[Point]) -> f64 {
    let mut s = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            s = s.max(p.dist(*q));
        }
    }
    s
}

fn push_unique(out: &mut Vec<Branch>, b: Branch, merge: f64) {
    if !out.iter().any(|o| o.point.dist(b.point) <= merge) {
        out.push(b);
    }
}

impl Shape {
    /// Default multiplicity tolerance for footpoint queries.
    pub fn footpoint_tol(&self) -> f64 {
        1e-6 * self.diameter()
    }

    /// All local minima of `|x - q|` over boundary points `q`.
    ///
    /// A point at the center of a boundary arc sees the whole arc at equal
    /// distance; the arc is then represented by evenly spaced samples.
    pub fn branches(&self, x: Point) -> Vec<Branch> {
        let merge = 1e-10 * self.diameter();
        let mut out = Vec::new();
        if let ShapeKind::Ellipse { center, semi_a, semi_b } = *self.kind() {
            for (p, d) in ellipse::local_minima(semi_a, semi_b, x - center, ELLIPSE_SAMPLES) {
                push_unique(&mut out, Branch { point: p + center, dist: d }, merge);
            }
            return out;
        }
        for l in self.loops() {
            let n = l.len();
            for (k, piece) in l.iter().enumerate() {
                if let Some((c, r)) = piece.arc_center() {
                    if x.dist(c) <= merge {
                        for s in 0..=FOCAL_SAMPLES {
                            let p = piece.point_at(s as f64 / FOCAL_SAMPLES as f64);
                            push_unique(&mut out, Branch { point: p, dist: r }, merge);
                        }
                        continue;
                    }
                }
                let proj = piece.project(x);
                if proj.interior {
                    push_unique(&mut out, Branch { point: proj.point, dist: proj.dist }, merge);
                }
                // Joint between this piece and the next one.
                let next = &l[(k + 1) % n];
                let j = piece.end();
                let w = (j - x).normalized();
                let slack = 1e-12;
                if w.dot(next.tangent_at(0.0)) >= -slack && -w.dot(piece.tangent_at(1.0)) >= -slack {
                    push_unique(&mut out, Branch { point: j, dist: x.dist(j) }, merge);
                }
            }
        }
        out
    }

    /// Boundary points whose distance to `x` is within `tol` of the minimum.
    pub fn footpoints(&self, x: Point, tol: f64) -> Result<Footpoints> {
        let sd = self.signed_distance(x);
        if sd < -tol {
            return Err(Error::Domain(format!("({}, {}) lies outside the shape", x.x, x.y)));
        }
        let br = self.branches(x);
        let dmin = br.iter().map(|b| b.dist).fold(f64::INFINITY, f64::min);
        let points: Vec<Point> = br.iter().filter(|b| b.dist <= dmin + tol).map(|b| b.point).collect();
        let spread = spread_of(&points);
        Ok(Footpoints { points, spread })
    }

    /// Footpoint spread attained anywhere in the axis-aligned square of
    /// half-width `half` around `x`.
    ///
    /// Two distance branches are considered tied inside the square when their
    /// linearised difference changes sign there. Arc centers (focal points of
    /// the boundary) lying in the square contribute the full spread of their
    /// arc.
    pub fn cell_spread(&self, x: Point, half: f64) -> f64 {
        let br = self.branches(x);
        let dmin = br.iter().map(|b| b.dist).fold(f64::INFINITY, f64::min);
        let reach = 2.0 * std::f64::consts::SQRT_2 * half;
        let near: Vec<&Branch> = br.iter().filter(|b| b.dist <= dmin + reach).collect();
        let mut spread = 0.0f64;
        for (i, a) in near.iter().enumerate() {
            let ua = (x - a.point).normalized();
            for b in &near[i + 1..] {
                let ub = (x - b.point).normalized();
                let du = ua - ub;
                if (a.dist - b.dist).abs() <= half * (du.x.abs() + du.y.abs()) + 1e-12 {
                    spread = spread.max(a.point.dist(b.point));
                }
            }
        }
        let tol = self.footpoint_tol();
        for piece in self.loops().iter().flatten() {
            if let Some((c, _)) = piece.arc_center() {
                let inside_square = (c.x - x.x).abs() <= half * (1.0 + 1e-9)
                    && (c.y - x.y).abs() <= half * (1.0 + 1e-9);
                if inside_square && self.signed_distance(c) > 0.0 {
                    if let Ok(fp) = self.footpoints(c, tol) {
                        spread = spread.max(fp.spread);
                    }
                }
            }
        }
        spread
    }
}
