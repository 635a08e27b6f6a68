use super::ellipse;
use super::piece::{loop_length, Loop, Piece};
use super::Point;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// The catalog of planar domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShapeKind {
    Disk { center: Point, radius: f64 },
    Annulus { center: Point, r1: f64, r2: f64 },
    /// Axis-aligned, `semi_a` along x.
    Ellipse { center: Point, semi_a: f64, semi_b: f64 },
    Rectangle { corner: Point, width: f64, height: f64 },
    /// Convex hull of two disks of radius `b` centered at `p1`, `p2`.
    Stadium { p1: Point, p2: Point, b: f64 },
    /// Union of `[x, x+width] x [y, y+thick_y]` and `[x, x+thick_x] x [y, y+height]`.
    #[serde(rename = "lshape")]
    LShape { corner: Point, width: f64, height: f64, thick_x: f64, thick_y: f64 },
    /// Points within `b` of a smoothed polyline.
    Tube { polyline: Vec<Point>, b: f64 },
}

/// A validated shape with its boundary loops precomputed.
#[derive(Debug, Clone)]
pub struct Shape {
    kind: ShapeKind,
    loops: Vec<Loop>,
    spine: Vec<Piece>,
    corners: Vec<Point>,
    max_curvature: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite_point(name: &str, p: Point) -> Result<()> {
    if p.x.is_finite() && p.y.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be finite")))
    }
}

fn polygon(points: &[Point]) -> Loop {
    (0..points.len())
        .map(|k| Piece::Segment { a: points[k], b: points[(k + 1) % points.len()] })
        .collect()
}

/// Replace every interior polyline vertex by a circular fillet whose tangent
/// length is half the shorter adjacent edge. Returns the smooth spine and its
/// largest curvature.
fn smooth_polyline(pts: &[Point]) -> Result<(Vec<Piece>, f64)> {
    if pts.len() < 2 {
        return Err(Error::Parameter("tube polyline needs at least two points".into()));
    }
    for (k, p) in pts.iter().enumerate() {
        finite_point(&format!("polyline[{k}]"), *p)?;
    }
    let lens: Vec<f64> = pts.windows(2).map(|w| w[0].dist(w[1])).collect();
    if lens.iter().any(|&l| l <= 0.0) {
        return Err(Error::Parameter("tube polyline has a zero-length edge".into()));
    }
    let mut spine = Vec::new();
    let mut cursor = pts[0];
    let mut kmax = 0.0f64;
    for i in 1..pts.len() - 1 {
        let t1 = (pts[i] - pts[i - 1]).normalized();
        let t2 = (pts[i + 1] - pts[i]).normalized();
        let turn = t1.cross(t2).atan2(t1.dot(t2));
        if turn.abs() < 1e-12 {
            continue;
        }
        if turn.abs() >= PI - 1e-9 {
            return Err(Error::Parameter("tube polyline folds back on itself".into()));
        }
        let tangent_len = 0.5 * lens[i - 1].min(lens[i]);
        let radius = tangent_len / (0.5 * turn.abs()).tan();
        kmax = kmax.max(1.0 / radius);
        let a = pts[i] - t1 * tangent_len;
        let normal = if turn > 0.0 { t1.perp() } else { -t1.perp() };
        let center = a + normal * radius;
        if cursor.dist(a) > 1e-14 {
            spine.push(Piece::Segment { a: cursor, b: a });
        }
        spine.push(Piece::Arc { center, radius, start: (a - center).angle(), sweep: turn });
        cursor = pts[i] + t2 * tangent_len;
    }
    let last = *pts.last().unwrap();
    if cursor.dist(last) > 1e-14 {
        spine.push(Piece::Segment { a: cursor, b: last });
    }
    Ok((spine, kmax))
}

/// Counter-clockwise boundary of the `b`-neighbourhood of a smooth open spine.
fn tube_loop(spine: &[Piece], b: f64) -> Loop {
    let first = spine.first().unwrap();
    let last = spine.last().unwrap();
    let mut l: Loop = spine.iter().map(|p| p.offset_right(b)).collect();
    let te = last.tangent_at(1.0);
    let cap_end = (-te.perp()).angle();
    l.push(Piece::Arc { center: last.end(), radius: b, start: cap_end, sweep: PI });
    l.extend(spine.iter().rev().map(|p| p.reversed().offset_right(b)));
    let ts = first.tangent_at(0.0);
    l.push(Piece::Arc { center: first.start(), radius: b, start: ts.perp().angle(), sweep: PI });
    l
}

fn find_corners(loops: &[Loop]) -> Vec<Point> {
    let mut out = Vec::new();
    for l in loops {
        for k in 0..l.len() {
            let prev = &l[k];
            let next = &l[(k + 1) % l.len()];
            if prev.tangent_at(1.0).dot(next.tangent_at(0.0)) < 1.0 - 1e-9 {
                out.push(next.start());
            }
        }
    }
    out
}

impl Shape {
    pub fn new(kind: ShapeKind) -> Result<Shape> {
        let mut spine = Vec::new();
        let mut max_curvature = 0.0;
        let loops: Vec<Loop> = match &kind {
            ShapeKind::Disk { center, radius } => {
                finite_point("center", *center)?;
                positive("radius", *radius)?;
                vec![vec![Piece::Arc { center: *center, radius: *radius, start: 0.0, sweep: TAU }]]
            }
            ShapeKind::Annulus { center, r1, r2 } => {
                finite_point("center", *center)?;
                positive("r1", *r1)?;
                positive("r2", *r2)?;
                if r1 >= r2 {
                    return Err(Error::Parameter(format!("annulus needs r1 < r2, got {r1} >= {r2}")));
                }
                vec![
                    vec![Piece::Arc { center: *center, radius: *r2, start: 0.0, sweep: TAU }],
                    vec![Piece::Arc { center: *center, radius: *r1, start: 0.0, sweep: -TAU }],
                ]
            }
            ShapeKind::Ellipse { center, semi_a, semi_b } => {
                finite_point("center", *center)?;
                positive("semi_a", *semi_a)?;
                positive("semi_b", *semi_b)?;
                if semi_a < semi_b {
                    return Err(Error::Parameter("ellipse needs semi_a >= semi_b".into()));
                }
                Vec::new()
            }
            ShapeKind::Rectangle { corner, width, height } => {
                finite_point("corner", *corner)?;
                positive("width", *width)?;
                positive("height", *height)?;
                let c = *corner;
                vec![polygon(&[
                    c,
                    c + Point::new(*width, 0.0),
                    c + Point::new(*width, *height),
                    c + Point::new(0.0, *height),
                ])]
            }
            ShapeKind::Stadium { p1, p2, b } => {
                finite_point("p1", *p1)?;
                finite_point("p2", *p2)?;
                positive("b", *b)?;
                if p1.dist(*p2) <= 0.0 {
                    return Err(Error::Parameter("stadium needs distinct centers".into()));
                }
                spine = vec![Piece::Segment { a: *p1, b: *p2 }];
                vec![tube_loop(&spine, *b)]
            }
            ShapeKind::LShape { corner, width, height, thick_x, thick_y } => {
                finite_point("corner", *corner)?;
                for (n, v) in [("width", width), ("height", height), ("thick_x", thick_x), ("thick_y", thick_y)] {
                    positive(n, *v)?;
                }
                if thick_x + thick_y > *width || thick_x + thick_y > *height {
                    return Err(Error::Parameter(
                        "lshape arms must satisfy thick_x + thick_y <= min(width, height)".into(),
                    ));
                }
                let c = *corner;
                vec![polygon(&[
                    c,
                    c + Point::new(*width, 0.0),
                    c + Point::new(*width, *thick_y),
                    c + Point::new(*thick_x, *thick_y),
                    c + Point::new(*thick_x, *height),
                    c + Point::new(0.0, *height),
                ])]
            }
            ShapeKind::Tube { polyline, b } => {
                positive("b", *b)?;
                let (s, k) = smooth_polyline(polyline)?;
                if *b * k >= 1.0 {
                    return Err(Error::Parameter(format!(
                        "tube radius {b} must be below 1/K = {}",
                        1.0 / k
                    )));
                }
                spine = s;
                max_curvature = k;
                vec![tube_loop(&spine, *b)]
            }
        };
        let corners = find_corners(&loops);
        Ok(Shape { kind, loops, spine, corners, max_curvature })
    }

    pub fn kind(&self) -> &ShapeKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ShapeKind::Disk { .. } => "disk",
            ShapeKind::Annulus { .. } => "annulus",
            ShapeKind::Ellipse { .. } => "ellipse",
            ShapeKind::Rectangle { .. } => "rectangle",
            ShapeKind::Stadium { .. } => "stadium",
            ShapeKind::LShape { .. } => "lshape",
            ShapeKind::Tube { .. } => "tube",
        }
    }

    /// Boundary loops with the domain on the left; empty for the ellipse.
    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    /// Non-smooth boundary points.
    pub fn corners(&self) -> &[Point] {
        &self.corners
    }

    /// Segments across which the distance function is `C¹` but not `C²`,
    /// apart from the ridge: inward normal rays from boundary joints where
    /// the curvature or the tangent jumps, up to where they stop being
    /// distance-minimizing.
    pub fn seams(&self) -> Vec<(Point, Point)> {
        let tol = 1e-9 * self.diameter();
        let mut out = Vec::new();
        for lp in &self.loops {
            for (k, next) in lp.iter().enumerate() {
                let prev = &lp[(k + lp.len() - 1) % lp.len()];
                let q = next.start();
                let (t_in, t_out) = (prev.tangent_at(1.0), next.tangent_at(0.0));
                let smooth = t_in.dist(t_out) < 1e-9 && (prev.curvature() - next.curvature()).abs() < 1e-12;
                if smooth {
                    continue;
                }
                for n in [t_in.perp(), t_out.perp()] {
                    let minimizing = |t: f64| self.signed_distance(q + n * t) >= t - tol;
                    let (mut lo, mut hi) = (0.0, self.diameter());
                    if !minimizing(tol.max(1e-12) * 10.0) {
                        continue;
                    }
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        if minimizing(mid) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    if lo > tol && !out.iter().any(|&(a, b): &(Point, Point)| a.dist(q) < tol && b.dist(q + n * lo) < tol) {
                        out.push((q, q + n * lo));
                    }
                }
            }
        }
        out
    }

    /// Largest curvature of the smoothed tube spine (zero for other shapes).
    pub fn max_curvature(&self) -> f64 {
        self.max_curvature
    }

    fn spine_distance(&self, x: Point) -> f64 {
        self.spine.iter().map(|p| p.distance(x)).fold(f64::INFINITY, f64::min)
    }

    fn loops_distance(&self, x: Point) -> f64 {
        self.loops
            .iter()
            .flatten()
            .map(|p| p.distance(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Signed distance to the boundary: positive inside.
    pub fn signed_distance(&self, x: Point) -> f64 {
        match self.kind {
            ShapeKind::Disk { center, radius } => radius - x.dist(center),
            ShapeKind::Annulus { center, r1, r2 } => {
                let r = x.dist(center);
                (r - r1).min(r2 - r)
            }
            ShapeKind::Ellipse { center, semi_a, semi_b } => {
                ellipse::signed_distance(semi_a, semi_b, x - center)
            }
            ShapeKind::Rectangle { corner, width, height } => {
                let dx = (corner.x - x.x).max(x.x - corner.x - width);
                let dy = (corner.y - x.y).max(x.y - corner.y - height);
                if dx < 0.0 && dy < 0.0 {
                    -dx.max(dy)
                } else {
                    -Point::new(dx.max(0.0), dy.max(0.0)).norm()
                }
            }
            ShapeKind::Stadium { b, .. } | ShapeKind::Tube { b, .. } => b - self.spine_distance(x),
            ShapeKind::LShape { corner, width, height, thick_x, thick_y } => {
                let r = x - corner;
                let in_a = r.x > 0.0 && r.x < width && r.y > 0.0 && r.y < thick_y;
                let in_b = r.x > 0.0 && r.x < thick_x && r.y > 0.0 && r.y < height;
                let d = self.loops_distance(x);
                if in_a || in_b || (r.x > 0.0 && r.x < thick_x && r.y > 0.0 && r.y < thick_y) {
                    d
                } else {
                    -d
                }
            }
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        self.signed_distance(x) > 0.0
    }

    /// Radius of the largest inscribed disk.
    pub fn inradius(&self) -> f64 {
        match self.kind {
            ShapeKind::Disk { radius, .. } => radius,
            ShapeKind::Annulus { r1, r2, .. } => 0.5 * (r2 - r1),
            ShapeKind::Ellipse { semi_b, .. } => semi_b,
            ShapeKind::Rectangle { width, height, .. } => 0.5 * width.min(height),
            ShapeKind::Stadium { b, .. } | ShapeKind::Tube { b, .. } => b,
            ShapeKind::LShape { thick_x, thick_y, .. } => {
                // Disk tangent to both outer walls and through the reentrant
                // corner, if its center stays in the corner square; otherwise
                // the thicker arm wins.
                let s = thick_x + thick_y - (2.0 * thick_x * thick_y).sqrt();
                if s <= thick_x.min(thick_y) {
                    s
                } else {
                    0.5 * thick_x.max(thick_y)
                }
            }
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Point, Point) {
        match &self.kind {
            ShapeKind::Disk { center, radius } => {
                (*center - Point::new(*radius, *radius), *center + Point::new(*radius, *radius))
            }
            ShapeKind::Annulus { center, r2, .. } => {
                (*center - Point::new(*r2, *r2), *center + Point::new(*r2, *r2))
            }
            ShapeKind::Ellipse { center, semi_a, semi_b } => {
                (*center - Point::new(*semi_a, *semi_b), *center + Point::new(*semi_a, *semi_b))
            }
            ShapeKind::Rectangle { corner, width, height } => {
                (*corner, *corner + Point::new(*width, *height))
            }
            ShapeKind::LShape { corner, width, height, .. } => {
                (*corner, *corner + Point::new(*width, *height))
            }
            ShapeKind::Stadium { b, .. } | ShapeKind::Tube { b, .. } => {
                let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for p in &self.spine {
                    let n = 64;
                    for k in 0..=n {
                        let q = p.point_at(k as f64 / n as f64);
                        lo = Point::new(lo.x.min(q.x), lo.y.min(q.y));
                        hi = Point::new(hi.x.max(q.x), hi.y.max(q.y));
                    }
                }
                (lo - Point::new(*b, *b), hi + Point::new(*b, *b))
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bbox();
        lo.dist(hi)
    }

    pub fn perimeter(&self) -> f64 {
        match self.kind {
            ShapeKind::Ellipse { semi_a, semi_b, .. } => ellipse::arclength_table(semi_a, semi_b, 8192).1,
            _ => self.loops.iter().map(|l| loop_length(l)).sum(),
        }
    }

    /// Boundary point and outward unit normal at arclength fraction `frac`.
    pub fn boundary_point(&self, frac: f64) -> (Point, Point) {
        if let ShapeKind::Ellipse { center, semi_a, semi_b } = self.kind {
            let (table, total) = ellipse::arclength_table(semi_a, semi_b, 8192);
            let t = ellipse::parameter_at(&table, total, frac);
            return (center + ellipse::point_at(semi_a, semi_b, t), ellipse::normal_at(semi_a, semi_b, t));
        }
        let total = self.perimeter();
        let mut target = frac.rem_euclid(1.0) * total;
        let pieces: Vec<&Piece> = self.loops.iter().flatten().collect();
        for (k, p) in pieces.iter().enumerate() {
            let len = p.length();
            if target <= len || k + 1 == pieces.len() {
                let s = (target / len).clamp(0.0, 1.0);
                let t = p.tangent_at(s);
                return (p.point_at(s), Point::new(t.y, -t.x));
            }
            target -= len;
        }
        unreachable!("shape has no boundary pieces")
    }

    /// `n` boundary points spaced uniformly in arclength, with outward normals.
    pub fn boundary_sample(&self, n: usize) -> Result<Vec<(Point, Point)>> {
        if n < 8 {
            return Err(Error::Argument(format!("boundary_sample needs n >= 8, got {n}")));
        }
        if let ShapeKind::Ellipse { center, semi_a, semi_b } = self.kind {
            let (table, total) = ellipse::arclength_table(semi_a, semi_b, 8192.max(4 * n));
            return Ok((0..n)
                .map(|k| {
                    let t = ellipse::parameter_at(&table, total, (k as f64 + 0.5) / n as f64);
                    (center + ellipse::point_at(semi_a, semi_b, t), ellipse::normal_at(semi_a, semi_b, t))
                })
                .collect());
        }
        let total = self.perimeter();
        let pieces: Vec<&Piece> = self.loops.iter().flatten().collect();
        let mut out = Vec::with_capacity(n);
        let mut k = 0;
        let mut start = 0.0;
        for (idx, p) in pieces.iter().enumerate() {
            let len = p.length();
            while k < n {
                let target = (k as f64 + 0.5) / n as f64 * total;
                if target > start + len && idx + 1 < pieces.len() {
                    break;
                }
                let s = ((target - start) / len).clamp(0.0, 1.0);
                let t = p.tangent_at(s);
                out.push((p.point_at(s), Point::new(t.y, -t.x)));
                k += 1;
            }
            start += len;
        }
        Ok(out)
    }
}
