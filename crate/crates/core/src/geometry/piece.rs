use super::Point;
use std::f64::consts::TAU;

/// A smooth piece of a boundary loop or of a tube spine.
///
/// Arcs are parametrised by a start angle and a signed sweep; a positive
/// sweep runs counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Segment { a: Point, b: Point },
    Arc { center: Point, radius: f64, start: f64, sweep: f64 },
}

/// Nearest point of a piece to a query point.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub point: Point,
    pub dist: f64,
    /// Curve parameter in `[0, 1]`.
    pub s: f64,
    /// The projection hit the relative interior (a genuine perpendicular foot).
    pub interior: bool,
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { a, b } => a.dist(b),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn point_at(&self, s: f64) -> Point {
        match *self {
            Piece::Segment { a, b } => a.lerp(b, s),
            Piece::Arc { center, radius, start, sweep } => {
                center + Point::from_angle(start + s * sweep) * radius
            }
        }
    }

    /// Unit tangent in traversal direction.
    pub fn tangent_at(&self, s: f64) -> Point {
        match *self {
            Piece::Segment { a, b } => (b - a).normalized(),
            Piece::Arc { start, sweep, .. } => {
                Point::from_angle(start + s * sweep).perp() * sweep.signum()
            }
        }
    }

    /// Signed curvature, positive when turning left.
    pub fn curvature(&self) -> f64 {
        match *self {
            Piece::Segment { .. } => 0.0,
            Piece::Arc { radius, sweep, .. } => sweep.signum() / radius,
        }
    }

    pub fn start(&self) -> Point {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Point {
        self.point_at(1.0)
    }

    pub fn reversed(&self) -> Piece {
        match *self {
            Piece::Segment { a, b } => Piece::Segment { a: b, b: a },
            Piece::Arc { center, radius, start, sweep } => Piece::Arc {
                center,
                radius,
                start: start + sweep,
                sweep: -sweep,
            },
        }
    }

    /// Parallel curve at signed offset `off` to the right of the traversal
    /// direction.
    pub fn offset_right(&self, off: f64) -> Piece {
        match *self {
            Piece::Segment { a, b } => {
                let n = -(b - a).normalized().perp();
                Piece::Segment { a: a + n * off, b: b + n * off }
            }
            Piece::Arc { center, radius, start, sweep } => Piece::Arc {
                center,
                radius: radius + off * sweep.signum(),
                start,
                sweep,
            },
        }
    }

    /// Angular position of `x` along an arc, as a fraction of the sweep, if it
    /// falls inside the swept range.
    fn arc_fraction(start: f64, sweep: f64, x_angle: f64) -> Option<f64> {
        let delta = if sweep >= 0.0 {
            (x_angle - start).rem_euclid(TAU)
        } else {
            (start - x_angle).rem_euclid(TAU)
        };
        let span = sweep.abs();
        if span >= TAU - 1e-12 {
            return Some(delta / TAU);
        }
        if delta <= span {
            Some(delta / span)
        } else {
            None
        }
    }

    pub fn project(&self, x: Point) -> Projection {
        match *self {
            Piece::Segment { a, b } => {
                let d = b - a;
                let len2 = d.norm_sq();
                let t = if len2 > 0.0 { (x - a).dot(d) / len2 } else { 0.0 };
                let s = t.clamp(0.0, 1.0);
                let point = a.lerp(b, s);
                Projection { point, dist: x.dist(point), s, interior: t > 0.0 && t < 1.0 }
            }
            Piece::Arc { center, radius, start, sweep } => {
                let r = x - center;
                if r.norm() == 0.0 {
                    let point = self.point_at(0.0);
                    return Projection { point, dist: radius, s: 0.0, interior: true };
                }
                if let Some(s) = Self::arc_fraction(start, sweep, r.angle()) {
                    let point = center + r.normalized() * radius;
                    return Projection {
                        point,
                        dist: x.dist(point),
                        s,
                        interior: s > 0.0 && s < 1.0 || sweep.abs() >= TAU - 1e-12,
                    };
                }
                let (p0, p1) = (self.start(), self.end());
                if x.dist(p0) <= x.dist(p1) {
                    Projection { point: p0, dist: x.dist(p0), s: 0.0, interior: false }
                } else {
                    Projection { point: p1, dist: x.dist(p1), s: 1.0, interior: false }
                }
            }
        }
    }

    pub fn distance(&self, x: Point) -> f64 {
        self.project(x).dist
    }

    /// Center of an arc piece.
    pub fn arc_center(&self) -> Option<(Point, f64)> {
        match *self {
            Piece::Arc { center, radius, .. } => Some((center, radius)),
            Piece::Segment { .. } => None,
        }
    }
}

/// Closed chain of pieces; the domain lies to the left of the traversal.
pub type Loop = Vec<Piece>;

pub fn loop_length(l: &[Piece]) -> f64 {
    l.iter().map(Piece::length).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn segment_projection_clamps() {
        let s = Piece::Segment { a: Point::new(0.0, 0.0), b: Point::new(2.0, 0.0) };
        let p = s.project(Point::new(1.0, 1.0));
        assert!(p.interior && (p.dist - 1.0).abs() < 1e-15);
        let p = s.project(Point::new(-1.0, 0.0));
        assert!(!p.interior && p.s == 0.0);
    }

    #[test]
    fn arc_projection_respects_sweep() {
        let arc = Piece::Arc { center: Point::ORIGIN, radius: 1.0, start: 0.0, sweep: PI / 2.0 };
        let p = arc.project(Point::new(2.0, 2.0));
        assert!(p.interior);
        assert!((p.dist - (8f64.sqrt() - 1.0)).abs() < 1e-14);
        let p = arc.project(Point::new(-1.0, -0.1));
        assert!(!p.interior);
        let cw = arc.reversed();
        assert!((cw.start().dist(Point::new(0.0, 1.0))) < 1e-15);
        assert!(cw.project(Point::new(2.0, 2.0)).interior);
    }

    #[test]
    fn offsets_of_ccw_arc_grow_outward() {
        let arc = Piece::Arc { center: Point::ORIGIN, radius: 2.0, start: 0.0, sweep: 1.0 };
        match arc.offset_right(0.5) {
            Piece::Arc { radius, .. } => assert_eq!(radius, 2.5),
            _ => unreachable!(),
        }
        let seg = Piece::Segment { a: Point::ORIGIN, b: Point::new(1.0, 0.0) };
        assert_eq!(seg.offset_right(1.0).start(), Point::new(0.0, -1.0));
    }
}
