//! The reference shapes used by the checks and the command line.

use super::{Point, Shape, ShapeKind};

pub fn disk() -> Shape {
    Shape::new(ShapeKind::Disk { center: Point::ORIGIN, radius: 1.0 }).unwrap()
}

pub fn annulus() -> Shape {
    Shape::new(ShapeKind::Annulus { center: Point::ORIGIN, r1: 1.0, r2: 3.0 }).unwrap()
}

pub fn ellipse() -> Shape {
    Shape::new(ShapeKind::Ellipse { center: Point::ORIGIN, semi_a: 2.0, semi_b: 1.0 }).unwrap()
}

pub fn rectangle() -> Shape {
    Shape::new(ShapeKind::Rectangle { corner: Point::ORIGIN, width: 4.0, height: 2.0 }).unwrap()
}

pub fn stadium() -> Shape {
    Shape::new(ShapeKind::Stadium { p1: Point::new(-2.0, 0.0), p2: Point::new(2.0, 0.0), b: 1.0 }).unwrap()
}

pub fn lshape() -> Shape {
    Shape::new(ShapeKind::LShape {
        corner: Point::ORIGIN,
        width: 2.0,
        height: 2.0,
        thick_x: 1.0,
        thick_y: 1.0,
    })
    .unwrap()
}

/// S-shaped tube: two quarter-turn fillets of radius 1.5 around a spine of
/// curvature at most 2/3, with radius 0.5.
pub fn tube() -> Shape {
    Shape::new(ShapeKind::Tube {
        polyline: vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(3.0, 3.0), Point::new(6.0, 3.0)],
        b: 0.5,
    })
    .unwrap()
}

/// Every catalog shape with its name.
pub fn all() -> Vec<(&'static str, Shape)> {
    vec![
        ("disk", disk()),
        ("annulus", annulus()),
        ("ellipse", ellipse()),
        ("rectangle", rectangle()),
        ("stadium", stadium()),
        ("lshape", lshape()),
        ("tube", tube()),
    ]
}

pub fn by_name(name: &str) -> Option<Shape> {
    all().into_iter().find(|(n, _)| *n == name).map(|(_, s)| s)
}
