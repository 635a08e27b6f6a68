use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, NEIGHBORS8};
use crate::geometry::Point;
use crate::web::{OperatorKind, WebSolution};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: Point,
    pub gradsq: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub a: f64,
}

impl Trajectory {
    /// `sup_t |gradsq(t) - (a² - 2t)|`.
    pub fn identity_deviation(&self) -> f64 {
        let a2 = self.a * self.a;
        self.points.iter().map(|p| (p.gradsq - (a2 - 2.0 * p.t)).abs()).fold(0.0, f64::max)
    }

    /// `sup_t |x(t) - x(0)|`.
    pub fn max_displacement(&self) -> f64 {
        let x0 = self.points[0].x;
        self.points.iter().map(|p| p.x.dist(x0)).fold(0.0, f64::max)
    }

    pub fn end(&self) -> TrajectoryPoint {
        *self.points.last().expect("trajectory has a start point")
    }
}

/// Discrete gradient on every cell; cells without a central stencil take
/// the mean of their available neighbours.
#[derive(Debug, Clone)]
pub struct GradientField {
    grid: Arc<Grid>,
    grad: Vec<Option<Point>>,
}

impl GradientField {
    pub fn new(field: &ScalarField) -> Self {
        let grid = field.grid().clone();
        let mut grad: Vec<Option<Point>> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = grid.coords(k);
                field.derivatives(i, j).ok().map(|(g, _)| g)
            })
            .collect();
        for _ in 0..3 {
            let prev = grad.clone();
            for (k, slot) in grad.iter_mut().enumerate() {
                if slot.is_some() {
                    continue;
                }
                let (i, j) = grid.coords(k);
                let (sum, n) = NEIGHBORS8
                    .iter()
                    .filter_map(|&(di, dj)| grid.neighbor(i, j, di, dj))
                    .filter_map(|(ni, nj)| prev[grid.index(ni, nj)])
                    .fold((Point::ORIGIN, 0usize), |(s, n), g| (s + g, n + 1));
                if n > 0 {
                    *slot = Some(sum * (1.0 / n as f64));
                }
            }
        }
        GradientField { grid, grad }
    }

    /// Bilinear interpolation of the cell gradients.
    pub fn at(&self, p: Point) -> Option<Point> {
        let g = &self.grid;
        let fx = (p.x - g.origin.x) / g.h - 0.5;
        let fy = (p.y - g.origin.y) / g.h - 0.5;
        let (i0, j0) = (fx.floor(), fy.floor());
        if i0 < 0.0 || j0 < 0.0 || i0 + 1.0 >= g.nx as f64 || j0 + 1.0 >= g.ny as f64 {
            return None;
        }
        let (tx, ty) = (fx - i0, fy - j0);
        let (i0, j0) = (i0 as usize, j0 as usize);
        let v = |i, j| self.grad[g.index(i, j)];
        let (v00, v10, v01, v11) = (v(i0, j0)?, v(i0 + 1, j0)?, v(i0, j0 + 1)?, v(i0 + 1, j0 + 1)?);
        Some((v00 * (1.0 - tx) + v10 * tx) * (1.0 - ty) + (v01 * (1.0 - tx) + v11 * tx) * ty)
    }
}

/// Steepest ascent `x' = ∇u` from a boundary point by classical RK4, until
/// `|∇u|² <= max(2 dt, 10h)`.
pub fn trajectory(sol: &WebSolution, x0: Point, dt: f64) -> Result<Trajectory> {
    trajectory_with(sol, &GradientField::new(&sol.field), x0, dt)
}

pub fn trajectory_with(sol: &WebSolution, grad: &GradientField, x0: Point, dt: f64) -> Result<Trajectory> {
    if sol.kind != OperatorKind::Classical {
        return Err(Error::Argument(format!("trajectories need a classical solution, got {}", sol.kind)));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("time step must be positive, got {dt}")));
    }
    let grid = sol.field.grid();
    let shape = grid.shape();
    let h = grid.h;
    if shape.signed_distance(x0).abs() > h {
        return Err(Error::Argument(format!("start {x0:?} is not on the boundary")));
    }
    let stop = (2.0 * dt).max(10.0 * h);
    let eval = |x: Point| -> Result<Point> {
        if shape.signed_distance(x) < -h {
            return Err(Error::Integration(format!("trajectory left the domain at {x:?}")));
        }
        grad.at(x).ok_or_else(|| Error::Integration(format!("no gradient available at {x:?}")))
    };
    let max_steps = ((sol.a * sol.a / (2.0 * dt)).ceil() as usize + 1) * 4;
    let mut x = x0;
    let mut t = 0.0;
    let mut g = eval(x)?;
    let mut points = vec![TrajectoryPoint { t, x, gradsq: g.norm_sq() }];
    for _ in 0..max_steps {
        if g.norm_sq() <= stop {
            return Ok(Trajectory { points, a: sol.a });
        }
        let k1 = g;
        let k2 = eval(x + k1 * (0.5 * dt))?;
        let k3 = eval(x + k2 * (0.5 * dt))?;
        let k4 = eval(x + k3 * dt)?;
        x = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        t += dt;
        g = eval(x)?;
        points.push(TrajectoryPoint { t, x, gradsq: g.norm_sq() });
    }
    Err(Error::Integration(format!("no critical region reached after {max_steps} steps")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Shape, ShapeKind};
    use crate::web::build_web;

    fn disk9() -> WebSolution {
        let s = Shape::new(ShapeKind::Disk { center: Point::ORIGIN, radius: 9.0 }).unwrap();
        let g = Grid::build(&s, 9.0 / 64.0).unwrap();
        build_web(&g, OperatorKind::Classical).unwrap()
    }

    #[test]
    fn disk_identity_and_displacement() {
        let w = disk9();
        let tr = trajectory(&w, Point::new(9.0, 0.0), 0.01).unwrap();
        assert!(tr.identity_deviation() <= 0.05 * 9.0, "{}", tr.identity_deviation());
        assert!(tr.max_displacement() <= 9.0 + 2.0 * w.field.grid().h);
        let end = tr.end();
        assert!(end.t > 3.5 && end.t < 4.5, "{end:?}");
        assert!(end.x.y.abs() < 1e-6);
    }

    #[test]
    fn stadium_flat_side_is_straight() {
        let s = Shape::new(ShapeKind::Stadium { p1: Point::new(-18.0, 0.0), p2: Point::new(18.0, 0.0), b: 9.0 })
            .unwrap();
        let g = Grid::build(&s, 9.0 / 64.0).unwrap();
        let w = build_web(&g, OperatorKind::Classical).unwrap();
        let tr = trajectory(&w, Point::new(1.3, 9.0), 0.01).unwrap();
        for p in &tr.points {
            assert!((p.x.x - 1.3).abs() < 1e-3, "{p:?}");
        }
        assert!(tr.max_displacement() <= 9.0 + 2.0 * g.h);
    }

    #[test]
    fn rejects_bad_inputs() {
        let w = disk9();
        assert!(matches!(trajectory(&w, Point::new(4.0, 0.0), 0.01), Err(Error::Argument(_))));
        assert!(trajectory(&w, Point::new(9.0, 0.0), 0.0).is_err());
    }
}
