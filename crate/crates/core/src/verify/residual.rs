use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, SymMatrix2};
use crate::geometry::Point;
use crate::ridge::{ridge_cells, CellSet, Verdict};
use crate::web::{OperatorKind, WebSolution};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResidualStats {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub cells_evaluated: usize,
    pub cells_excluded: usize,
    pub exclusion_band: f64,
}

/// Envelope inequalities at critical cells: `-Λ - 1 <= tol` and `-λ - 1 >= -tol`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EnvelopeStats {
    pub critical_cells: usize,
    /// Largest value of `-Λ - 1`.
    pub upper_slot: f64,
    /// Smallest value of `-λ - 1`.
    pub lower_slot: f64,
    pub tol: f64,
    pub holds: bool,
}

/// Cells kept away from the boundary, the discrete ridge and the seams
/// of the distance function (see [`crate::geometry::Shape::seams`]).
#[derive(Debug, Clone)]
pub struct Exclusion {
    grid: Arc<Grid>,
    band: f64,
    singular_distance: Vec<f64>,
}

impl Exclusion {
    pub fn new(grid: &Arc<Grid>, band: f64) -> Result<Self> {
        Self::with_ridge(&ridge_cells(grid), band)
    }

    pub fn with_ridge(ridge: &CellSet, band: f64) -> Result<Self> {
        let grid = ridge.grid();
        if band < 3.0 * grid.h * (1.0 - 1e-12) {
            return Err(Error::Parameter(format!("band {band} is below 3h = {}", 3.0 * grid.h)));
        }
        let seams = grid.shape().seams();
        let singular_distance = ridge
            .distance_field()
            .into_par_iter()
            .enumerate()
            .map(|(k, d)| {
                let c = grid.center_of(k);
                seams.iter().map(|&(a, b)| segment_distance(c, a, b)).fold(d, f64::min)
            })
            .collect();
        Ok(Exclusion { grid: grid.clone(), band, singular_distance })
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn near_boundary(&self, k: usize) -> bool {
        self.grid.depths()[k] < self.band
    }

    pub fn near_singular(&self, k: usize) -> bool {
        self.singular_distance[k] < self.band
    }

    pub fn excludes(&self, k: usize) -> bool {
        self.near_boundary(k) || self.near_singular(k)
    }
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

fn check_grid(field: &ScalarField, ex: &Exclusion) -> Result<()> {
    if Arc::ptr_eq(field.grid(), ex.grid()) {
        Ok(())
    } else {
        Err(Error::Argument("field and exclusion live on different grids".into()))
    }
}

/// Applies `f` to the value, gradient and Hessian at every cell kept by `ex`.
pub fn residual_stats<F>(field: &ScalarField, ex: &Exclusion, f: F) -> Result<ResidualStats>
where
    F: Fn(f64, Point, &SymMatrix2) -> f64 + Sync,
{
    check_grid(field, ex)?;
    let grid = field.grid();
    let per_cell: Vec<Option<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if !grid.inside_mask()[k] || ex.excludes(k) {
                return None;
            }
            let (i, j) = grid.coords(k);
            let (g, hs) = field.derivatives(i, j).ok()?;
            Some(f(field.values()[k], g, &hs).abs())
        })
        .collect();
    summarize(grid, &per_cell, ex.band)
}

fn summarize(grid: &Grid, per_cell: &[Option<f64>], band: f64) -> Result<ResidualStats> {
    let vals: Vec<f64> = per_cell.iter().flatten().copied().collect();
    if vals.is_empty() {
        return Err(Error::BandTooWide { band });
    }
    let max_abs = vals.iter().fold(0.0f64, |a, &b| a.max(b));
    let mean_abs = vals.iter().sum::<f64>() / vals.len() as f64;
    Ok(ResidualStats {
        max_abs,
        mean_abs,
        cells_evaluated: vals.len(),
        cells_excluded: grid.inside_count() - vals.len(),
        exclusion_band: band,
    })
}

/// `|-<D²u Du, Du> - 1|` off the bands.
pub fn residual_classical(sol: &WebSolution, band: f64) -> Result<ResidualStats> {
    residual_classical_in(sol, &Exclusion::new(sol.field.grid(), band)?)
}

pub fn residual_classical_in(sol: &WebSolution, ex: &Exclusion) -> Result<ResidualStats> {
    expect_kind(sol, OperatorKind::Classical)?;
    classical_field_residual(&sol.field, ex)
}

/// Classical residual of an arbitrary field.
pub fn classical_field_residual(field: &ScalarField, ex: &Exclusion) -> Result<ResidualStats> {
    residual_stats(field, ex, |_, g, hs| -hs.quad(g) - 1.0)
}

fn expect_kind(sol: &WebSolution, kind: OperatorKind) -> Result<()> {
    if sol.kind == kind {
        Ok(())
    } else {
        Err(Error::Argument(format!("expected a {kind} solution, got {}", sol.kind)))
    }
}

/// Normalized residual off the bands where `|∇u| > grad_floor`, envelope
/// inequalities (tolerance `10h`) where `|∇u| <= grad_floor` away from the
/// boundary. Envelope violations enter `max_abs`.
pub fn residual_normalized(
    sol: &WebSolution,
    band: f64,
    grad_floor: f64,
) -> Result<(ResidualStats, EnvelopeStats)> {
    residual_normalized_in(sol, &Exclusion::new(sol.field.grid(), band)?, grad_floor)
}

enum Eval {
    Smooth(f64),
    Critical(f64, f64),
}

pub fn residual_normalized_in(
    sol: &WebSolution,
    ex: &Exclusion,
    grad_floor: f64,
) -> Result<(ResidualStats, EnvelopeStats)> {
    expect_kind(sol, OperatorKind::Normalized)?;
    check_grid(&sol.field, ex)?;
    let field = &sol.field;
    let grid = field.grid();
    let tol = 10.0 * grid.h;
    let evals: Vec<Option<Eval>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if !grid.inside_mask()[k] || ex.near_boundary(k) {
                return None;
            }
            let (i, j) = grid.coords(k);
            let (g, hs) = field.derivatives(i, j).ok()?;
            let gn = g.norm();
            if gn <= grad_floor {
                let (lo, hi) = hs.eigenvalues();
                Some(Eval::Critical(-hi - 1.0, -lo - 1.0))
            } else if ex.near_singular(k) {
                None
            } else {
                Some(Eval::Smooth((-hs.quad(g) / (gn * gn) - 1.0).abs()))
            }
        })
        .collect();
    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::INFINITY;
    let mut critical = 0;
    let per_cell: Vec<Option<f64>> = evals
        .iter()
        .map(|e| match e {
            None => None,
            Some(Eval::Smooth(r)) => Some(*r),
            Some(Eval::Critical(up, lo)) => {
                critical += 1;
                upper = upper.max(*up);
                lower = lower.min(*lo);
                Some(up.max(0.0).max((-lo).max(0.0)))
            }
        })
        .collect();
    let stats = summarize(grid, &per_cell, ex.band)?;
    let holds = critical == 0 || (upper <= tol && lower >= -tol);
    Ok((stats, EnvelopeStats { critical_cells: critical, upper_slot: upper, lower_slot: lower, tol, holds }))
}

/// `|min(|∇u| - 1, -<D²u Du, Du>)|` off the bands.
pub fn limit_equation_residual(dfield: &ScalarField, band: f64) -> Result<ResidualStats> {
    limit_equation_residual_in(dfield, &Exclusion::new(dfield.grid(), band)?)
}

pub fn limit_equation_residual_in(dfield: &ScalarField, ex: &Exclusion) -> Result<ResidualStats> {
    residual_stats(dfield, ex, |_, g, hs| (g.norm() - 1.0).min(-hs.quad(g)))
}

/// `|min(|∇u| - u/ρ, -<D²u Du, Du>)|` off the bands. Requires the deepest
/// set and the ridge to coincide.
pub fn eigen_residual(dfield: &ScalarField, verdict: &Verdict, band: f64) -> Result<ResidualStats> {
    eigen_residual_in(dfield, verdict, &Exclusion::new(dfield.grid(), band)?)
}

pub fn eigen_residual_in(dfield: &ScalarField, verdict: &Verdict, ex: &Exclusion) -> Result<ResidualStats> {
    if !verdict.m_equals_r {
        return Err(Error::Hypothesis("eigenfunction check needs M = R".into()));
    }
    let lambda = 1.0 / verdict.inradius_used;
    residual_stats(dfield, ex, |u, g, hs| (g.norm() - lambda * u).min(-hs.quad(g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog, Shape, ShapeKind};
    use crate::ridge::classify;
    use crate::web::build_web;

    fn disk9(h: f64) -> Arc<Grid> {
        let s = Shape::new(ShapeKind::Disk { center: Point::ORIGIN, radius: 9.0 }).unwrap();
        Grid::build(&s, h).unwrap()
    }

    #[test]
    fn disk_classical_residual_small() {
        let g = disk9(9.0 / 128.0);
        let w = build_web(&g, OperatorKind::Classical).unwrap();
        let r = residual_classical(&w, 3.0 * g.h).unwrap();
        assert!(r.max_abs <= 0.1, "{r:?}");
        assert!(r.max_abs >= r.mean_abs);
        assert_eq!(r.cells_evaluated + r.cells_excluded, g.inside_count());
    }

    #[test]
    fn linear_field_has_unit_residual() {
        let g = Grid::build(&catalog::disk(), 1.0 / 32.0).unwrap();
        let mut w = build_web(&g, OperatorKind::Classical).unwrap();
        w.field = ScalarField::from_fn(&g, |p| p.x);
        let r = residual_classical(&w, 3.0 * g.h).unwrap();
        assert!((r.max_abs - 1.0).abs() < 1e-12 && (r.mean_abs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_normalized_residual_vanishes() {
        let g = Grid::build(&catalog::disk(), 1.0 / 32.0).unwrap();
        let mut w = build_web(&g, OperatorKind::Normalized).unwrap();
        w.field = ScalarField::from_fn(&g, |p| -0.5 * p.norm_sq());
        let (r, env) = residual_normalized(&w, 3.0 * g.h, 10.0 * g.h).unwrap();
        assert!(r.max_abs <= 1e-9, "{r:?}");
        assert!(env.holds && env.critical_cells > 0);
        assert!((env.upper_slot).abs() < 1e-9 && (env.lower_slot).abs() < 1e-9);
    }

    #[test]
    fn band_too_wide() {
        let g = Grid::build(&catalog::disk(), 1.0 / 16.0).unwrap();
        let w = build_web(&g, OperatorKind::Classical).unwrap();
        assert!(matches!(residual_classical(&w, 2.0), Err(Error::BandTooWide { .. })));
        assert!(matches!(residual_classical(&w, g.h), Err(Error::Parameter(_))));
    }

    #[test]
    fn limit_residual_of_distance_and_half_distance() {
        let g = Grid::build(&catalog::stadium(), 1.0 / 64.0).unwrap();
        let d = ScalarField::exact_distance(&g);
        let r = limit_equation_residual(&d, 3.0 * g.h).unwrap();
        assert!(r.max_abs <= 0.1, "{r:?}");
        let r2 = limit_equation_residual(&d.map(|v| 0.5 * v), 3.0 * g.h).unwrap();
        assert!(r2.max_abs >= 0.5 - 1e-6);
    }

    #[test]
    fn eigen_residual_needs_hypothesis() {
        let g = Grid::build(&catalog::ellipse(), 1.0 / 32.0).unwrap();
        let v = classify(&g).unwrap();
        let d = ScalarField::exact_distance(&g);
        assert!(matches!(eigen_residual(&d, &v, 3.0 * g.h), Err(Error::Hypothesis(_))));
        let g = Grid::build(&catalog::disk(), 1.0 / 64.0).unwrap();
        let v = classify(&g).unwrap();
        let d = ScalarField::exact_distance(&g);
        let r = eigen_residual(&d, &v, 3.0 * g.h).unwrap();
        assert!(r.max_abs <= 0.1, "{r:?}");
        let r2 = eigen_residual(&d.map(|x| 2.0 * x), &v, 3.0 * g.h).unwrap();
        // The slots scale by 2 and 8: the zero set is invariant, the magnitude is not.
        assert!(r2.max_abs <= 8.0 * r.max_abs && r2.mean_abs <= 0.02, "{r2:?}");
    }
}
