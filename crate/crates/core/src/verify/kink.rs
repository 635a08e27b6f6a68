use crate::fields::{ScalarField, SymMatrix2};
use crate::geometry::Point;
use crate::ridge::CellSet;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct KinkSample {
    pub point: Point,
    pub depth: f64,
    pub jump: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct KinkReport {
    pub max_jump: f64,
    pub witness: Option<Point>,
    pub witness_depth: Option<f64>,
    pub cells_checked: usize,
}

/// Unit normal to the ridge near cell `k`, from the principal axes of the
/// ridge cells within three cells.
fn ridge_normal(ridge: &CellSet, k: usize) -> Point {
    let grid = ridge.grid();
    let (ci, cj) = grid.coords(k);
    let c = grid.center_of(k);
    let mut pts = Vec::new();
    for dj in -3isize..=3 {
        for di in -3isize..=3 {
            if let Some((i, j)) = grid.neighbor(ci, cj, di, dj) {
                let m = grid.index(i, j);
                if ridge.contains(m) {
                    pts.push(grid.center_of(m) - c);
                }
            }
        }
    }
    let n = pts.len() as f64;
    let mean = pts.iter().fold(Point::ORIGIN, |a, &p| a + p) * (1.0 / n);
    let mut cov = SymMatrix2::new(0.0, 0.0, 0.0);
    for p in &pts {
        let q = *p - mean;
        cov.xx += q.x * q.x;
        cov.xy += q.x * q.y;
        cov.yy += q.y * q.y;
    }
    let (lo, _) = cov.eigenvalues();
    // Eigenvector of the smaller eigenvalue.
    let v = if cov.xy.abs() > 1e-14 {
        Point::new(cov.xy, lo - cov.xx)
    } else if cov.xx <= cov.yy {
        Point::new(1.0, 0.0)
    } else {
        Point::new(0.0, 1.0)
    };
    v.normalized()
}

/// Jump of the directional derivative across the ridge at every ridge cell
/// whose stencil `c ± 2h η` stays inside.
pub fn kink_samples(field: &ScalarField, ridge: &CellSet) -> Vec<KinkSample> {
    let grid = field.grid();
    let s = 2.0 * grid.h;
    ridge
        .indices()
        .into_par_iter()
        .filter_map(|k| {
            let c = grid.center_of(k);
            let eta = ridge_normal(ridge, k);
            let u0 = field.values()[k];
            let up = field.sample(c + eta * s)?;
            let um = field.sample(c - eta * s)?;
            let jump = ((up - u0) / s - (u0 - um) / s).abs();
            Some(KinkSample { point: c, depth: grid.depths()[k], jump })
        })
        .collect()
}

fn strongest(samples: impl Iterator<Item = KinkSample>) -> Option<KinkSample> {
    samples.fold(None, |best: Option<KinkSample>, s| match best {
        Some(b) if b.jump >= s.jump => Some(b),
        _ => Some(s),
    })
}

/// Largest derivative jump across the ridge, with its location and depth.
pub fn kink_check(field: &ScalarField, ridge: &CellSet) -> KinkReport {
    let samples = kink_samples(field, ridge);
    let n = samples.len();
    let best = strongest(samples.into_iter());
    KinkReport {
        max_jump: best.map_or(0.0, |b| b.jump),
        witness: best.map(|b| b.point),
        witness_depth: best.map(|b| b.depth),
        cells_checked: n,
    }
}

/// Strongest kink of size at least `tau` at a ridge point shallower than
/// `max_depth`.
pub fn shallow_witness(samples: &[KinkSample], max_depth: f64, tau: f64) -> Option<KinkSample> {
    strongest(samples.iter().copied().filter(|s| s.depth < max_depth && s.jump >= tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::geometry::catalog;
    use crate::ridge::ridge_cells;
    use crate::web::{build_web, OperatorKind};

    #[test]
    fn ellipse_distance_has_a_kink() {
        let g = Grid::build(&catalog::ellipse(), 1.0 / 64.0).unwrap();
        let r = kink_check(&ScalarField::exact_distance(&g), &ridge_cells(&g));
        assert!(r.max_jump >= 0.5, "{r:?}");
        assert!(r.witness_depth.unwrap() < 1.0);
    }

    #[test]
    fn rectangle_witnesses_on_diagonals() {
        let g = Grid::build(&catalog::rectangle(), 1.0 / 64.0).unwrap();
        let samples = kink_samples(&ScalarField::exact_distance(&g), &ridge_cells(&g));
        let w = shallow_witness(&samples, 1.0 - 4.0 * g.h, 10.0 * g.h).unwrap();
        let p = w.point;
        let diag = [p.x - p.y, 2.0 - p.x - p.y, p.x - p.y - 2.0, 4.0 - p.x - p.y]
            .iter()
            .map(|t| t.abs())
            .fold(f64::INFINITY, f64::min);
        assert!(diag < 2.0 * g.h && w.depth < 1.0);
    }

    #[test]
    fn stadium_classical_jump_decays() {
        let s = catalog::stadium();
        let jumps: Vec<f64> = [32.0, 64.0, 128.0]
            .iter()
            .map(|n| {
                let g = Grid::build(&s, 1.0 / n).unwrap();
                let w = build_web(&g, OperatorKind::Classical).unwrap();
                kink_check(&w.field, &ridge_cells(&g)).max_jump
            })
            .collect();
        assert!(jumps[1] < jumps[0] && jumps[2] < jumps[1], "{jumps:?}");
    }

    #[test]
    fn smooth_field_has_no_witness() {
        let g = Grid::build(&catalog::disk(), 1.0 / 64.0).unwrap();
        let w = build_web(&g, OperatorKind::Normalized).unwrap();
        let samples = kink_samples(&w.field, &ridge_cells(&g));
        assert!(shallow_witness(&samples, 1.0 - 4.0 * g.h, 10.0 * g.h).is_none());
    }
}
