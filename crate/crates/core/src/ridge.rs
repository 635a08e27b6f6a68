//! Discrete ridge (cut locus of the boundary), deepest-point set and the
//! test of whether the two coincide.

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use crate::geometry::Point;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// A set of grid cells.
#[derive(Debug, Clone)]
pub struct CellSet {
    grid: Arc<Grid>,
    members: Vec<bool>,
}

impl CellSet {
    pub fn new(grid: &Arc<Grid>, members: Vec<bool>) -> Result<Self> {
        if members.len() != grid.len() {
            return Err(Error::Argument("cell set size does not match grid".into()));
        }
        let members = members.iter().zip(grid.inside_mask()).map(|(&m, &ins)| m && ins).collect();
        Ok(CellSet { grid: grid.clone(), members })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members[k]
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&k| self.members[k]).collect()
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn centers(&self) -> Vec<Point> {
        self.indices().into_iter().map(|k| self.grid.center_of(k)).collect()
    }

    /// Distance from every cell center to the nearest member center.
    pub fn distance_field(&self) -> Vec<f64> {
        self.grid.distance_to_cells(&self.members)
    }

    /// Distance from an arbitrary point to the nearest member center.
    pub fn distance_from(&self, p: Point) -> f64 {
        self.indices()
            .into_iter()
            .map(|k| self.grid.center_of(k).dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn filter<F: Fn(usize) -> bool>(&self, keep: F) -> CellSet {
        let members = (0..self.members.len()).map(|k| self.members[k] && keep(k)).collect();
        CellSet { grid: self.grid.clone(), members }
    }

    /// Text dump: the grid header, then one `i j` line per member.
    pub fn to_dump(&self) -> String {
        let mut s = self.grid.header();
        s.push('\n');
        for k in self.indices() {
            let (i, j) = self.grid.coords(k);
            s.push_str(&format!("{i} {j}\n"));
        }
        s
    }
}

/// Parses a cell-set dump into its header line and `(i, j)` pairs.
pub fn parse_cellset_dump(text: &str) -> Result<(String, Vec<(usize, usize)>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty cell dump".into()))?.to_string();
    let mut cells = Vec::new();
    for l in lines {
        let mut it = l.split_whitespace().map(|t| t.parse::<usize>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(i)), Some(Ok(j)), None) => cells.push((i, j)),
            _ => return Err(Error::Parse(format!("bad cell line {l:?}"))),
        }
    }
    Ok((header, cells))
}

/// Footpoint-spread threshold `theta = 3h`.
pub fn spread_threshold(h: f64) -> f64 {
    3.0 * h
}

/// Per-cell footpoint spread over the cell square.
pub fn cell_spreads(grid: &Arc<Grid>) -> Vec<f64> {
    let shape = grid.shape();
    let half = 0.5 * grid.h;
    (0..grid.len())
        .into_par_iter()
        .map(|k| if grid.inside_mask()[k] { shape.cell_spread(grid.center_of(k), half) } else { 0.0 })
        .collect()
}

/// Cells crossed by the ridge: footpoints attained within the cell are
/// spread by more than `3h`.
pub fn ridge_cells(grid: &Arc<Grid>) -> CellSet {
    let theta = spread_threshold(grid.h);
    let members = cell_spreads(grid).into_iter().map(|s| s > theta).collect();
    CellSet::new(grid, members).expect("sizes match")
}

/// Comparison of the footpoint criterion with the gradient-deficiency
/// criterion `|∇_h d| < 1 - 10h`.
#[derive(Debug, Clone)]
pub struct RidgeCrossCheck {
    pub gradient_ridge: CellSet,
    /// Cells flagged by exactly one of the two criteria.
    pub disagreements: Vec<usize>,
}

pub fn ridge_cross_check(ridge: &CellSet) -> RidgeCrossCheck {
    let grid = ridge.grid();
    let d = ScalarField::exact_distance(grid);
    let limit = 1.0 - 10.0 * grid.h;
    let members: Vec<bool> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = grid.coords(k);
            grid.inside_mask()[k]
                && d.derivatives(i, j).map(|(g, _)| g.norm() < limit).unwrap_or(false)
        })
        .collect();
    let gradient_ridge = CellSet::new(grid, members).expect("sizes match");
    let disagreements = (0..grid.len())
        .filter(|&k| {
            let (i, j) = grid.coords(k);
            grid.inside_mask()[k]
                && d.derivatives(i, j).is_ok()
                && ridge.contains(k) != gradient_ridge.contains(k)
        })
        .collect();
    RidgeCrossCheck { gradient_ridge, disagreements }
}

/// Cells whose depth is within `2h` of the inradius.
pub fn max_distance_cells(grid: &Arc<Grid>) -> CellSet {
    let cut = grid.shape().inradius() - 2.0 * grid.h;
    let members = grid.depths().iter().map(|&d| d >= cut).collect();
    CellSet::new(grid, members).expect("sizes match")
}

/// Discrete Hausdorff distance between two cell sets on the same grid.
pub fn hausdorff(a: &CellSet, b: &CellSet) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let da = a.distance_field();
    let db = b.distance_field();
    let ab = a.indices().into_iter().map(|k| db[k]).fold(0.0, f64::max);
    let ba = b.indices().into_iter().map(|k| da[k]).fold(0.0, f64::max);
    ab.max(ba)
}

/// Thresholds applied by [`classify`].
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ClassifyTolerances {
    pub spread_threshold: f64,
    pub max_band: f64,
    pub equality: f64,
    pub boundary_distance: f64,
}

/// Outcome of the deepest-set versus ridge comparison.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Verdict {
    pub m_equals_r: bool,
    pub hausdorff_mr: f64,
    pub inradius_used: f64,
    /// Largest `|dist(x, ridge) - inradius|` over boundary samples.
    pub boundary_ridge_deviation: f64,
    pub boundary_distance_ok: bool,
    pub ridge_cells: usize,
    pub max_cells: usize,
    pub h: f64,
    pub tolerances: ClassifyTolerances,
}

impl Verdict {
    /// Both conditions of the characterization: the sets coincide and every
    /// boundary point sits at inradius distance from the ridge.
    pub fn solution_exists(&self) -> bool {
        self.m_equals_r && self.boundary_distance_ok
    }
}

/// Scale factor applied to every tolerance of [`classify_with`].
pub fn classify(grid: &Arc<Grid>) -> Result<Verdict> {
    classify_with(grid, 1.0)
}

pub fn classify_with(grid: &Arc<Grid>, tol_scale: f64) -> Result<Verdict> {
    let ridge = ridge_cells(grid);
    classify_sets(&ridge, &max_distance_cells(grid), tol_scale)
}

pub fn classify_sets(ridge: &CellSet, deepest: &CellSet, tol_scale: f64) -> Result<Verdict> {
    let grid = ridge.grid();
    if ridge.is_empty() {
        return Err(Error::Degenerate("no ridge cells found".into()));
    }
    let h = grid.h;
    let shape = grid.shape();
    let rho = shape.inradius();
    let tolerances = ClassifyTolerances {
        spread_threshold: spread_threshold(h),
        max_band: 2.0 * h,
        equality: 4.0 * h * tol_scale,
        boundary_distance: 4.0 * h * tol_scale,
    };
    let hd = hausdorff(ridge, deepest);
    let n = ((shape.perimeter() / h).ceil() as usize).max(64);
    let centers = ridge.centers();
    let deviation = shape
        .boundary_sample(n)?
        .par_iter()
        .map(|(p, _)| {
            let d = centers.iter().map(|c| c.dist(*p)).fold(f64::INFINITY, f64::min);
            (d - rho).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(Verdict {
        m_equals_r: hd <= tolerances.equality,
        hausdorff_mr: hd,
        inradius_used: rho,
        boundary_ridge_deviation: deviation,
        boundary_distance_ok: deviation <= tolerances.boundary_distance,
        ridge_cells: ridge.len(),
        max_cells: deepest.len(),
        h,
        tolerances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;

    #[test]
    fn disk_ridge_is_the_center_cluster() {
        let g = Grid::build(&catalog::disk(), 1.0 / 32.0).unwrap();
        let r = ridge_cells(&g);
        assert!(!r.is_empty());
        for c in r.centers() {
            assert!(c.norm() <= 3.0 * g.h + g.h);
        }
    }

    #[test]
    fn annulus_ridge_is_the_mid_circle() {
        let g = Grid::build(&catalog::annulus(), 1.0 / 32.0).unwrap();
        let r = ridge_cells(&g);
        assert!(r.len() > 100);
        for c in r.centers() {
            assert!((c.norm() - 2.0).abs() <= g.h);
        }
    }

    #[test]
    fn rectangle_ridge_spine_and_diagonals() {
        let g = Grid::build(&catalog::rectangle(), 1.0 / 32.0).unwrap();
        let r = ridge_cells(&g);
        for c in r.centers() {
            let on_spine = (c.y - 1.0).abs() <= g.h && c.x >= 1.0 - g.h && c.x <= 3.0 + g.h;
            let diag = [c.x - c.y, 2.0 - c.x - c.y, c.x - c.y - 2.0, 4.0 - c.x - c.y]
                .iter()
                .map(|t| t.abs() / 2f64.sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!(on_spine || diag <= g.h, "stray ridge cell {c:?}");
        }
        let m = max_distance_cells(&g);
        for c in m.centers() {
            assert!((c.y - 1.0).abs() <= 2.0 * g.h + 1e-12);
        }
    }

    #[test]
    fn ellipse_deepest_cells_sit_at_the_center() {
        let g = Grid::build(&catalog::ellipse(), 1.0 / 32.0).unwrap();
        let m = max_distance_cells(&g);
        // d(x, 0) = sqrt(1 - x^2/3) on the major axis, so the 2h band reaches |x| <= sqrt(12h).
        for c in m.centers() {
            assert!(c.norm() <= (12.0 * g.h).sqrt() + g.h);
        }
    }

    #[test]
    fn classify_examples() {
        let h = 1.0 / 32.0;
        for s in [catalog::disk(), catalog::annulus(), catalog::stadium()] {
            let v = classify(&Grid::build(&s, h).unwrap()).unwrap();
            assert!(v.m_equals_r && v.boundary_distance_ok, "{}: {v:?}", s.name());
        }
        let v = classify(&Grid::build(&catalog::ellipse(), h).unwrap()).unwrap();
        assert!(!v.m_equals_r && v.hausdorff_mr > 0.9, "{v:?}");
        let v = classify(&Grid::build(&catalog::rectangle(), h).unwrap()).unwrap();
        // Corner tips with spread below 3h are cut off, so the distance undershoots sqrt(2).
        let gap = 2f64.sqrt() - v.hausdorff_mr;
        assert!(!v.m_equals_r && (0.0..=8.0 * h).contains(&gap), "{v:?}");
    }

    #[test]
    fn cellset_dump_lists_members() {
        let g = Grid::build(&catalog::disk(), 1.0 / 16.0).unwrap();
        let r = ridge_cells(&g);
        let (header, cells) = parse_cellset_dump(&r.to_dump()).unwrap();
        assert_eq!(header, g.header());
        assert_eq!(cells.len(), r.len());
    }
}
