//! Uniform Cartesian grids, scalar fields and finite-difference stencils.
//!
//! Cell `(i, j)` has its center at `origin + ((i + 1/2) h, (j + 1/2) h)`.
//! Values live on inside cells; outside cells hold `NaN`. Stencils that reach
//! an outside neighbor use a ghost value obtained by linear extrapolation
//! through the exact boundary crossing, where the field is taken to vanish.

use crate::error::{Error, Result};
use crate::geometry::{Point, Shape};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::sync::Arc;

/// Symmetric 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMatrix2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMatrix2 {
    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymMatrix2 { xx, xy, yy }
    }

    pub fn identity() -> Self {
        SymMatrix2::new(1.0, 0.0, 1.0)
    }

    /// `(lambda_min, lambda_max)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let r = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        (mean - r, mean + r)
    }

    /// `<M v, v>`.
    pub fn quad(&self, v: Point) -> f64 {
        self.xx * v.x * v.x + 2.0 * self.xy * v.x * v.y + self.yy * v.y * v.y
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }
}

/// Uniform grid over a shape with its inside mask.
#[derive(Debug, Clone)]
pub struct Grid {
    shape: Shape,
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    inside: Vec<bool>,
    depth: Vec<f64>,
}

pub const NEIGHBORS8: [(isize, isize); 8] =
    [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)];

impl Grid {
    /// Grid over the bounding box of `shape` padded by `2h` on every side.
    pub fn build(shape: &Shape, h: f64) -> Result<Arc<Grid>> {
        let rho = shape.inradius();
        if !(h > 0.0) || h > rho / 4.0 {
            return Err(Error::Resolution { h, max: rho / 4.0 });
        }
        let (lo, hi) = shape.bbox();
        let origin = lo - Point::new(2.0 * h, 2.0 * h);
        let nx = ((hi.x - lo.x) / h).ceil() as usize + 4;
        let ny = ((hi.y - lo.y) / h).ceil() as usize + 4;
        if nx < 8 || ny < 8 {
            return Err(Error::Resolution { h, max: rho / 4.0 });
        }
        let depth: Vec<f64> = (0..nx * ny)
            .into_par_iter()
            .map(|k| {
                let c = origin + Point::new(((k % nx) as f64 + 0.5) * h, ((k / nx) as f64 + 0.5) * h);
                shape.signed_distance(c)
            })
            .collect();
        let inside = depth.iter().map(|&d| d > 0.0).collect();
        Ok(Arc::new(Grid { shape: shape.clone(), origin, h, nx, ny, inside, depth }))
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn center(&self, i: usize, j: usize) -> Point {
        self.origin + Point::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    pub fn center_of(&self, k: usize) -> Point {
        let (i, j) = self.coords(k);
        self.center(i, j)
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.inside[self.index(i, j)]
    }

    pub fn inside_mask(&self) -> &[bool] {
        &self.inside
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Exact signed distance at every cell center.
    pub fn depths(&self) -> &[f64] {
        &self.depth
    }

    pub fn depth(&self, i: usize, j: usize) -> f64 {
        self.depth[self.index(i, j)]
    }

    pub fn neighbor(&self, i: usize, j: usize, di: isize, dj: isize) -> Option<(usize, usize)> {
        let ni = i as isize + di;
        let nj = j as isize + dj;
        if ni < 0 || nj < 0 || ni >= self.nx as isize || nj >= self.ny as isize {
            None
        } else {
            Some((ni as usize, nj as usize))
        }
    }

    /// Cell whose square contains `p`.
    pub fn cell_at(&self, p: Point) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.h).floor();
        let fy = ((p.y - self.origin.y) / self.h).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            None
        } else {
            Some((fx as usize, fy as usize))
        }
    }

    /// Fraction `t` in `(0, 1]` of the segment from the center of inside cell
    /// `(i, j)` to the center of its neighbor `(i + di, j + dj)` at which the
    /// boundary is crossed.
    pub fn crossing_fraction(&self, i: usize, j: usize, di: isize, dj: isize) -> f64 {
        let a = self.center(i, j);
        let b = a + Point::new(di as f64 * self.h, dj as f64 * self.h);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        if self.shape.signed_distance(b) > 0.0 {
            return 1.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.shape.signed_distance(a.lerp(b, mid)) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// True when a non-smooth boundary point lies within the 3x3 stencil box
    /// of the cell.
    pub fn near_corner(&self, i: usize, j: usize) -> bool {
        let c = self.center(i, j);
        let r = 1.5 * self.h;
        self.shape.corners().iter().any(|p| (p.x - c.x).abs() <= r && (p.y - c.y).abs() <= r)
    }

    /// 4-connected components of the inside mask.
    pub fn inside_components(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.len() {
            if !self.inside[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(k) = stack.pop() {
                let (i, j) = self.coords(k);
                for (di, dj) in NEIGHBORS8.iter().take(4) {
                    if let Some((ni, nj)) = self.neighbor(i, j, *di, *dj) {
                        let n = self.index(ni, nj);
                        if self.inside[n] && !seen[n] {
                            seen[n] = true;
                            stack.push(n);
                        }
                    }
                }
            }
        }
        count
    }

    /// Header line of the text dump formats.
    pub fn header(&self) -> String {
        format!("{} {} {:.16e} {:.16e} {:.16e}", self.nx, self.ny, self.h, self.origin.x, self.origin.y)
    }

    /// Euclidean distance from every cell center to the nearest center of a
    /// member cell (`f64::INFINITY` when there are no members).
    pub fn distance_to_cells(&self, members: &[bool]) -> Vec<f64> {
        squared_edt(members, self.nx, self.ny)
            .into_iter()
            .map(|d2| d2.sqrt() * self.h)
            .collect()
    }
}

/// One-dimensional squared distance transform of a sampled function
/// (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let mut first = None;
    for q in 0..n {
        if f[q].is_finite() {
            first = Some(q);
            break;
        }
    }
    let Some(first) = first else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    v[0] = first;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0 and the new parabola dominates everywhere.
                v[0] = q;
                z[1] = f64::INFINITY;
                break;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Exact squared Euclidean distance transform in cell units.
pub fn squared_edt(members: &[bool], nx: usize, ny: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = members.iter().map(|&m| if m { 0.0 } else { f64::INFINITY }).collect();
    let n = nx.max(ny);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for j in 0..ny {
        f[..nx].copy_from_slice(&grid[j * nx..(j + 1) * nx]);
        edt_1d(&f[..nx], &mut out[..nx], &mut v, &mut z);
        grid[j * nx..(j + 1) * nx].copy_from_slice(&out[..nx]);
    }
    for i in 0..nx {
        for j in 0..ny {
            f[j] = grid[j * nx + i];
        }
        edt_1d(&f[..ny], &mut out[..ny], &mut v, &mut z);
        for j in 0..ny {
            grid[j * nx + i] = out[j];
        }
    }
    grid
}

/// Real values on the inside cells of a grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!(
                "field has {} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        for (k, v) in values.iter().enumerate() {
            if grid.inside[k] && !v.is_finite() {
                let (i, j) = grid.coords(k);
                return Err(Error::Argument(format!("non-finite value at inside cell ({i}, {j})")));
            }
        }
        let values = values
            .into_iter()
            .zip(grid.inside.iter())
            .map(|(v, &ins)| if ins { v } else { f64::NAN })
            .collect();
        Ok(ScalarField { grid, values })
    }

    /// Samples `f` at the center of every inside cell.
    pub fn from_fn<F: Fn(Point) -> f64 + Sync>(grid: &Arc<Grid>, f: F) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| if grid.inside[k] { f(grid.center_of(k)) } else { f64::NAN })
            .collect();
        ScalarField { grid: grid.clone(), values }
    }

    /// Exact signed distance sampled at inside cells.
    pub fn exact_distance(grid: &Arc<Grid>) -> Self {
        let values = grid
            .depth
            .iter()
            .zip(grid.inside.iter())
            .map(|(&d, &ins)| if ins { d } else { f64::NAN })
            .collect();
        ScalarField { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Value at a neighbor, or the Dirichlet ghost value if it is outside.
    pub fn neighbor_value(&self, i: usize, j: usize, di: isize, dj: isize) -> Result<f64> {
        let g = &self.grid;
        let (ni, nj) = g.neighbor(i, j, di, dj).ok_or(Error::Stencil { i, j })?;
        if g.is_inside(ni, nj) {
            return Ok(self.get(ni, nj));
        }
        let t = g.crossing_fraction(i, j, di, dj).max(1e-6);
        Ok(self.get(i, j) * (t - 1.0) / t)
    }

    /// Central-difference gradient and Hessian at an inside cell.
    pub fn derivatives(&self, i: usize, j: usize) -> Result<(Point, SymMatrix2)> {
        let g = &self.grid;
        if !g.is_inside(i, j) || g.near_corner(i, j) {
            return Err(Error::Stencil { i, j });
        }
        let u = self.get(i, j);
        let e = self.neighbor_value(i, j, 1, 0)?;
        let w = self.neighbor_value(i, j, -1, 0)?;
        let n = self.neighbor_value(i, j, 0, 1)?;
        let s = self.neighbor_value(i, j, 0, -1)?;
        let ne = self.neighbor_value(i, j, 1, 1)?;
        let nw = self.neighbor_value(i, j, -1, 1)?;
        let se = self.neighbor_value(i, j, 1, -1)?;
        let sw = self.neighbor_value(i, j, -1, -1)?;
        let h = g.h;
        let grad = Point::new((e - w) / (2.0 * h), (n - s) / (2.0 * h));
        let hess = SymMatrix2::new(
            (e - 2.0 * u + w) / (h * h),
            (ne - nw - se + sw) / (4.0 * h * h),
            (n - 2.0 * u + s) / (h * h),
        );
        Ok((grad, hess))
    }

    /// `<D²u Du, Du>` at an inside cell.
    pub fn infinity_laplacian(&self, i: usize, j: usize) -> Result<f64> {
        let (grad, hess) = self.derivatives(i, j)?;
        Ok(hess.quad(grad))
    }

    /// Bilinear interpolation between the four surrounding cell centers, all
    /// of which must be inside.
    pub fn sample(&self, p: Point) -> Option<f64> {
        let g = &self.grid;
        let fx = (p.x - g.origin.x) / g.h - 0.5;
        let fy = (p.y - g.origin.y) / g.h - 0.5;
        let (i0, j0) = (fx.floor(), fy.floor());
        if i0 < 0.0 || j0 < 0.0 || i0 + 1.0 >= g.nx as f64 || j0 + 1.0 >= g.ny as f64 {
            return None;
        }
        let (tx, ty) = (fx - i0, fy - j0);
        let (i0, j0) = (i0 as usize, j0 as usize);
        let v00 = self.get(i0, j0);
        let v10 = self.get(i0 + 1, j0);
        let v01 = self.get(i0, j0 + 1);
        let v11 = self.get(i0 + 1, j0 + 1);
        let v = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11);
        v.is_finite().then_some(v)
    }

    pub fn max_inside(&self) -> f64 {
        self.values.iter().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }

    /// Text dump: header `nx ny h ox oy`, then `ny` rows of `nx` values.
    pub fn to_dump(&self) -> String {
        let g = &self.grid;
        let mut s = String::with_capacity(g.len() * 24 + 64);
        s.push_str(&g.header());
        s.push('\n');
        for j in 0..g.ny {
            for i in 0..g.nx {
                if i > 0 {
                    s.push(' ');
                }
                let v = self.get(i, j);
                if v.is_nan() {
                    s.push_str("nan");
                } else {
                    let _ = write!(s, "{v:.16e}");
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Parsed contents of a field dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: Point,
    pub values: Vec<f64>,
}

fn parse_f64(tok: &str) -> Result<f64> {
    if tok == "nan" {
        return Ok(f64::NAN);
    }
    tok.parse::<f64>().map_err(|e| Error::Parse(format!("bad number {tok:?}: {e}")))
}

impl FieldDump {
    pub fn parse(text: &str) -> Result<FieldDump> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty dump".into()))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(Error::Parse(format!("header needs 5 fields, got {}", toks.len())));
        }
        let nx: usize = toks[0].parse().map_err(|_| Error::Parse("bad nx".into()))?;
        let ny: usize = toks[1].parse().map_err(|_| Error::Parse("bad ny".into()))?;
        let h = parse_f64(toks[2])?;
        let origin = Point::new(parse_f64(toks[3])?, parse_f64(toks[4])?);
        let mut values = Vec::with_capacity(nx * ny);
        for (row, line) in lines.enumerate() {
            let before = values.len();
            for tok in line.split_whitespace() {
                values.push(parse_f64(tok)?);
            }
            if values.len() - before != nx {
                return Err(Error::Parse(format!("row {row} has {} values, expected {nx}", values.len() - before)));
            }
        }
        if values.len() != nx * ny {
            return Err(Error::Parse(format!("expected {} rows, got {}", ny, values.len() / nx.max(1))));
        }
        Ok(FieldDump { nx, ny, h, origin, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ShapeKind;

    fn disk_grid(h: f64) -> Arc<Grid> {
        let s = Shape::new(ShapeKind::Disk { center: Point::ORIGIN, radius: 1.0 }).unwrap();
        Grid::build(&s, h).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(SymMatrix2::identity().eigenvalues(), (1.0, 1.0));
        assert_eq!(SymMatrix2::new(-1.0, 0.0, 3.0).eigenvalues(), (-1.0, 3.0));
        assert_eq!(SymMatrix2::new(0.0, 1.0, 0.0).eigenvalues(), (-1.0, 1.0));
    }

    #[test]
    fn disk_grid_area_and_errors() {
        let g = disk_grid(0.25);
        let expected = std::f64::consts::PI / 0.0625;
        assert!((g.inside_count() as f64 - expected).abs() < 0.15 * expected);
        let s = Shape::new(ShapeKind::Disk { center: Point::ORIGIN, radius: 1.0 }).unwrap();
        assert!(matches!(Grid::build(&s, 0.3), Err(Error::Resolution { .. })));
    }

    #[test]
    fn quadratic_is_differentiated_exactly() {
        let g = disk_grid(1.0 / 16.0);
        let f = ScalarField::from_fn(&g, |p| p.x * p.x);
        let (i, j) = g.cell_at(Point::new(0.3, 0.1)).unwrap();
        let x = g.center(i, j).x;
        let (grad, hess) = f.derivatives(i, j).unwrap();
        assert!((grad.x - 2.0 * x).abs() < 1e-9 && grad.y.abs() < 1e-9);
        assert!((hess.xx - 2.0).abs() < 1e-9 && hess.xy.abs() < 1e-9 && hess.yy.abs() < 1e-9);
        let c = ScalarField::from_fn(&g, |_| 3.5);
        let (grad, hess) = c.derivatives(i, j).unwrap();
        assert_eq!((grad, hess), (Point::ORIGIN, SymMatrix2::default()));
    }

    #[test]
    fn infinity_laplacian_examples() {
        let g = disk_grid(1.0 / 32.0);
        let (i, j) = g.cell_at(Point::new(0.5, 0.2)).unwrap();
        let lin = ScalarField::from_fn(&g, |p| 2.0 * p.x - p.y);
        assert!(lin.infinity_laplacian(i, j).unwrap().abs() < 1e-9);
        let q = ScalarField::from_fn(&g, |p| 0.5 * (p.x * p.x + p.y * p.y));
        let c = g.center(i, j);
        assert!((q.infinity_laplacian(i, j).unwrap() - c.norm_sq()).abs() < 1e-9);
    }

    #[test]
    fn distance_gradient_near_unit() {
        let g = disk_grid(1.0 / 64.0);
        let d = ScalarField::exact_distance(&g);
        let (i, j) = g.cell_at(Point::new(0.5 + 1e-9, 1e-9)).unwrap();
        let (grad, _) = d.derivatives(i, j).unwrap();
        let exact = -g.center(i, j).normalized();
        assert!((grad - exact).norm() < 5e-3);
        assert!((grad.norm() - 1.0).abs() < 5e-3);
    }

    #[test]
    fn ghost_closure_is_linear_through_the_boundary() {
        let g = disk_grid(1.0 / 16.0);
        // u = 1 - x on the right boundary neighborhood vanishes at x = 1 along the axis.
        let f = ScalarField::from_fn(&g, |p| 1.0 - p.norm());
        let (i, j) = g.cell_at(Point::new(0.97, 1e-9)).unwrap();
        assert!(!g.is_inside(i + 1, j));
        let ghost = f.neighbor_value(i, j, 1, 0).unwrap();
        let x_next = g.center(i + 1, j).norm();
        assert!((ghost - (1.0 - x_next)).abs() < 1e-3);
    }

    #[test]
    fn dump_round_trips_bit_exactly() {
        let g = disk_grid(0.125);
        let f = ScalarField::from_fn(&g, |p| (p.x * 3.1).sin() / 7.0 + p.y);
        let text = f.to_dump();
        let d = FieldDump::parse(&text).unwrap();
        assert_eq!((d.nx, d.ny), (g.nx, g.ny));
        assert_eq!(d.h.to_bits(), g.h.to_bits());
        for (a, b) in d.values.iter().zip(f.values()) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
    }

    #[test]
    fn edt_matches_brute_force() {
        let (nx, ny) = (23, 17);
        let members: Vec<bool> = (0..nx * ny).map(|k| k % 37 == 5 || k == 100).collect();
        let d = squared_edt(&members, nx, ny);
        for k in 0..nx * ny {
            let (i, j) = ((k % nx) as f64, (k / nx) as f64);
            let brute = (0..nx * ny)
                .filter(|&m| members[m])
                .map(|m| {
                    let (a, b) = ((m % nx) as f64, (m / nx) as f64);
                    (a - i).powi(2) + (b - j).powi(2)
                })
                .fold(f64::INFINITY, f64::min);
            assert_eq!(d[k], brute);
        }
    }
}
