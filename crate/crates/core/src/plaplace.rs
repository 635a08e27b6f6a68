//! Minimization of the discrete p-torsion energy
//! `J_p(v) = ∫ (1/p)|∇v|^p - v` with zero boundary values, and the sweep
//! `p -> ∞` towards the distance function.
//!
//! The discrete gradient of a cell is taken from each of its four
//! one-sided quadrants and the energy density is the quadrant average.
//! Outside neighbours are replaced by the Dirichlet ghost at the exact
//! boundary crossing.

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::VecDeque;
use std::sync::Arc;

pub const MAX_P: f64 = 64.0;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PSolveConfig {
    pub p: f64,
    pub eps: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl PSolveConfig {
    pub fn new(p: f64) -> Self {
        PSolveConfig { p, eps: 1e-8, tol: 1e-11, max_iters: 20_000 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2.0..=MAX_P).contains(&self.p) {
            return Err(Error::Parameter(format!("p must lie in [2, {MAX_P}], got {}", self.p)));
        }
        if !(self.eps > 0.0 && self.eps <= 1e-6) {
            return Err(Error::Parameter(format!("eps must lie in (0, 1e-6], got {}", self.eps)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parameter(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// One-sided difference in one direction: `coef_self * u_c + coef_nb * u_nb`.
#[derive(Debug, Clone, Copy)]
struct Side {
    nb: Option<usize>,
    coef_self: f64,
    coef_nb: f64,
}

/// Directions east, west, north, south.
const DIRS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
/// Quadrants as (x side, y side) indices into `DIRS`.
const QUADS: [(usize, usize); 4] = [(0, 2), (0, 3), (1, 2), (1, 3)];

/// Discrete energy on the inside cells of a grid.
#[derive(Debug, Clone)]
pub struct Energy {
    grid: Arc<Grid>,
    cells: Vec<usize>,
    sides: Vec<[Side; 4]>,
    p: f64,
    eps: f64,
}

impl Energy {
    pub fn new(grid: &Arc<Grid>, p: f64, eps: f64) -> Self {
        let cells: Vec<usize> = (0..grid.len()).filter(|&k| grid.inside_mask()[k]).collect();
        let mut slot = vec![usize::MAX; grid.len()];
        for (n, &k) in cells.iter().enumerate() {
            slot[k] = n;
        }
        let h = grid.h;
        let sides = cells
            .iter()
            .map(|&k| {
                let (i, j) = grid.coords(k);
                let mut out = [Side { nb: None, coef_self: 0.0, coef_nb: 0.0 }; 4];
                for (d, &(di, dj)) in DIRS.iter().enumerate() {
                    let sigma = if di + dj > 0 { 1.0 } else { -1.0 };
                    out[d] = match grid.neighbor(i, j, di, dj) {
                        Some((ni, nj)) if grid.is_inside(ni, nj) => {
                            Side { nb: Some(slot[grid.index(ni, nj)]), coef_self: -sigma / h, coef_nb: sigma / h }
                        }
                        _ => {
                            let t = grid.crossing_fraction(i, j, di, dj).max(0.1);
                            Side { nb: None, coef_self: -sigma / (t * h), coef_nb: 0.0 }
                        }
                    };
                }
                out
            })
            .collect();
        Energy { grid: grid.clone(), cells, sides, p, eps }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn diff(&self, u: &[f64], n: usize, d: usize) -> f64 {
        let s = self.sides[n][d];
        s.coef_self * u[n] + s.nb.map_or(0.0, |m| s.coef_nb * u[m])
    }

    /// Quadrant gradients of cell `n`.
    fn quad_grads(&self, u: &[f64], n: usize) -> [(f64, f64); 4] {
        let dx = [self.diff(u, n, 0), self.diff(u, n, 1)];
        let dy = [self.diff(u, n, 2), self.diff(u, n, 3)];
        QUADS.map(|(a, b)| (dx[a], dy[b - 2]))
    }

    pub fn value(&self, u: &[f64]) -> f64 {
        let (p, e2) = (self.p, self.eps * self.eps);
        let h2 = self.grid.h * self.grid.h;
        h2 * chunked_sum(self.len(), |n| {
            let dens: f64 = self.quad_grads(u, n).iter().map(|(gx, gy)| (gx * gx + gy * gy + e2).powf(0.5 * p)).sum();
            0.25 * dens / p - u[n]
        })
    }

    /// Energy and its gradient with respect to the cell values.
    pub fn value_and_gradient(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let (p, e2) = (self.p, self.eps * self.eps);
        let h2 = self.grid.h * self.grid.h;
        // Per cell: energy term and d(energy)/d(difference) for each direction.
        let per: Vec<(f64, [f64; 4])> = (0..self.len())
            .into_par_iter()
            .map(|n| {
                let qs = self.quad_grads(u, n);
                let mut f = [0.0; 4];
                let mut dens = 0.0;
                for (&(a, b), &(gx, gy)) in QUADS.iter().zip(qs.iter()) {
                    let m = gx * gx + gy * gy + e2;
                    dens += m.powf(0.5 * p);
                    let w = 0.25 * m.powf(0.5 * p - 1.0);
                    f[a] += w * gx;
                    f[b] += w * gy;
                }
                (0.25 * dens / p - u[n], f)
            })
            .collect();
        let value = h2 * per.iter().map(|(e, _)| e).sum::<f64>();
        let grad = (0..self.len())
            .into_par_iter()
            .map(|n| {
                let mut g = -1.0;
                for d in 0..4 {
                    let s = self.sides[n][d];
                    g += per[n].1[d] * s.coef_self;
                    // The neighbour in direction d sees this cell in the opposite direction.
                    if let Some(m) = s.nb {
                        let back = d ^ 1;
                        g += per[m].1[back] * self.sides[m][back].coef_nb;
                    }
                }
                h2 * g
            })
            .collect();
        (value, grad)
    }

    /// Cell values of a field, in solver order.
    pub fn gather(&self, field: &ScalarField) -> Vec<f64> {
        self.cells.iter().map(|&k| field.values()[k]).collect()
    }

    pub fn scatter(&self, u: &[f64]) -> Result<ScalarField> {
        let mut values = vec![f64::NAN; self.grid.len()];
        for (&k, &v) in self.cells.iter().zip(u) {
            values[k] = v;
        }
        ScalarField::new(self.grid.clone(), values)
    }

    /// Discrete `‖∇u‖_q` over the quadrant gradients.
    pub fn grad_norm(&self, u: &[f64], q: f64) -> f64 {
        let h2 = self.grid.h * self.grid.h;
        let sum = chunked_sum(self.len(), |n| {
            0.25 * self.quad_grads(u, n).iter().map(|(gx, gy)| gx.hypot(*gy).powf(q)).sum::<f64>()
        });
        (h2 * sum).powf(1.0 / q)
    }

    /// Largest quadrant gradient magnitude.
    pub fn grad_sup(&self, u: &[f64]) -> f64 {
        (0..self.len())
            .into_par_iter()
            .map(|n| self.quad_grads(u, n).iter().map(|(gx, gy)| gx.hypot(*gy)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }

    /// Area of the inside cells.
    pub fn measure(&self) -> f64 {
        self.len() as f64 * self.grid.h * self.grid.h
    }
}

/// `J_p` of a field on its own grid.
pub fn energy(field: &ScalarField, p: f64) -> Result<f64> {
    if p < 2.0 {
        return Err(Error::Parameter(format!("p must be at least 2, got {p}")));
    }
    let e = Energy::new(field.grid(), p, 1e-8);
    Ok(e.value(&e.gather(field)))
}

#[derive(Debug, Clone)]
pub struct PSolution {
    pub field: ScalarField,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Energy after each accepted step, starting with the initial guess.
    pub history: Vec<f64>,
}

/// Sum of `f(0..n)` with a fixed association order, independent of the
/// thread schedule.
fn chunked_sum<F: Fn(usize) -> f64 + Sync>(n: usize, f: F) -> f64 {
    const CHUNK: usize = 4096;
    let partial: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f).sum())
        .collect();
    partial.iter().sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    chunked_sum(a.len(), |i| a[i] * b[i])
}

/// Minimizes the discrete energy by limited-memory BFGS with Armijo
/// backtracking, starting from the best multiple of the distance function.
pub fn solve_p(grid: &Arc<Grid>, cfg: &PSolveConfig) -> Result<PSolution> {
    cfg.validate()?;
    let rho = grid.shape().inradius();
    if grid.h > rho / 16.0 * (1.0 + 1e-12) {
        return Err(Error::Resolution { h: grid.h, max: rho / 16.0 });
    }
    let en = Energy::new(grid, cfg.p, cfg.eps);
    let d = en.gather(&ScalarField::exact_distance(grid));
    let area_term = en.grad_norm(&d, cfg.p).powf(cfg.p);
    let mass = grid.h * grid.h * d.iter().sum::<f64>();
    let scale = (mass / area_term).powf(1.0 / (cfg.p - 1.0));
    let mut u: Vec<f64> = d.iter().map(|v| v * scale).collect();

    const MEMORY: usize = 10;
    const PATIENCE: usize = 5;
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let (mut f, mut g) = en.value_and_gradient(&u);
    let mut history = vec![f];
    let mut quiet = 0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let mut dir: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, r) in pairs.iter().rev() {
            let a = r * dot(s, &dir);
            dir.par_iter_mut().zip(y.par_iter()).for_each(|(q, yi)| *q -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            dir.par_iter_mut().for_each(|q| *q *= gamma);
        }
        for ((s, y, r), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = r * dot(y, &dir);
            dir.par_iter_mut().zip(s.par_iter()).for_each(|(q, si)| *q += (a - b) * si);
        }
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            pairs.clear();
            dir = g.iter().map(|x| -x).collect();
            slope = -dot(&g, &g);
        }
        if slope == 0.0 {
            converged = true;
            break;
        }
        let mut step = if pairs.is_empty() { 1.0 / dot(&g, &g).sqrt().max(1.0) } else { 1.0 };
        let accepted = loop {
            let trial: Vec<f64> = u.par_iter().zip(dir.par_iter()).map(|(x, q)| x + step * q).collect();
            let ft = en.value(&trial);
            if ft.is_finite() && ft <= f + 1e-4 * step * slope {
                break Some((trial, ft));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((un, fnew)) = accepted else {
            converged = quiet > 0 || pairs.is_empty();
            break;
        };
        let (_, gn) = en.value_and_gradient(&un);
        let s: Vec<f64> = un.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if pairs.len() == MEMORY {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        let decrease = (f - fnew) / fnew.abs().max(f64::MIN_POSITIVE);
        u = un;
        f = fnew;
        g = gn;
        history.push(f);
        if decrease < cfg.tol {
            quiet += 1;
            if quiet >= PATIENCE {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    Ok(PSolution { field: en.scatter(&u)?, energy: f, iterations, converged, history })
}

/// Radial solution of `-Δ_p u = 1` in the ball of radius `big_r` in `n` dimensions.
pub fn radial_exact_p(r: f64, big_r: f64, n: u32, p: f64) -> Result<f64> {
    if !(p > 1.0) || n == 0 || !(big_r > 0.0) {
        return Err(Error::Parameter(format!("invalid radial parameters R={big_r}, n={n}, p={p}")));
    }
    if !(0.0..=big_r).contains(&r) {
        return Err(Error::Domain(format!("radius {r} outside [0, {big_r}]")));
    }
    let e = p / (p - 1.0);
    Ok((p - 1.0) / p * (n as f64).powf(-1.0 / (p - 1.0)) * (big_r.powf(e) - r.powf(e)))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct GradNorm {
    pub q: f64,
    pub norm: f64,
    /// `p^{1/p} ‖u‖_∞^{1/p} |Ω|^{1/q}`, only for `q <= p`.
    pub bound: Option<f64>,
    pub satisfied: Option<bool>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub sup_err_vs_d: f64,
    pub energy: f64,
    pub energy_d: f64,
    pub grad_norms: Vec<GradNorm>,
    pub grad_sup: f64,
    pub center_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SweepRow {
    pub fn csv_header(qs: &[f64]) -> String {
        let mut s = "p,sup_err,energy,iters,flag".to_string();
        for q in qs {
            s.push_str(&format!(",grad_q{q}"));
        }
        s
    }

    pub fn csv(&self) -> String {
        let mut s = format!(
            "{},{:.12e},{:.12e},{},{}",
            self.p,
            self.sup_err_vs_d,
            self.energy,
            self.iterations,
            if self.converged { "converged" } else { "max_iters" }
        );
        for g in &self.grad_norms {
            s.push_str(&format!(",{:.12e}", g.norm));
        }
        s
    }

    pub fn bounds_hold(&self) -> bool {
        self.grad_norms.iter().all(|g| g.satisfied != Some(false))
    }
}

/// Solves for every `p` (increasing, each at least 2) and tabulates the
/// approach to the distance function.
pub fn p_sweep(grid: &Arc<Grid>, ps: &[f64], qs: &[f64]) -> Result<Vec<SweepRow>> {
    if ps.is_empty() || ps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("p values must be strictly increasing".into()));
    }
    if let Some(q) = qs.iter().find(|q| !(**q >= 1.0)) {
        return Err(Error::Argument(format!("q values must be at least 1, got {q}")));
    }
    ps.par_iter().map(|&p| sweep_row(grid, &PSolveConfig::new(p), qs)).collect()
}

fn sweep_row(grid: &Arc<Grid>, cfg: &PSolveConfig, qs: &[f64]) -> Result<SweepRow> {
    let sol = solve_p(grid, cfg)?;
    let en = Energy::new(grid, cfg.p, cfg.eps);
    let u = en.gather(&sol.field);
    let d = en.gather(&ScalarField::exact_distance(grid));
    let sup_err = u.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sup_u = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let area = en.measure();
    let p = cfg.p;
    let grad_norms = qs
        .iter()
        .map(|&q| {
            let norm = en.grad_norm(&u, q);
            let bound = (q <= p).then(|| p.powf(1.0 / p) * sup_u.powf(1.0 / p) * area.powf(1.0 / q));
            GradNorm { q, norm, bound, satisfied: bound.map(|b| norm <= b) }
        })
        .collect();
    let center_value = u.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    Ok(SweepRow {
        p,
        sup_err_vs_d: sup_err,
        energy: sol.energy,
        energy_d: en.value(&d),
        grad_norms,
        grad_sup: en.grad_sup(&u),
        center_value,
        iterations: sol.iterations,
        converged: sol.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;

    /// Radial profile from RK4 on the flux form in the variable `s`, `r = s^{p-1}`.
    fn radial_ode(big_r: f64, n: u32, p: f64, steps: usize) -> Vec<(f64, f64)> {
        let n = n as f64;
        let k = (p - 1.0) * (n - 1.0);
        let rhs = |s: f64, v: f64| -> (f64, f64) {
            let dv = -(p - 1.0) * s.powf(k + p - 2.0);
            let den = s.powf(k);
            let ratio = if den > 0.0 { (v.abs() / den).powf(1.0 / (p - 1.0)) } else { 0.0 };
            (-(p - 1.0) * s.powf(p - 2.0) * ratio, dv)
        };
        let top = big_r.powf(1.0 / (p - 1.0));
        let ds = top / steps as f64;
        let (mut s, mut u, mut v) = (0.0, 0.0, 0.0);
        let mut out = vec![(0.0, 0.0)];
        for _ in 0..steps {
            let (a1, b1) = rhs(s, v);
            let (a2, b2) = rhs(s + 0.5 * ds, v + 0.5 * ds * b1);
            let (a3, b3) = rhs(s + 0.5 * ds, v + 0.5 * ds * b2);
            let (a4, b4) = rhs(s + ds, v + ds * b3);
            u += ds / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            v += ds / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            s += ds;
            out.push((s.powf(p - 1.0), u));
        }
        let end = u;
        out.into_iter().map(|(r, u)| (r.min(big_r), u - end)).collect()
    }

    #[test]
    fn radial_formula_matches_ode() {
        for &p in &[2.0, 4.0, 8.0, 16.0, 32.0] {
            for &(big_r, n) in &[(1.0, 2), (9.0, 2), (1.0, 3)] {
                let prof = radial_ode(big_r, n, p, 10_000);
                let err = prof
                    .iter()
                    .step_by(97)
                    .map(|&(r, u)| (radial_exact_p(r, big_r, n, p).unwrap() - u).abs())
                    .fold(0.0, f64::max);
                assert!(err <= 1e-8, "p={p} R={big_r} n={n}: {err}");
            }
        }
    }

    #[test]
    fn radial_formula_values() {
        assert_eq!(radial_exact_p(1.0, 1.0, 2, 8.0).unwrap(), 0.0);
        assert!((radial_exact_p(0.0, 1.0, 2, 2.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((radial_exact_p(0.0, 1.0, 2, 8.0).unwrap() - 7.0 / 8.0 * 2f64.powf(-1.0 / 7.0)).abs() < 1e-15);
        assert!((radial_exact_p(0.0, 1.0, 2, 1e6).unwrap() - 1.0).abs() < 1e-4);
        assert!(radial_exact_p(1.5, 1.0, 2, 4.0).is_err());
        assert!(radial_exact_p(0.5, 1.0, 2, 1.0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = Grid::build(&catalog::disk(), 1.0 / 16.0).unwrap();
        let en = Energy::new(&g, 5.0, 1e-8);
        let u: Vec<f64> = en.gather(&ScalarField::from_fn(&g, |p| (1.0 - p.norm_sq()) * (0.3 + 0.2 * p.x - 0.1 * p.y * p.x)));
        let (_, grad) = en.value_and_gradient(&u);
        for &n in &[0, 17, en.len() / 2, en.len() - 1] {
            let e = 1e-7;
            let mut up = u.clone();
            let mut um = u.clone();
            up[n] += e;
            um[n] -= e;
            let fd = (en.value(&up) - en.value(&um)) / (2.0 * e);
            assert!((fd - grad[n]).abs() <= 1e-6 * fd.abs().max(1e-3), "{n}: {fd} vs {}", grad[n]);
        }
    }

    #[test]
    fn energy_examples() {
        let g = Grid::build(&catalog::disk(), 1.0 / 64.0).unwrap();
        let zero = ScalarField::from_fn(&g, |_| 0.0);
        assert!(energy(&zero, 4.0).unwrap().abs() < 1e-12);
        let d = ScalarField::exact_distance(&g);
        let pi = std::f64::consts::PI;
        let p = 32.0;
        assert!((energy(&d, p).unwrap() - (pi / p - pi / 3.0)).abs() < 0.03);
    }

    #[test]
    fn torsion_p2() {
        let g = Grid::build(&catalog::disk(), 1.0 / 64.0).unwrap();
        let sol = solve_p(&g, &PSolveConfig::new(2.0)).unwrap();
        assert!(sol.converged);
        let err = (0..g.len())
            .filter(|&k| g.inside_mask()[k])
            .map(|k| (sol.field.values()[k] - (1.0 - g.center_of(k).norm_sq()) / 4.0).abs())
            .fold(0.0, f64::max);
        assert!(err <= 5e-3, "{err}");
        assert!(sol.history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn config_validation() {
        assert!(PSolveConfig::new(1.5).validate().is_err());
        assert!(PSolveConfig::new(65.0).validate().is_err());
        assert!(PSolveConfig { eps: 1e-3, ..PSolveConfig::new(4.0) }.validate().is_err());
        let g = Grid::build(&catalog::disk(), 1.0 / 8.0).unwrap();
        assert!(matches!(solve_p(&g, &PSolveConfig::new(4.0)), Err(Error::Resolution { .. })));
    }
}
