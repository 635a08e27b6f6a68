//! Distance queries for an axis-aligned ellipse `(x/a)^2 + (y/b)^2 = 1`, `a >= b`,
//! in its own centered frame.

use super::Point;
use std::f64::consts::{FRAC_PI_2, TAU};

fn point(a: f64, b: f64, theta: f64) -> Point {
    Point::new(a * theta.cos(), b * theta.sin())
}

/// Half the derivative of the squared distance from `x` to `point(theta)`.
fn stationarity(a: f64, b: f64, x: Point, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (b * b - a * a) * s * c + a * x.x * s - b * x.y * c
}

fn stationarity_dtheta(a: f64, b: f64, x: Point, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (b * b - a * a) * (c * c - s * s) + a * x.x * c + b * x.y * s
}

/// Root of the stationarity condition in `(lo, hi)` where it changes sign from
/// negative to positive. Newton steps safeguarded by bisection.
fn bracketed_root(a: f64, b: f64, x: Point, mut lo: f64, mut hi: f64, guess: f64) -> f64 {
    let mut t = guess.clamp(lo, hi);
    for _ in 0..200 {
        let g = stationarity(a, b, x, t);
        if g == 0.0 {
            return t;
        }
        if g < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let dg = stationarity_dtheta(a, b, x, t);
        let mut next = t - g / dg;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-16 * (1.0 + t.abs()) || hi - lo <= 1e-16 {
            return next;
        }
        t = next;
    }
    t
}

/// Unsigned distance from `x` to the ellipse and the nearest boundary point.
pub fn nearest(a: f64, b: f64, x: Point) -> (f64, Point) {
    let (sx, sy) = (x.x.signum(), x.y.signum());
    let q = Point::new(x.x.abs(), x.y.abs());
    let foot = if q.y == 0.0 {
        let focal = (a * a - b * b) / a;
        if q.x < focal {
            let c = a * q.x / (a * a - b * b);
            Point::new(a * c, b * (1.0 - c * c).max(0.0).sqrt())
        } else {
            Point::new(a, 0.0)
        }
    } else if q.x == 0.0 {
        Point::new(0.0, b)
    } else {
        let guess = (a * q.y).atan2(b * q.x);
        point(a, b, bracketed_root(a, b, q, 0.0, FRAC_PI_2, guess))
    };
    let foot = Point::new(foot.x * if sx < 0.0 { -1.0 } else { 1.0 }, foot.y * if sy < 0.0 { -1.0 } else { 1.0 });
    (x.dist(foot), foot)
}

pub fn contains(a: f64, b: f64, x: Point) -> bool {
    (x.x / a).powi(2) + (x.y / b).powi(2) < 1.0
}

pub fn signed_distance(a: f64, b: f64, x: Point) -> f64 {
    let (d, _) = nearest(a, b, x);
    if contains(a, b, x) {
        d
    } else {
        -d
    }
}

/// All local minima of the distance from `x` along the ellipse, as
/// `(boundary point, distance)` pairs. Found by sampling the parameter circle
/// and refining each sampled minimum on its bracket.
pub fn local_minima(a: f64, b: f64, x: Point, samples: usize) -> Vec<(Point, f64)> {
    let n = samples.max(16);
    let step = TAU / n as f64;
    let f: Vec<f64> = (0..n).map(|k| (point(a, b, k as f64 * step) - x).norm_sq()).collect();
    let mut out = Vec::new();
    for k in 0..n {
        let prev = f[(k + n - 1) % n];
        let next = f[(k + 1) % n];
        if f[k] <= prev && f[k] < next {
            let lo = (k as f64 - 1.0) * step;
            let hi = (k as f64 + 1.0) * step;
            let t = if stationarity(a, b, x, lo) < 0.0 && stationarity(a, b, x, hi) > 0.0 {
                bracketed_root(a, b, x, lo, hi, k as f64 * step)
            } else {
                k as f64 * step
            };
            let p = point(a, b, t);
            out.push((p, p.dist(x)));
        }
    }
    out
}

/// Arclength-uniform parameters along the ellipse.
pub fn arclength_table(a: f64, b: f64, resolution: usize) -> (Vec<f64>, f64) {
    let n = resolution.max(64);
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    let mut prev = point(a, b, 0.0);
    let mut total = 0.0;
    for k in 1..=n {
        let p = point(a, b, TAU * k as f64 / n as f64);
        total += p.dist(prev);
        cum.push(total);
        prev = p;
    }
    (cum, total)
}

/// Parameter at arclength fraction `frac` in `[0, 1)` using a table from
/// [`arclength_table`].
pub fn parameter_at(table: &[f64], total: f64, frac: f64) -> f64 {
    let target = frac.rem_euclid(1.0) * total;
    let n = table.len() - 1;
    let k = table.partition_point(|&c| c <= target).clamp(1, n);
    let (c0, c1) = (table[k - 1], table[k]);
    let w = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
    TAU * ((k - 1) as f64 + w) / n as f64
}

pub fn point_at(a: f64, b: f64, theta: f64) -> Point {
    point(a, b, theta)
}

/// Outward unit normal at parameter `theta`.
pub fn normal_at(a: f64, b: f64, theta: f64) -> Point {
    Point::new(b * theta.cos(), a * theta.sin()).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(a: f64, b: f64, x: Point) -> f64 {
        (0..200_000)
            .map(|k| point(a, b, TAU * k as f64 / 200_000.0).dist(x))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn matches_dense_sampling() {
        for &(px, py) in &[(0.3, 0.2), (1.2, 0.05), (-1.9, 0.0), (0.0, -0.5), (2.5, 1.5), (1.0, 0.0), (-0.4, 0.9)] {
            let x = Point::new(px, py);
            let (d, foot) = nearest(2.0, 1.0, x);
            assert!((d - brute(2.0, 1.0, x)).abs() < 1e-9, "{x:?}");
            assert!(((foot.x / 2.0).powi(2) + foot.y.powi(2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn center_has_two_minima() {
        let m = local_minima(2.0, 1.0, Point::ORIGIN, 512);
        assert_eq!(m.len(), 2);
        for (p, d) in m {
            assert!((d - 1.0).abs() < 1e-12 && p.x.abs() < 1e-9);
        }
    }
}
