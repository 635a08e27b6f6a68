//! First-order fast marching for `|∇u| = 1` with `u = 0` on the boundary.

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Far,
    Trial,
    Seed,
    Known,
}

/// Output of a marching run with the sequence of accepted values.
#[derive(Debug, Clone)]
pub struct MarchTrace {
    pub field: ScalarField,
    /// `(cell index, value)` in acceptance order.
    pub accepted: Vec<(usize, f64)>,
}

/// Two-neighbor upwind solve of `|∇u| = 1`.
fn upwind(a: Option<f64>, b: Option<f64>, h: f64) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => {
            if (a - b).abs() >= h {
                a.min(b) + h
            } else {
                0.5 * (a + b + (2.0 * h * h - (a - b) * (a - b)).sqrt())
            }
        }
        (Some(a), None) | (None, Some(a)) => a + h,
        (None, None) => f64::INFINITY,
    }
}

/// Distance field by fast marching, seeded with exact distances on the
/// inside cells that touch the outside.
pub fn fast_march(grid: &Arc<Grid>) -> Result<ScalarField> {
    fast_march_traced(grid).map(|t| t.field)
}

pub fn fast_march_traced(grid: &Arc<Grid>) -> Result<MarchTrace> {
    let components = grid.inside_components();
    if components != 1 {
        return Err(Error::Topology { components });
    }
    let n = grid.len();
    let h = grid.h;
    let mut value = vec![f64::INFINITY; n];
    let mut state = vec![State::Far; n];
    let mut heap = BinaryHeap::new();
    for k in 0..n {
        if !grid.inside_mask()[k] {
            continue;
        }
        let (i, j) = grid.coords(k);
        let on_band = crate::fields::NEIGHBORS8.iter().any(|&(di, dj)| {
            grid.neighbor(i, j, di, dj).is_none_or(|(ni, nj)| !grid.is_inside(ni, nj))
        });
        if on_band {
            value[k] = grid.depths()[k];
            state[k] = State::Seed;
            heap.push(Reverse(Key(value[k], k)));
        }
    }
    let mut accepted = Vec::with_capacity(grid.inside_count());
    while let Some(Reverse(Key(v, k))) = heap.pop() {
        if state[k] == State::Known || v > value[k] {
            continue;
        }
        state[k] = State::Known;
        accepted.push((k, v));
        let (i, j) = grid.coords(k);
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let Some((ni, nj)) = grid.neighbor(i, j, di, dj) else { continue };
            let m = grid.index(ni, nj);
            if !grid.inside_mask()[m] || matches!(state[m], State::Known | State::Seed) {
                continue;
            }
            let known = |a: isize, b: isize| -> Option<f64> {
                let (p, q) = grid.neighbor(ni, nj, a, b)?;
                let idx = grid.index(p, q);
                (state[idx] == State::Known).then_some(value[idx])
            };
            let ax = match (known(1, 0), known(-1, 0)) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            let ay = match (known(0, 1), known(0, -1)) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            let cand = upwind(ax, ay, h);
            if cand < value[m] {
                value[m] = cand;
                state[m] = State::Trial;
                heap.push(Reverse(Key(cand, m)));
            }
        }
    }
    let field = ScalarField::new(grid.clone(), value)?;
    Ok(MarchTrace { field, accepted })
}

/// Largest deviation of a field from the exact distance over inside cells.
pub fn sup_error_vs_exact(field: &ScalarField) -> f64 {
    let g = field.grid();
    field
        .values()
        .iter()
        .zip(g.depths())
        .zip(g.inside_mask())
        .filter(|(_, &ins)| ins)
        .map(|((v, d), _)| (v - d).abs())
        .fold(0.0, f64::max)
}
