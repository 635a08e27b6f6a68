use crate::error::{Error, Result};
use crate::web::WebSolution;
use serde::Serialize;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct NeumannReport {
    /// `max |(-∂u/∂ν) - a|` over the samples used.
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub a: f64,
    pub samples_used: usize,
    pub samples_excluded: usize,
}

/// Inward normal slope at each of `n` boundary samples, from the quadratic
/// through `u = 0` on the boundary and bilinear samples at depths `2h` and
/// `3h`. Samples within `4h` of a corner are excluded.
pub fn neumann_check(sol: &WebSolution, n: usize) -> Result<NeumannReport> {
    if n < 32 {
        return Err(Error::Parameter(format!("need at least 32 boundary samples, got {n}")));
    }
    let grid = sol.field.grid();
    let shape = grid.shape();
    let h = grid.h;
    let mut devs = Vec::with_capacity(n);
    let mut excluded = 0;
    for (x, normal) in shape.boundary_sample(n)? {
        if shape.corners().iter().any(|c| c.dist(x) < 4.0 * h) {
            excluded += 1;
            continue;
        }
        let inward = -normal;
        let a2 = sol.field.sample(x + inward * (2.0 * h));
        let a3 = sol.field.sample(x + inward * (3.0 * h));
        match (a2, a3) {
            (Some(a2), Some(a3)) => {
                let slope = (9.0 * a2 - 4.0 * a3) / (6.0 * h);
                devs.push((slope - sol.a).abs());
            }
            _ => excluded += 1,
        }
    }
    if devs.is_empty() {
        return Err(Error::Degenerate("no usable boundary samples".into()));
    }
    Ok(NeumannReport {
        max_deviation: devs.iter().fold(0.0f64, |m, &d| m.max(d)),
        mean_deviation: devs.iter().sum::<f64>() / devs.len() as f64,
        a: sol.a,
        samples_used: devs.len(),
        samples_excluded: excluded,
    })
}
