//! Explicit web-function solutions: profiles of the boundary distance.

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField};
use crate::ridge::Verdict;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Classical,
    Normalized,
    PLimit,
}

impl OperatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorKind::Classical => "classical",
            OperatorKind::Normalized => "normalized",
            OperatorKind::PLimit => "plimit",
        }
    }

    /// Neumann constant attached to an inradius.
    pub fn constant_for(self, rho: f64) -> f64 {
        match self {
            OperatorKind::Classical => (3.0 * rho).cbrt(),
            OperatorKind::Normalized => rho,
            OperatorKind::PLimit => 1.0,
        }
    }

    /// Distance from the boundary to the ridge implied by the constant `a`.
    pub fn ridge_distance(self, a: f64) -> f64 {
        match self {
            OperatorKind::Classical => a.powi(3) / 3.0,
            OperatorKind::Normalized => a,
            OperatorKind::PLimit => f64::INFINITY,
        }
    }

    pub fn profile(self, d: f64, a: f64) -> Result<f64> {
        match self {
            OperatorKind::Classical => profile_classical(d, a),
            OperatorKind::Normalized => profile_normalized(d, a),
            OperatorKind::PLimit if d >= 0.0 => Ok(d),
            OperatorKind::PLimit => Err(Error::Domain(format!("negative distance {d}"))),
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "classical" => Ok(OperatorKind::Classical),
            "normalized" => Ok(OperatorKind::Normalized),
            "plimit" | "p-limit" => Ok(OperatorKind::PLimit),
            _ => Err(Error::Argument(format!("unknown operator {s:?}"))),
        }
    }
}

/// `(a^4 - (a^3 - 3d)^{4/3}) / 4` on `0 <= d <= a^3/3`.
pub fn profile_classical(d: f64, a: f64) -> Result<f64> {
    check_a(a)?;
    let top = a.powi(3) / 3.0;
    if !(0.0..=top).contains(&d) {
        return Err(Error::Domain(format!("distance {d} outside [0, {top}]")));
    }
    let inner = (a.powi(3) - 3.0 * d).max(0.0);
    Ok(0.25 * (a.powi(4) - inner * inner.cbrt()))
}

/// `d (2a - d) / 2` on `0 <= d <= a`.
pub fn profile_normalized(d: f64, a: f64) -> Result<f64> {
    check_a(a)?;
    if !(0.0..=a).contains(&d) {
        return Err(Error::Domain(format!("distance {d} outside [0, {a}]")));
    }
    Ok(0.5 * d * (2.0 * a - d))
}

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("constant a must be positive, got {a}")))
    }
}

#[derive(Debug, Clone)]
pub struct WebSolution {
    pub kind: OperatorKind,
    pub a: f64,
    pub rho: f64,
    pub field: ScalarField,
    /// False when `a` was overridden instead of taken from the inradius.
    pub theorem: bool,
    pub warnings: Vec<String>,
}

impl WebSolution {
    /// Records a warning when the domain fails the existence criterion.
    pub fn note_verdict(&mut self, v: &Verdict) {
        if !v.solution_exists() && self.kind != OperatorKind::PLimit {
            self.warnings.push(format!(
                "deepest set and ridge differ (hausdorff {:.6}); field is not a solution",
                v.hausdorff_mr
            ));
        }
    }
}

/// Web solution with the constant set from the inradius.
pub fn build_web(grid: &Arc<Grid>, kind: OperatorKind) -> Result<WebSolution> {
    let rho = grid.shape().inradius();
    build(grid, kind, kind.constant_for(rho), true)
}

/// Web field for an arbitrary constant; never a theorem instance.
pub fn build_web_with_constant(grid: &Arc<Grid>, kind: OperatorKind, a: f64) -> Result<WebSolution> {
    check_a(a)?;
    if kind == OperatorKind::PLimit && a != 1.0 {
        return Err(Error::Argument("the limit profile has a = 1".into()));
    }
    build(grid, kind, a, false)
}

fn build(grid: &Arc<Grid>, kind: OperatorKind, a: f64, theorem: bool) -> Result<WebSolution> {
    let rho = grid.shape().inradius();
    let top = kind.ridge_distance(a);
    let slack = 2.0 * grid.h;
    let mut values = vec![f64::NAN; grid.len()];
    for (k, v) in values.iter_mut().enumerate() {
        if !grid.inside_mask()[k] {
            continue;
        }
        let mut d = grid.depths()[k];
        if d > top && d <= top + slack {
            d = top;
        }
        *v = kind.profile(d, a)?;
    }
    let field = ScalarField::new(grid.clone(), values)?;
    Ok(WebSolution { kind, a, rho, field, theorem, warnings: Vec::new() })
}
