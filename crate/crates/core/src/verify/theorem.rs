use super::{
    kink_check, kink_samples, neumann_check, residual_classical_in, residual_normalized_in, shallow_witness,
    EnvelopeStats, Exclusion, KinkReport, KinkSample, NeumannReport, ResidualStats,
};
use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::ridge::{classify_sets, max_distance_cells, ridge_cells, Verdict};
use crate::web::{build_web, OperatorKind};
use serde::Serialize;
use std::sync::Arc;

/// Thresholds for [`theorem_verdict_with`]. Lengths are in units of `h`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TheoremOptions {
    pub band_cells: f64,
    pub grad_floor_cells: f64,
    pub residual_tol: f64,
    /// Neumann deviation allowed per unit `h`.
    pub neumann_c: f64,
    pub neumann_samples: usize,
    pub kink_tau_cells: f64,
    pub tol_scale: f64,
}

impl Default for TheoremOptions {
    fn default() -> Self {
        TheoremOptions {
            band_cells: 3.0,
            grad_floor_cells: 10.0,
            residual_tol: 0.1,
            neumann_c: 1.0,
            neumann_samples: 512,
            kink_tau_cells: 10.0,
            tol_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Check {
        Check { name: name.into(), passed: value <= tolerance, value, tolerance }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TheoremReport {
    pub shape: String,
    pub operator: OperatorKind,
    pub h: f64,
    pub verdict: Verdict,
    pub exists: bool,
    pub a: f64,
    pub ridge_distance: f64,
    pub residual: Option<ResidualStats>,
    pub envelope: Option<EnvelopeStats>,
    pub neumann: Option<NeumannReport>,
    pub kink: KinkReport,
    /// Strongest kink at a ridge point shallower than `ridge_distance - 4h`.
    pub witness: Option<KinkSample>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub fn theorem_verdict(grid: &Arc<Grid>, kind: OperatorKind) -> Result<TheoremReport> {
    theorem_verdict_with(grid, kind, &TheoremOptions::default())
}

/// Classifies the domain, then checks the web solution: residual, envelope,
/// Neumann and absence of shallow kinks when a solution should exist, a
/// shallow kink witness when it should not.
pub fn theorem_verdict_with(grid: &Arc<Grid>, kind: OperatorKind, opts: &TheoremOptions) -> Result<TheoremReport> {
    if kind == OperatorKind::PLimit {
        return Err(Error::Argument("theorem checks apply to the classical and normalized operators".into()));
    }
    let h = grid.h;
    let s = opts.tol_scale;
    let ridge = ridge_cells(grid);
    let verdict = classify_sets(&ridge, &max_distance_cells(grid), s)?;
    let exists = verdict.solution_exists();
    let mut sol = build_web(grid, kind)?;
    sol.note_verdict(&verdict);
    let ridge_distance = kind.ridge_distance(sol.a);
    let samples = kink_samples(&sol.field, &ridge);
    let kink = kink_check(&sol.field, &ridge);
    let tau = opts.kink_tau_cells * h;
    let witness = shallow_witness(&samples, ridge_distance - 4.0 * h, tau);

    let mut checks = Vec::new();
    let (mut residual, mut envelope, mut neumann) = (None, None, None);
    if exists {
        let ex = Exclusion::with_ridge(&ridge, opts.band_cells * h)?;
        let stats = match kind {
            OperatorKind::Classical => residual_classical_in(&sol, &ex)?,
            _ => {
                let (stats, env) = residual_normalized_in(&sol, &ex, opts.grad_floor_cells * h)?;
                checks.push(Check::at_most("envelope_upper", env.upper_slot, env.tol * s));
                checks.push(Check {
                    name: "envelope_lower".into(),
                    passed: env.lower_slot >= -env.tol * s,
                    value: env.lower_slot,
                    tolerance: -env.tol * s,
                });
                envelope = Some(env);
                stats
            }
        };
        checks.insert(0, Check::at_most("residual", stats.max_abs, opts.residual_tol * s));
        residual = Some(stats);
        let nm = neumann_check(&sol, opts.neumann_samples)?;
        checks.push(Check::at_most("neumann", nm.max_deviation, opts.neumann_c * h * s));
        neumann = Some(nm);
        checks.push(Check::at_most("shallow_kink", witness.map_or(0.0, |w| w.jump), tau));
    } else {
        checks.push(Check {
            name: "kink_witness".into(),
            passed: witness.is_some(),
            value: witness.map_or(0.0, |w| w.jump),
            tolerance: tau,
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(TheoremReport {
        shape: grid.shape().name().into(),
        operator: kind,
        h,
        verdict,
        exists,
        a: sol.a,
        ridge_distance,
        residual,
        envelope,
        neumann,
        kink,
        witness,
        checks,
        passed,
    })
}
