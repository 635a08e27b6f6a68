//! Numerical checks of the equations: interior residuals, the Neumann
//! condition, envelope inequalities, ridge kinks and gradient trajectories.

mod kink;
mod neumann;
mod residual;
mod theorem;
mod trajectory;

pub use kink::{kink_check, kink_samples, shallow_witness, KinkReport, KinkSample};
pub use neumann::{neumann_check, NeumannReport};
pub use residual::*;
pub use theorem::{theorem_verdict, theorem_verdict_with, Check, TheoremOptions, TheoremReport};
pub use trajectory::{trajectory, trajectory_with, GradientField, Trajectory, TrajectoryPoint};
