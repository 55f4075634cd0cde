//! Hamiltonian Maxwell dynamics on periodic grids.
//!
//! Two formulations of the same physics:
//!
//! * [`extended`] — the vacuum field phase space enlarged by a scalar pair
//!   `(eta, W)` so that the divergence constraint `div(A) - eta = const`
//!   becomes an honest conserved quantity of the flow instead of a side
//!   condition.  Integrated with a leapfrog that conserves the constraint
//!   residual to machine precision.
//! * [`reduced`] — the sourced system after the gauge degrees of freedom are
//!   quotiented out: a solenoidal potential `S`, magnetic field `B`, the
//!   scalar pair, and a longitudinal electric component `F` carrying the
//!   charge density.  Integrated with Strang splitting.
//!
//! [`diagnostics`] evaluates the classical Maxwell residuals and energy-drift
//! slopes used by the long-run checks.

pub mod diagnostics;
pub mod extended;
pub mod reduced;

pub use diagnostics::{
    extended_row, fit_drift_slope, maxwell_residuals, reduced_row, FieldDiagnostics,
    MaxwellResiduals,
};
pub use extended::{hamiltonian_vacuum, ExtendedRun, ExtendedState, ExtendedTangent};
pub use reduced::{
    init_f_from_charge, reconstruct_s_from_b, ReducedRun, ReducedSourcedState, ReducedTangent,
    SourceSpec,
};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Shared step-size gate. Negative `dt` is allowed (it runs the exact
/// time-reversed flow, which the reversibility tests rely on); zero, NaN and
/// steps beyond the backend stability bound are not.
pub(crate) fn check_dt(grid: &Grid, dt: f64) -> Result<()> {
    let limit = grid.stable_dt();
    if !dt.is_finite() || dt == 0.0 || dt.abs() > limit {
        return Err(Error::StepSize { dt, limit });
    }
    Ok(())
}
