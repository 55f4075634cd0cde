//! Residual norms against the classical field equations, and the drift
//! statistics used by the long-run checks.

use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};

use super::extended::ExtendedState;
use super::reduced::{ReducedSourcedState, SourceSpec};

/// L2 norms of the four Maxwell residuals over one time interval.
#[derive(Debug, Clone, Copy)]
pub struct MaxwellResiduals {
    /// `|| (E - E_prev)/dt - curl B_mid + J ||`
    pub ampere: f64,
    /// `|| (B - B_prev)/dt + curl E_mid ||`
    pub faraday: f64,
    /// `|| div E - rho ||`
    pub gauss: f64,
    /// `|| div B ||`
    pub div_b: f64,
}

/// Evaluate the residuals of the four Maxwell equations from two field
/// snapshots `dt` apart. `E`, `B`, `rho` are the current-time data,
/// `J` the current over the interval (its midpoint value, or the applied
/// impulse divided by `dt`). Curl terms use midpoint field averages, so
/// smooth second-order trajectories give `O(dt^2)` residuals.
pub fn maxwell_residuals(
    e: &VectorField,
    b: &VectorField,
    rho: &ScalarField,
    j: &VectorField,
    e_prev: &VectorField,
    b_prev: &VectorField,
    dt: f64,
) -> Result<MaxwellResiduals> {
    let grid = e.grid();
    grid.check_same(b.grid(), "maxwell_residuals")?;
    grid.check_same(rho.grid(), "maxwell_residuals")?;
    grid.check_same(j.grid(), "maxwell_residuals")?;
    grid.check_same(e_prev.grid(), "maxwell_residuals")?;
    grid.check_same(b_prev.grid(), "maxwell_residuals")?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Precondition(format!(
            "maxwell_residuals needs dt > 0, got {dt}"
        )));
    }

    let e_mid = e.add(e_prev)?.scaled(0.5);
    let b_mid = b.add(b_prev)?.scaled(0.5);

    let mut ampere = e.sub(e_prev)?.scaled(1.0 / dt);
    ampere.scaled_add_assign(-1.0, &b_mid.curl()?);
    ampere.scaled_add_assign(1.0, j);

    let mut faraday = b.sub(b_prev)?.scaled(1.0 / dt);
    faraday.scaled_add_assign(1.0, &e_mid.curl()?);

    Ok(MaxwellResiduals {
        ampere: ampere.l2_norm(),
        faraday: faraday.l2_norm(),
        gauss: e.div()?.sub(rho)?.l2_norm(),
        div_b: b.div()?.l2_norm(),
    })
}

/// One diagnostic row of a field run, in the order the CSV writer emits.
///
/// Norm conventions: `lorentz` is the max-norm of `div A - eta` (the
/// quantity the conservation claims are stated in); the four equation
/// residuals are L2 norms from [`maxwell_residuals`]. Rows computed at a
/// cadence use the step pair ending at `time`. `lorentz` is NaN for
/// reduced runs without the potential track.
#[derive(Debug, Clone, Copy)]
pub struct FieldDiagnostics {
    pub time: f64,
    pub hamiltonian: f64,
    pub lorentz: f64,
    pub gauss: f64,
    pub div_b: f64,
    pub faraday: f64,
    pub ampere: f64,
}

impl FieldDiagnostics {
    pub const CSV_HEADER: &'static str = "t,H,lorentz,gauss,divB,faraday,ampere";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.time,
            self.hamiltonian,
            self.lorentz,
            self.gauss,
            self.div_b,
            self.faraday,
            self.ampere
        )
    }
}

/// Row for an extended-system step pair `(prev, curr)`. The Gauss column
/// measures conservation of the momentum map against the fixed initial
/// charge `div E(0)`; the vacuum flow carries no current.
pub fn extended_row(
    prev: &ExtendedState,
    curr: &ExtendedState,
    charge0: &ScalarField,
) -> Result<FieldDiagnostics> {
    let (e0, b0) = prev.em_fields()?;
    let (e1, b1) = curr.em_fields()?;
    let dt = curr.time() - prev.time();
    let res = maxwell_residuals(
        &e1,
        &b1,
        charge0,
        &VectorField::zeros(curr.grid()),
        &e0,
        &b0,
        dt,
    )?;
    Ok(FieldDiagnostics {
        time: curr.time(),
        hamiltonian: curr.hamiltonian()?,
        lorentz: curr.lorentz_residual()?.linf_norm(),
        gauss: res.gauss,
        div_b: res.div_b,
        faraday: res.faraday,
        ampere: res.ampere,
    })
}

/// Row for a reduced-system step pair. `J` is taken as the applied
/// impulse over the step divided by `dt` — exactly what moved `F`.
pub fn reduced_row(
    prev: &ReducedSourcedState,
    curr: &ReducedSourcedState,
    src: &SourceSpec,
    lorentz: Option<f64>,
) -> Result<FieldDiagnostics> {
    let e0 = prev.electric_field()?;
    let e1 = curr.electric_field()?;
    let dt = curr.time() - prev.time();
    let j = src.impulse(prev.time(), curr.time()).scaled(1.0 / dt);
    let res = maxwell_residuals(&e1, curr.b(), &src.rho(curr.time()), &j, &e0, prev.b(), dt)?;
    Ok(FieldDiagnostics {
        time: curr.time(),
        hamiltonian: curr.hamiltonian()?,
        lorentz: lorentz.unwrap_or(f64::NAN),
        gauss: res.gauss,
        div_b: res.div_b,
        faraday: res.faraday,
        ampere: res.ampere,
    })
}

/// Least-squares slope of `y` against `x`. The energy-drift criterion is
/// stated on this: a symplectic stepper's energy oscillates but the fitted
/// slope stays at roundoff.
pub fn fit_drift_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "drift fit needs matched series");
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
