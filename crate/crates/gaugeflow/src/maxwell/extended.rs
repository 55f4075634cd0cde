//! The extended vacuum system `(A, Y; eta, W)`.
//!
//! The Hamiltonian
//!
//! ```text
//! H = 1/2 [ |Y - grad W|^2 + |curl A|^2 + |eta|^2 ]
//! ```
//!
//! splits into a momentum part `T(Y, W)` and a position part `V(A, eta)`,
//! so kick–drift–kick leapfrog applies.  The drift advances `A` and `eta`
//! by the *same* velocity field `Y - grad W`, which makes the residual
//! `div(A) - eta` a discrete invariant of the stepper: choosing
//! `eta(0) = div A(0)` enforces the Lorentz gauge condition
//! `dW/dt + div A = 0` for the whole run, not just at t = 0.
//!
//! Both spatial backends diagonalize over Fourier modes (the centered
//! difference is a circulant, so it does too, with symbol `sin(kh)/h`).
//! [`ExtendedRun`] exploits that: it holds the spectra of all four fields
//! and advances them mode by mode with zero transforms per step, returning
//! to physical space only when a snapshot is requested.  Long runs cost
//! one fused pass over the mode arrays per step.

use crate::error::{Error, Result};
use crate::grid::spectral::Cx;
use crate::grid::{Grid, ScalarField, VectorField};
use crate::tol;

use super::check_dt;

/// Canonical state of the extended vacuum system.
///
/// Positions are `(A, eta)`, momenta `(Y, W)`; `Y = -E` and `B = curl A`.
#[derive(Debug, Clone)]
pub struct ExtendedState {
    a: VectorField,
    y: VectorField,
    eta: ScalarField,
    w: ScalarField,
    time: f64,
    lorentz_consistent: bool,
}

/// Time derivative of an [`ExtendedState`], as plain fields.
#[derive(Debug, Clone)]
pub struct ExtendedTangent {
    pub a: VectorField,
    pub y: VectorField,
    pub eta: ScalarField,
    pub w: ScalarField,
}

/// Energy of the plain vacuum system in the `(A, Y)` chart:
/// `1/2 [ (Y,Y) + (curl A, curl A) + (div A, div A) ]`.
///
/// The divergence term is *not* gauge invariant (shifting `A` by `grad psi`
/// changes it unless `psi` is harmonic); it is the price of working above
/// the quotient, and the reason the extended chart exists.
pub fn hamiltonian_vacuum(a: &VectorField, y: &VectorField) -> Result<f64> {
    a.grid().check_same(y.grid(), "hamiltonian_vacuum")?;
    let curl = a.curl()?;
    let div = a.div()?;
    Ok(0.5 * (y.inner(y)? + curl.inner(&curl)? + div.inner(&div)?))
}

impl ExtendedState {
    /// Build a state from the four fields. The Lorentz flag is measured:
    /// it is set iff `||div A - eta||_2 < 1e-8 * scale` right now.
    pub fn new(
        a: VectorField,
        y: VectorField,
        eta: ScalarField,
        w: ScalarField,
        time: f64,
    ) -> Result<Self> {
        let grid = a.grid().clone();
        grid.check_same(y.grid(), "ExtendedState")?;
        grid.check_same(eta.grid(), "ExtendedState")?;
        grid.check_same(w.grid(), "ExtendedState")?;
        if !time.is_finite() {
            return Err(Error::NonFinite {
                what: "ExtendedState time".into(),
            });
        }
        let mut s = ExtendedState {
            a,
            y,
            eta,
            w,
            time,
            lorentz_consistent: false,
        };
        let residual = s.lorentz_residual()?.l2_norm();
        s.lorentz_consistent = residual < tol::LORENTZ_CONSISTENT_REL * s.scale();
        Ok(s)
    }

    /// Build a state with `eta := div(A)`, making the Lorentz residual
    /// vanish identically (and stay zero along the flow).
    pub fn lorentz_consistent(
        a: VectorField,
        y: VectorField,
        w: ScalarField,
        time: f64,
    ) -> Result<Self> {
        let eta = a.div()?;
        Self::new(a, y, eta, w, time)
    }

    /// Zero state at time 0.
    pub fn zeros(grid: &Grid) -> Self {
        ExtendedState {
            a: VectorField::zeros(grid),
            y: VectorField::zeros(grid),
            eta: ScalarField::zeros(grid),
            w: ScalarField::zeros(grid),
            time: 0.0,
            lorentz_consistent: true,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.a.grid()
    }

    pub fn a(&self) -> &VectorField {
        &self.a
    }

    pub fn y(&self) -> &VectorField {
        &self.y
    }

    pub fn eta(&self) -> &ScalarField {
        &self.eta
    }

    pub fn w(&self) -> &ScalarField {
        &self.w
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Whether `div(A) = eta` held (to tolerance) when this state was built.
    /// The stepper preserves the property, so the flag survives stepping.
    pub fn is_lorentz_consistent(&self) -> bool {
        self.lorentz_consistent
    }

    /// Momentum of the un-extended vacuum chart, `Y + grad W`.
    pub fn y_tilde(&self) -> Result<VectorField> {
        self.y.add(&self.w.grad()?)
    }

    /// Tolerance scale: `max(1, largest |sample|)` over all eight arrays.
    pub fn scale(&self) -> f64 {
        tol::scale_of(
            self.a
                .linf_norm()
                .max(self.y.linf_norm())
                .max(self.eta.linf_norm())
                .max(self.w.linf_norm()),
        )
    }

    /// Extended energy `1/2 [ |Y - grad W|^2 + |curl A|^2 + |eta|^2 ]`.
    pub fn hamiltonian(&self) -> Result<f64> {
        let v = self.y.sub(&self.w.grad()?)?;
        let curl = self.a.curl()?;
        Ok(0.5 * (v.inner(&v)? + curl.inner(&curl)? + self.eta.inner(&self.eta)?))
    }

    /// Right-hand side of the canonical equations:
    /// `(dA, dY, deta, dW) = (Y - grad W, -curl curl A, div(Y - grad W), -eta)`.
    ///
    /// `deta` is computed as the divergence of the returned `dA`, so
    /// `div(dA) - deta` vanishes bitwise — the conservation law at the
    /// level of the vector field itself.
    pub fn rhs(&self) -> Result<ExtendedTangent> {
        let da = self.y.sub(&self.w.grad()?)?;
        let deta = da.div()?;
        Ok(ExtendedTangent {
            y: self.a.double_curl()?.scaled(-1.0),
            eta: deta,
            w: self.eta.scaled(-1.0),
            a: da,
        })
    }

    /// One kick–drift–kick leapfrog step. Negative `dt` steps backward.
    ///
    /// The drift writes `A += dt*v` and `eta += dt*div(v)` with one shared
    /// `v = Y - grad W`, so the Lorentz residual moves only by roundoff.
    pub fn step(&self, dt: f64) -> Result<ExtendedState> {
        check_dt(self.grid(), dt)?;
        let force = self.a.double_curl()?.scaled(-1.0);
        Ok(step_with_force(self, dt, &force)?.0)
    }

    /// `A -> A + grad psi`, everything else untouched. Not a symmetry of
    /// the extended energy (the flag is re-measured) but `B`, `Y` and the
    /// momentum map don't move.
    pub fn gauge_transform(&self, psi: &ScalarField) -> Result<ExtendedState> {
        self.grid().check_same(psi.grid(), "gauge_transform")?;
        let a = self.a.add(&psi.grad()?)?;
        ExtendedState::new(
            a,
            self.y.clone(),
            self.eta.clone(),
            self.w.clone(),
            self.time,
        )
    }

    /// The conserved charge density generated by gauge symmetry:
    /// `-div Y`, i.e. `div E`.
    pub fn momentum_map(&self) -> Result<ScalarField> {
        Ok(self.y.div()?.scaled(-1.0))
    }

    /// `div(A) - eta`. Zero (and stays zero) on Lorentz-consistent states;
    /// equal to `dW/dt + div A` along any trajectory.
    pub fn lorentz_residual(&self) -> Result<ScalarField> {
        self.a.div()?.sub(&self.eta)
    }

    /// The observable fields: `E = -Y`, `B = curl A`.
    pub fn em_fields(&self) -> Result<(VectorField, VectorField)> {
        Ok((self.y.scaled(-1.0), self.a.curl()?))
    }
}

/// Shared leapfrog core: takes the entry force `-curl curl A` (which the
/// caller may have cached from the previous step) and returns the new state
/// together with the exit force `-curl curl A'` for reuse.
fn step_with_force(
    s: &ExtendedState,
    dt: f64,
    force: &VectorField,
) -> Result<(ExtendedState, VectorField)> {
    let half = 0.5 * dt;
    let mut y = s.y.clone();
    y.scaled_add_assign(half, force);
    let mut w = s.w.clone();
    w.scaled_add_assign(-half, &s.eta);

    let v = y.sub(&w.grad()?)?;
    let mut a = s.a.clone();
    a.scaled_add_assign(dt, &v);
    let mut eta = s.eta.clone();
    eta.scaled_add_assign(dt, &v.div()?);

    let exit_force = a.double_curl()?.scaled(-1.0);
    y.scaled_add_assign(half, &exit_force);
    w.scaled_add_assign(-half, &eta);

    let out = ExtendedState {
        a,
        y,
        eta,
        w,
        time: s.time + dt,
        lorentz_consistent: s.lorentz_consistent,
    };
    Ok((out, exit_force))
}

/// Long-run driver that advances the *spectra* of the four fields.
///
/// Every operator in the step is diagonal over Fourier modes for both
/// backends, so a step is a single fused pass over the mode arrays —
/// no transforms, no allocation.  Physical fields are materialized only
/// by [`ExtendedRun::snapshot`].  Agrees with repeated
/// [`ExtendedState::step`] to roundoff (see the equivalence test).
#[derive(Debug)]
pub struct ExtendedRun {
    grid: Grid,
    a: [Vec<Cx>; 3],
    y: [Vec<Cx>; 3],
    eta: Vec<Cx>,
    w: Vec<Cx>,
    time: f64,
    dt: f64,
    steps_taken: u64,
    lorentz_consistent: bool,
}

fn i_mul(k: f64, z: Cx) -> Cx {
    Cx::new(-k * z.im, k * z.re)
}

impl ExtendedRun {
    pub fn new(state: &ExtendedState, dt: f64) -> Result<Self> {
        check_dt(state.grid(), dt)?;
        let grid = state.grid().clone();
        let eng = grid.engine();
        let spec3 = |v: &VectorField| {
            [
                eng.to_spectrum(v.component(0)),
                eng.to_spectrum(v.component(1)),
                eng.to_spectrum(v.component(2)),
            ]
        };
        Ok(ExtendedRun {
            a: spec3(state.a()),
            y: spec3(state.y()),
            eta: eng.to_spectrum(state.eta().values()),
            w: eng.to_spectrum(state.w().values()),
            time: state.time(),
            dt,
            steps_taken: 0,
            lorentz_consistent: state.is_lorentz_consistent(),
            grid,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    /// One leapfrog step, mode by mode.
    pub fn step(&mut self) {
        let grid = self.grid.clone();
        let eng = grid.engine();
        let k = eng.symbols(grid.backend());
        let dt = self.dt;
        let c = 0.5 * dt;
        let Self { a, y, eta, w, .. } = self;
        eng.for_each_mode(k, |i, kx, ky, kz| {
            let k2 = kx * kx + ky * ky + kz * kz;
            let (mut ax, mut ay, mut az) = (a[0][i], a[1][i], a[2][i]);
            let (mut yx, mut yy, mut yz) = (y[0][i], y[1][i], y[2][i]);
            let mut et = eta[i];
            let mut wi = w[i];

            // kick: Y += c * (k (k.A) - k^2 A), W -= c * eta
            let d = ax * kx + ay * ky + az * kz;
            yx += (d * kx - ax * k2) * c;
            yy += (d * ky - ay * k2) * c;
            yz += (d * kz - az * k2) * c;
            wi -= et * c;

            // drift: A += dt (Y - ik W), eta += ik . dA
            let dx = (yx - i_mul(kx, wi)) * dt;
            let dy = (yy - i_mul(ky, wi)) * dt;
            let dz = (yz - i_mul(kz, wi)) * dt;
            ax += dx;
            ay += dy;
            az += dz;
            et += i_mul(kx, dx) + i_mul(ky, dy) + i_mul(kz, dz);

            // kick
            let d = ax * kx + ay * ky + az * kz;
            yx += (d * kx - ax * k2) * c;
            yy += (d * ky - ay * k2) * c;
            yz += (d * kz - az * k2) * c;
            wi -= et * c;

            a[0][i] = ax;
            a[1][i] = ay;
            a[2][i] = az;
            y[0][i] = yx;
            y[1][i] = yy;
            y[2][i] = yz;
            eta[i] = et;
            w[i] = wi;
        });
        self.time += dt;
        self.steps_taken += 1;
    }

    pub fn step_n(&mut self, n: usize) {
        for _ in 0..n {
            self.step();
        }
    }

    /// Materialize the current physical state (the only place transforms
    /// happen). Fails if the run has gone non-finite.
    pub fn snapshot(&self) -> Result<ExtendedState> {
        let eng = self.grid.engine();
        let real = |spec: &Vec<Cx>| -> Vec<f64> {
            let mut buf = spec.clone();
            let mut out = vec![0.0; buf.len()];
            eng.to_physical(&mut buf, &mut out);
            out
        };
        let vector = |spec: &[Vec<Cx>; 3]| -> Result<VectorField> {
            VectorField::from_raw(&self.grid, [real(&spec[0]), real(&spec[1]), real(&spec[2])])
        };
        let a = vector(&self.a)?;
        let y = vector(&self.y)?;
        let eta = ScalarField::from_values(&self.grid, real(&self.eta))?;
        let w = ScalarField::from_values(&self.grid, real(&self.w))?;
        let mut s = ExtendedState::new(a, y, eta, w, self.time)?;
        // new() re-measures; a run started consistent stays consistent, but
        // don't let transform noise *upgrade* an inconsistent run.
        s.lorentz_consistent &= self.lorentz_consistent;
        Ok(s)
    }
}
