//! The reduced sourced system `(S, B; eta, W)` plus the longitudinal
//! source field `F`.
//!
//! After quotienting out the gauge freedom, the electric field splits as
//! `E = curl S + F` where `div F = rho` carries all the charge.  The
//! Hamiltonian
//!
//! ```text
//! H = 1/2 [ |curl S + F + grad W|^2 + |B|^2 + |eta|^2 ]
//! ```
//!
//! is not separable, but it splits into two exactly integrable pieces:
//! the curl part (moves `B`, `eta`; `S`, `W`, `F` frozen) and the kinetic
//! part (moves `S`, `W`).  Strang composition of the two flows is
//! second-order and symplectic for frozen `F`.
//!
//! `F` itself obeys `dF/dt = -J`.  Advancing it with the *integrated*
//! current over each step (when the source can supply it) keeps
//! `div F = rho(t)` to roundoff for the whole run — Gauss's law by
//! construction, never re-solved.  Sources that cannot integrate their
//! own current fall back to the midpoint rule.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::spectral::Cx;
use crate::grid::{Grid, ScalarField, VectorField};
use crate::tol;

use super::check_dt;

/// `F = grad(inv_laplacian(rho))`: the curl-free field with `div F = rho`.
pub fn init_f_from_charge(rho: &ScalarField) -> Result<VectorField> {
    rho.inv_laplacian()?.grad()
}

/// `S = inv_curl(B)`, the divergence-free potential with `curl S = B`.
pub fn reconstruct_s_from_b(b: &VectorField) -> Result<VectorField> {
    b.inv_curl()
}

type ScalarProducer = Box<dyn Fn(f64) -> ScalarField + Send + Sync>;
type VectorProducer = Box<dyn Fn(f64) -> VectorField + Send + Sync>;

enum ImpulseRule {
    /// `integral J dt ~ dt * J(midpoint)`; exact to O(dt^3) per step.
    Midpoint,
    /// Caller supplies the exact integral of `J` over `[t0, t1]`.
    Exact(Box<dyn Fn(f64, f64) -> VectorField + Send + Sync>),
    /// `integral J dt = factor(t0, t1) * profile`, for sources whose
    /// current is a fixed field times a scalar waveform. Lets the run
    /// driver stay entirely in k-space.
    Separable {
        profile: VectorField,
        factor: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

/// Charge and current densities of a scenario, with the continuity
/// equation checked at construction.
pub struct SourceSpec {
    grid: Grid,
    rho: ScalarProducer,
    current: VectorProducer,
    impulse: ImpulseRule,
}

impl std::fmt::Debug for SourceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let rule = match self.impulse {
            ImpulseRule::Midpoint => "midpoint",
            ImpulseRule::Exact(_) => "exact",
            ImpulseRule::Separable { .. } => "separable",
        };
        f.debug_struct("SourceSpec")
            .field("grid", &self.grid)
            .field("impulse", &rule)
            .finish_non_exhaustive()
    }
}

/// Times at which neutrality and continuity are probed.
const PROBE_TIMES: [f64; 4] = [0.0, 0.43, 1.7, 3.1];
const PROBE_DELTA: f64 = 1e-4;

impl SourceSpec {
    pub fn new(
        grid: &Grid,
        rho: impl Fn(f64) -> ScalarField + Send + Sync + 'static,
        current: impl Fn(f64) -> VectorField + Send + Sync + 'static,
    ) -> Result<Self> {
        let s = SourceSpec {
            grid: grid.clone(),
            rho: Box::new(rho),
            current: Box::new(current),
            impulse: ImpulseRule::Midpoint,
        };
        s.validate()?;
        Ok(s)
    }

    /// Attach an exact current integral `integral_{t0}^{t1} J dt`.
    pub fn with_exact_impulse(
        mut self,
        impulse: impl Fn(f64, f64) -> VectorField + Send + Sync + 'static,
    ) -> Result<Self> {
        self.impulse = ImpulseRule::Exact(Box::new(impulse));
        self.validate_impulse()?;
        Ok(self)
    }

    /// Attach an exact current integral of the form `factor(t0,t1) * profile`.
    pub fn with_separable_impulse(
        mut self,
        profile: VectorField,
        factor: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        self.grid.check_same(profile.grid(), "separable impulse")?;
        self.impulse = ImpulseRule::Separable {
            profile,
            factor: Box::new(factor),
        };
        self.validate_impulse()?;
        Ok(self)
    }

    /// No charge, no current.
    pub fn vacuum(grid: &Grid) -> Self {
        let g1 = grid.clone();
        let g2 = grid.clone();
        let g3 = grid.clone();
        SourceSpec {
            grid: grid.clone(),
            rho: Box::new(move |_| ScalarField::zeros(&g1)),
            current: Box::new(move |_| VectorField::zeros(&g2)),
            impulse: ImpulseRule::Separable {
                profile: VectorField::zeros(&g3),
                factor: Box::new(|_, _| 0.0),
            },
        }
    }

    /// Time-independent neutral charge, zero current.
    pub fn static_charge(rho: ScalarField) -> Result<Self> {
        let grid = rho.grid().clone();
        let mean = rho.mean().abs();
        let scale = tol::scale_of(rho.linf_norm());
        if mean > tol::MEAN_SOLVE_REL * scale {
            return Err(Error::ConstraintViolation {
                what: "static charge neutrality".into(),
                norm: mean,
                tol: tol::MEAN_SOLVE_REL * scale,
            });
        }
        let g2 = grid.clone();
        let g3 = grid.clone();
        Ok(SourceSpec {
            grid: grid.clone(),
            rho: Box::new(move |_| rho.clone()),
            current: Box::new(move |_| VectorField::zeros(&g2)),
            impulse: ImpulseRule::Separable {
                profile: VectorField::zeros(&g3),
                factor: Box::new(|_, _| 0.0),
            },
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rho(&self, t: f64) -> ScalarField {
        (self.rho)(t)
    }

    pub fn current(&self, t: f64) -> VectorField {
        (self.current)(t)
    }

    /// `integral_{t0}^{t1} J dt`, by the attached rule.
    pub fn impulse(&self, t0: f64, t1: f64) -> VectorField {
        match &self.impulse {
            ImpulseRule::Midpoint => (self.current)(0.5 * (t0 + t1)).scaled(t1 - t0),
            ImpulseRule::Exact(f) => f(t0, t1),
            ImpulseRule::Separable { profile, factor } => profile.scaled(factor(t0, t1)),
        }
    }

    pub(crate) fn separable(
        &self,
    ) -> Option<(&VectorField, &(dyn Fn(f64, f64) -> f64 + Send + Sync))> {
        match &self.impulse {
            ImpulseRule::Separable { profile, factor } => Some((profile, factor.as_ref())),
            _ => None,
        }
    }

    /// Neutrality and continuity at the probe times.
    fn validate(&self) -> Result<()> {
        let d = PROBE_DELTA;
        for &t in &PROBE_TIMES {
            let rho = (self.rho)(t);
            let j = (self.current)(t);
            self.grid.check_same(rho.grid(), "SourceSpec rho")?;
            self.grid.check_same(j.grid(), "SourceSpec current")?;
            let scale = tol::scale_of(rho.linf_norm().max(j.linf_norm()));

            let mean = rho.mean().abs();
            if mean > tol::MEAN_SOLVE_REL * scale {
                return Err(Error::ConstraintViolation {
                    what: format!("source neutrality at t = {t}"),
                    norm: mean,
                    tol: tol::MEAN_SOLVE_REL * scale,
                });
            }

            // d(rho)/dt + div J = 0, time derivative by centered difference
            let mut drho = (self.rho)(t + d).sub(&(self.rho)(t - d))?;
            drho.scale_assign(1.0 / (2.0 * d));
            let residual = drho.add(&j.div()?)?.l2_norm();
            if residual > tol::CONTINUITY_REL * scale {
                return Err(Error::ConstraintViolation {
                    what: format!("continuity at t = {t}"),
                    norm: residual,
                    tol: tol::CONTINUITY_REL * scale,
                });
            }
        }
        Ok(())
    }

    /// The attached impulse must integrate the declared current.
    fn validate_impulse(&self) -> Result<()> {
        let d = PROBE_DELTA;
        for &t in &PROBE_TIMES {
            let imp = self.impulse(t, t + d);
            self.grid.check_same(imp.grid(), "SourceSpec impulse")?;
            let j = (self.current)(t + 0.5 * d);
            let scale = tol::scale_of(j.linf_norm());
            let err = imp.sub(&j.scaled(d))?.l2_norm();
            if err > tol::CONTINUITY_REL * d * scale {
                return Err(Error::ConstraintViolation {
                    what: format!("impulse vs current at t = {t}"),
                    norm: err,
                    tol: tol::CONTINUITY_REL * d * scale,
                });
            }
        }
        Ok(())
    }
}

/// Canonical state of the reduced system. Positions `(S, eta)`, momenta
/// `(B, W)`, plus the longitudinal source field `F`.
#[derive(Debug, Clone)]
pub struct ReducedSourcedState {
    s: VectorField,
    b: VectorField,
    f: VectorField,
    eta: ScalarField,
    w: ScalarField,
    time: f64,
}

/// Time derivative of the canonical fields (`F` is driven by the source,
/// not by the bracket, so it has no slot here).
#[derive(Debug, Clone)]
pub struct ReducedTangent {
    pub s: VectorField,
    pub b: VectorField,
    pub eta: ScalarField,
    pub w: ScalarField,
}

impl ReducedSourcedState {
    pub fn new(
        s: VectorField,
        b: VectorField,
        f: VectorField,
        eta: ScalarField,
        w: ScalarField,
        time: f64,
    ) -> Result<Self> {
        let grid = s.grid().clone();
        grid.check_same(b.grid(), "ReducedSourcedState")?;
        grid.check_same(f.grid(), "ReducedSourcedState")?;
        grid.check_same(eta.grid(), "ReducedSourcedState")?;
        grid.check_same(w.grid(), "ReducedSourcedState")?;
        if !time.is_finite() {
            return Err(Error::NonFinite {
                what: "ReducedSourcedState time".into(),
            });
        }
        let state = ReducedSourcedState {
            s,
            b,
            f,
            eta,
            w,
            time,
        };
        let scale = state.scale();
        for (name, field) in [("div B", &state.b), ("div S", &state.s)] {
            let norm = field.div()?.l2_norm();
            if norm > tol::DIV_FREE_REL * scale {
                return Err(Error::ConstraintViolation {
                    what: format!("{name} at construction"),
                    norm,
                    tol: tol::DIV_FREE_REL * scale,
                });
            }
        }
        Ok(state)
    }

    /// The motionless Coulomb state of a static neutral charge:
    /// `W = -inv_laplacian(rho)`, `F = grad(inv_laplacian(rho))`, rest zero.
    /// `F + grad W` cancels termwise, so this is a bitwise fixed point of
    /// the stepper under a static source.
    pub fn static_equilibrium(rho: &ScalarField) -> Result<Self> {
        let grid = rho.grid();
        let potential = rho.inv_laplacian()?;
        let f = potential.grad()?;
        let w = potential.scaled(-1.0);
        ReducedSourcedState::new(
            VectorField::zeros(grid),
            VectorField::zeros(grid),
            f,
            ScalarField::zeros(grid),
            w,
            0.0,
        )
    }

    pub fn grid(&self) -> &Grid {
        self.s.grid()
    }

    pub fn s(&self) -> &VectorField {
        &self.s
    }

    pub fn b(&self) -> &VectorField {
        &self.b
    }

    pub fn f(&self) -> &VectorField {
        &self.f
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

    pub fn scale(&self) -> f64 {
        tol::scale_of(
            self.s
                .linf_norm()
                .max(self.b.linf_norm())
                .max(self.f.linf_norm())
                .max(self.eta.linf_norm())
                .max(self.w.linf_norm()),
        )
    }

    /// `E = curl S + F`. Gauss's law `div E = rho` holds through `F` alone,
    /// since `div curl S` is roundoff.
    pub fn electric_field(&self) -> Result<VectorField> {
        self.s.curl()?.add(&self.f)
    }

    /// `1/2 [ |curl S + F + grad W|^2 + |B|^2 + |eta|^2 ]`.
    pub fn hamiltonian(&self) -> Result<f64> {
        let g = self.s.curl()?.add(&self.f)?.add(&self.w.grad()?)?;
        Ok(0.5 * (g.inner(&g)? + self.b.inner(&self.b)? + self.eta.inner(&self.eta)?))
    }

    /// Canonical equations: with `G = curl S + F + grad W`,
    /// `(dS, dB, deta, dW) = (B, -curl G, -div G, -eta)`.
    pub fn rhs(&self) -> Result<ReducedTangent> {
        let g = self.s.curl()?.add(&self.f)?.add(&self.w.grad()?)?;
        Ok(ReducedTangent {
            s: self.b.clone(),
            b: g.curl()?.scaled(-1.0),
            eta: g.div()?.scaled(-1.0),
            w: self.eta.scaled(-1.0),
        })
    }

    /// One Strang step: half curl-flow, full kinetic flow, `F` advance,
    /// half curl-flow. Second order; `div B` only ever touched by curls.
    pub fn step(&self, src: &SourceSpec, dt: f64) -> Result<ReducedSourcedState> {
        Ok(strang_core(self, src, dt)?.0)
    }
}

/// The Strang step, returning the two frozen `G = curl S + F + grad W`
/// fields it used. Their average is the trapezoid slope `-dA/dt` that the
/// potential track integrates, so the driver gets it for free.
fn strang_core(
    state: &ReducedSourcedState,
    src: &SourceSpec,
    dt: f64,
) -> Result<(ReducedSourcedState, VectorField, VectorField)> {
    check_dt(state.grid(), dt)?;
    state.grid().check_same(src.grid(), "step source")?;
    let half = 0.5 * dt;

    let g1 = state.s.curl()?.add(&state.f)?.add(&state.w.grad()?)?;
    let mut b = state.b.clone();
    b.scaled_add_assign(-half, &g1.curl()?);
    let mut eta = state.eta.clone();
    eta.scaled_add_assign(-half, &g1.div()?);

    let mut s = state.s.clone();
    s.scaled_add_assign(dt, &b);
    let mut w = state.w.clone();
    w.scaled_add_assign(-dt, &eta);

    let f = state.f.sub(&src.impulse(state.time, state.time + dt))?;

    let g2 = s.curl()?.add(&f)?.add(&w.grad()?)?;
    b.scaled_add_assign(-half, &g2.curl()?);
    eta.scaled_add_assign(-half, &g2.div()?);

    let out = ReducedSourcedState {
        s,
        b,
        f,
        eta,
        w,
        time: state.time + dt,
    };
    Ok((out, g1, g2))
}

/// One retained step of the potential track, for the centered-difference
/// wave residuals.
struct Frame {
    time: f64,
    w: Vec<Cx>,
    a: Option<[Vec<Cx>; 3]>,
}

/// Long-run driver for the reduced system, advancing spectra mode by mode
/// exactly like [`super::ExtendedRun`] does for the vacuum system.
///
/// With a separable source the whole step is one fused pass and zero
/// transforms; otherwise the per-step current impulse costs one forward
/// transform of its three components.
///
/// `track_potential` additionally integrates `dA/dt = -E - grad W` by the
/// trapezoid rule (initialized so that `curl A = B` and `div A = eta`),
/// purely as a diagnostic: it feeds the magnetic wave residual and the
/// Lorentz residual, and nothing feeds back.
pub struct ReducedRun {
    grid: Grid,
    src: SourceSpec,
    s: [Vec<Cx>; 3],
    b: [Vec<Cx>; 3],
    f: [Vec<Cx>; 3],
    eta: Vec<Cx>,
    w: Vec<Cx>,
    a: Option<[Vec<Cx>; 3]>,
    profile_hat: Option<[Vec<Cx>; 3]>,
    frames: VecDeque<Frame>,
    time: f64,
    dt: f64,
    steps_taken: u64,
}

impl std::fmt::Debug for ReducedRun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReducedRun")
            .field("grid", &self.grid)
            .field("time", &self.time)
            .field("dt", &self.dt)
            .field("steps_taken", &self.steps_taken)
            .field("track_potential", &self.a.is_some())
            .finish_non_exhaustive()
    }
}

fn i_mul(k: f64, z: Cx) -> Cx {
    Cx::new(-k * z.im, k * z.re)
}

impl ReducedRun {
    pub fn new(
        state: &ReducedSourcedState,
        src: SourceSpec,
        dt: f64,
        track_potential: bool,
    ) -> Result<Self> {
        check_dt(state.grid(), dt)?;
        state.grid().check_same(src.grid(), "ReducedRun")?;

        // F must already carry the scenario charge; the stepper preserves
        // this, it cannot create it.
        let gauss = state
            .electric_field()?
            .div()?
            .sub(&src.rho(state.time()))?
            .l2_norm();
        let scale = state.scale();
        if gauss > tol::GAUSS_CONSISTENT_REL * scale {
            return Err(Error::ConstraintViolation {
                what: "initial Gauss law div(curl S + F) = rho".into(),
                norm: gauss,
                tol: tol::GAUSS_CONSISTENT_REL * scale,
            });
        }

        let grid = state.grid().clone();
        let eng = grid.engine();
        let spec3 = |v: &VectorField| {
            [
                eng.to_spectrum(v.component(0)),
                eng.to_spectrum(v.component(1)),
                eng.to_spectrum(v.component(2)),
            ]
        };
        let b = spec3(state.b());
        let eta = eng.to_spectrum(state.eta().values());
        let w = eng.to_spectrum(state.w().values());

        let a = if track_potential {
            let mean = eta[0].norm() / grid.len() as f64;
            if mean > tol::MEAN_SOLVE_REL * scale {
                return Err(Error::NotSolvableOnTorus {
                    what: "potential track from eta with nonzero mean",
                    norm: mean,
                    tol: tol::MEAN_SOLVE_REL * scale,
                });
            }
            // A = inv_curl(B) + grad(inv_laplacian(eta)), assembled in
            // k-space: a = i (k x b - k eta) / k^2, kernel modes dropped.
            let mut a = [
                vec![Cx::new(0.0, 0.0); grid.len()],
                vec![Cx::new(0.0, 0.0); grid.len()],
                vec![Cx::new(0.0, 0.0); grid.len()],
            ];
            let k = eng.symbols(grid.backend());
            eng.for_each_mode(k, |i, kx, ky, kz| {
                let k2 = kx * kx + ky * ky + kz * kz;
                if k2 == 0.0 {
                    return;
                }
                let cx = (ky * b[2][i].im - kz * b[1][i].im - kx * eta[i].im) / k2;
                let cy = (kz * b[0][i].im - kx * b[2][i].im - ky * eta[i].im) / k2;
                let cz = (kx * b[1][i].im - ky * b[0][i].im - kz * eta[i].im) / k2;
                // multiply by i: (re, im) -> (-im, re), applied to the
                // curl/grad combination computed above on both parts
                let rx = (ky * b[2][i].re - kz * b[1][i].re - kx * eta[i].re) / k2;
                let ry = (kz * b[0][i].re - kx * b[2][i].re - ky * eta[i].re) / k2;
                let rz = (kx * b[1][i].re - ky * b[0][i].re - kz * eta[i].re) / k2;
                a[0][i] = Cx::new(-cx, rx);
                a[1][i] = Cx::new(-cy, ry);
                a[2][i] = Cx::new(-cz, rz);
            });
            Some(a)
        } else {
            None
        };

        let profile_hat = src.separable().map(|(profile, _)| spec3(profile));

        let mut run = ReducedRun {
            s: spec3(state.s()),
            f: spec3(state.f()),
            b,
            eta,
            w,
            a,
            profile_hat,
            frames: VecDeque::new(),
            time: state.time(),
            dt,
            steps_taken: 0,
            grid,
            src,
        };
        run.push_frame();
        Ok(run)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn source(&self) -> &SourceSpec {
        &self.src
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

    pub fn tracks_potential(&self) -> bool {
        self.a.is_some()
    }

    fn push_frame(&mut self) {
        self.frames.push_back(Frame {
            time: self.time,
            w: self.w.clone(),
            a: self.a.clone(),
        });
        while self.frames.len() > 3 {
            self.frames.pop_front();
        }
    }

    /// One Strang step over the mode arrays.
    pub fn step(&mut self) -> Result<()> {
        let grid = self.grid.clone();
        let eng = grid.engine();
        let k = eng.symbols(grid.backend());
        let dt = self.dt;
        let half = 0.5 * dt;
        let (t0, t1) = (self.time, self.time + dt);

        // current impulse for this step, as spectra
        let mut fac = 0.0;
        let imp_hat: Option<[Vec<Cx>; 3]>;
        if let Some((_, factor)) = self.src.separable() {
            fac = factor(t0, t1);
            imp_hat = None;
        } else {
            let imp = self.src.impulse(t0, t1);
            grid.check_same(imp.grid(), "step impulse")?;
            imp_hat = Some([
                eng.to_spectrum(imp.component(0)),
                eng.to_spectrum(imp.component(1)),
                eng.to_spectrum(imp.component(2)),
            ]);
        }

        let Self {
            s,
            b,
            f,
            eta,
            w,
            a,
            profile_hat,
            ..
        } = self;
        let (deltas, dfac): (Option<&[Vec<Cx>; 3]>, f64) = match (&imp_hat, profile_hat.as_ref()) {
            (Some(d), _) => (Some(d), 1.0),
            (None, p) => (p.map(|v| &*v), fac),
        };

        eng.for_each_mode(k, |i, kx, ky, kz| {
            let (mut sx, mut sy, mut sz) = (s[0][i], s[1][i], s[2][i]);
            let (mut bx, mut by, mut bz) = (b[0][i], b[1][i], b[2][i]);
            let (mut fx, mut fy, mut fz) = (f[0][i], f[1][i], f[2][i]);
            let mut et = eta[i];
            let mut wi = w[i];

            // G = ik x S + F + ik W
            let gx = i_mul(ky, sz) - i_mul(kz, sy) + fx + i_mul(kx, wi);
            let gy = i_mul(kz, sx) - i_mul(kx, sz) + fy + i_mul(ky, wi);
            let gz = i_mul(kx, sy) - i_mul(ky, sx) + fz + i_mul(kz, wi);
            // half curl-flow: B -= h ik x G, eta -= h ik . G
            bx -= (i_mul(ky, gz) - i_mul(kz, gy)) * half;
            by -= (i_mul(kz, gx) - i_mul(kx, gz)) * half;
            bz -= (i_mul(kx, gy) - i_mul(ky, gx)) * half;
            et -= (i_mul(kx, gx) + i_mul(ky, gy) + i_mul(kz, gz)) * half;

            // kinetic flow: S += dt B, W -= dt eta
            sx += bx * dt;
            sy += by * dt;
            sz += bz * dt;
            wi -= et * dt;

            // F advance: F -= integral of J
            if let Some(d) = deltas {
                fx -= d[0][i] * dfac;
                fy -= d[1][i] * dfac;
                fz -= d[2][i] * dfac;
            }

            // second half curl-flow with the updated S, W, F
            let g2x = i_mul(ky, sz) - i_mul(kz, sy) + fx + i_mul(kx, wi);
            let g2y = i_mul(kz, sx) - i_mul(kx, sz) + fy + i_mul(ky, wi);
            let g2z = i_mul(kx, sy) - i_mul(ky, sx) + fz + i_mul(kz, wi);
            bx -= (i_mul(ky, g2z) - i_mul(kz, g2y)) * half;
            by -= (i_mul(kz, g2x) - i_mul(kx, g2z)) * half;
            bz -= (i_mul(kx, g2y) - i_mul(ky, g2x)) * half;
            et -= (i_mul(kx, g2x) + i_mul(ky, g2y) + i_mul(kz, g2z)) * half;

            s[0][i] = sx;
            s[1][i] = sy;
            s[2][i] = sz;
            b[0][i] = bx;
            b[1][i] = by;
            b[2][i] = bz;
            f[0][i] = fx;
            f[1][i] = fy;
            f[2][i] = fz;
            eta[i] = et;
            w[i] = wi;
            // potential track: dA/dt = -E - grad W = -G, trapezoid of the
            // two frozen G's this step used
            if let Some(at) = a {
                at[0][i] -= (gx + g2x) * half;
                at[1][i] -= (gy + g2y) * half;
                at[2][i] -= (gz + g2z) * half;
            }
        });

        self.time += dt;
        self.steps_taken += 1;
        self.push_frame();
        Ok(())
    }

    pub fn step_n(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.step()?;
        }
        Ok(())
    }

    /// Materialize the physical state (re-validated on the way out).
    pub fn snapshot(&self) -> Result<ReducedSourcedState> {
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
        ReducedSourcedState::new(
            vector(&self.s)?,
            vector(&self.b)?,
            vector(&self.f)?,
            ScalarField::from_values(&self.grid, real(&self.eta))?,
            ScalarField::from_values(&self.grid, real(&self.w))?,
            self.time,
        )
    }

    /// The tracked vector potential, if enabled.
    pub fn potential(&self) -> Result<VectorField> {
        let a = self
            .a
            .as_ref()
            .ok_or(Error::FeatureDisabled("reduced-run potential track"))?;
        let eng = self.grid.engine();
        let real = |spec: &Vec<Cx>| -> Vec<f64> {
            let mut buf = spec.clone();
            let mut out = vec![0.0; buf.len()];
            eng.to_physical(&mut buf, &mut out);
            out
        };
        VectorField::from_raw(&self.grid, [real(&a[0]), real(&a[1]), real(&a[2])])
    }

    /// `max |div A - eta|` from the tracked potential: the Lorentz
    /// condition along the reduced trajectory.
    pub fn lorentz_linf(&self) -> Result<f64> {
        let a = self.potential()?;
        let eta = {
            let eng = self.grid.engine();
            let mut buf = self.eta.clone();
            let mut out = vec![0.0; buf.len()];
            eng.to_physical(&mut buf, &mut out);
            ScalarField::from_values(&self.grid, out)?
        };
        Ok(a.div()?.sub(&eta)?.linf_norm())
    }

    /// Centered-difference residuals of the two wave equations,
    /// `d2W/dt2 - lap W = rho` and `d2A/dt2 - lap A = J`, evaluated at the
    /// middle of the last three steps. Norms via Parseval, no transforms
    /// of the trajectory itself.
    pub fn wave_residuals(&self) -> Result<(f64, f64)> {
        if self.a.is_none() {
            return Err(Error::FeatureDisabled("reduced-run potential track"));
        }
        if self.frames.len() < 3 {
            return Err(Error::Precondition(
                "wave residuals need three consecutive steps".into(),
            ));
        }
        let eng = self.grid.engine();
        let k = eng.symbols(self.grid.backend());
        let (f0, f1, f2) = (&self.frames[0], &self.frames[1], &self.frames[2]);
        let dt2 = self.dt * self.dt;

        let rho_hat = eng.to_spectrum(self.src.rho(f1.time).values());
        let j = self.src.current(f1.time);
        let j_hat = [
            eng.to_spectrum(j.component(0)),
            eng.to_spectrum(j.component(1)),
            eng.to_spectrum(j.component(2)),
        ];

        let mut w_sq = 0.0;
        let mut a_sq = 0.0;
        let a0 = f0.a.as_ref().unwrap();
        let a1 = f1.a.as_ref().unwrap();
        let a2 = f2.a.as_ref().unwrap();
        eng.for_each_mode(k, |i, kx, ky, kz| {
            let k2 = kx * kx + ky * ky + kz * kz;
            let rw = (f0.w[i] - f1.w[i] * 2.0 + f2.w[i]) / dt2 + f1.w[i] * k2 - rho_hat[i];
            w_sq += rw.norm_sqr();
            for c in 0..3 {
                let ra = (a0[c][i] - a1[c][i] * 2.0 + a2[c][i]) / dt2 + a1[c][i] * k2 - j_hat[c][i];
                a_sq += ra.norm_sqr();
            }
        });
        let quad = self.grid.cell_volume() / self.grid.len() as f64;
        Ok(((w_sq * quad).sqrt(), (a_sq * quad).sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Backend;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn grid(backend: Backend) -> Grid {
        Grid::new(&[8, 8, 8], &[TAU, TAU, TAU], backend).unwrap()
    }

    /// rho(x,t) = sin(x) cos(y) cos(om t) with the matching longitudinal
    /// current J = F_prof * om sin(om t), continuity exact.
    fn oscillating_source(g: &Grid, om: f64) -> (SourceSpec, ScalarField, VectorField) {
        let rho_hat = ScalarField::from_fn(g, |x, y, _| x.sin() * y.cos());
        let prof = init_f_from_charge(&rho_hat).unwrap();
        let rh = rho_hat.clone();
        let p = prof.clone();
        let src = SourceSpec::new(
            g,
            move |t| rh.scaled((om * t).cos()),
            move |t| p.scaled(om * (om * t).sin()),
        )
        .unwrap()
        .with_separable_impulse(prof.clone(), move |t0, t1| {
            (om * t0).cos() - (om * t1).cos()
        })
        .unwrap();
        (src, rho_hat, prof)
    }

    fn random_vacuum_state(g: &Grid, seed: u64) -> ReducedSourcedState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = VectorField::random_solenoidal(g, 2, 1.0, &mut rng).unwrap();
        let b = VectorField::random_solenoidal(g, 2, 1.0, &mut rng).unwrap();
        let eta = ScalarField::random_band_limited(g, 2, 1.0, &mut rng);
        let w = ScalarField::random_band_limited(g, 2, 1.0, &mut rng);
        ReducedSourcedState::new(s, b, VectorField::zeros(g), eta, w, 0.0).unwrap()
    }

    fn rel_diff(x: &ReducedSourcedState, y: &ReducedSourcedState) -> f64 {
        let num = x.s().sub(y.s()).unwrap().l2_norm()
            + x.b().sub(y.b()).unwrap().l2_norm()
            + x.f().sub(y.f()).unwrap().l2_norm()
            + x.eta().sub(y.eta()).unwrap().l2_norm()
            + x.w().sub(y.w()).unwrap().l2_norm();
        let den = y.s().l2_norm()
            + y.b().l2_norm()
            + y.f().l2_norm()
            + y.eta().l2_norm()
            + y.w().l2_norm();
        num / den.max(1e-300)
    }

    #[test]
    fn f_from_charge_analytic_and_round_trip() {
        for backend in [Backend::Spectral, Backend::CentralDiff2] {
            let g = grid(backend);
            let k = TAU / g.lengths()[0];
            let keff = match backend {
                Backend::Spectral => k,
                Backend::CentralDiff2 => (k * g.spacing()[0]).sin() / g.spacing()[0],
            };
            let rho = ScalarField::from_fn(&g, |x, _, _| (k * x).sin());
            let f = init_f_from_charge(&rho).unwrap();
            let expect = VectorField::from_fn(&g, |x, _, _| [-(k * x).cos() / keff, 0.0, 0.0]);
            assert!(f.sub(&expect).unwrap().linf_norm() < 1e-12, "{backend:?}");
            assert!(f.div().unwrap().sub(&rho).unwrap().l2_norm() < 1e-10 * rho.l2_norm());
            assert!(f.curl().unwrap().linf_norm() < 1e-12);
        }
    }

    #[test]
    fn f_from_charge_rejects_net_charge() {
        let g = grid(Backend::Spectral);
        let rho = ScalarField::from_fn(&g, |_, _, _| 0.25);
        assert!(matches!(
            init_f_from_charge(&rho),
            Err(Error::NotSolvableOnTorus { .. })
        ));
    }

    #[test]
    fn s_reconstruction_inverts_curl() {
        let g = grid(Backend::Spectral);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = VectorField::random_solenoidal(&g, 2, 1.0, &mut rng).unwrap();
        let s = reconstruct_s_from_b(&b).unwrap();
        assert!(s.curl().unwrap().sub(&b).unwrap().linf_norm() < 1e-10);
        assert!(s.div().unwrap().linf_norm() < 1e-10);
    }

    #[test]
    fn rhs_zero_and_static_equilibrium() {
        let g = grid(Backend::Spectral);
        let zero = ReducedSourcedState::new(
            VectorField::zeros(&g),
            VectorField::zeros(&g),
            VectorField::zeros(&g),
            ScalarField::zeros(&g),
            ScalarField::zeros(&g),
            0.0,
        )
        .unwrap();
        let t = zero.rhs().unwrap();
        assert_eq!(
            t.s.linf_norm() + t.b.linf_norm() + t.eta.linf_norm() + t.w.linf_norm(),
            0.0
        );

        // F + grad W cancels bitwise, so the tangent is exactly zero
        let rho = ScalarField::from_fn(&g, |x, y, _| x.sin() * y.sin());
        let eq = ReducedSourcedState::static_equilibrium(&rho).unwrap();
        let t = eq.rhs().unwrap();
        assert_eq!(t.s.linf_norm(), 0.0);
        assert_eq!(t.b.linf_norm(), 0.0);
        assert_eq!(t.eta.linf_norm(), 0.0);
        assert_eq!(t.w.linf_norm(), 0.0);
        assert_eq!(eq.hamiltonian().unwrap(), 0.0);
    }

    #[test]
    fn rhs_db_is_divergence_free() {
        for backend in [Backend::Spectral, Backend::CentralDiff2] {
            let g = grid(backend);
            let s = random_vacuum_state(&g, 5);
            let t = s.rhs().unwrap();
            assert!(t.b.div().unwrap().linf_norm() < 1e-12, "{backend:?}");
        }
    }

    #[test]
    fn static_equilibrium_is_fixed_point_of_stepper() {
        let g = grid(Backend::Spectral);
        let rho = ScalarField::from_fn(&g, |x, y, z| x.sin() * (y + z).cos());
        let src = SourceSpec::static_charge(rho.clone()).unwrap();
        let eq = ReducedSourcedState::static_equilibrium(&rho).unwrap();
        let scale = eq.scale();
        let dt = 0.3 * g.stable_dt();

        let mut s = eq.clone();
        for _ in 0..100 {
            s = s.step(&src, dt).unwrap();
        }
        assert!(
            rel_diff(&s, &eq) < 1e-14,
            "operator path moved off the fixed point"
        );

        let mut run = ReducedRun::new(&eq, src, dt, false).unwrap();
        run.step_n(1000).unwrap();
        let out = run.snapshot().unwrap();
        let drift = rel_diff(&out, &eq);
        assert!(drift * scale < 1e-12 * scale, "run drift {drift:.3e}");
    }

    #[test]
    fn vacuum_energy_stays_in_band() {
        let g = grid(Backend::Spectral);
        let s0 = random_vacuum_state(&g, 11);
        let src = SourceSpec::vacuum(&g);
        let h0 = s0.hamiltonian().unwrap();
        let dt = 0.1 * g.spacing()[0];
        let om_max = 2.0 * 3f64.sqrt();
        let mut run = ReducedRun::new(&s0, src, dt, false).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            run.step_n(50).unwrap();
            let h = run.snapshot().unwrap().hamiltonian().unwrap();
            worst = worst.max((h - h0).abs());
        }
        assert!(worst < 0.5 * (om_max * dt).powi(2) * h0, "{worst:.3e}");
        assert!(worst < 0.05 * h0);
    }

    #[test]
    fn oscillating_charge_keeps_gauss_exact() {
        let g = grid(Backend::Spectral);
        let om = 1.0;
        let (src, _, prof) = oscillating_source(&g, om);
        let state = ReducedSourcedState::new(
            VectorField::zeros(&g),
            VectorField::zeros(&g),
            prof,
            ScalarField::zeros(&g),
            ScalarField::zeros(&g),
            0.0,
        )
        .unwrap();
        let scale = state.scale();
        let dt = 0.25 * g.stable_dt();
        let mut run = ReducedRun::new(&state, src, dt, false).unwrap();
        for _ in 0..4 {
            run.step_n(50).unwrap();
            let s = run.snapshot().unwrap();
            let rho_now = run.source().rho(s.time());
            let gauss = s
                .electric_field()
                .unwrap()
                .div()
                .unwrap()
                .sub(&rho_now)
                .unwrap();
            assert!(gauss.l2_norm() < 1e-10 * scale, "{:.3e}", gauss.l2_norm());
            assert!(s.b().div().unwrap().l2_norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn run_matches_pure_stepping_separable_and_exact() {
        let g = grid(Backend::Spectral);
        let om = 0.8;
        let (sep_src, rho_hat, prof) = oscillating_source(&g, om);
        let p2 = prof.clone();
        let rh = rho_hat.clone();
        let p3 = prof.clone();
        let exact_src = SourceSpec::new(
            &g,
            move |t| rh.scaled((om * t).cos()),
            move |t| p2.scaled(om * (om * t).sin()),
        )
        .unwrap()
        .with_exact_impulse(move |t0, t1| p3.scaled((om * t0).cos() - (om * t1).cos()))
        .unwrap();

        for src in [sep_src, exact_src] {
            let state = ReducedSourcedState::new(
                VectorField::zeros(&g),
                VectorField::zeros(&g),
                prof.clone(),
                ScalarField::zeros(&g),
                ScalarField::zeros(&g),
                0.0,
            )
            .unwrap();
            let dt = 0.25 * g.stable_dt();
            let mut slow = state.clone();
            let mut run = ReducedRun::new(&state, src, dt, false).unwrap();
            run.step_n(40).unwrap();
            for _ in 0..40 {
                slow = slow.step(run.source(), dt).unwrap();
            }
            let fast = run.snapshot().unwrap();
            let err = rel_diff(&fast, &slow);
            assert!(err < 1e-12, "{err:.3e}");
        }
    }

    #[test]
    fn w_wave_second_order_wave_residuals() {
        let g = grid(Backend::Spectral);
        let om = 1.0; // k = (1,0,0) mode on the 2 pi box
        let amp = 0.3;
        let w = ScalarField::from_fn(&g, |x, _, _| amp * x.cos());
        let state = ReducedSourcedState::new(
            VectorField::zeros(&g),
            VectorField::zeros(&g),
            VectorField::zeros(&g),
            ScalarField::zeros(&g),
            w,
            0.0,
        )
        .unwrap();
        let dt = 0.1 * g.spacing()[0];
        let mut run = ReducedRun::new(&state, SourceSpec::vacuum(&g), dt, true).unwrap();

        assert!(matches!(run.wave_residuals(), Err(Error::Precondition(_))));
        run.step_n(2).unwrap();
        let (rw, ra) = run.wave_residuals().unwrap();
        let scale = state.scale();
        assert!(rw < (om * dt).powi(2) * scale, "{rw:.3e}");
        assert!(ra < (om * dt).powi(2) * scale, "{ra:.3e}");
        assert!(rw > 0.0);

        let untracked = ReducedRun::new(&state, SourceSpec::vacuum(&g), dt, false).unwrap();
        assert!(matches!(
            untracked.wave_residuals(),
            Err(Error::FeatureDisabled(_))
        ));
        assert!(matches!(
            untracked.potential(),
            Err(Error::FeatureDisabled(_))
        ));
    }

    #[test]
    fn tracked_potential_keeps_lorentz_condition() {
        let g = grid(Backend::Spectral);
        let (src, _, prof) = oscillating_source(&g, 1.0);
        let state = ReducedSourcedState::new(
            VectorField::zeros(&g),
            VectorField::zeros(&g),
            prof,
            ScalarField::zeros(&g),
            ScalarField::zeros(&g),
            0.0,
        )
        .unwrap();
        let dt = 0.25 * g.stable_dt();
        let mut run = ReducedRun::new(&state, src, dt, true).unwrap();
        run.step_n(100).unwrap();
        assert!(run.lorentz_linf().unwrap() < 1e-11 * state.scale());
        // the track reproduces B: curl A = B by construction and both sides
        // move by the same curl increments
        let b = run.snapshot().unwrap().b().clone();
        let curl_a = run.potential().unwrap().curl().unwrap();
        assert!(curl_a.sub(&b).unwrap().linf_norm() < 1e-10 * state.scale());
    }

    #[test]
    fn source_validation_rejects_bad_specs() {
        let g = grid(Backend::Spectral);
        let g1 = g.clone();
        let g2 = g.clone();
        // net charge
        assert!(matches!(
            SourceSpec::new(
                &g,
                move |_| ScalarField::from_fn(&g1, |_, _, _| 0.1),
                move |_| VectorField::zeros(&g2),
            ),
            Err(Error::ConstraintViolation { .. })
        ));
        // continuity violated: rho depends on t, J = 0
        let g1 = g.clone();
        let g2 = g.clone();
        assert!(matches!(
            SourceSpec::new(
                &g,
                move |t| ScalarField::from_fn(&g1, |x, _, _| (1.0 + t) * x.sin()),
                move |_| VectorField::zeros(&g2),
            ),
            Err(Error::ConstraintViolation { .. })
        ));
        // impulse inconsistent with the declared current
        let (src, _, prof) = oscillating_source(&g, 1.0);
        let flipped = src.with_separable_impulse(prof, |t0, t1| t1.cos() - t0.cos() + 0.1);
        assert!(matches!(flipped, Err(Error::ConstraintViolation { .. })));
    }

    #[test]
    fn state_construction_rejects_divergent_b_or_s() {
        let g = grid(Backend::Spectral);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let bad = VectorField::random_band_limited(&g, 2, 1.0, &mut rng);
        let zeros = VectorField::zeros(&g);
        let zs = ScalarField::zeros(&g);
        assert!(matches!(
            ReducedSourcedState::new(
                zeros.clone(),
                bad.clone(),
                zeros.clone(),
                zs.clone(),
                zs.clone(),
                0.0
            ),
            Err(Error::ConstraintViolation { .. })
        ));
        assert!(matches!(
            ReducedSourcedState::new(bad, zeros.clone(), zeros, zs.clone(), zs, 0.0),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn potential_track_needs_zero_mean_eta() {
        let g = grid(Backend::Spectral);
        let eta = ScalarField::from_fn(&g, |_, _, _| 0.5);
        let state = ReducedSourcedState::new(
            VectorField::zeros(&g),
            VectorField::zeros(&g),
            VectorField::zeros(&g),
            eta,
            ScalarField::zeros(&g),
            0.0,
        )
        .unwrap();
        let dt = 0.25 * g.stable_dt();
        assert!(matches!(
            ReducedRun::new(&state, SourceSpec::vacuum(&g), dt, true),
            Err(Error::NotSolvableOnTorus { .. })
        ));
        assert!(ReducedRun::new(&state, SourceSpec::vacuum(&g), dt, false).is_ok());
    }

    #[test]
    fn run_rejects_initial_gauss_violation() {
        let g = grid(Backend::Spectral);
        let (src, _, prof) = oscillating_source(&g, 1.0);
        // F scaled wrongly: div F != rho(0)
        let state = ReducedSourcedState::new(
            VectorField::zeros(&g),
            VectorField::zeros(&g),
            prof.scaled(0.5),
            ScalarField::zeros(&g),
            ScalarField::zeros(&g),
            0.0,
        )
        .unwrap();
        assert!(matches!(
            ReducedRun::new(&state, src, 0.1 * g.stable_dt(), false),
            Err(Error::ConstraintViolation { .. })
        ));
    }
}
