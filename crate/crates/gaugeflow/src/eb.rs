//! Independent first-order E–B leapfrog solver used as a cross-check.
//!
//! Fields are collocated in space (no Yee staggering) and share the grid
//! operators with the canonical solvers, so trajectory differences isolate
//! the time-integration scheme. Time staggering is classic leapfrog: after
//! the first step `B` lives at half-integer times while `E` stays at integer
//! times. [`EBState::synchronized_b`] recovers a collocated `B` estimate for
//! comparisons against collocated solvers.

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::maxwell::{check_dt, ExtendedState};
use crate::tol;

/// Electric and magnetic field pair on a periodic grid.
///
/// Freshly constructed states are collocated: both fields at `time`. Stepped
/// states are staggered, with `b()` holding the value at `time - dt/2`.
#[derive(Debug, Clone)]
pub struct EBState {
    e: VectorField,
    b: VectorField,
    time: f64,
    staggered: bool,
}

impl EBState {
    /// Collocated state with both fields at `time`. `b` must be solenoidal
    /// to the construction tolerance.
    pub fn new(e: VectorField, b: VectorField, time: f64) -> Result<Self> {
        e.grid().check_same(b.grid(), "EBState")?;
        if !time.is_finite() {
            return Err(Error::NonFinite {
                what: "EBState time".into(),
            });
        }
        let scale = tol::scale_of(e.linf_norm().max(b.linf_norm()));
        let div_b = b.div()?.l2_norm();
        if div_b > tol::DIV_FREE_REL * scale {
            return Err(Error::ConstraintViolation {
                what: "div B at EBState construction".into(),
                norm: div_b,
                tol: tol::DIV_FREE_REL * scale,
            });
        }
        Ok(Self {
            e,
            b,
            time,
            staggered: false,
        })
    }

    pub fn e(&self) -> &VectorField {
        &self.e
    }

    /// Raw stored magnetic field: collocated before the first step,
    /// at `time - dt/2` afterwards.
    pub fn b(&self) -> &VectorField {
        &self.b
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &Grid {
        self.e.grid()
    }

    /// True once the state has been stepped and `b` sits at half steps.
    pub fn is_staggered(&self) -> bool {
        self.staggered
    }

    /// Collocated estimate of `B` at `time` for a state stepped with `dt`:
    /// the average of the stored half-step value and the next one,
    /// `B(t - dt/2) - (dt/2) curl E(t)`. Second-order accurate. Collocated
    /// states return the stored field unchanged.
    pub fn synchronized_b(&self, dt: f64) -> Result<VectorField> {
        if !self.staggered {
            return Ok(self.b.clone());
        }
        check_dt(self.grid(), dt)?;
        let mut b = self.b.clone();
        b.scaled_add_assign(-0.5 * dt, &self.e.curl()?);
        Ok(b)
    }
}

/// One leapfrog step of the Maxwell curl equations with current density
/// `j_mid` sampled at the midpoint `time + dt/2`:
///
/// ```text
/// B(t + dt/2) = B(t - dt/2) - dt * curl E(t)
/// E(t + dt)   = E(t) + dt * (curl B(t + dt/2) - J(t + dt/2))
/// ```
///
/// On a collocated state the first factor is a half-kick that launches the
/// staggering. `div B` is preserved to roundoff because the update adds a
/// curl.
pub fn step_eb(s: &EBState, j_mid: &VectorField, dt: f64) -> Result<EBState> {
    check_dt(s.grid(), dt)?;
    s.grid().check_same(j_mid.grid(), "step_eb current")?;
    let kick = if s.staggered { dt } else { 0.5 * dt };
    let mut b = s.b.clone();
    b.scaled_add_assign(-kick, &s.e.curl()?);
    let mut e = s.e.clone();
    e.scaled_add_assign(dt, &b.curl()?);
    e.scaled_add_assign(-dt, j_mid);
    Ok(EBState {
        e,
        b,
        time: s.time + dt,
        staggered: true,
    })
}

/// Matching transverse plane-wave initial data in both representations.
///
/// `k` counts box modes per axis; the physical wavevector is
/// `kv_a = 2 pi k_a / L_a`. The wave is
///
/// ```text
/// E(x, t) = amp * cos(kv.x - om t) * e_hat,   om = |kv|,
/// A(x, t) = (amp / om) * sin(kv.x - om t) * e_hat,
/// ```
///
/// sampled at `t = 0`, with `e_hat` the normalized polarization, `Y = -E`,
/// `B = curl A` (grid curl, so both states are discretely consistent),
/// `W = 0`, `eta = 0`. Both outputs are divergence-free and the extended
/// state is Lorentz-consistent.
pub fn plane_wave_state(
    grid: &Grid,
    k: [i32; 3],
    amplitude: f64,
    polarization: [f64; 3],
) -> Result<(EBState, ExtendedState)> {
    if !amplitude.is_finite() || polarization.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite {
            what: "plane wave parameters".into(),
        });
    }
    let shape = grid.shape();
    let lens = grid.lengths();
    let mut kv = [0.0; 3];
    for a in 0..3 {
        if k[a] != 0 && 2 * k[a].unsigned_abs() as usize >= shape[a] {
            return Err(Error::InvalidSetup(format!(
                "wavevector component {} along axis {a} is not resolvable on {} points",
                k[a], shape[a]
            )));
        }
        kv[a] = std::f64::consts::TAU * f64::from(k[a]) / lens[a];
    }
    let om = kv.iter().map(|c| c * c).sum::<f64>().sqrt();
    if om == 0.0 {
        return Err(Error::InvalidSetup(
            "plane wave needs a nonzero wavevector".into(),
        ));
    }
    if amplitude == 0.0 {
        let zero = ExtendedState::zeros(grid);
        let (e, b) = zero.em_fields()?;
        return Ok((EBState::new(e, b, 0.0)?, zero));
    }
    let pol_norm = polarization.iter().map(|c| c * c).sum::<f64>().sqrt();
    if pol_norm == 0.0 {
        return Err(Error::InvalidSetup(
            "polarization must be a nonzero vector".into(),
        ));
    }
    let dot = kv[0] * polarization[0] + kv[1] * polarization[1] + kv[2] * polarization[2];
    if dot.abs() > 1e-12 * om * pol_norm {
        return Err(Error::InvalidSetup(format!(
            "polarization is not transverse: |k.pol| / (|k||pol|) = {:.3e}",
            dot.abs() / (om * pol_norm)
        )));
    }
    let e_hat = polarization.map(|c| c / pol_norm);
    let phase = move |x: f64, y: f64, z: f64| kv[0] * x + kv[1] * y + kv[2] * z;
    let a = VectorField::from_fn(grid, |x, y, z| {
        let c = amplitude / om * phase(x, y, z).sin();
        [c * e_hat[0], c * e_hat[1], c * e_hat[2]]
    });
    let y = VectorField::from_fn(grid, |x, y, z| {
        let c = -amplitude * phase(x, y, z).cos();
        [c * e_hat[0], c * e_hat[1], c * e_hat[2]]
    });
    let ext = ExtendedState::new(
        a,
        y,
        ScalarField::zeros(grid),
        ScalarField::zeros(grid),
        0.0,
    )?;
    let (e, b) = ext.em_fields()?;
    Ok((EBState::new(e, b, 0.0)?, ext))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Backend;
    use crate::maxwell::ExtendedRun;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn grid(n: usize) -> Grid {
        Grid::new(&[n, n, n], &[TAU, TAU, TAU], Backend::Spectral).unwrap()
    }

    #[test]
    fn zero_state_zero_current_stays_zero() {
        let g = grid(8);
        let mut s = EBState::new(VectorField::zeros(&g), VectorField::zeros(&g), 0.0).unwrap();
        let j = VectorField::zeros(&g);
        let dt = 0.2 * g.stable_dt();
        for _ in 0..5 {
            s = step_eb(&s, &j, dt).unwrap();
        }
        assert_eq!(s.e().linf_norm(), 0.0);
        assert_eq!(s.b().linf_norm(), 0.0);
        assert!(s.is_staggered());
        assert!((s.time() - 5.0 * dt).abs() < 1e-15);
    }

    #[test]
    fn plane_wave_one_period_error_is_second_order() {
        let g = grid(8);
        let (s0, _) = plane_wave_state(&g, [1, 0, 0], 1.0, [0.0, 1.0, 0.0]).unwrap();
        let om = 1.0;
        let n = 500;
        let dt = TAU / om / n as f64;
        let j = VectorField::zeros(&g);
        let mut s = s0.clone();
        for _ in 0..n {
            s = step_eb(&s, &j, dt).unwrap();
        }
        let e_err = s.e().sub(s0.e()).unwrap().l2_norm() / s0.e().l2_norm();
        let b_err = s.synchronized_b(dt).unwrap().sub(s0.b()).unwrap().l2_norm() / s0.b().l2_norm();
        let bound = (om * dt).powi(2);
        assert!(e_err < bound, "E error {e_err:.3e} vs {bound:.3e}");
        assert!(b_err < bound, "B error {b_err:.3e} vs {bound:.3e}");
        assert!(e_err > 0.0);
    }

    #[test]
    fn gauss_law_follows_charge_transport() {
        let g = grid(8);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e0 = VectorField::random_band_limited(&g, 2, 1.0, &mut rng);
        let b0 = VectorField::random_solenoidal(&g, 2, 1.0, &mut rng).unwrap();
        let j = VectorField::random_band_limited(&g, 2, 0.5, &mut rng);
        let dt = 0.2 * g.stable_dt();
        let mut prev = EBState::new(e0, b0, 0.0).unwrap();
        for _ in 0..3 {
            let next = step_eb(&prev, &j, dt).unwrap();
            // d/dt div E = -div J exactly, because div curl B is roundoff
            let lhs = next
                .e()
                .div()
                .unwrap()
                .sub(&prev.e().div().unwrap())
                .unwrap()
                .scaled(1.0 / dt);
            let resid = lhs.add(&j.div().unwrap()).unwrap().l2_norm();
            assert!(resid < 1e-12, "{resid:.3e}");
            assert!(next.b().div().unwrap().l2_norm() < 1e-12);
            prev = next;
        }
    }

    #[test]
    fn plane_wave_factory_matches_analytic_fields() {
        let g = grid(8);
        let amp = 0.7;
        let (eb, ext) = plane_wave_state(&g, [1, 0, 0], amp, [0.0, 2.0, 0.0]).unwrap();
        let want_e = VectorField::from_fn(&g, |x, _, _| [0.0, amp * x.cos(), 0.0]);
        let want_b = VectorField::from_fn(&g, |x, _, _| [0.0, 0.0, amp * x.cos()]);
        assert!(eb.e().sub(&want_e).unwrap().linf_norm() < 1e-12 * amp);
        assert!(eb.b().sub(&want_b).unwrap().linf_norm() < 1e-12 * amp);
        assert!(eb.e().div().unwrap().linf_norm() < 1e-12 * amp);
        assert!(eb.b().div().unwrap().linf_norm() < 1e-12 * amp);
        assert!(!eb.is_staggered());
        assert_eq!(eb.time(), 0.0);

        assert!(ext.is_lorentz_consistent());
        assert_eq!(ext.eta().linf_norm(), 0.0);
        assert_eq!(ext.w().linf_norm(), 0.0);
        let (e, b) = ext.em_fields().unwrap();
        assert_eq!(eb.e().sub(&e).unwrap().linf_norm(), 0.0);
        assert_eq!(eb.b().sub(&b).unwrap().linf_norm(), 0.0);
    }

    #[test]
    fn plane_wave_factory_zero_amplitude_gives_zeros() {
        let g = grid(8);
        let (eb, ext) = plane_wave_state(&g, [2, 1, 0], 0.0, [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(eb.e().linf_norm() + eb.b().linf_norm(), 0.0);
        assert_eq!(ext.a().linf_norm() + ext.y().linf_norm(), 0.0);
    }

    #[test]
    fn plane_wave_factory_rejects_bad_setup() {
        let g = grid(8);
        for (k, pol) in [
            ([0, 0, 0], [0.0, 1.0, 0.0]),
            ([1, 0, 0], [1.0, 0.0, 0.0]),
            ([1, 1, 0], [1.0, 0.0, 0.0]),
            ([1, 0, 0], [0.0, 0.0, 0.0]),
            ([4, 0, 0], [0.0, 1.0, 0.0]),
        ] {
            assert!(
                matches!(
                    plane_wave_state(&g, k, 1.0, pol),
                    Err(Error::InvalidSetup(_))
                ),
                "{k:?} {pol:?}"
            );
        }
        assert!(matches!(
            plane_wave_state(&g, [1, 0, 0], f64::NAN, [0.0, 1.0, 0.0]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn step_rejects_bad_dt_and_grids() {
        let g = grid(8);
        let s = EBState::new(VectorField::zeros(&g), VectorField::zeros(&g), 0.0).unwrap();
        let j = VectorField::zeros(&g);
        for dt in [0.0, f64::NAN, 10.0 * g.stable_dt()] {
            assert!(matches!(step_eb(&s, &j, dt), Err(Error::StepSize { .. })));
        }
        let other = grid(4);
        let j2 = VectorField::zeros(&other);
        assert!(matches!(
            step_eb(&s, &j2, 0.1 * g.stable_dt()),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn construction_rejects_divergent_b() {
        let g = grid(8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bad = VectorField::random_band_limited(&g, 2, 1.0, &mut rng);
        assert!(matches!(
            EBState::new(VectorField::zeros(&g), bad, 0.0),
            Err(Error::ConstraintViolation { .. })
        ));
    }

    #[test]
    fn agrees_with_canonical_solver_on_shared_data() {
        let g = grid(16);
        let (mut eb, ext) = plane_wave_state(&g, [1, 0, 0], 1.0, [0.0, 0.3, 0.9]).unwrap();
        let dt = 0.1 * g.spacing()[0];
        let steps = 100;
        let j = VectorField::zeros(&g);
        let mut run = ExtendedRun::new(&ext, dt).unwrap();
        run.step_n(steps);
        for _ in 0..steps {
            eb = step_eb(&eb, &j, dt).unwrap();
        }
        let (e_ref, b_ref) = run.snapshot().unwrap().em_fields().unwrap();
        let e_err = eb.e().sub(&e_ref).unwrap().l2_norm() / e_ref.l2_norm();
        let b_err = eb
            .synchronized_b(dt)
            .unwrap()
            .sub(&b_ref)
            .unwrap()
            .l2_norm()
            / b_ref.l2_norm();
        assert!(e_err < 1e-3, "E mismatch {e_err:.3e}");
        assert!(b_err < 1e-3, "B mismatch {b_err:.3e}");
    }
}
