//! Trajectory integration for the particle brackets, plus the two-chart
//! consistency check built on minimal coupling.

use crate::error::{Error, Result};
use crate::gauge::algebra::LieAlgebraSpec;
use crate::gauge::fields::GaugeFieldSpec;
use crate::gauge::poisson::{
    canonical_structure, inverse_minimal_coupling, minimal_coupling, twisted_structure, PhasePoint,
    PoissonStructure,
};
use nalgebra::DVector;

/// Step factor for the fourth-order Hamiltonian gradients driving the
/// integrator: `h = GRADIENT_FD_STEP * (1 + |z|_inf)`.
pub(crate) const GRADIENT_FD_STEP: f64 = 1e-4;

/// One sample of an integrated trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub point: PhasePoint,
    pub energy: f64,
}

fn hamiltonian_gradient(h: &dyn Fn(&PhasePoint) -> f64, z: &PhasePoint) -> DVector<f64> {
    let step = GRADIENT_FD_STEP * (1.0 + z.linf());
    let mut g = DVector::zeros(z.dim());
    for l in 0..z.dim() {
        let at = |t: f64| {
            let mut w = z.flat().clone();
            w[l] += t;
            h(&z.with_flat(w))
        };
        g[l] = (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
    }
    g
}

fn velocity(
    h: &dyn Fn(&PhasePoint) -> f64,
    structure: &PoissonStructure,
    z: &PhasePoint,
) -> Result<DVector<f64>> {
    let j = structure.matrix(z)?;
    Ok(j * hamiltonian_gradient(h, z))
}

/// Classic fourth-order Runge-Kutta on `dz/dt = J(z) grad H(z)`. Records
/// every step including the initial sample. A state or stage that stops
/// being finite aborts with the step number; in particular a Hamiltonian
/// that returns NaN outside its domain shows up as a blow-up, not a panic.
pub fn integrate_particle(
    hamiltonian: &dyn Fn(&PhasePoint) -> f64,
    structure: &PoissonStructure,
    z0: &PhasePoint,
    dt: f64,
    steps: usize,
) -> Result<Vec<TrajectoryPoint>> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Precondition(format!(
            "integration step must be positive and finite, got {dt}"
        )));
    }
    structure.matrix(z0)?;
    let mut out = Vec::with_capacity(steps + 1);
    let mut z = z0.clone();
    out.push(TrajectoryPoint {
        time: 0.0,
        point: z.clone(),
        energy: hamiltonian(&z),
    });
    for step in 1..=steps {
        let blow_up = |e: Error| match e {
            Error::NonFinite { .. } => Error::BlowUp { step },
            other => other,
        };
        let k1 = velocity(hamiltonian, structure, &z).map_err(blow_up)?;
        let k2 = velocity(
            hamiltonian,
            structure,
            &z.with_flat(z.flat() + 0.5 * dt * &k1),
        )
        .map_err(blow_up)?;
        let k3 = velocity(
            hamiltonian,
            structure,
            &z.with_flat(z.flat() + 0.5 * dt * &k2),
        )
        .map_err(blow_up)?;
        let k4 =
            velocity(hamiltonian, structure, &z.with_flat(z.flat() + dt * &k3)).map_err(blow_up)?;
        let next = z.flat() + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowUp { step });
        }
        z = z.with_flat(next);
        out.push(TrajectoryPoint {
            time: step as f64 * dt,
            point: z.clone(),
            energy: hamiltonian(&z),
        });
    }
    Ok(out)
}

/// Integrates the same initial data in both charts — as given in the
/// twisted chart, and pushed through minimal coupling in the canonical
/// chart — then maps the canonical trajectory back and returns the largest
/// coordinate deviation over all samples. Small values certify that the two
/// bracket presentations generate the same dynamics.
pub fn chart_equivalence(
    z0: &PhasePoint,
    field: &GaugeFieldSpec,
    alg: &LieAlgebraSpec,
    h_twisted: &dyn Fn(&PhasePoint) -> f64,
    dt: f64,
    steps: usize,
) -> Result<f64> {
    let twisted = twisted_structure(field, alg)?;
    let canonical = canonical_structure(field.n(), field.m(), alg)?;
    let traj_t = integrate_particle(h_twisted, &twisted, z0, dt, steps)?;
    let w0 = minimal_coupling(z0, field)?;
    let h_canonical = |w: &PhasePoint| -> f64 {
        match inverse_minimal_coupling(w, field) {
            Ok(z) => h_twisted(&z),
            Err(_) => f64::NAN,
        }
    };
    let traj_c = integrate_particle(&h_canonical, &canonical, &w0, dt, steps)?;
    let mut worst = 0.0f64;
    for (a, b) in traj_t.iter().zip(&traj_c) {
        let back = inverse_minimal_coupling(&b.point, field)?;
        for l in 0..a.point.dim() {
            worst = worst.max((a.point.flat()[l] - back.flat()[l]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::fields::{abelian_uniform_field, su2_pure_gauge, GaugeFieldSpec};
    use nalgebra::DMatrix;
    use std::f64::consts::TAU;

    fn kinetic(w: &PhasePoint) -> f64 {
        0.5 * w.p().iter().map(|v| v * v).sum::<f64>()
    }

    #[test]
    fn free_particle_goes_straight() {
        let alg = LieAlgebraSpec::abelian(0);
        let st = canonical_structure(3, 0, &alg).unwrap();
        let z0 = PhasePoint::canonical(&[0.1, -0.2, 0.3], &[1.0, 0.5, -0.25], &[], &[]).unwrap();
        let traj = integrate_particle(&kinetic, &st, &z0, 0.05, 100).unwrap();
        let last = traj.last().unwrap();
        for i in 0..3 {
            let expect = z0.q()[i] + 5.0 * z0.p()[i];
            assert!((last.point.q()[i] - expect).abs() < 1e-9);
            assert!((last.point.p()[i] - z0.p()[i]).abs() < 1e-12);
        }
        assert_eq!(traj.len(), 101);
        assert!((last.time - 5.0).abs() < 1e-12);
    }

    #[test]
    fn gyromotion_radius_center_and_energy() {
        let b = 2.0;
        let yv = 1.0;
        let field = abelian_uniform_field([0.0, 0.0, b]).unwrap();
        let alg = field.algebra().clone();
        let st = twisted_structure(&field, &alg).unwrap();
        let z0 = PhasePoint::twisted(&[0.0; 3], &[0.6, 0.0, 0.3], &[0.0], &[yv]).unwrap();
        let omega = yv * b;
        let dt = TAU / omega / 1000.0;
        let traj = integrate_particle(&kinetic, &st, &z0, dt, 10_000).unwrap();

        let h0 = traj[0].energy;
        let radius = 0.6 / omega;
        let center = |p: &PhasePoint| [p.q()[0] + p.p()[1] / omega, p.q()[1] - p.p()[0] / omega];
        let c0 = center(&traj[0].point);
        for s in &traj {
            let perp = (s.point.p()[0].powi(2) + s.point.p()[1].powi(2)).sqrt();
            assert!((perp - 0.6).abs() < 1e-6, "perp momentum at t={}", s.time);
            let c = center(&s.point);
            assert!((c[0] - c0[0]).abs() < 1e-6 && (c[1] - c0[1]).abs() < 1e-6);
            let r = ((s.point.q()[0] - c[0]).powi(2) + (s.point.q()[1] - c[1]).powi(2)).sqrt();
            assert!((r - radius).abs() < 1e-6, "radius {r} at t={}", s.time);
            assert!((s.energy - h0).abs() < 1e-8 * h0);
        }
        // ten full periods return the momentum to its start
        let last = traj.last().unwrap();
        assert!((last.point.p()[0] - 0.6).abs() < 1e-6);
        assert!((last.point.p()[1]).abs() < 1e-6);
    }

    #[test]
    fn nan_hamiltonian_reports_blow_up() {
        let alg = LieAlgebraSpec::abelian(0);
        let st = canonical_structure(1, 0, &alg).unwrap();
        let z0 = PhasePoint::canonical(&[0.0], &[1.0], &[], &[]).unwrap();
        let h = |w: &PhasePoint| {
            if w.q()[0] > 0.5 {
                f64::NAN
            } else {
                0.5 * w.p()[0] * w.p()[0]
            }
        };
        let r = integrate_particle(&h, &st, &z0, 0.1, 100);
        match r {
            Err(Error::BlowUp { step }) => assert!((5..=7).contains(&step), "step {step}"),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_step_sizes() {
        let alg = LieAlgebraSpec::abelian(0);
        let st = canonical_structure(1, 0, &alg).unwrap();
        let z0 = PhasePoint::canonical(&[0.0], &[1.0], &[], &[]).unwrap();
        for dt in [0.0, -0.1, f64::NAN] {
            assert!(matches!(
                integrate_particle(&kinetic, &st, &z0, dt, 10),
                Err(Error::Precondition(_))
            ));
        }
    }

    #[test]
    fn charts_agree_for_zero_potential() {
        let alg = LieAlgebraSpec::abelian(1);
        let field = GaugeFieldSpec::from_potential(&alg, 3, |_| DMatrix::zeros(1, 3)).unwrap();
        let z0 = PhasePoint::twisted(&[0.1, 0.2, 0.3], &[0.4, -0.5, 0.6], &[0.0], &[0.9]).unwrap();
        let dev = chart_equivalence(&z0, &field, &alg, &kinetic, 0.02, 200).unwrap();
        assert!(dev < 1e-12, "{dev:.3e}");
    }

    #[test]
    fn charts_agree_for_uniform_field_over_ten_periods() {
        let b = 2.0;
        let yv = 0.8;
        let field = abelian_uniform_field([0.0, 0.0, b]).unwrap();
        let alg = field.algebra().clone();
        let z0 = PhasePoint::twisted(&[0.0; 3], &[0.6, 0.0, 0.3], &[0.2], &[yv]).unwrap();
        let dt = TAU / (yv * b) / 1000.0;
        let dev = chart_equivalence(&z0, &field, &alg, &kinetic, dt, 10_000).unwrap();
        assert!(dev < 1e-8, "{dev:.3e}");
    }

    #[test]
    fn charts_agree_for_flat_su2_connection() {
        let field = su2_pure_gauge(0.8, 1.3).unwrap();
        let alg = field.algebra().clone();
        let z0 = PhasePoint::twisted(
            &[0.2, -0.1, 0.4],
            &[0.5, 0.3, -0.2],
            &[0.0; 3],
            &[0.4, -0.3, 0.5],
        )
        .unwrap();
        let dev = chart_equivalence(&z0, &field, &alg, &kinetic, 0.005, 1000).unwrap();
        assert!(dev < 1e-6, "{dev:.3e}");
    }
}
