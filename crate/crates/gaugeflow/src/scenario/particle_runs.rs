//! Particle scenario runners: gyromotion, bracket defects, su(2) charges.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{cadence, RunReport, ScenarioConfig};
use crate::error::{Error, Result};
use crate::gauge::{
    abelian_flux_field, abelian_uniform_field, chart_equivalence, integrate_particle,
    jacobi_residual, su2_pure_gauge, twisted_structure, ym_field_residual, PhasePoint,
    TrajectoryPoint,
};
use crate::io::CsvWriter;

const RADIUS_TOL: f64 = 1e-6;
const CENTER_TOL: f64 = 1e-6;
const GYRO_ENERGY_REL: f64 = 1e-8;
const ENERGY_REL: f64 = 1e-7;
const JACOBI_DEFECT_TOL: f64 = 1e-6;
const FLATNESS_TOL: f64 = 1e-9;
const FIELD_EQ_TOL: f64 = 1e-6;
const CASIMIR_REL: f64 = 1e-6;
const CHART_TOL: f64 = 1e-6;

fn kinetic(z: &PhasePoint) -> f64 {
    0.5 * z.p().iter().map(|v| v * v).sum::<f64>()
}

/// Initial phase-space point from the config, with the dimension errors
/// phrased in config-field terms.
fn particle_point(cfg: &ScenarioConfig, n: usize, m: usize) -> Result<PhasePoint> {
    let p = &cfg.particle;
    for (name, len, want) in [
        ("particle.q0", p.q0.len(), n),
        ("particle.p0", p.p0.len(), n),
        ("particle.u0", p.u0.len(), m),
        ("particle.y0", p.y0.len(), m),
    ] {
        if len != want {
            return Err(Error::Config(format!(
                "{name} must have {want} entries for scenario {}, got {len}",
                cfg.scenario
            )));
        }
    }
    PhasePoint::twisted(&p.q0, &p.p0, &p.u0, &p.y0)
}

fn particle_csv(dir: &Path, traj: &[TrajectoryPoint], every: usize) -> Result<PathBuf> {
    let first = traj
        .first()
        .ok_or_else(|| Error::Precondition("cannot write a CSV from an empty trajectory".into()))?;
    let (n, m) = (first.point.n(), first.point.m());
    let mut names: Vec<String> = vec!["t".into()];
    names.extend((1..=n).map(|i| format!("q{i}")));
    names.extend((1..=n).map(|i| format!("p{i}")));
    names.extend((1..=m).map(|s| format!("y{s}")));
    names.push("H".into());
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let path = dir.join("particle.csv");
    let mut csv = CsvWriter::create(&path, &header)?;
    let last = traj.len() - 1;
    for (idx, tp) in traj.iter().enumerate() {
        if idx % every != 0 && idx != last {
            continue;
        }
        let mut row = Vec::with_capacity(2 + 2 * n + m);
        row.push(tp.time);
        row.extend_from_slice(tp.point.q());
        row.extend_from_slice(tp.point.p());
        row.extend_from_slice(tp.point.y());
        row.push(tp.energy);
        csv.row(&row)?;
    }
    csv.finish()?;
    Ok(path)
}

fn max_energy_dev(traj: &[TrajectoryPoint]) -> f64 {
    let h0 = traj[0].energy;
    let floor = h0.abs().max(f64::MIN_POSITIVE);
    traj.iter()
        .map(|tp| (tp.energy - h0).abs() / floor)
        .fold(0.0, f64::max)
}

pub(crate) fn particle_constant_b(cfg: &ScenarioConfig) -> Result<RunReport> {
    let b = cfg.particle.b;
    let bmag = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bmag == 0.0 {
        return Err(Error::Config(
            "particle.b must be nonzero for particle_constant_B".into(),
        ));
    }
    let z0 = particle_point(cfg, 3, 1)?;
    let y = z0.y()[0];
    if y == 0.0 {
        return Err(Error::Config(
            "particle.y0 must be nonzero for particle_constant_B".into(),
        ));
    }
    let omega = y.abs() * bmag;
    let period = TAU / omega;
    let dt = cfg.time.dt.unwrap_or(period / 1000.0);
    let steps = cfg.time.steps.unwrap_or(10_000).max(1);
    let every = cadence(cfg, steps);

    let field = abelian_uniform_field(b)?;
    let alg = field.algebra().clone();
    let st = twisted_structure(&field, &alg)?;
    let traj = integrate_particle(&kinetic, &st, &z0, dt, steps)?;

    let bhat = [b[0] / bmag, b[1] / bmag, b[2] / bmag];
    let perp = |v: &[f64]| -> [f64; 3] {
        let d = v[0] * bhat[0] + v[1] * bhat[1] + v[2] * bhat[2];
        [v[0] - d * bhat[0], v[1] - d * bhat[1], v[2] - d * bhat[2]]
    };
    let norm = |v: [f64; 3]| -> f64 { v.iter().map(|c| c * c).sum::<f64>().sqrt() };
    // guiding center (transverse part): q + (p x B) / (y |B|^2)
    let center = |q: &[f64], p: &[f64]| -> [f64; 3] {
        let c = [
            p[1] * b[2] - p[2] * b[1],
            p[2] * b[0] - p[0] * b[2],
            p[0] * b[1] - p[1] * b[0],
        ];
        let s = y * bmag * bmag;
        perp(&[q[0] + c[0] / s, q[1] + c[1] / s, q[2] + c[2] / s])
    };

    let radius0 = norm(perp(z0.p())) / omega;
    let c0 = center(z0.q(), z0.p());
    let mut radius_err = 0.0f64;
    let mut center_err = 0.0f64;
    for tp in &traj {
        let r = norm(perp(tp.point.p())) / omega;
        radius_err = radius_err.max((r - radius0).abs());
        let c = center(tp.point.q(), tp.point.p());
        center_err = center_err.max(norm([c[0] - c0[0], c[1] - c0[1], c[2] - c0[2]]));
    }

    let csv = particle_csv(&cfg.output_dir, &traj, every)?;
    let mut report = RunReport {
        steps,
        dt,
        artifacts: vec![csv],
        ..RunReport::default()
    };
    report.note("cyclotron_period", period);
    report.note("gyroradius", radius0);
    report.note("initial_energy", traj[0].energy);
    report.check("gyroradius_error", radius_err, RADIUS_TOL);
    report.check("guiding_center_drift", center_err, CENTER_TOL);
    report.check("energy_drift_rel", max_energy_dev(&traj), GYRO_ENERGY_REL);
    Ok(report)
}

pub(crate) fn particle_nonclosed_field_jacobi(cfg: &ScenarioConfig) -> Result<RunReport> {
    let z0 = particle_point(cfg, 3, 1)?;
    let y = z0.y()[0];
    if y == 0.0 {
        return Err(Error::Config(
            "particle.y0 must be nonzero for particle_nonclosed_field_jacobi".into(),
        ));
    }
    // The radial field B(q) = q has div B = 3, so no potential exists; the
    // bracket stays antisymmetric but the Jacobi identity picks up a defect
    // exactly equal to -y div B on the momentum triple.
    let field = abelian_flux_field(|q| [q[0], q[1], q[2]])?;
    let alg = field.algebra().clone();
    let st = twisted_structure(&field, &alg)?;

    let expected = -3.0 * y;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.initial.seed);
    let mut defect_dev = 0.0f64;
    for _ in 0..20 {
        let q: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z = PhasePoint::twisted(&q, &p, &[0.0], &[y])?;
        let r = jacobi_residual(&st, &z, (3, 4, 5))?;
        defect_dev = defect_dev.max((r - expected).abs());
    }

    let dt = cfg.time.dt.unwrap_or(0.005);
    let steps = cfg.time.steps.unwrap_or(2000).max(1);
    let every = cadence(cfg, steps);
    let traj = integrate_particle(&kinetic, &st, &z0, dt, steps)?;
    let csv = particle_csv(&cfg.output_dir, &traj, every)?;

    let mut report = RunReport {
        steps,
        dt,
        artifacts: vec![csv],
        ..RunReport::default()
    };
    report.note("jacobi_defect_expected", expected);
    report.check("jacobi_defect_deviation", defect_dev, JACOBI_DEFECT_TOL);
    // Energy rides on the antisymmetry alone, so it is still conserved even
    // though the bracket is not Poisson.
    report.check("energy_drift_rel", max_energy_dev(&traj), ENERGY_REL);
    Ok(report)
}

pub(crate) fn su2_pure_gauge_run(cfg: &ScenarioConfig) -> Result<RunReport> {
    let field = su2_pure_gauge(cfg.particle.alpha, cfg.particle.beta)?;
    let alg = field.algebra().clone();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.initial.seed);
    let mut flat_max = 0.0f64;
    let mut resid_max = 0.0f64;
    for _ in 0..50 {
        let q: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        for f in field.curvature(&q)? {
            flat_max = flat_max.max(f.amax());
        }
        for r in ym_field_residual(&field, &alg, &q)? {
            resid_max = resid_max.max(r.max_abs());
        }
    }

    let z0 = particle_point(cfg, 3, 3)?;
    let dt = cfg.time.dt.unwrap_or(0.005);
    let steps = cfg.time.steps.unwrap_or(1000).max(1);
    let every = cadence(cfg, steps);
    let st = twisted_structure(&field, &alg)?;
    let traj = integrate_particle(&kinetic, &st, &z0, dt, steps)?;

    // |y| is a Casimir of the so(3) charge block; the flow moves y along a
    // coadjoint orbit (a sphere), so its norm must hold to integrator error.
    let ynorm =
        |tp: &TrajectoryPoint| -> f64 { tp.point.y().iter().map(|v| v * v).sum::<f64>().sqrt() };
    let y0 = ynorm(&traj[0]);
    let yfloor = y0.max(f64::MIN_POSITIVE);
    let casimir_dev = traj
        .iter()
        .map(|tp| (ynorm(tp) - y0).abs() / yfloor)
        .fold(0.0, f64::max);

    let csv = particle_csv(&cfg.output_dir, &traj, every)?;
    let mut report = RunReport {
        steps,
        dt,
        artifacts: vec![csv],
        ..RunReport::default()
    };
    report.note("initial_energy", traj[0].energy);
    report.note("charge_norm", y0);
    report.check("curvature_flatness", flat_max, FLATNESS_TOL);
    report.check("field_equation_residual", resid_max, FIELD_EQ_TOL);
    report.check("charge_casimir_drift_rel", casimir_dev, CASIMIR_REL);
    report.check("energy_drift_rel", max_energy_dev(&traj), ENERGY_REL);
    Ok(report)
}

pub(crate) fn chart_equivalence_su2(cfg: &ScenarioConfig) -> Result<RunReport> {
    let field = su2_pure_gauge(cfg.particle.alpha, cfg.particle.beta)?;
    let alg = field.algebra().clone();
    let z0 = particle_point(cfg, 3, 3)?;
    let dt = cfg.time.dt.unwrap_or(0.005);
    let steps = cfg.time.steps.unwrap_or(1000).max(1);
    let every = cadence(cfg, steps);

    let dev = chart_equivalence(&z0, &field, &alg, &kinetic, dt, steps)?;

    let st = twisted_structure(&field, &alg)?;
    let traj = integrate_particle(&kinetic, &st, &z0, dt, steps)?;
    let csv = particle_csv(&cfg.output_dir, &traj, every)?;

    let mut report = RunReport {
        steps,
        dt,
        artifacts: vec![csv],
        ..RunReport::default()
    };
    report.note("initial_energy", traj[0].energy);
    report.check("chart_deviation", dev, CHART_TOL);
    report.check("energy_drift_rel", max_energy_dev(&traj), ENERGY_REL);
    Ok(report)
}
