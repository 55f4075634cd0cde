//! Charged particle in a uniform magnetic field under the twisted bracket:
//! circular orbit with conserved gyroradius, guiding center, and energy.

use std::f64::consts::TAU;

use gaugeflow::gauge::{abelian_uniform_field, integrate_particle, twisted_structure, PhasePoint};

fn main() -> gaugeflow::Result<()> {
    let b = 2.0;
    let y = 1.0;
    let field = abelian_uniform_field([0.0, 0.0, b])?;
    let alg = field.algebra().clone();
    let st = twisted_structure(&field, &alg)?;
    let z0 = PhasePoint::twisted(&[0.0, 0.0, 0.0], &[0.6, 0.0, 0.3], &[0.0], &[y])?;
    let h = |z: &PhasePoint| 0.5 * z.p().iter().map(|v| v * v).sum::<f64>();

    let period = TAU / (y * b);
    let dt = period / 1000.0;
    let traj = integrate_particle(&h, &st, &z0, dt, 5000)?;
    let h0 = traj[0].energy;

    println!(
        "gyromotion: period = {period:.6}, radius = {:.6}",
        0.6 / (y * b)
    );
    println!(
        "{:>10} {:>12} {:>12} {:>12} {:>12}",
        "t", "q1", "q2", "radius err", "energy err"
    );
    for tp in traj.iter().step_by(500) {
        let p = tp.point.p();
        let q = tp.point.q();
        let radius = (p[0] * p[0] + p[1] * p[1]).sqrt() / (y * b);
        println!(
            "{:10.4} {:12.6} {:12.6} {:12.3e} {:12.3e}",
            tp.time,
            q[0],
            q[1],
            (radius - 0.3).abs(),
            (tp.energy - h0).abs()
        );
    }
    Ok(())
}
