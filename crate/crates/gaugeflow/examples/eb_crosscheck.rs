//! The extended potential-based solver against the plain staggered E-B
//! curl solver, from identical plane-wave data. Two unrelated
//! discretizations of the same physics agreeing at their common order.

use std::f64::consts::TAU;

use gaugeflow::eb::{plane_wave_state, step_eb};
use gaugeflow::grid::{Backend, Grid, VectorField};
use gaugeflow::maxwell::ExtendedRun;

fn main() -> gaugeflow::Result<()> {
    let grid = Grid::new(&[16, 16, 16], &[TAU; 3], Backend::Spectral)?;
    let (mut eb, ext0) = plane_wave_state(&grid, [1, 1, 0], 0.01, [1.0, -1.0, 0.0])?;
    let dt = 0.05 * grid.min_spacing();
    let mut run = ExtendedRun::new(&ext0, dt)?;
    let j0 = VectorField::zeros(&grid);

    println!("extended vs staggered E-B, dt = {dt:.4e}");
    println!("{:>8} {:>14} {:>14}", "t", "rel |dE|_2", "rel |dB|_2");
    for step in 1..=100 {
        run.step_n(1);
        eb = step_eb(&eb, &j0, dt)?;
        if step % 20 == 0 {
            let s = run.snapshot()?;
            let (e_x, b_x) = s.em_fields()?;
            let b_ref = eb.synchronized_b(dt)?;
            let de = e_x.sub(eb.e())?.l2_norm() / eb.e().l2_norm();
            let db = b_x.sub(&b_ref)?.l2_norm() / b_ref.l2_norm();
            println!("{:8.3} {:14.4e} {:14.4e}", s.time(), de, db);
        }
    }
    Ok(())
}
