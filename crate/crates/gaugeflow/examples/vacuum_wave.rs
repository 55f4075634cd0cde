//! Plane-wave vacuum run: energy stays in a narrow band, the divergence
//! constraint is transported exactly, and the final potential survives a
//! round trip through the snapshot format.

use gaugeflow::eb::plane_wave_state;
use gaugeflow::grid::{Backend, Grid};
use gaugeflow::io::{read_snapshot, write_vector_snapshot};
use gaugeflow::maxwell::{extended_row, ExtendedRun};

fn main() -> gaugeflow::Result<()> {
    let grid = Grid::new(
        &[16, 16, 16],
        &[std::f64::consts::TAU; 3],
        Backend::Spectral,
    )?;
    let (_, state0) = plane_wave_state(&grid, [1, 0, 0], 0.01, [0.0, 1.0, 0.0])?;
    let h0 = state0.hamiltonian()?;
    let dt = 0.1 * grid.min_spacing();
    let charge0 = {
        let (e, _) = state0.em_fields()?;
        e.div()?
    };

    println!("plane wave on 16^3, dt = {dt:.4e}, H0 = {h0:.10e}");
    println!(
        "{:>8} {:>18} {:>12} {:>12} {:>12}",
        "t", "H", "|H-H0|/H0", "lorentz", "gauss"
    );
    let mut run = ExtendedRun::new(&state0, dt)?;
    for _ in 0..10 {
        run.step_n(49);
        let prev = run.snapshot()?;
        run.step_n(1);
        let curr = run.snapshot()?;
        let row = extended_row(&prev, &curr, &charge0)?;
        println!(
            "{:8.3} {:18.10e} {:12.3e} {:12.3e} {:12.3e}",
            row.time,
            row.hamiltonian,
            (row.hamiltonian - h0).abs() / h0,
            row.lorentz,
            row.gauss
        );
    }

    let fin = run.snapshot()?;
    let dir = std::env::temp_dir().join("gaugeflow_vacuum_wave");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("a.snap");
    write_vector_snapshot(&path, "a", fin.time(), fin.a())?;
    let back = read_snapshot(&path)?.to_vector(Backend::Spectral)?;
    println!(
        "snapshot round trip: |A' - A|_inf = {:.3e}  ({})",
        back.sub(fin.a())?.linf_norm(),
        path.display()
    );
    Ok(())
}
