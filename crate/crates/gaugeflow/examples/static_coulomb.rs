//! The Coulomb field of a frozen charge density is an exact fixed point of
//! the sourced stepper: every field returns to itself at roundoff, step
//! after step.

use std::f64::consts::TAU;

use gaugeflow::grid::{Backend, Grid, ScalarField};
use gaugeflow::maxwell::{ReducedRun, ReducedSourcedState, SourceSpec};

fn main() -> gaugeflow::Result<()> {
    let grid = Grid::new(&[16, 16, 16], &[TAU; 3], Backend::Spectral)?;
    let rho = ScalarField::from_fn(&grid, |x, y, _| x.sin() * y.cos());
    let state0 = ReducedSourcedState::static_equilibrium(&rho)?;
    let src = SourceSpec::static_charge(rho)?;
    let dt = 0.1 * grid.min_spacing();
    let mut run = ReducedRun::new(&state0, src, dt, false)?;

    println!(
        "static Coulomb state, |E|_inf = {:.4e}, H = {:.10e}",
        state0.electric_field()?.linf_norm(),
        state0.hamiltonian()?
    );
    println!("{:>8} {:>14} {:>14}", "t", "max drift", "energy drift");
    let h0 = state0.hamiltonian()?;
    for _ in 0..6 {
        run.step_n(50)?;
        let s = run.snapshot()?;
        let drift = s
            .f()
            .sub(state0.f())?
            .linf_norm()
            .max(s.s().sub(state0.s())?.linf_norm())
            .max(s.b().sub(state0.b())?.linf_norm())
            .max(s.eta().sub(state0.eta())?.linf_norm())
            .max(s.w().sub(state0.w())?.linf_norm());
        println!(
            "{:8.3} {:14.3e} {:14.3e}",
            s.time(),
            drift,
            (s.hamiltonian()? - h0).abs()
        );
    }
    Ok(())
}
