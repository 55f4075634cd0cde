//! Field-theory scenario runners: vacuum waves, driven charges, statics.

use std::f64::consts::TAU;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{cadence, RunReport, ScenarioConfig};
use crate::eb::{plane_wave_state, step_eb, EBState};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::io::{write_scalar_snapshot, write_vector_snapshot, CsvWriter};
use crate::maxwell::{
    extended_row, fit_drift_slope, init_f_from_charge, reduced_row, ExtendedRun, ExtendedState,
    FieldDiagnostics, ReducedRun, ReducedSourcedState, SourceSpec,
};

const LORENTZ_REL: f64 = 1e-10;
const ENERGY_DRIFT_REL: f64 = 1e-8;
const ENERGY_BAND_REL: f64 = 1e-3;
const GAUSS_REL: f64 = 1e-8;
const DIV_B_REL: f64 = 1e-10;
const FORCE_RESIDUAL_REL: f64 = 1e-3;
const WAVE_RESIDUAL_REL: f64 = 1e-3;
const EB_AGREEMENT_REL: f64 = 1e-3;
const EB_AGREEMENT_STEPS: usize = 100;
// roundoff on the probe area random-walks with step count; 1e-9 covers the
// default 1000-step runs with margin while still pinning symplecticity
const PROBE_DRIFT_REL: f64 = 1e-9;
const EQUILIBRIUM_REL: f64 = 1e-12;

fn expect_family(cfg: &ScenarioConfig, expected: &str) -> Result<()> {
    match &cfg.initial.family {
        None => Ok(()),
        Some(f) if f == expected => Ok(()),
        Some(f) => Err(Error::Config(format!(
            "initial.family {f:?} is not valid for {} (expected {expected:?})",
            cfg.scenario
        ))),
    }
}

pub(crate) fn vacuum_plane_wave(cfg: &ScenarioConfig) -> Result<RunReport> {
    expect_family(cfg, "plane_wave")?;
    let grid = cfg.grid.build()?;
    let (_, state0) = plane_wave_state(
        &grid,
        cfg.initial.mode,
        cfg.initial.amplitude,
        cfg.initial.polarization,
    )?;
    run_extended(cfg, state0, 500)
}

pub(crate) fn vacuum_random(cfg: &ScenarioConfig) -> Result<RunReport> {
    expect_family(cfg, "random")?;
    let grid = cfg.grid.build()?;
    let kmax = cfg.initial.kmax.max(1);
    let amp = cfg.initial.amplitude;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.initial.seed);
    // A gets both a solenoidal and a gradient part so that eta = div A is
    // genuinely nonzero; Y keeps its longitudinal component so the charge
    // div E is nontrivial too.
    let mut a = VectorField::random_solenoidal(&grid, kmax, amp, &mut rng)?;
    let chi = ScalarField::random_band_limited(&grid, kmax, 0.3 * amp, &mut rng);
    a.scaled_add_assign(1.0, &chi.grad()?);
    let y = VectorField::random_band_limited(&grid, kmax, amp, &mut rng);
    let w = ScalarField::random_band_limited(&grid, kmax, amp, &mut rng);
    let state0 = ExtendedState::lorentz_consistent(a, y, w, 0.0)?;
    run_extended(cfg, state0, 1000)
}

/// Shared vacuum driver: march the extended system, emit one diagnostics
/// row per output window, gate the conserved quantities.
fn run_extended(
    cfg: &ScenarioConfig,
    state0: ExtendedState,
    default_steps: usize,
) -> Result<RunReport> {
    let grid = state0.grid().clone();
    let dt = cfg.time.dt.unwrap_or(0.1 * grid.min_spacing());
    let steps = cfg.time.steps.unwrap_or(default_steps).max(1);
    let every = cadence(cfg, steps);

    let scale0 = state0.scale();
    let h0 = state0.hamiltonian()?;
    let charge0 = {
        let (e0, _) = state0.em_fields()?;
        e0.div()?
    };

    let mut run = ExtendedRun::new(&state0, dt)?;
    let mut probe = if cfg.diagnostics.symplectic_probe {
        Some(SymplecticProbe::new(
            &state0,
            dt,
            cfg.initial.seed ^ 0x9e3779b9,
        )?)
    } else {
        None
    };

    let csv_path = cfg.output_dir.join("fields.csv");
    let header: Vec<&str> = FieldDiagnostics::CSV_HEADER.split(',').collect();
    let mut csv = CsvWriter::create(&csv_path, &header)?;

    let mut step_axis = Vec::new();
    let mut energies = Vec::new();
    let mut lorentz_max = 0.0f64;
    let mut gauss_max = 0.0f64;
    let mut divb_max = 0.0f64;
    let mut faraday_max = 0.0f64;
    let mut ampere_max = 0.0f64;
    let mut band_max = 0.0f64;

    let mut done = 0usize;
    while done < steps {
        let chunk = every.min(steps - done);
        run.step_n(chunk - 1);
        let prev = run.snapshot()?;
        run.step_n(1);
        done += chunk;
        let curr = run.snapshot()?;
        let row = extended_row(&prev, &curr, &charge0)?;
        csv.row(&[
            row.time,
            row.hamiltonian,
            row.lorentz,
            row.gauss,
            row.div_b,
            row.faraday,
            row.ampere,
        ])?;
        step_axis.push(done as f64);
        energies.push(row.hamiltonian);
        lorentz_max = lorentz_max.max(row.lorentz);
        gauss_max = gauss_max.max(row.gauss);
        divb_max = divb_max.max(row.div_b);
        faraday_max = faraday_max.max(row.faraday);
        ampere_max = ampere_max.max(row.ampere);
        band_max = band_max.max((row.hamiltonian - h0).abs());
        if let Some(p) = probe.as_mut() {
            p.measure(&curr, chunk)?;
        }
    }
    csv.finish()?;

    let finals = run.snapshot()?;
    let mut artifacts = vec![csv_path];
    artifacts.extend(write_extended_snapshots(&cfg.output_dir, &finals)?);

    let drift = if energies.len() < 2 {
        0.0
    } else {
        fit_drift_slope(&step_axis, &energies)
    };
    let h_floor = h0.abs().max(f64::MIN_POSITIVE);

    let mut report = RunReport {
        steps,
        dt,
        artifacts,
        ..RunReport::default()
    };
    report.note("initial_energy", h0);
    report.note("field_scale", scale0);
    report.note("faraday_residual_rel", faraday_max / scale0);
    report.note("ampere_residual_rel", ampere_max / scale0);
    report.check("lorentz_linf_rel", lorentz_max / scale0, LORENTZ_REL);
    report.check(
        "energy_drift_per_step_rel",
        drift.abs() / h_floor,
        ENERGY_DRIFT_REL,
    );
    report.check("energy_band_rel", band_max / h_floor, ENERGY_BAND_REL);
    report.check("gauss_rel", gauss_max / scale0, GAUSS_REL);
    report.check("div_b_rel", divb_max / scale0, DIV_B_REL);
    if let Some(p) = probe {
        report.check("symplectic_area_drift_rel", p.max_rel, PROBE_DRIFT_REL);
    }
    if cfg.diagnostics.compare_reference {
        let dev = eb_agreement(&state0, dt, EB_AGREEMENT_STEPS)?;
        report.check("eb_agreement_rel", dev, EB_AGREEMENT_REL);
    }
    Ok(report)
}

/// Pair of perturbed runs riding along the base run; the symplectic area
/// of the two difference tangents must stay constant under the leapfrog
/// (the flow is linear, so finite differences evolve exactly like tangents).
struct SymplecticProbe {
    r1: ExtendedRun,
    r2: ExtendedRun,
    area0: f64,
    max_rel: f64,
}

impl SymplecticProbe {
    fn new(base: &ExtendedState, dt: f64, seed: u64) -> Result<Self> {
        let g = base.grid();
        let eps = 1e-5 * base.scale();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mk = |rng: &mut ChaCha8Rng| -> Result<ExtendedState> {
            let da = VectorField::random_band_limited(g, 1, eps, rng);
            let dy = VectorField::random_band_limited(g, 1, eps, rng);
            let de = ScalarField::random_band_limited(g, 1, eps, rng);
            let dw = ScalarField::random_band_limited(g, 1, eps, rng);
            ExtendedState::new(
                base.a().add(&da)?,
                base.y().add(&dy)?,
                base.eta().add(&de)?,
                base.w().add(&dw)?,
                base.time(),
            )
        };
        let s1 = mk(&mut rng)?;
        let s2 = mk(&mut rng)?;
        let r1 = ExtendedRun::new(&s1, dt)?;
        let r2 = ExtendedRun::new(&s2, dt)?;
        let area0 = probe_area(base, &r1.snapshot()?, &r2.snapshot()?)?;
        Ok(SymplecticProbe {
            r1,
            r2,
            area0,
            max_rel: 0.0,
        })
    }

    fn measure(&mut self, base: &ExtendedState, chunk: usize) -> Result<()> {
        self.r1.step_n(chunk);
        self.r2.step_n(chunk);
        let a = probe_area(base, &self.r1.snapshot()?, &self.r2.snapshot()?)?;
        self.max_rel = self
            .max_rel
            .max((a - self.area0).abs() / self.area0.abs().max(f64::MIN_POSITIVE));
        Ok(())
    }
}

// omega(d1, d2) = <dY1, dA2> - <dY2, dA1> + <dW1, deta2> - <dW2, deta1>
fn probe_area(s0: &ExtendedState, s1: &ExtendedState, s2: &ExtendedState) -> Result<f64> {
    let d1a = s1.a().sub(s0.a())?;
    let d1y = s1.y().sub(s0.y())?;
    let d1e = s1.eta().sub(s0.eta())?;
    let d1w = s1.w().sub(s0.w())?;
    let d2a = s2.a().sub(s0.a())?;
    let d2y = s2.y().sub(s0.y())?;
    let d2e = s2.eta().sub(s0.eta())?;
    let d2w = s2.w().sub(s0.w())?;
    Ok(d1y.inner(&d2a)? - d2y.inner(&d1a)? + d1w.inner(&d2e)? - d2w.inner(&d1e)?)
}

/// Fixed-horizon comparison against the staggered E-B curl solver started
/// from the same fields. Returns the worst relative L2 deviation of E and
/// of the synchronized B over the horizon.
fn eb_agreement(state0: &ExtendedState, dt: f64, nsteps: usize) -> Result<f64> {
    let grid = state0.grid();
    let mut run = ExtendedRun::new(state0, dt)?;
    let (e0, b0) = state0.em_fields()?;
    let mut eb = EBState::new(e0, b0, state0.time())?;
    let j0 = VectorField::zeros(grid);
    let mut worst = 0.0f64;
    for s in 1..=nsteps {
        run.step_n(1);
        eb = step_eb(&eb, &j0, dt)?;
        if s % 10 == 0 || s == nsteps {
            let curr = run.snapshot()?;
            let (e_x, b_x) = curr.em_fields()?;
            let b_ref = eb.synchronized_b(dt)?;
            let de = e_x.sub(eb.e())?.l2_norm() / eb.e().l2_norm().max(f64::MIN_POSITIVE);
            let db = b_x.sub(&b_ref)?.l2_norm() / b_ref.l2_norm().max(f64::MIN_POSITIVE);
            worst = worst.max(de).max(db);
        }
    }
    Ok(worst)
}

fn write_extended_snapshots(dir: &std::path::Path, s: &ExtendedState) -> Result<Vec<PathBuf>> {
    let t = s.time();
    let (e, b) = s.em_fields()?;
    let mut out = Vec::new();
    for (name, f) in [("a", s.a()), ("y", s.y()), ("e", &e), ("b", &b)] {
        let p = dir.join(format!("{name}_final.snap"));
        write_vector_snapshot(&p, name, t, f)?;
        out.push(p);
    }
    for (name, f) in [("eta", s.eta()), ("w", s.w())] {
        let p = dir.join(format!("{name}_final.snap"));
        write_scalar_snapshot(&p, name, t, f)?;
        out.push(p);
    }
    Ok(out)
}

fn write_reduced_snapshots(dir: &std::path::Path, s: &ReducedSourcedState) -> Result<Vec<PathBuf>> {
    let t = s.time();
    let e = s.electric_field()?;
    let mut out = Vec::new();
    for (name, f) in [("s", s.s()), ("b", s.b()), ("f", s.f()), ("e", &e)] {
        let p = dir.join(format!("{name}_final.snap"));
        write_vector_snapshot(&p, name, t, f)?;
        out.push(p);
    }
    for (name, f) in [("eta", s.eta()), ("w", s.w())] {
        let p = dir.join(format!("{name}_final.snap"));
        write_scalar_snapshot(&p, name, t, f)?;
        out.push(p);
    }
    Ok(out)
}

/// Separable oscillating source: `rho(t) = cos(om t) rho_hat` with the
/// matching current `J(t) = om sin(om t) P`, `div P = rho_hat`, so charge
/// is conserved exactly and the impulse integrates in closed form.
fn oscillating_source(grid: &Grid, amp: f64, om: f64) -> Result<(VectorField, SourceSpec)> {
    let l = grid.lengths();
    let (lx, ly) = (l[0], l[1]);
    let rho_hat = ScalarField::from_fn(grid, move |x, y, _| {
        amp * (TAU * x / lx).sin() * (TAU * y / ly).cos()
    });
    let profile = init_f_from_charge(&rho_hat)?;
    let rh = rho_hat.clone();
    let pr = profile.clone();
    let src = SourceSpec::new(
        grid,
        move |t| rh.scaled((om * t).cos()),
        move |t| pr.scaled(om * (om * t).sin()),
    )?
    .with_separable_impulse(profile.clone(), move |t0, t1| {
        (om * t0).cos() - (om * t1).cos()
    })?;
    Ok((profile.scaled(1.0), src))
}

pub(crate) fn sourced_oscillating_charge(cfg: &ScenarioConfig) -> Result<RunReport> {
    let grid = cfg.grid.build()?;
    let om = cfg.source.frequency;
    if om <= 0.0 {
        return Err(Error::Config(format!(
            "source.frequency must be positive, got {om}"
        )));
    }
    let (f0, src) = oscillating_source(&grid, cfg.source.amplitude, om)?;
    let state0 = ReducedSourcedState::new(
        VectorField::zeros(&grid),
        VectorField::zeros(&grid),
        f0,
        ScalarField::zeros(&grid),
        ScalarField::zeros(&grid),
        0.0,
    )?;

    let dt = cfg.time.dt.unwrap_or(0.05 * grid.min_spacing());
    let steps = cfg.time.steps.unwrap_or(400).max(1);
    let every = cadence(cfg, steps);
    let track = cfg.diagnostics.track_potential;
    let mut run = ReducedRun::new(&state0, src, dt, track)?;

    let csv_path = cfg.output_dir.join("fields.csv");
    let header: Vec<&str> = FieldDiagnostics::CSV_HEADER.split(',').collect();
    let mut csv = CsvWriter::create(&csv_path, &header)?;

    let mut gauss_rel = 0.0f64;
    let mut divb_rel = 0.0f64;
    let mut faraday_rel = 0.0f64;
    let mut ampere_rel = 0.0f64;
    let mut lorentz_rel = 0.0f64;
    let mut wave_w_rel = 0.0f64;
    let mut wave_a_rel = 0.0f64;

    let mut done = 0usize;
    while done < steps {
        let chunk = every.min(steps - done);
        run.step_n(chunk - 1)?;
        let prev = run.snapshot()?;
        run.step_n(1)?;
        done += chunk;
        let curr = run.snapshot()?;
        let lorentz = if track {
            Some(run.lorentz_linf()?)
        } else {
            None
        };
        let row = reduced_row(&prev, &curr, run.source(), lorentz)?;
        csv.row(&[
            row.time,
            row.hamiltonian,
            row.lorentz,
            row.gauss,
            row.div_b,
            row.faraday,
            row.ampere,
        ])?;
        let sc = curr.scale();
        gauss_rel = gauss_rel.max(row.gauss / sc);
        divb_rel = divb_rel.max(row.div_b / sc);
        faraday_rel = faraday_rel.max(row.faraday / sc);
        ampere_rel = ampere_rel.max(row.ampere / sc);
        if track {
            lorentz_rel = lorentz_rel.max(row.lorentz / sc);
            if run.steps_taken() >= 2 {
                let (rw, ra) = run.wave_residuals()?;
                wave_w_rel = wave_w_rel.max(rw / sc);
                wave_a_rel = wave_a_rel.max(ra / sc);
            }
        }
    }
    csv.finish()?;

    let finals = run.snapshot()?;
    let mut artifacts = vec![csv_path];
    artifacts.extend(write_reduced_snapshots(&cfg.output_dir, &finals)?);

    let mut report = RunReport {
        steps,
        dt,
        artifacts,
        ..RunReport::default()
    };
    report.note("final_energy", finals.hamiltonian()?);
    report.note("field_scale", finals.scale());
    report.check("gauss_rel", gauss_rel, GAUSS_REL);
    report.check("div_b_rel", divb_rel, DIV_B_REL);
    report.check("faraday_residual_rel", faraday_rel, FORCE_RESIDUAL_REL);
    report.check("ampere_residual_rel", ampere_rel, FORCE_RESIDUAL_REL);
    if track {
        report.check("lorentz_linf_rel", lorentz_rel, LORENTZ_REL);
        report.check("w_wave_residual_rel", wave_w_rel, WAVE_RESIDUAL_REL);
        report.check("a_wave_residual_rel", wave_a_rel, WAVE_RESIDUAL_REL);
    }
    Ok(report)
}

pub(crate) fn static_charge_equilibrium(cfg: &ScenarioConfig) -> Result<RunReport> {
    let grid = cfg.grid.build()?;
    let l = grid.lengths();
    let (lx, ly) = (l[0], l[1]);
    let amp = cfg.source.amplitude;
    let rho = ScalarField::from_fn(&grid, move |x, y, _| {
        amp * (TAU * x / lx).sin() * (TAU * y / ly).cos()
    });
    let state0 = ReducedSourcedState::static_equilibrium(&rho)?;
    let src = SourceSpec::static_charge(rho)?;

    let dt = cfg.time.dt.unwrap_or(0.1 * grid.min_spacing());
    let steps = cfg.time.steps.unwrap_or(1000).max(1);
    let every = cadence(cfg, steps);
    let scale0 = state0.scale();
    let mut run = ReducedRun::new(&state0, src, dt, cfg.diagnostics.track_potential)?;

    let csv_path = cfg.output_dir.join("fields.csv");
    let header: Vec<&str> = FieldDiagnostics::CSV_HEADER.split(',').collect();
    let mut csv = CsvWriter::create(&csv_path, &header)?;

    let deviation = |s: &ReducedSourcedState| -> Result<f64> {
        let mut d = s.s().sub(state0.s())?.linf_norm();
        d = d.max(s.b().sub(state0.b())?.linf_norm());
        d = d.max(s.f().sub(state0.f())?.linf_norm());
        d = d.max(s.eta().sub(state0.eta())?.linf_norm());
        d = d.max(s.w().sub(state0.w())?.linf_norm());
        Ok(d)
    };

    let mut drift_rel = 0.0f64;
    let mut gauss_rel = 0.0f64;
    let mut done = 0usize;
    while done < steps {
        let chunk = every.min(steps - done);
        run.step_n(chunk - 1)?;
        let prev = run.snapshot()?;
        run.step_n(1)?;
        done += chunk;
        let curr = run.snapshot()?;
        let row = reduced_row(&prev, &curr, run.source(), None)?;
        csv.row(&[
            row.time,
            row.hamiltonian,
            row.lorentz,
            row.gauss,
            row.div_b,
            row.faraday,
            row.ampere,
        ])?;
        drift_rel = drift_rel.max(deviation(&curr)? / scale0);
        gauss_rel = gauss_rel.max(row.gauss / scale0);
    }
    csv.finish()?;

    let finals = run.snapshot()?;
    let mut artifacts = vec![csv_path];
    artifacts.extend(write_reduced_snapshots(&cfg.output_dir, &finals)?);

    let mut report = RunReport {
        steps,
        dt,
        artifacts,
        ..RunReport::default()
    };
    report.note("field_scale", scale0);
    report.note("energy", finals.hamiltonian()?);
    report.check("fixed_point_drift_rel", drift_rel, EQUILIBRIUM_REL);
    report.check("gauss_rel", gauss_rel, GAUSS_REL);
    Ok(report)
}
