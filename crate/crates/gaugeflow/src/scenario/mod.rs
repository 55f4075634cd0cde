//! Named, reproducible simulation scenarios behind a small TOML config.
//!
//! A config names one scenario and optionally overrides its grid, step
//! count, initial data, sources, particle data, and diagnostic toggles;
//! everything omitted falls back to the scenario's own defaults (see
//! [`ScenarioConfig::default_for`]). Runs write CSV time series and final
//! field snapshots into `output_dir` and come back as a [`RunReport`]:
//! a list of named tolerance checks plus free-form numeric notes. A report
//! with a failed check is still `Ok` — failing a physics tolerance is a
//! result, not an I/O error — and the command-line front end turns it into
//! a nonzero exit status.
//!
//! Every source of randomness is seeded from the config, so identical
//! configs produce byte-identical diagnostic rows.
//!
//! The `GAUGEFLOW_THREADS` environment variable caps the data-parallel
//! thread pool used by the spectral transforms.

mod field_runs;
mod particle_runs;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::{Backend, Grid};
use serde::{Deserialize, Serialize};

/// Full description of one run. Round-trips through TOML unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// One of the names in [`list_scenarios`].
    pub scenario: String,
    /// Where CSV files and snapshots land; created if missing.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub source: SourceParams,
    #[serde(default)]
    pub particle: ParticleSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticToggles,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub lengths: Vec<f64>,
    pub backend: Backend,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            dims: vec![32, 32, 32],
            lengths: vec![std::f64::consts::TAU; 3],
            backend: Backend::Spectral,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(&self.dims, &self.lengths, self.backend)
    }
}

/// Step size, step count and output cadence. All optional; a scenario
/// substitutes its own defaults (e.g. the gyromotion run picks dt from the
/// cyclotron period).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSpec {
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    /// Emit a diagnostics row every this many steps (default: steps/100).
    pub output_every: Option<usize>,
}

/// Initial-data family and its parameters. Field scenarios read the subset
/// they understand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSpec {
    /// Optional family override; each scenario accepts only its own.
    pub family: Option<String>,
    /// Integer mode numbers of the plane wave.
    pub mode: [i32; 3],
    pub amplitude: f64,
    pub polarization: [f64; 3],
    /// Seed for random initial data and sample points.
    pub seed: u64,
    /// Band limit for random initial data.
    pub kmax: usize,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec {
            family: None,
            mode: [1, 0, 0],
            amplitude: 0.01,
            polarization: [0.0, 1.0, 0.0],
            seed: 7,
            kmax: 1,
        }
    }
}

/// Charge/current source parameters for the sourced scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceParams {
    pub amplitude: f64,
    pub frequency: f64,
}

impl Default for SourceParams {
    fn default() -> Self {
        SourceParams {
            amplitude: 1.0,
            frequency: 1.0,
        }
    }
}

/// Particle scenario data: background field parameters and the initial
/// phase-space point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParticleSpec {
    /// Uniform magnetic vector for the abelian scenarios.
    pub b: [f64; 3],
    pub q0: Vec<f64>,
    pub p0: Vec<f64>,
    pub u0: Vec<f64>,
    pub y0: Vec<f64>,
    /// Flat su(2) connection parameters.
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ParticleSpec {
    fn default() -> Self {
        ParticleSpec {
            b: [0.0, 0.0, 2.0],
            q0: vec![0.0; 3],
            p0: vec![0.6, 0.0, 0.3],
            u0: vec![0.0],
            y0: vec![1.0],
            alpha: 0.8,
            beta: 1.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticToggles {
    /// Track the vector potential alongside the reduced run (enables the
    /// Lorentz-condition and wave-equation residual columns).
    pub track_potential: bool,
    /// Evolve a pair of perturbation states and check that their symplectic
    /// area stays constant.
    pub symplectic_probe: bool,
    /// Run the independent E-B solver on the same initial data and check
    /// the relative difference.
    pub compare_reference: bool,
}

impl Default for DiagnosticToggles {
    fn default() -> Self {
        DiagnosticToggles {
            track_potential: true,
            symplectic_probe: false,
            compare_reference: false,
        }
    }
}

/// One gated quantity in a report: pass iff `value <= tol` (and finite).
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub tol: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.tol
    }
}

/// Outcome of one scenario run.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub scenario: String,
    pub steps: usize,
    pub dt: f64,
    pub wall_seconds: f64,
    /// Ungated numbers worth reporting (initial energy, final residuals...).
    pub notes: Vec<(String, f64)>,
    pub checks: Vec<CheckOutcome>,
    pub artifacts: Vec<PathBuf>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub(crate) fn note(&mut self, name: &str, value: f64) {
        self.notes.push((name.to_owned(), value));
    }

    pub(crate) fn check(&mut self, name: &str, value: f64, tol: f64) {
        self.checks.push(CheckOutcome {
            name: name.to_owned(),
            value,
            tol,
        });
    }

    /// Human-readable block for terminal output.
    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "scenario: {}", self.scenario);
        let _ = writeln!(s, "steps: {}  dt: {:.6e}", self.steps, self.dt);
        for (name, value) in &self.notes {
            let _ = writeln!(s, "note  {name} = {value:.6e}");
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "check {:<28} {:>12.4e} <= {:>9.2e}  {}",
                c.name,
                c.value,
                c.tol,
                if c.passed() { "pass" } else { "FAIL" }
            );
        }
        for a in &self.artifacts {
            let _ = writeln!(s, "wrote {}", a.display());
        }
        let _ = writeln!(s, "wall: {:.2}s", self.wall_seconds);
        let _ = writeln!(
            s,
            "status: {}",
            if self.all_passed() { "PASS" } else { "FAIL" }
        );
        s
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
}

const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "vacuum_plane_wave",
        description: "vacuum wave packet: single plane-wave mode, constraint and energy checks",
    },
    ScenarioInfo {
        name: "vacuum_random",
        description: "vacuum run from random band-limited constraint-consistent data",
    },
    ScenarioInfo {
        name: "sourced_oscillating_charge",
        description: "oscillating neutral charge pair driving the reduced sourced system",
    },
    ScenarioInfo {
        name: "static_charge_equilibrium",
        description: "static Coulomb state held as a fixed point of the sourced stepper",
    },
    ScenarioInfo {
        name: "particle_constant_B",
        description: "charged-particle gyromotion in a uniform magnetic field",
    },
    ScenarioInfo {
        name: "particle_nonclosed_field_jacobi",
        description: "Jacobi-identity defect of the bracket built on an unclosed field B(q) = q",
    },
    ScenarioInfo {
        name: "su2_pure_gauge",
        description: "flat su(2) connection: curvature, field-equation residuals, trajectory",
    },
    ScenarioInfo {
        name: "chart_equivalence_su2",
        description: "twisted vs canonical chart agreement for the flat su(2) connection",
    },
];

/// Stable-order list of runnable scenarios.
pub fn list_scenarios() -> &'static [ScenarioInfo] {
    SCENARIOS
}

fn is_field_scenario(name: &str) -> bool {
    matches!(
        name,
        "vacuum_plane_wave"
            | "vacuum_random"
            | "sourced_oscillating_charge"
            | "static_charge_equilibrium"
    )
}

impl ScenarioConfig {
    /// The scenario's own defaults: what `run` uses for fields a config
    /// leaves out, and a convenient starting point for building configs in
    /// code.
    pub fn default_for(name: &str) -> Result<ScenarioConfig> {
        if !SCENARIOS.iter().any(|s| s.name == name) {
            return Err(Error::UnknownScenario { name: name.into() });
        }
        let mut cfg = ScenarioConfig {
            scenario: name.to_owned(),
            output_dir: default_output_dir(),
            grid: GridSpec::default(),
            time: TimeSpec::default(),
            initial: InitialSpec::default(),
            source: SourceParams::default(),
            particle: ParticleSpec::default(),
            diagnostics: DiagnosticToggles::default(),
        };
        match name {
            "vacuum_plane_wave" => {
                cfg.initial.family = Some("plane_wave".into());
            }
            "vacuum_random" => {
                cfg.initial.family = Some("random".into());
                cfg.initial.amplitude = 0.05;
            }
            "sourced_oscillating_charge" | "static_charge_equilibrium" => {}
            "particle_constant_B" | "particle_nonclosed_field_jacobi" => {
                cfg.particle.y0 = vec![if name == "particle_constant_B" {
                    1.0
                } else {
                    0.7
                }];
            }
            "su2_pure_gauge" | "chart_equivalence_su2" => {
                cfg.particle.q0 = vec![0.2, -0.1, 0.4];
                cfg.particle.p0 = vec![0.5, 0.3, -0.2];
                cfg.particle.u0 = vec![0.0; 3];
                cfg.particle.y0 = vec![0.4, -0.3, 0.5];
            }
            _ => unreachable!("name checked against the registry"),
        }
        Ok(cfg)
    }

    /// Apply command-line style overrides on top of a loaded config.
    pub fn with_overrides(
        mut self,
        output_dir: Option<PathBuf>,
        steps: Option<usize>,
        dt: Option<f64>,
    ) -> Self {
        if let Some(dir) = output_dir {
            self.output_dir = dir;
        }
        if steps.is_some() {
            self.time.steps = steps;
        }
        if dt.is_some() {
            self.time.dt = dt;
        }
        self
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn config_to_toml(cfg: &ScenarioConfig) -> Result<String> {
    toml::to_string_pretty(cfg).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Validates a config without running anything: scenario name, grid,
/// positivity of the time parameters, finiteness of physical parameters,
/// and (for field scenarios with an explicit dt) the stability bound.
pub fn check_config(cfg: &ScenarioConfig) -> Result<()> {
    if !SCENARIOS.iter().any(|s| s.name == cfg.scenario) {
        return Err(Error::UnknownScenario {
            name: cfg.scenario.clone(),
        });
    }
    if let Some(dt) = cfg.time.dt {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::Config(format!(
                "time.dt must be positive and finite, got {dt}"
            )));
        }
    }
    if cfg.time.steps == Some(0) {
        return Err(Error::Config("time.steps must be positive".into()));
    }
    if cfg.time.output_every == Some(0) {
        return Err(Error::Config("time.output_every must be positive".into()));
    }
    if !cfg.initial.amplitude.is_finite() {
        return Err(Error::Config(format!(
            "initial.amplitude must be finite, got {}",
            cfg.initial.amplitude
        )));
    }
    if cfg.initial.polarization.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("initial.polarization must be finite".into()));
    }
    for (name, v) in [
        ("source.amplitude", cfg.source.amplitude),
        ("source.frequency", cfg.source.frequency),
        ("particle.alpha", cfg.particle.alpha),
        ("particle.beta", cfg.particle.beta),
    ] {
        if !v.is_finite() {
            return Err(Error::Config(format!("{name} must be finite, got {v}")));
        }
    }
    for (name, vs) in [
        ("particle.q0", &cfg.particle.q0),
        ("particle.p0", &cfg.particle.p0),
        ("particle.u0", &cfg.particle.u0),
        ("particle.y0", &cfg.particle.y0),
    ] {
        if vs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("{name} must be finite")));
        }
    }
    if cfg.particle.b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("particle.b must be finite".into()));
    }
    if is_field_scenario(&cfg.scenario) {
        let grid = cfg.grid.build()?;
        if let Some(dt) = cfg.time.dt {
            let limit = grid.stable_dt();
            if dt > limit {
                return Err(Error::StepSize { dt, limit });
            }
        }
    }
    Ok(())
}

pub(crate) fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("GAUGEFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Error::Config(format!(
            "GAUGEFLOW_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    // A second initialization keeps the existing pool; that is fine.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Runs one scenario end to end: validate, execute, write diagnostics,
/// summarize. The error cases (unknown scenario, bad grid, unstable step,
/// unwritable output) are `Err`; tolerance failures are recorded in the
/// report's checks.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport> {
    check_config(cfg)?;
    configure_threads()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let started = Instant::now();
    let mut report = match cfg.scenario.as_str() {
        "vacuum_plane_wave" => field_runs::vacuum_plane_wave(cfg),
        "vacuum_random" => field_runs::vacuum_random(cfg),
        "sourced_oscillating_charge" => field_runs::sourced_oscillating_charge(cfg),
        "static_charge_equilibrium" => field_runs::static_charge_equilibrium(cfg),
        "particle_constant_B" => particle_runs::particle_constant_b(cfg),
        "particle_nonclosed_field_jacobi" => particle_runs::particle_nonclosed_field_jacobi(cfg),
        "su2_pure_gauge" => particle_runs::su2_pure_gauge_run(cfg),
        "chart_equivalence_su2" => particle_runs::chart_equivalence_su2(cfg),
        other => Err(Error::UnknownScenario { name: other.into() }),
    }?;
    report.scenario = cfg.scenario.clone();
    report.wall_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Output cadence: explicit config value, else about a hundred rows.
pub(crate) fn cadence(cfg: &ScenarioConfig, steps: usize) -> usize {
    cfg.time
        .output_every
        .unwrap_or_else(|| (steps / 100).max(1))
        .max(1)
}
