//! Structure-preserving solvers for Maxwell fields in canonical Hamiltonian
//! form, a staggered E–B reference solver, and Poisson-bracket machinery for
//! charged particles in abelian and Yang–Mills gauge fields.
//!
//! The field solvers work on periodic uniform grids in 1–3 space dimensions
//! with two interchangeable derivative backends (Fourier-spectral and
//! second-order central differences). The central design point is that the
//! Lorentz condition `div A = eta` is carried as a bona fide dynamical
//! constraint: the vacuum leapfrog conserves the residual `div A - eta` to
//! roundoff for as long as you care to integrate, and the sourced solver
//! keeps the Gauss law exact by construction of its longitudinal source
//! field.
//!
//! Units are chosen so the wave speed is 1; charge and current densities are
//! whatever makes Gauss' law read `div E = rho`.
//!
//! Module map:
//!
//! * [`grid`] — grids, scalar/vector fields, differential operators and
//!   their spectral inverses.
//! * [`maxwell`] — the extended vacuum system `(A, Y; eta, W)`, the reduced
//!   sourced system `(S, B; eta, W)` with longitudinal source `F`, leapfrog
//!   and Strang steppers, diagnostics.
//! * [`eb`] — an independent collocated E–B solver used as a cross-check.
//! * [`gauge`] — finite-dimensional phase spaces for particles in gauge
//!   fields: Lie algebra data, twisted and canonical Poisson structures,
//!   bracket/Jacobi/curvature diagnostics, RK4 flows.
//! * [`scenario`] — named runnable scenarios behind a small config format,
//!   used by the `gaugeflow` binary.
//! * [`io`] — CSV time series and binary field snapshots.

pub mod eb;
pub mod error;
pub mod gauge;
pub mod grid;
pub mod io;
pub mod maxwell;
pub mod scenario;
pub mod tol;

pub use error::{Error, Result};
