//! Periodic uniform grids in 1–3 space dimensions and the fields that live
//! on them.
//!
//! A [`Grid`] owns its shape, box lengths and derivative [`Backend`]. Fields
//! are stored flat in row-major order with the x index fastest:
//! `idx = (iz * ny + iy) * nx + ix`. Grids in fewer than three dimensions
//! keep extent-1 trailing axes; derivatives along absent axes are zero, but
//! vector fields always carry three components so transverse polarizations
//! survive in low dimension.

mod field;
pub mod ops;
pub(crate) mod spectral;

pub use field::{ScalarField, VectorField};

use crate::error::{Error, Result};
use spectral::SpectralEngine;
use std::sync::{Arc, OnceLock};

/// Spatial-derivative discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Fourier-spectral derivatives; exact on band-limited data. Requires
    /// even extents. First-derivative symbols zero the Nyquist mode so the
    /// operators stay real and skew-adjoint.
    Spectral,
    /// Second-order centered differences over `2h`.
    CentralDiff2,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Backend::Spectral => write!(f, "spectral"),
            Backend::CentralDiff2 => write!(f, "central-diff-2"),
        }
    }
}

#[derive(Debug)]
struct GridInner {
    ndim: usize,
    shape: [usize; 3],
    lengths: [f64; 3],
    spacing: [f64; 3],
    backend: Backend,
    engine: OnceLock<Arc<SpectralEngine>>,
}

/// A periodic uniform grid. Cheap to clone; clones share spectral plans.
#[derive(Debug, Clone)]
pub struct Grid(Arc<GridInner>);

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.0.ndim == other.0.ndim
            && self.0.shape == other.0.shape
            && self.0.lengths == other.0.lengths
            && self.0.backend == other.0.backend
    }
}

impl Grid {
    /// Build a grid with `dims.len()` (1–3) periodic axes. Every extent must
    /// be at least 4, and even for the spectral backend. Lengths are the
    /// physical box sizes; the spacing along axis `a` is `lengths[a] / dims[a]`.
    pub fn new(dims: &[usize], lengths: &[f64], backend: Backend) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "need 1..=3 axes, got {}",
                dims.len()
            )));
        }
        if lengths.len() != dims.len() {
            return Err(Error::InvalidGrid(format!(
                "{} dims but {} lengths",
                dims.len(),
                lengths.len()
            )));
        }
        let mut shape = [1usize; 3];
        let mut lens = [1.0f64; 3];
        for (a, (&n, &l)) in dims.iter().zip(lengths).enumerate() {
            if n < 4 {
                return Err(Error::InvalidGrid(format!("axis {a} extent {n} < 4")));
            }
            if backend == Backend::Spectral && n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} extent {n} must be even for the spectral backend"
                )));
            }
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} length {l} must be positive and finite"
                )));
            }
            shape[a] = n;
            lens[a] = l;
        }
        let mut spacing = [1.0f64; 3];
        for a in 0..3 {
            spacing[a] = lens[a] / shape[a] as f64;
        }
        Ok(Grid(Arc::new(GridInner {
            ndim: dims.len(),
            shape,
            lengths: lens,
            spacing,
            backend,
            engine: OnceLock::new(),
        })))
    }

    /// Number of declared axes (1–3).
    pub fn ndim(&self) -> usize {
        self.0.ndim
    }

    /// Extents, padded to three axes with 1s.
    pub fn shape(&self) -> [usize; 3] {
        self.0.shape
    }

    /// Box lengths, padded to three axes with 1s.
    pub fn lengths(&self) -> [f64; 3] {
        self.0.lengths
    }

    /// Grid spacing along each axis (1 for absent axes).
    pub fn spacing(&self) -> [f64; 3] {
        self.0.spacing
    }

    /// Smallest spacing over declared axes.
    pub fn min_spacing(&self) -> f64 {
        (0..self.0.ndim)
            .map(|a| self.0.spacing[a])
            .fold(f64::INFINITY, f64::min)
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.0.shape.iter().product()
    }

    /// True only for a degenerate grid (never constructible).
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn backend(&self) -> Backend {
        self.0.backend
    }

    /// Volume of one cell, used as the quadrature weight.
    pub fn cell_volume(&self) -> f64 {
        (0..self.0.ndim).map(|a| self.0.spacing[a]).product()
    }

    /// Largest stable time step for the wave-type steppers in this crate on
    /// this grid. Spectral: `h_min / pi`; central differences:
    /// `h_min / sqrt(d)`. Both sit safely inside the exact leapfrog/Strang
    /// stability thresholds in up to three dimensions.
    pub fn stable_dt(&self) -> f64 {
        let h = self.min_spacing();
        match self.0.backend {
            Backend::Spectral => h / std::f64::consts::PI,
            Backend::CentralDiff2 => h / (self.0.ndim as f64).sqrt(),
        }
    }

    /// Physical coordinates of the point with flat index `idx`.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let [nx, ny, _] = self.0.shape;
        let ix = idx % nx;
        let iy = (idx / nx) % ny;
        let iz = idx / (nx * ny);
        [
            ix as f64 * self.0.spacing[0],
            iy as f64 * self.0.spacing[1],
            iz as f64 * self.0.spacing[2],
        ]
    }

    /// Flat index of the point `(ix, iy, iz)`.
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        let [nx, ny, _] = self.0.shape;
        (iz * ny + iy) * nx + ix
    }

    pub(crate) fn engine(&self) -> &SpectralEngine {
        self.0
            .engine
            .get_or_init(|| Arc::new(SpectralEngine::new(self.0.shape, self.0.lengths)))
    }

    fn describe(&self) -> String {
        format!(
            "{}d {:?} lengths {:?} {}",
            self.0.ndim,
            &self.0.shape[..self.0.ndim],
            &self.0.lengths[..self.0.ndim],
            self.0.backend
        )
    }

    pub(crate) fn check_same(&self, other: &Grid, context: &'static str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                context,
                left: self.describe(),
                right: other.describe(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new(&[], &[], Backend::Spectral).is_err());
        assert!(Grid::new(&[2], &[1.0], Backend::Spectral).is_err());
        assert!(Grid::new(&[9], &[1.0], Backend::Spectral).is_err());
        assert!(Grid::new(&[8, 8, 8, 8], &[1.0; 4], Backend::Spectral).is_err());
        assert!(Grid::new(&[8], &[0.0], Backend::Spectral).is_err());
        assert!(Grid::new(&[8], &[1.0, 2.0], Backend::Spectral).is_err());
    }

    #[test]
    fn odd_extents_allowed_for_central_differences() {
        assert!(Grid::new(&[9], &[1.0], Backend::CentralDiff2).is_ok());
        assert!(Grid::new(&[9], &[1.0], Backend::Spectral).is_err());
    }

    #[test]
    fn padding_and_spacing() {
        let g = Grid::new(&[8, 16], &[1.0, 4.0], Backend::Spectral).unwrap();
        assert_eq!(g.shape(), [8, 16, 1]);
        assert_eq!(g.ndim(), 2);
        assert_eq!(g.spacing()[0], 0.125);
        assert_eq!(g.spacing()[1], 0.25);
        assert_eq!(g.min_spacing(), 0.125);
        assert_eq!(g.len(), 128);
        let c = g.coords(g.index(1, 2, 0));
        assert_eq!(c, [0.125, 0.5, 0.0]);
    }

    #[test]
    fn equality_is_by_value() {
        let a = Grid::new(&[8], &[1.0], Backend::Spectral).unwrap();
        let b = Grid::new(&[8], &[1.0], Backend::Spectral).unwrap();
        let c = Grid::new(&[8], &[1.0], Backend::CentralDiff2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
