//! Differential operators on periodic fields.
//!
//! Every operator dispatches on the grid's backend. The central-difference
//! backend uses the classic centered stencil over `2h`; its Laplacian is the
//! composition `div(grad(.))` (the wide stencil), so the operator identities
//! `div(curl(v)) = 0`, `curl(grad(w)) = 0` and `laplacian = div . grad` hold
//! to roundoff for both backends. Inverse operators always solve the
//! backend's own discrete symbol in Fourier space, so they are exact right
//! inverses on fields without kernel-mode content.

use super::{spectral, Backend, Grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::tol;

/// Centered difference of `src` along `axis`, scaled by `1/(2h)`, added
/// into `out` with weight `sign`. Extent-1 axes contribute nothing.
fn axis_diff_add(grid: &Grid, src: &[f64], axis: usize, sign: f64, out: &mut [f64]) {
    let [nx, ny, nz] = grid.shape();
    let n = grid.shape()[axis];
    if n == 1 {
        return;
    }
    let w = sign / (2.0 * grid.spacing()[axis]);
    match axis {
        0 => {
            for row in 0..ny * nz {
                let base = row * nx;
                for i in 0..nx {
                    let ip = if i + 1 == nx { 0 } else { i + 1 };
                    let im = if i == 0 { nx - 1 } else { i - 1 };
                    out[base + i] += w * (src[base + ip] - src[base + im]);
                }
            }
        }
        1 => {
            for z in 0..nz {
                let slab = z * nx * ny;
                for y in 0..ny {
                    let yp = if y + 1 == ny { 0 } else { y + 1 };
                    let ym = if y == 0 { ny - 1 } else { y - 1 };
                    let (r, rp, rm) = (slab + y * nx, slab + yp * nx, slab + ym * nx);
                    for x in 0..nx {
                        out[r + x] += w * (src[rp + x] - src[rm + x]);
                    }
                }
            }
        }
        _ => {
            let m = nx * ny;
            for z in 0..nz {
                let zp = if z + 1 == nz { 0 } else { z + 1 };
                let zm = if z == 0 { nz - 1 } else { z - 1 };
                let (s, sp, sm) = (z * m, zp * m, zm * m);
                for c in 0..m {
                    out[s + c] += w * (src[sp + c] - src[sm + c]);
                }
            }
        }
    }
}

/// Wide second difference `(f[i+2] - 2 f[i] + f[i-2]) / (4 h^2)` along
/// `axis`, added into `out`.
fn axis_diff2_add(grid: &Grid, src: &[f64], axis: usize, out: &mut [f64]) {
    let [nx, ny, nz] = grid.shape();
    let n = grid.shape()[axis];
    if n == 1 {
        return;
    }
    let h = grid.spacing()[axis];
    let w = 1.0 / (4.0 * h * h);
    let wrap = |i: usize, d: i64| -> usize { (i as i64 + d).rem_euclid(n as i64) as usize };
    match axis {
        0 => {
            for row in 0..ny * nz {
                let base = row * nx;
                for i in 0..nx {
                    let (ip, im) = (wrap(i, 2), wrap(i, -2));
                    out[base + i] += w * (src[base + ip] - 2.0 * src[base + i] + src[base + im]);
                }
            }
        }
        1 => {
            for z in 0..nz {
                let slab = z * nx * ny;
                for y in 0..ny {
                    let (yp, ym) = (wrap(y, 2), wrap(y, -2));
                    let (r, rp, rm) = (slab + y * nx, slab + yp * nx, slab + ym * nx);
                    for x in 0..nx {
                        out[r + x] += w * (src[rp + x] - 2.0 * src[r + x] + src[rm + x]);
                    }
                }
            }
        }
        _ => {
            let m = nx * ny;
            for z in 0..nz {
                let (zp, zm) = (wrap(z, 2), wrap(z, -2));
                let (s, sp, sm) = (z * m, zp * m, zm * m);
                for c in 0..m {
                    out[s + c] += w * (src[sp + c] - 2.0 * src[s + c] + src[sm + c]);
                }
            }
        }
    }
}

impl ScalarField {
    /// Gradient. Absent axes contribute zero components.
    pub fn grad(&self) -> Result<VectorField> {
        self.check_finite("grad input")?;
        let g = self.grid();
        Ok(match g.backend() {
            Backend::Spectral => spectral::grad(g, self, Backend::Spectral),
            Backend::CentralDiff2 => {
                let mut out = VectorField::zeros(g);
                for a in 0..3 {
                    axis_diff_add(g, self.values(), a, 1.0, out.component_mut(a));
                }
                out
            }
        })
    }

    /// Laplacian; identical to `div(grad(self))` for both backends.
    pub fn laplacian(&self) -> Result<ScalarField> {
        self.check_finite("laplacian input")?;
        let g = self.grid();
        Ok(match g.backend() {
            Backend::Spectral => spectral::laplacian_scalar(g, self, Backend::Spectral),
            Backend::CentralDiff2 => {
                let mut out = ScalarField::zeros(g);
                for a in 0..3 {
                    axis_diff2_add(g, self.values(), a, out.values_mut());
                }
                out
            }
        })
    }

    /// Zero-mean solution `u` of `laplacian(u) = self`, inverting the
    /// backend's own discrete symbol. The input must have (near-)zero mean:
    /// constant content makes the problem unsolvable on the torus.
    pub fn inv_laplacian(&self) -> Result<ScalarField> {
        self.check_finite("inv_laplacian input")?;
        let mean = self.mean();
        let tol = tol::MEAN_SOLVE_REL * tol::scale_of(self.linf_norm());
        if mean.abs() > tol {
            return Err(Error::NotSolvableOnTorus {
                what: "inv_laplacian",
                norm: mean.abs(),
                tol,
            });
        }
        let g = self.grid();
        Ok(spectral::inv_laplacian(g, self, g.backend()))
    }
}

impl VectorField {
    /// Divergence. Absent axes contribute nothing.
    pub fn div(&self) -> Result<ScalarField> {
        self.check_finite("div input")?;
        let g = self.grid();
        Ok(match g.backend() {
            Backend::Spectral => spectral::div(g, self, Backend::Spectral),
            Backend::CentralDiff2 => {
                let mut out = ScalarField::zeros(g);
                for a in 0..3 {
                    axis_diff_add(g, self.component(a), a, 1.0, out.values_mut());
                }
                out
            }
        })
    }

    /// Curl. All three components are produced on any grid dimension;
    /// derivatives along absent axes vanish.
    pub fn curl(&self) -> Result<VectorField> {
        self.check_finite("curl input")?;
        let g = self.grid();
        Ok(match g.backend() {
            Backend::Spectral => spectral::curl(g, self, Backend::Spectral),
            Backend::CentralDiff2 => {
                let mut out = VectorField::zeros(g);
                // out_x = dy vz - dz vy, and cyclic.
                axis_diff_add(g, self.component(2), 1, 1.0, out.component_mut(0));
                axis_diff_add(g, self.component(1), 2, -1.0, out.component_mut(0));
                axis_diff_add(g, self.component(0), 2, 1.0, out.component_mut(1));
                axis_diff_add(g, self.component(2), 0, -1.0, out.component_mut(1));
                axis_diff_add(g, self.component(1), 0, 1.0, out.component_mut(2));
                axis_diff_add(g, self.component(0), 1, -1.0, out.component_mut(2));
                out
            }
        })
    }

    /// `curl(curl(self))`; one spectral round trip on the spectral backend.
    pub fn double_curl(&self) -> Result<VectorField> {
        self.check_finite("double_curl input")?;
        let g = self.grid();
        match g.backend() {
            Backend::Spectral => Ok(spectral::double_curl(g, self, Backend::Spectral)),
            Backend::CentralDiff2 => self.curl()?.curl(),
        }
    }

    /// Componentwise Laplacian.
    pub fn laplacian(&self) -> Result<VectorField> {
        self.check_finite("laplacian input")?;
        let g = self.grid();
        Ok(match g.backend() {
            Backend::Spectral => spectral::laplacian_vector(g, self, Backend::Spectral),
            Backend::CentralDiff2 => {
                let mut out = VectorField::zeros(g);
                for c in 0..3 {
                    for a in 0..3 {
                        axis_diff2_add(g, self.component(c), a, out.component_mut(c));
                    }
                }
                out
            }
        })
    }

    /// The divergence-free zero-mean potential `S` with `curl(S) = self`.
    /// Requires the input to be divergence-free with zero component means.
    pub fn inv_curl(&self) -> Result<VectorField> {
        self.check_finite("inv_curl input")?;
        let scale = tol::scale_of(self.linf_norm());
        let div_norm = self.div()?.l2_norm();
        let div_tol = tol::DIV_FREE_REL * scale;
        if div_norm > div_tol {
            return Err(Error::NotSolvableOnTorus {
                what: "inv_curl (input not divergence-free)",
                norm: div_norm,
                tol: div_tol,
            });
        }
        let mean_tol = tol::MEAN_SOLVE_REL * scale;
        let worst_mean = self.means().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if worst_mean > mean_tol {
            return Err(Error::NotSolvableOnTorus {
                what: "inv_curl (input has nonzero component mean)",
                norm: worst_mean,
                tol: mean_tol,
            });
        }
        let g = self.grid();
        Ok(spectral::inv_curl(g, self, g.backend()))
    }
}
