//! FFT plumbing and k-space implementations of the differential operators.
//!
//! One engine is built lazily per grid. It carries two families of
//! first-derivative symbols:
//!
//! * `k_spec` — true wavenumbers `2 pi m / L`, with the Nyquist mode zeroed
//!   so the derivative of a real field stays real and the operator stays
//!   skew-adjoint (summation by parts holds exactly);
//! * `k_cd` — the centered-difference symbol `sin(k h) / h`, used to invert
//!   the central-difference operators exactly on their own terms.
//!
//! Modes where the full symbol vanishes (the mean, and Nyquist corners) are
//! treated as kernel content by the inverse operators and projected away.

use super::{Backend, Grid, ScalarField, VectorField};
use rayon::prelude::*;
use rustfft::{num_complex::Complex, Fft, FftPlanner};
use std::sync::Arc;

pub(crate) type Cx = Complex<f64>;

pub(crate) struct SpectralEngine {
    shape: [usize; 3],
    len: usize,
    plans: [Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>; 3],
    k_spec: [Vec<f64>; 3],
    k_cd: [Vec<f64>; 3],
    inv_norm: f64,
}

impl std::fmt::Debug for SpectralEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralEngine")
            .field("shape", &self.shape)
            .finish_non_exhaustive()
    }
}

/// Lines per task when batching 1-d transforms.
const LINE_BATCH: usize = 16;

impl SpectralEngine {
    pub fn new(shape: [usize; 3], lengths: [f64; 3]) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let mut plans: [Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>; 3] = [None, None, None];
        let mut k_spec: [Vec<f64>; 3] = [vec![0.0], vec![0.0], vec![0.0]];
        let mut k_cd: [Vec<f64>; 3] = [vec![0.0], vec![0.0], vec![0.0]];
        for a in 0..3 {
            let n = shape[a];
            if n == 1 {
                continue;
            }
            plans[a] = Some((planner.plan_fft_forward(n), planner.plan_fft_inverse(n)));
            let h = lengths[a] / n as f64;
            let mut ks = vec![0.0; n];
            let mut kc = vec![0.0; n];
            for j in 0..n {
                let m = if j <= n / 2 {
                    j as i64
                } else {
                    j as i64 - n as i64
                };
                let nyquist = n % 2 == 0 && j == n / 2;
                let k_true = std::f64::consts::TAU * m as f64 / lengths[a];
                ks[j] = if nyquist { 0.0 } else { k_true };
                kc[j] = if m == 0 || nyquist {
                    0.0
                } else {
                    (std::f64::consts::TAU * m as f64 / n as f64).sin() / h
                };
            }
            k_spec[a] = ks;
            k_cd[a] = kc;
        }
        let len = shape.iter().product();
        SpectralEngine {
            shape,
            len,
            plans,
            k_spec,
            k_cd,
            inv_norm: 1.0 / len as f64,
        }
    }

    pub fn symbols(&self, backend: Backend) -> &[Vec<f64>; 3] {
        match backend {
            Backend::Spectral => &self.k_spec,
            Backend::CentralDiff2 => &self.k_cd,
        }
    }

    pub fn to_spectrum(&self, re: &[f64]) -> Vec<Cx> {
        let mut buf: Vec<Cx> = re.iter().map(|&x| Cx::new(x, 0.0)).collect();
        for a in 0..3 {
            self.pass_axis(a, &mut buf, true);
        }
        buf
    }

    /// Inverse-transform `spec` (destroyed) and write the real part into `out`.
    pub fn to_physical(&self, spec: &mut [Cx], out: &mut [f64]) {
        for a in (0..3).rev() {
            self.pass_axis(a, spec, false);
        }
        let s = self.inv_norm;
        for (o, c) in out.iter_mut().zip(spec.iter()) {
            *o = c.re * s;
        }
    }

    fn pass_axis(&self, axis: usize, buf: &mut [Cx], forward: bool) {
        let n = self.shape[axis];
        if n == 1 {
            return;
        }
        let (fwd, inv) = self.plans[axis].as_ref().unwrap();
        let plan = if forward { fwd } else { inv };
        let scratch_len = plan.get_inplace_scratch_len();
        match axis {
            0 => {
                buf.par_chunks_mut(n * LINE_BATCH).for_each_init(
                    || vec![Cx::new(0.0, 0.0); scratch_len],
                    |scratch, chunk| plan.process_with_scratch(chunk, scratch),
                );
            }
            1 => {
                let nx = self.shape[0];
                let ny = n;
                buf.par_chunks_mut(nx * ny).for_each_init(
                    || {
                        (
                            vec![Cx::new(0.0, 0.0); nx * ny],
                            vec![Cx::new(0.0, 0.0); scratch_len],
                        )
                    },
                    |(tmp, scratch), slab| {
                        for y in 0..ny {
                            for x in 0..nx {
                                tmp[x * ny + y] = slab[y * nx + x];
                            }
                        }
                        plan.process_with_scratch(tmp, scratch);
                        for x in 0..nx {
                            for y in 0..ny {
                                slab[y * nx + x] = tmp[x * ny + y];
                            }
                        }
                    },
                );
            }
            _ => {
                let m = self.shape[0] * self.shape[1];
                let nz = n;
                let mut tmp = vec![Cx::new(0.0, 0.0); self.len];
                {
                    let src = &*buf;
                    tmp.par_chunks_mut(nz).enumerate().for_each(|(c, row)| {
                        for (z, r) in row.iter_mut().enumerate() {
                            *r = src[z * m + c];
                        }
                    });
                }
                tmp.par_chunks_mut(nz * LINE_BATCH).for_each_init(
                    || vec![Cx::new(0.0, 0.0); scratch_len],
                    |scratch, chunk| plan.process_with_scratch(chunk, scratch),
                );
                {
                    let src = &tmp;
                    buf.par_chunks_mut(m).enumerate().for_each(|(z, row)| {
                        for (c, r) in row.iter_mut().enumerate() {
                            *r = src[c * nz + z];
                        }
                    });
                }
            }
        }
    }

    /// Visit every mode with its symbol triple `(kx, ky, kz)` and flat index.
    pub fn for_each_mode(&self, k: &[Vec<f64>; 3], mut f: impl FnMut(usize, f64, f64, f64)) {
        let [nx, ny, nz] = self.shape;
        let mut idx = 0;
        for iz in 0..nz {
            let kz = k[2][iz];
            for iy in 0..ny {
                let ky = k[1][iy];
                for ix in 0..nx {
                    f(idx, k[0][ix], ky, kz);
                    idx += 1;
                }
            }
        }
    }
}

fn i_times(k: f64, c: Cx) -> Cx {
    Cx::new(-k * c.im, k * c.re)
}

pub(crate) fn grad(grid: &Grid, w: &ScalarField, backend: Backend) -> VectorField {
    let eng = grid.engine();
    let k = eng.symbols(backend);
    let spec = eng.to_spectrum(w.values());
    let mut out = VectorField::zeros(grid);
    let mut comp = vec![Cx::new(0.0, 0.0); spec.len()];
    for a in 0..3 {
        if grid.shape()[a] == 1 {
            continue;
        }
        eng.for_each_mode(k, |idx, kx, ky, kz| {
            let ka = [kx, ky, kz][a];
            comp[idx] = i_times(ka, spec[idx]);
        });
        eng.to_physical(&mut comp, out.component_mut(a));
    }
    out
}

pub(crate) fn div(grid: &Grid, v: &VectorField, backend: Backend) -> ScalarField {
    let eng = grid.engine();
    let k = eng.symbols(backend);
    let mut acc = vec![Cx::new(0.0, 0.0); grid.len()];
    for a in 0..3 {
        if grid.shape()[a] == 1 {
            continue;
        }
        let spec = eng.to_spectrum(v.component(a));
        eng.for_each_mode(k, |idx, kx, ky, kz| {
            let ka = [kx, ky, kz][a];
            acc[idx] += i_times(ka, spec[idx]);
        });
    }
    let mut out = ScalarField::zeros(grid);
    eng.to_physical(&mut acc, out.values_mut());
    out
}

pub(crate) fn curl(grid: &Grid, v: &VectorField, backend: Backend) -> VectorField {
    let eng = grid.engine();
    let k = eng.symbols(backend);
    let sx = eng.to_spectrum(v.component(0));
    let sy = eng.to_spectrum(v.component(1));
    let sz = eng.to_spectrum(v.component(2));
    let n = grid.len();
    let mut cx = vec![Cx::new(0.0, 0.0); n];
    let mut cy = vec![Cx::new(0.0, 0.0); n];
    let mut cz = vec![Cx::new(0.0, 0.0); n];
    eng.for_each_mode(k, |idx, kx, ky, kz| {
        cx[idx] = i_times(ky, sz[idx]) - i_times(kz, sy[idx]);
        cy[idx] = i_times(kz, sx[idx]) - i_times(kx, sz[idx]);
        cz[idx] = i_times(kx, sy[idx]) - i_times(ky, sx[idx]);
    });
    let mut out = VectorField::zeros(grid);
    eng.to_physical(&mut cx, out.component_mut(0));
    eng.to_physical(&mut cy, out.component_mut(1));
    eng.to_physical(&mut cz, out.component_mut(2));
    out
}

/// `curl(curl(v))` in one spectral round trip: `|k|^2 v - k (k . v)`.
pub(crate) fn double_curl(grid: &Grid, v: &VectorField, backend: Backend) -> VectorField {
    let eng = grid.engine();
    let k = eng.symbols(backend);
    let sx = eng.to_spectrum(v.component(0));
    let sy = eng.to_spectrum(v.component(1));
    let sz = eng.to_spectrum(v.component(2));
    let n = grid.len();
    let mut cx = vec![Cx::new(0.0, 0.0); n];
    let mut cy = vec![Cx::new(0.0, 0.0); n];
    let mut cz = vec![Cx::new(0.0, 0.0); n];
    eng.for_each_mode(k, |idx, kx, ky, kz| {
        let k2 = kx * kx + ky * ky + kz * kz;
        let kdotv = kx * sx[idx] + ky * sy[idx] + kz * sz[idx];
        cx[idx] = k2 * sx[idx] - kx * kdotv;
        cy[idx] = k2 * sy[idx] - ky * kdotv;
        cz[idx] = k2 * sz[idx] - kz * kdotv;
    });
    let mut out = VectorField::zeros(grid);
    eng.to_physical(&mut cx, out.component_mut(0));
    eng.to_physical(&mut cy, out.component_mut(1));
    eng.to_physical(&mut cz, out.component_mut(2));
    out
}

pub(crate) fn laplacian_scalar(grid: &Grid, w: &ScalarField, backend: Backend) -> ScalarField {
    let eng = grid.engine();
    let k = eng.symbols(backend);
    let mut spec = eng.to_spectrum(w.values());
    eng.for_each_mode(k, |idx, kx, ky, kz| {
        spec[idx] *= -(kx * kx + ky * ky + kz * kz);
    });
    let mut out = ScalarField::zeros(grid);
    eng.to_physical(&mut spec, out.values_mut());
    out
}

pub(crate) fn laplacian_vector(grid: &Grid, v: &VectorField, backend: Backend) -> VectorField {
    let eng = grid.engine();
    let k = eng.symbols(backend);
    let mut out = VectorField::zeros(grid);
    for a in 0..3 {
        let mut spec = eng.to_spectrum(v.component(a));
        eng.for_each_mode(k, |idx, kx, ky, kz| {
            spec[idx] *= -(kx * kx + ky * ky + kz * kz);
        });
        eng.to_physical(&mut spec, out.component_mut(a));
    }
    out
}

/// Solve `laplacian(u) = w` for the zero-mean representative, inverting the
/// backend's own discrete symbol. Kernel modes (zero symbol) are projected out.
pub(crate) fn inv_laplacian(grid: &Grid, w: &ScalarField, backend: Backend) -> ScalarField {
    let eng = grid.engine();
    let k = eng.symbols(backend);
    let mut spec = eng.to_spectrum(w.values());
    eng.for_each_mode(k, |idx, kx, ky, kz| {
        let k2 = kx * kx + ky * ky + kz * kz;
        spec[idx] = if k2 == 0.0 {
            Cx::new(0.0, 0.0)
        } else {
            spec[idx] / -k2
        };
    });
    let mut out = ScalarField::zeros(grid);
    eng.to_physical(&mut spec, out.values_mut());
    out
}

/// Divergence-free zero-mean `S` with `curl(S) = b`:
/// `S_hat = i k x b_hat / |k|^2`.
pub(crate) fn inv_curl(grid: &Grid, b: &VectorField, backend: Backend) -> VectorField {
    let eng = grid.engine();
    let k = eng.symbols(backend);
    let sx = eng.to_spectrum(b.component(0));
    let sy = eng.to_spectrum(b.component(1));
    let sz = eng.to_spectrum(b.component(2));
    let n = grid.len();
    let mut cx = vec![Cx::new(0.0, 0.0); n];
    let mut cy = vec![Cx::new(0.0, 0.0); n];
    let mut cz = vec![Cx::new(0.0, 0.0); n];
    eng.for_each_mode(k, |idx, kx, ky, kz| {
        let k2 = kx * kx + ky * ky + kz * kz;
        if k2 > 0.0 {
            cx[idx] = (i_times(ky, sz[idx]) - i_times(kz, sy[idx])) / k2;
            cy[idx] = (i_times(kz, sx[idx]) - i_times(kx, sz[idx])) / k2;
            cz[idx] = (i_times(kx, sy[idx]) - i_times(ky, sx[idx])) / k2;
        }
    });
    let mut out = VectorField::zeros(grid);
    eng.to_physical(&mut cx, out.component_mut(0));
    eng.to_physical(&mut cy, out.component_mut(1));
    eng.to_physical(&mut cz, out.component_mut(2));
    out
}
