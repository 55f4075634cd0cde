//! Scalar and vector fields on a [`Grid`].

use super::Grid;
use crate::error::{Error, Result};
use rand::Rng;

/// Real scalar samples on every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

/// Three real components per grid point, stored component-major. Vector
/// fields keep all three components even on 1d/2d grids.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    data: [Vec<f64>; 3],
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            grid: grid.clone(),
            data: vec![0.0; grid.len()],
        }
    }

    /// Sample `f(x, y, z)` at every point.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let data = (0..grid.len())
            .map(|i| {
                let [x, y, z] = grid.coords(i);
                f(x, y, z)
            })
            .collect();
        ScalarField {
            grid: grid.clone(),
            data,
        }
    }

    /// Wrap raw samples; rejects wrong length and non-finite entries.
    pub fn from_values(grid: &Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                context: "scalar field values",
                expected: grid.len(),
                got: data.len(),
            });
        }
        if !all_finite(&data) {
            return Err(Error::NonFinite {
                what: "scalar field values".into(),
            });
        }
        Ok(ScalarField {
            grid: grid.clone(),
            data,
        })
    }

    /// Random real trigonometric polynomial with integer modes up to `kmax`
    /// per axis (mode 0 excluded, so the mean is exactly zero), normalized to
    /// unit rms coefficient scale and multiplied by `amp`.
    pub fn random_band_limited(grid: &Grid, kmax: usize, amp: f64, rng: &mut impl Rng) -> Self {
        let modes = half_space_modes(grid, kmax);
        let coeffs: Vec<(f64, f64)> = modes
            .iter()
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = amp / (modes.len().max(1) as f64).sqrt();
        let [lx, ly, lz] = grid.lengths();
        let tau = std::f64::consts::TAU;
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let [x, y, z] = grid.coords(i);
            let mut acc = 0.0;
            for (m, (a, b)) in modes.iter().zip(&coeffs) {
                let phase =
                    tau * (m[0] as f64 * x / lx + m[1] as f64 * y / ly + m[2] as f64 * z / lz);
                acc += a * phase.cos() + b * phase.sin();
            }
            out.data[i] = acc * norm;
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub(crate) fn check_finite(&self, what: &str) -> Result<()> {
        if all_finite(&self.data) {
            Ok(())
        } else {
            Err(Error::NonFinite { what: what.into() })
        }
    }

    /// Mean over the grid (equals the box average).
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn linf_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Quadrature inner product `sum f g dV`.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.grid.check_same(&other.grid, "scalar inner product")?;
        let dv = self.grid.cell_volume();
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * dv)
    }

    pub fn l2_norm(&self) -> f64 {
        let dv = self.grid.cell_volume();
        (self.data.iter().map(|x| x * x).sum::<f64>() * dv).sqrt()
    }

    /// `self += c * other` (grids must match; enforced by debug assertion on
    /// this hot path).
    pub fn scaled_add_assign(&mut self, c: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn scale_assign(&mut self, c: f64) {
        for a in &mut self.data {
            *a *= c;
        }
    }

    pub fn scaled(&self, c: f64) -> ScalarField {
        let mut out = self.clone();
        out.scale_assign(c);
        out
    }

    /// Pointwise difference, as a new field.
    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.grid.check_same(&other.grid, "scalar subtraction")?;
        let mut out = self.clone();
        out.scaled_add_assign(-1.0, other);
        Ok(out)
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.grid.check_same(&other.grid, "scalar addition")?;
        let mut out = self.clone();
        out.scaled_add_assign(1.0, other);
        Ok(out)
    }
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.len();
        VectorField {
            grid: grid.clone(),
            data: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    /// Sample `f(x, y, z) -> [vx, vy, vz]` at every point.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.len() {
            let [x, y, z] = grid.coords(i);
            let v = f(x, y, z);
            for c in 0..3 {
                out.data[c][i] = v[c];
            }
        }
        out
    }

    pub fn from_components(
        grid: &Grid,
        x: ScalarField,
        y: ScalarField,
        z: ScalarField,
    ) -> Result<Self> {
        for f in [&x, &y, &z] {
            grid.check_same(f.grid(), "vector from components")?;
        }
        Ok(VectorField {
            grid: grid.clone(),
            data: [x.data, y.data, z.data],
        })
    }

    pub(crate) fn from_raw(grid: &Grid, data: [Vec<f64>; 3]) -> Result<Self> {
        let [x, y, z] = data;
        Self::from_components(
            grid,
            ScalarField::from_values(grid, x)?,
            ScalarField::from_values(grid, y)?,
            ScalarField::from_values(grid, z)?,
        )
    }

    /// Independent random band-limited scalar per component.
    pub fn random_band_limited(grid: &Grid, kmax: usize, amp: f64, rng: &mut impl Rng) -> Self {
        let x = ScalarField::random_band_limited(grid, kmax, amp, rng);
        let y = ScalarField::random_band_limited(grid, kmax, amp, rng);
        let z = ScalarField::random_band_limited(grid, kmax, amp, rng);
        VectorField {
            grid: grid.clone(),
            data: [x.data, y.data, z.data],
        }
    }

    /// Random divergence-free field, built as the curl of a random
    /// band-limited potential so `div` vanishes exactly for the grid's own
    /// divergence operator.
    pub fn random_solenoidal(
        grid: &Grid,
        kmax: usize,
        amp: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        Self::random_band_limited(grid, kmax, amp, rng).curl()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.data[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c]
    }

    /// Borrow a component as a scalar field (clones the samples).
    pub fn component_field(&self, c: usize) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            data: self.data[c].clone(),
        }
    }

    pub(crate) fn check_finite(&self, what: &str) -> Result<()> {
        if self.data.iter().all(|c| all_finite(c)) {
            Ok(())
        } else {
            Err(Error::NonFinite { what: what.into() })
        }
    }

    /// Per-component means.
    pub fn means(&self) -> [f64; 3] {
        let n = self.grid.len() as f64;
        [
            self.data[0].iter().sum::<f64>() / n,
            self.data[1].iter().sum::<f64>() / n,
            self.data[2].iter().sum::<f64>() / n,
        ]
    }

    pub fn linf_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|c| c.iter().fold(0.0f64, |m, x| m.max(x.abs())))
            .fold(0.0, f64::max)
    }

    /// Quadrature inner product `sum v . w dV`.
    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        self.grid.check_same(&other.grid, "vector inner product")?;
        let dv = self.grid.cell_volume();
        let mut acc = 0.0;
        for c in 0..3 {
            acc += self.data[c]
                .iter()
                .zip(&other.data[c])
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
        Ok(acc * dv)
    }

    pub fn l2_norm(&self) -> f64 {
        let dv = self.grid.cell_volume();
        let mut acc = 0.0;
        for c in 0..3 {
            acc += self.data[c].iter().map(|x| x * x).sum::<f64>();
        }
        (acc * dv).sqrt()
    }

    /// `self += c * other`.
    pub fn scaled_add_assign(&mut self, c: f64, other: &VectorField) {
        debug_assert_eq!(self.grid, other.grid);
        for comp in 0..3 {
            for (a, b) in self.data[comp].iter_mut().zip(&other.data[comp]) {
                *a += c * b;
            }
        }
    }

    pub fn scale_assign(&mut self, c: f64) {
        for comp in &mut self.data {
            for a in comp {
                *a *= c;
            }
        }
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        let mut out = self.clone();
        out.scale_assign(c);
        out
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.grid.check_same(&other.grid, "vector subtraction")?;
        let mut out = self.clone();
        out.scaled_add_assign(-1.0, other);
        Ok(out)
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.grid.check_same(&other.grid, "vector addition")?;
        let mut out = self.clone();
        out.scaled_add_assign(1.0, other);
        Ok(out)
    }
}

/// Integer modes `m` with `|m_a| <= kmax` on declared axes, zero on absent
/// axes, restricted to a half space so each +/- pair appears once, and the
/// zero mode excluded.
fn half_space_modes(grid: &Grid, kmax: usize) -> Vec<[i64; 3]> {
    let k = kmax as i64;
    let shape = grid.shape();
    let range = |a: usize| -> Vec<i64> {
        if shape[a] == 1 {
            vec![0]
        } else {
            (-k..=k).collect()
        }
    };
    let mut modes = Vec::new();
    for &mx in &range(0) {
        for &my in &range(1) {
            for &mz in &range(2) {
                let leading = if mx != 0 {
                    mx
                } else if my != 0 {
                    my
                } else {
                    mz
                };
                if leading > 0 {
                    modes.push([mx, my, mz]);
                }
            }
        }
    }
    modes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Backend;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid {
        Grid::new(&[8, 8], &[1.0, 1.0], Backend::Spectral).unwrap()
    }

    #[test]
    fn from_values_validates() {
        let g = grid();
        assert!(ScalarField::from_values(&g, vec![0.0; 63]).is_err());
        let mut v = vec![0.0; 64];
        v[7] = f64::NAN;
        assert!(ScalarField::from_values(&g, v).is_err());
        assert!(ScalarField::from_values(&g, vec![1.0; 64]).is_ok());
    }

    #[test]
    fn inner_product_is_quadrature() {
        let g = grid();
        let one = ScalarField::from_fn(&g, |_, _, _| 1.0);
        // Unit box: integral of 1*1 over the box is 1.
        assert!((one.inner(&one).unwrap() - 1.0).abs() < 1e-14);
        let g2 = Grid::new(&[8, 8], &[2.0, 1.0], Backend::Spectral).unwrap();
        let other = ScalarField::zeros(&g2);
        assert!(one.inner(&other).is_err());
    }

    #[test]
    fn random_band_limited_has_zero_mean() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = ScalarField::random_band_limited(&g, 2, 1.0, &mut rng);
        assert!(f.mean().abs() < 1e-13);
        assert!(f.linf_norm() > 0.0);
    }

    #[test]
    fn means_and_norms() {
        let g = grid();
        let v = VectorField::from_fn(&g, |_, _, _| [1.0, -2.0, 0.5]);
        assert_eq!(v.means(), [1.0, -2.0, 0.5]);
        assert_eq!(v.linf_norm(), 2.0);
        // l2 over unit box: sqrt(1 + 4 + 0.25)
        assert!((v.l2_norm() - (5.25f64).sqrt()).abs() < 1e-14);
    }
}
