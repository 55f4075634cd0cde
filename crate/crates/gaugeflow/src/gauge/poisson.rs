//! Poisson structures for a particle carrying internal charge in a
//! background gauge field.
//!
//! Phase space is `(q, p, u, y)`: base position, momentum, internal frame
//! coordinates, and charge coordinates on the dual of the algebra. Two
//! charts are supported and mapped into each other by [`minimal_coupling`]:
//!
//! * **twisted** — the momentum is kinetic. Nonzero blocks:
//!   `{q^i, p_j} = delta^i_j`, `{p_i, p_j} = sum_s y_s F^(s)_{ij}(q)`,
//!   `{y_s, y_k} = sum_r c^r_{sk} y_r`, `{y_s, u^k} = delta_s^k`,
//!   `{p_i, u^k} = -A^(k)_i(q)`, and
//!   `{p_i, y_s} = sum_{r,t} c^t_{sr} y_t A^(r)_i(q)`.
//!   The last two need a potential and vanish for curvature-only fields.
//! * **canonical** — the momentum is shifted, `p -> p + sum_s y_s A^(s)(q)`,
//!   which absorbs every field-dependent block and leaves the constant
//!   pairings plus the `y`-sector bracket.
//!
//! The sign conventions are fixed so that `H = |p|^2 / 2` in the twisted
//! chart produces the magnetic force `dp/dt = y v x B` for an abelian field
//! with positive charge `y`, and so that both charts generate identical
//! motion for every variable. With those conventions the bracket satisfies
//! the Jacobi identity on all triples for abelian algebras, and on all
//! triples not involving `u` for nonabelian ones: the constant `y`-`u`
//! pairing is a linearization of the frame kinematics, and its closure
//! defect (a bare structure constant) sits entirely in `u`-triples, where
//! [`jacobi_residual`] reports it honestly. A curvature that is not closed
//! (not derived from any potential) leaves its own defect in the
//! momentum-triple residuals instead.

use crate::error::{Error, Result};
use crate::gauge::algebra::{ad_invariance_check, CoadjointElement, LieAlgebraSpec};
use crate::gauge::fields::GaugeFieldSpec;
use nalgebra::{DMatrix, DVector};

/// Step factor for the second-order gradients in [`bracket`].
pub(crate) const BRACKET_FD_STEP: f64 = 1e-5;

/// Step factor for the fourth-order structure-matrix derivatives in
/// [`jacobi_residual`].
pub(crate) const JACOBI_FD_STEP: f64 = 1e-4;

/// Which momentum convention a phase-space point is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    Twisted,
    Canonical,
}

impl Chart {
    fn name(self) -> &'static str {
        match self {
            Chart::Twisted => "twisted",
            Chart::Canonical => "canonical",
        }
    }
}

/// A point `(q, p, u, y)` tagged with its chart. Stored flat in that order.
#[derive(Debug, Clone)]
pub struct PhasePoint {
    chart: Chart,
    n: usize,
    m: usize,
    z: DVector<f64>,
}

impl PhasePoint {
    pub fn twisted(q: &[f64], p: &[f64], u: &[f64], y: &[f64]) -> Result<Self> {
        Self::build(Chart::Twisted, q, p, u, y)
    }

    pub fn canonical(q: &[f64], p: &[f64], u: &[f64], y: &[f64]) -> Result<Self> {
        Self::build(Chart::Canonical, q, p, u, y)
    }

    fn build(chart: Chart, q: &[f64], p: &[f64], u: &[f64], y: &[f64]) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch {
                context: "phase point momentum",
                expected: q.len(),
                got: p.len(),
            });
        }
        if y.len() != u.len() {
            return Err(Error::DimensionMismatch {
                context: "phase point charge coordinates",
                expected: u.len(),
                got: y.len(),
            });
        }
        let z: Vec<f64> = q.iter().chain(p).chain(u).chain(y).copied().collect();
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "phase point coordinates".into(),
            });
        }
        Ok(Self {
            chart,
            n: q.len(),
            m: u.len(),
            z: DVector::from_vec(z),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 2 * self.m
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn q(&self) -> &[f64] {
        &self.z.as_slice()[..self.n]
    }

    pub fn p(&self) -> &[f64] {
        &self.z.as_slice()[self.n..2 * self.n]
    }

    pub fn u(&self) -> &[f64] {
        &self.z.as_slice()[2 * self.n..2 * self.n + self.m]
    }

    pub fn y(&self) -> &[f64] {
        &self.z.as_slice()[2 * self.n + self.m..]
    }

    pub fn linf(&self) -> f64 {
        self.z.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub(crate) fn flat(&self) -> &DVector<f64> {
        &self.z
    }

    pub(crate) fn with_flat(&self, z: DVector<f64>) -> Self {
        Self {
            chart: self.chart,
            n: self.n,
            m: self.m,
            z,
        }
    }
}

/// A bracket on `(q, p, u, y)`: the chart it lives in, the algebra, and (in
/// the twisted chart) the background field entering the momentum blocks.
#[derive(Debug, Clone)]
pub struct PoissonStructure {
    n: usize,
    m: usize,
    chart: Chart,
    alg: LieAlgebraSpec,
    field: Option<GaugeFieldSpec>,
}

/// Field-dependent bracket in the kinetic-momentum chart.
pub fn twisted_structure(field: &GaugeFieldSpec, alg: &LieAlgebraSpec) -> Result<PoissonStructure> {
    if alg != field.algebra() {
        return Err(Error::Precondition(
            "algebra passed to twisted_structure differs from the field's own".into(),
        ));
    }
    Ok(PoissonStructure {
        n: field.n(),
        m: alg.m(),
        chart: Chart::Twisted,
        alg: alg.clone(),
        field: Some(field.clone()),
    })
}

/// Constant-coefficient bracket in the shifted-momentum chart.
pub fn canonical_structure(n: usize, m: usize, alg: &LieAlgebraSpec) -> Result<PoissonStructure> {
    if m != alg.m() {
        return Err(Error::DimensionMismatch {
            context: "canonical_structure charge count",
            expected: alg.m(),
            got: m,
        });
    }
    if n == 0 {
        return Err(Error::DimensionMismatch {
            context: "canonical_structure base dimension",
            expected: 1,
            got: 0,
        });
    }
    Ok(PoissonStructure {
        n,
        m,
        chart: Chart::Canonical,
        alg: alg.clone(),
        field: None,
    })
}

impl PoissonStructure {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 2 * self.m
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn algebra(&self) -> &LieAlgebraSpec {
        &self.alg
    }

    /// The structure matrix `J(z)` with `{z_a, z_b} = J_ab`.
    pub fn matrix(&self, z: &PhasePoint) -> Result<DMatrix<f64>> {
        if z.n() != self.n || z.m() != self.m {
            return Err(Error::DimensionMismatch {
                context: "structure matrix evaluation point",
                expected: self.dim(),
                got: z.dim(),
            });
        }
        if z.chart() != self.chart {
            return Err(Error::WrongChart {
                context: "structure matrix evaluation",
                expected: self.chart.name(),
                found: z.chart().name(),
            });
        }
        let (n, m) = (self.n, self.m);
        let (po, uo, yo) = (n, 2 * n, 2 * n + m);
        let mut j = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..n {
            j[(i, po + i)] = 1.0;
            j[(po + i, i)] = -1.0;
        }
        for s in 0..m {
            j[(yo + s, uo + s)] = 1.0;
            j[(uo + s, yo + s)] = -1.0;
        }
        let y = z.y();
        for s in 0..m {
            for k in 0..m {
                let mut v = 0.0;
                for r in 0..m {
                    v += self.alg.c(r, s, k) * y[r];
                }
                j[(yo + s, yo + k)] = v;
            }
        }
        let field = match (self.chart, &self.field) {
            (Chart::Canonical, _) => return Ok(j),
            (Chart::Twisted, Some(f)) => f,
            (Chart::Twisted, None) => unreachable!("twisted structures always carry a field"),
        };
        let fs = field.curvature(z.q())?;
        for i in 0..n {
            for l in 0..n {
                let mut v = 0.0;
                for s in 0..m {
                    v += y[s] * fs[s][(i, l)];
                }
                j[(po + i, po + l)] = v;
            }
        }
        if field.has_potential() {
            let a = field.potential(z.q())?;
            for i in 0..n {
                for k in 0..m {
                    j[(po + i, uo + k)] = -a[(k, i)];
                    j[(uo + k, po + i)] = a[(k, i)];
                }
            }
            if !self.alg.is_abelian() {
                for i in 0..n {
                    for s in 0..m {
                        let mut v = 0.0;
                        for r in 0..m {
                            for t in 0..m {
                                let c = self.alg.c(t, s, r);
                                if c != 0.0 {
                                    v += c * y[t] * a[(r, i)];
                                }
                            }
                        }
                        j[(po + i, yo + s)] = v;
                        j[(yo + s, po + i)] = -v;
                    }
                }
            }
        }
        Ok(j)
    }
}

fn observable_gradient(f: &dyn Fn(&PhasePoint) -> f64, z: &PhasePoint) -> Result<DVector<f64>> {
    let h = BRACKET_FD_STEP * f64::max(1.0, z.linf());
    let mut g = DVector::zeros(z.dim());
    for l in 0..z.dim() {
        let mut zp = z.flat().clone();
        zp[l] += h;
        let mut zm = z.flat().clone();
        zm[l] -= h;
        let (vp, vm) = (f(&z.with_flat(zp)), f(&z.with_flat(zm)));
        if !vp.is_finite() || !vm.is_finite() {
            return Err(Error::NonFinite {
                what: "observable value near the evaluation point".into(),
            });
        }
        g[l] = (vp - vm) / (2.0 * h);
    }
    Ok(g)
}

/// Numerical bracket of two observables, `{f, g}(z) = grad f . J(z) grad g`,
/// with second-order centered gradients.
pub fn bracket(
    f: &dyn Fn(&PhasePoint) -> f64,
    g: &dyn Fn(&PhasePoint) -> f64,
    structure: &PoissonStructure,
    z: &PhasePoint,
) -> Result<f64> {
    let j = structure.matrix(z)?;
    let gf = observable_gradient(f, z)?;
    let gg = observable_gradient(g, z)?;
    Ok(gf.dot(&(j * gg)))
}

/// Cyclic Jacobi sum for one coordinate triple,
/// `sum_l J_il dJ_jk/dz_l + J_jl dJ_ki/dz_l + J_kl dJ_ij/dz_l`,
/// with fourth-order derivatives of the structure matrix. Zero wherever the
/// bracket is honestly Poisson; see the module docs for where it is not.
pub fn jacobi_residual(
    structure: &PoissonStructure,
    z: &PhasePoint,
    indices: (usize, usize, usize),
) -> Result<f64> {
    let (i, j, k) = indices;
    let dim = structure.dim();
    if i >= dim || j >= dim || k >= dim || i == j || j == k || i == k {
        return Err(Error::Precondition(format!(
            "jacobi_residual needs three distinct coordinate indices below {dim}, got ({i}, {j}, {k})"
        )));
    }
    let jm = structure.matrix(z)?;
    let h = JACOBI_FD_STEP * f64::max(1.0, z.linf());
    let mut dj = Vec::with_capacity(dim);
    for l in 0..dim {
        let at = |t: f64| -> Result<DMatrix<f64>> {
            let mut w = z.flat().clone();
            w[l] += t;
            structure.matrix(&z.with_flat(w))
        };
        dj.push((8.0 * (at(h)? - at(-h)?) - (at(2.0 * h)? - at(-2.0 * h)?)) / (12.0 * h));
    }
    let mut s = 0.0;
    for l in 0..dim {
        s += jm[(i, l)] * dj[l][(j, k)] + jm[(j, l)] * dj[l][(k, i)] + jm[(k, l)] * dj[l][(i, j)];
    }
    Ok(s)
}

/// Twisted-chart point to canonical chart: `p -> p + sum_s y_s A^(s)(q)`.
pub fn minimal_coupling(z: &PhasePoint, field: &GaugeFieldSpec) -> Result<PhasePoint> {
    shift_momentum(z, field, Chart::Twisted, 1.0)
}

/// Canonical-chart point back to the twisted chart:
/// `p -> p - sum_s y_s A^(s)(q)`.
pub fn inverse_minimal_coupling(z: &PhasePoint, field: &GaugeFieldSpec) -> Result<PhasePoint> {
    shift_momentum(z, field, Chart::Canonical, -1.0)
}

fn shift_momentum(
    z: &PhasePoint,
    field: &GaugeFieldSpec,
    expect: Chart,
    sign: f64,
) -> Result<PhasePoint> {
    if z.chart() != expect {
        return Err(Error::WrongChart {
            context: "momentum shift",
            expected: expect.name(),
            found: z.chart().name(),
        });
    }
    if z.n() != field.n() || z.m() != field.m() {
        return Err(Error::DimensionMismatch {
            context: "momentum shift field",
            expected: 2 * field.n() + 2 * field.m(),
            got: z.dim(),
        });
    }
    let a = field.potential(z.q())?;
    let mut p = z.p().to_vec();
    for (i, pi) in p.iter_mut().enumerate() {
        for (s, ys) in z.y().iter().enumerate() {
            *pi += sign * ys * a[(s, i)];
        }
    }
    match expect {
        Chart::Twisted => PhasePoint::canonical(z.q(), &p, z.u(), z.y()),
        Chart::Canonical => PhasePoint::twisted(z.q(), &p, z.u(), z.y()),
    }
}

/// Magnetic symplectic form on the reduced space `(q, p)` at a fixed
/// invariant charge `xi`: block matrix `[[G, -I], [I, 0]]` with
/// `G_ij = sum_s e_s F^(s)_ij(q)`. It is the exact inverse of the
/// `(q, p)` block of the twisted structure matrix at `y = xi`.
pub fn reduced_two_form(
    q: &[f64],
    xi: &CoadjointElement,
    field: &GaugeFieldSpec,
) -> Result<DMatrix<f64>> {
    let n = field.n();
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            context: "reduced two-form base point",
            expected: n,
            got: q.len(),
        });
    }
    if xi.m() != field.m() {
        return Err(Error::DimensionMismatch {
            context: "reduced two-form charge",
            expected: field.m(),
            got: xi.m(),
        });
    }
    let (ok, _) = ad_invariance_check(field.algebra(), xi)?;
    if !ok {
        return Err(Error::Precondition(
            "the charge must be fixed by the coadjoint action; otherwise the magnetic term \
             is not a well-defined two-form on the reduced space"
                .into(),
        ));
    }
    let fs = field.curvature(q)?;
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = -1.0;
        omega[(n + i, i)] = 1.0;
        for l in 0..n {
            let mut g = 0.0;
            for (s, e) in xi.e().iter().enumerate() {
                g += e * fs[s][(i, l)];
            }
            omega[(i, l)] = g;
        }
    }
    Ok(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::fields::{abelian_flux_field, abelian_uniform_field, su2_pure_gauge};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_point(chart: Chart, n: usize, m: usize, rng: &mut ChaCha8Rng) -> PhasePoint {
        let draw = |rng: &mut ChaCha8Rng, len: usize| -> Vec<f64> {
            (0..len).map(|_| rng.random_range(-1.5..1.5)).collect()
        };
        let (q, p, u, y) = (draw(rng, n), draw(rng, n), draw(rng, m), draw(rng, m));
        match chart {
            Chart::Twisted => PhasePoint::twisted(&q, &p, &u, &y).unwrap(),
            Chart::Canonical => PhasePoint::canonical(&q, &p, &u, &y).unwrap(),
        }
    }

    fn all_triples(indices: &[usize]) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for a in 0..indices.len() {
            for b in a + 1..indices.len() {
                for c in b + 1..indices.len() {
                    out.push((indices[a], indices[b], indices[c]));
                }
            }
        }
        out
    }

    #[test]
    fn canonical_matrix_is_block_constant() {
        let alg = LieAlgebraSpec::abelian(1);
        let st = canonical_structure(3, 1, &alg).unwrap();
        let z = PhasePoint::canonical(&[0.3, -0.1, 0.9], &[1.0, 2.0, 3.0], &[0.5], &[0.7]).unwrap();
        let j = st.matrix(&z).unwrap();
        assert_eq!(j[(0, 3)], 1.0);
        assert_eq!(j[(3, 0)], -1.0);
        assert_eq!(j[(7, 6)], 1.0);
        assert_eq!(j[(6, 7)], -1.0);
        assert_eq!(j[(3, 6)], 0.0);
        assert_eq!(j[(3, 4)], 0.0);

        let so3 = LieAlgebraSpec::so3();
        let st = canonical_structure(2, 3, &so3).unwrap();
        let z = PhasePoint::canonical(&[0.0; 2], &[0.0; 2], &[0.0; 3], &[0.4, -0.2, 0.9]).unwrap();
        let j = st.matrix(&z).unwrap();
        // {y_1, y_2} = c^r_{12} y_r = y_3 component via levi-civita
        assert!((j[(7, 8)] - 0.9).abs() < 1e-15);
        assert!((j[(8, 9)] - 0.4).abs() < 1e-15);
        assert!((j[(9, 7)] - (-0.2)).abs() < 1e-15);
    }

    #[test]
    fn twisted_zero_potential_matches_canonical_layout() {
        let alg = LieAlgebraSpec::abelian(1);
        let field = GaugeFieldSpec::from_potential(&alg, 3, |_| DMatrix::zeros(1, 3)).unwrap();
        let twisted = twisted_structure(&field, &alg).unwrap();
        let canonical = canonical_structure(3, 1, &alg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let zt = random_point(Chart::Twisted, 3, 1, &mut rng);
            let zc = PhasePoint::canonical(zt.q(), zt.p(), zt.u(), zt.y()).unwrap();
            let jt = twisted.matrix(&zt).unwrap();
            let jc = canonical.matrix(&zc).unwrap();
            assert!((jt - jc).iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn twisted_uniform_field_entries_and_antisymmetry() {
        let field = abelian_uniform_field([0.0, 0.0, 2.0]).unwrap();
        let alg = field.algebra().clone();
        let st = twisted_structure(&field, &alg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let z = random_point(Chart::Twisted, 3, 1, &mut rng);
            let j = st.matrix(&z).unwrap();
            let y = z.y()[0];
            assert!((j[(3, 4)] - 2.0 * y).abs() < 1e-14, "p-p magnetic block");
            assert!((j[(3, 5)]).abs() < 1e-14);
            // p-u block carries -A
            let a = field.potential(z.q()).unwrap();
            for i in 0..3 {
                assert!((j[(3 + i, 6)] + a[(0, i)]).abs() < 1e-14);
            }
            let asym = (&j + j.transpose())
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            assert!(asym < 1e-14);
        }
    }

    #[test]
    fn bracket_matches_matrix_entries_and_generates_motion() {
        let field = abelian_uniform_field([0.0, 0.0, 2.0]).unwrap();
        let alg = field.algebra().clone();
        let st = twisted_structure(&field, &alg).unwrap();
        let z = PhasePoint::twisted(&[0.4, -0.7, 0.2], &[0.6, 0.0, 0.3], &[0.1], &[0.8]).unwrap();
        let j = st.matrix(&z).unwrap();
        let coord = |idx: usize| move |w: &PhasePoint| w.flat()[idx];
        for (a, b) in [(0, 3), (3, 4), (3, 6), (6, 7), (2, 5)] {
            let v = bracket(&coord(a), &coord(b), &st, &z).unwrap();
            assert!(
                (v - j[(a, b)]).abs() < 1e-8,
                "entry ({a},{b}): {v} vs {}",
                j[(a, b)]
            );
        }
        let kinetic = |w: &PhasePoint| 0.5 * w.p().iter().map(|v| v * v).sum::<f64>();
        let qdot = bracket(&coord(0), &kinetic, &st, &z).unwrap();
        assert!((qdot - z.p()[0]).abs() < 1e-8);
        // antisymmetry of the numerical bracket
        let fwd = bracket(&kinetic, &coord(4), &st, &z).unwrap();
        let bwd = bracket(&coord(4), &kinetic, &st, &z).unwrap();
        assert!((fwd + bwd).abs() < 1e-10);
    }

    #[test]
    fn jacobi_holds_on_constant_structures() {
        let alg = LieAlgebraSpec::abelian(2);
        let st = canonical_structure(3, 2, &alg).unwrap();
        let idx: Vec<usize> = (0..st.dim()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..3 {
            let z = random_point(Chart::Canonical, 3, 2, &mut rng);
            for t in all_triples(&idx) {
                let r = jacobi_residual(&st, &z, t).unwrap();
                assert!(r.abs() < 1e-10, "triple {t:?}: {r:.3e}");
            }
        }
    }

    #[test]
    fn jacobi_on_charge_sector_and_frame_defect() {
        let so3 = LieAlgebraSpec::so3();
        let st = canonical_structure(2, 3, &so3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let z = random_point(Chart::Canonical, 2, 3, &mut rng);
        // y-sector closes by the structure-constant Jacobi identity
        let r = jacobi_residual(&st, &z, (7, 8, 9)).unwrap();
        assert!(r.abs() < 1e-10, "{r:.3e}");
        // mixed frame/charge triples carry a bare structure constant
        let r = jacobi_residual(&st, &z, (4, 8, 9)).unwrap();
        assert!(
            r.abs() > 0.5,
            "expected the frame-pairing defect, got {r:.3e}"
        );
    }

    #[test]
    fn jacobi_holds_for_twisted_abelian_potential_field() {
        let alg = LieAlgebraSpec::abelian(1);
        let field = GaugeFieldSpec::from_potential(&alg, 3, |q| {
            DMatrix::from_row_slice(1, 3, &[0.0, q[0].sin(), q[0] * q[1]])
        })
        .unwrap();
        let st = twisted_structure(&field, &alg).unwrap();
        let idx: Vec<usize> = (0..st.dim()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..2 {
            let z = random_point(Chart::Twisted, 3, 1, &mut rng);
            for t in all_triples(&idx) {
                let r = jacobi_residual(&st, &z, t).unwrap();
                assert!(r.abs() < 1e-8, "triple {t:?}: {r:.3e}");
            }
        }
    }

    #[test]
    fn jacobi_holds_for_twisted_su2_outside_frame_block() {
        let field = su2_pure_gauge(0.8, 1.3).unwrap();
        let alg = field.algebra().clone();
        let st = twisted_structure(&field, &alg).unwrap();
        // q: 0..3, p: 3..6, u: 6..9, y: 9..12 — skip the frame block
        let idx: Vec<usize> = (0..6).chain(9..12).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let z = random_point(Chart::Twisted, 3, 3, &mut rng);
        for t in all_triples(&idx) {
            let r = jacobi_residual(&st, &z, t).unwrap();
            assert!(r.abs() < 1e-8, "triple {t:?}: {r:.3e}");
        }
    }

    #[test]
    fn jacobi_detects_unclosed_direct_field() {
        // B(q) = q has divergence 3; the momentum triple reports -y div B
        let field = abelian_flux_field(|q| [q[0], q[1], q[2]]).unwrap();
        let alg = field.algebra().clone();
        let st = twisted_structure(&field, &alg).unwrap();
        let yv = 0.7;
        let z = PhasePoint::twisted(&[0.3, -0.2, 0.8], &[0.1, 0.0, -0.4], &[0.0], &[yv]).unwrap();
        let r = jacobi_residual(&st, &z, (3, 4, 5)).unwrap();
        assert!((r + 3.0 * yv).abs() < 1e-6, "{r:.6}");
    }

    #[test]
    fn jacobi_rejects_bad_triples() {
        let alg = LieAlgebraSpec::abelian(1);
        let st = canonical_structure(3, 1, &alg).unwrap();
        let z = PhasePoint::canonical(&[0.0; 3], &[0.0; 3], &[0.0], &[0.0]).unwrap();
        assert!(matches!(
            jacobi_residual(&st, &z, (0, 0, 1)),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            jacobi_residual(&st, &z, (0, 1, 8)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn minimal_coupling_round_trip_and_formula() {
        let field = abelian_uniform_field([0.0, 0.0, 2.0]).unwrap();
        let z = PhasePoint::twisted(&[1.0, 0.0, 0.0], &[0.5, 0.0, 0.0], &[0.0], &[0.8]).unwrap();
        let w = minimal_coupling(&z, &field).unwrap();
        assert_eq!(w.chart(), Chart::Canonical);
        // A(1,0,0) = (0, 1, 0) for b = 2 z-hat, so only p_2 shifts, by y A_2
        assert_eq!(w.p()[0], 0.5);
        assert!((w.p()[1] - 0.8).abs() < 1e-15);
        let back = inverse_minimal_coupling(&w, &field).unwrap();
        assert_eq!(back.chart(), Chart::Twisted);
        for l in 0..z.dim() {
            assert!((back.flat()[l] - z.flat()[l]).abs() < 1e-15);
        }
    }

    #[test]
    fn minimal_coupling_rejects_wrong_chart_and_mode() {
        let field = abelian_uniform_field([0.0, 0.0, 2.0]).unwrap();
        let zc = PhasePoint::canonical(&[0.0; 3], &[0.0; 3], &[0.0], &[1.0]).unwrap();
        assert!(matches!(
            minimal_coupling(&zc, &field),
            Err(Error::WrongChart { .. })
        ));
        let zt = PhasePoint::twisted(&[0.0; 3], &[0.0; 3], &[0.0], &[1.0]).unwrap();
        assert!(matches!(
            inverse_minimal_coupling(&zt, &field),
            Err(Error::WrongChart { .. })
        ));
        let direct = abelian_flux_field(|_| [0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            minimal_coupling(&zt, &direct),
            Err(Error::WrongMode(_))
        ));
    }

    #[test]
    fn structure_matrix_rejects_wrong_chart_point() {
        let alg = LieAlgebraSpec::abelian(1);
        let st = canonical_structure(3, 1, &alg).unwrap();
        let z = PhasePoint::twisted(&[0.0; 3], &[0.0; 3], &[0.0], &[0.0]).unwrap();
        assert!(matches!(st.matrix(&z), Err(Error::WrongChart { .. })));
    }

    #[test]
    fn reduced_two_form_inverts_momentum_block() {
        let field = abelian_uniform_field([0.4, -0.3, 1.1]).unwrap();
        let alg = field.algebra().clone();
        let st = twisted_structure(&field, &alg).unwrap();
        let e1 = 0.9;
        let xi = CoadjointElement::new(vec![e1]).unwrap();
        let q = [0.2, 0.7, -0.4];
        let omega = reduced_two_form(&q, &xi, &field).unwrap();
        let f = &field.curvature(&q).unwrap()[0];
        for i in 0..3 {
            for l in 0..3 {
                assert!((omega[(i, l)] - e1 * f[(i, l)]).abs() < 1e-14);
            }
        }
        let z = PhasePoint::twisted(&q, &[0.0; 3], &[0.0], &[e1]).unwrap();
        let j = st.matrix(&z).unwrap();
        let jqp = j.view((0, 0), (6, 6)).clone_owned();
        let prod = jqp * &omega;
        let dev = (prod - DMatrix::identity(6, 6))
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(dev < 1e-10, "{dev:.3e}");
    }

    #[test]
    fn reduced_two_form_zero_charge_is_flat() {
        let field = abelian_uniform_field([0.0, 0.0, 3.0]).unwrap();
        let omega = reduced_two_form(&[0.0; 3], &CoadjointElement::zero(1), &field).unwrap();
        for i in 0..3 {
            for l in 0..3 {
                assert_eq!(omega[(i, l)], 0.0);
                assert_eq!(omega[(i, 3 + l)], if i == l { -1.0 } else { 0.0 });
                assert_eq!(omega[(3 + i, l)], if i == l { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn reduced_two_form_requires_invariant_charge() {
        let field = su2_pure_gauge(0.5, 0.7).unwrap();
        let xi = CoadjointElement::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            reduced_two_form(&[0.0; 3], &xi, &field),
            Err(Error::Precondition(_))
        ));
        let ok = reduced_two_form(&[0.0; 3], &CoadjointElement::zero(3), &field);
        assert!(ok.is_ok());
    }

    #[test]
    fn construction_errors() {
        let so3 = LieAlgebraSpec::so3();
        assert!(matches!(
            canonical_structure(3, 2, &so3),
            Err(Error::DimensionMismatch { .. })
        ));
        let field = abelian_uniform_field([0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            twisted_structure(&field, &so3),
            Err(Error::Precondition(_))
        ));
        assert!(PhasePoint::twisted(&[0.0; 3], &[0.0; 2], &[], &[]).is_err());
        assert!(PhasePoint::twisted(&[f64::NAN; 3], &[0.0; 3], &[], &[]).is_err());
    }
}
