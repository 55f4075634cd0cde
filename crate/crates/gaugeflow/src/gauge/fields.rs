//! Background gauge fields on flat base space: potentials `A^(s)_j(q)`,
//! curvature tensors `F^(s)_{ij}(q)`, and the field-equation residuals.
//!
//! Curvature convention: in derive-from-potential mode
//!
//! ```text
//! F^(s)_{ij} = dA^(s)_j/dq^i - dA^(s)_i/dq^j + sum_{k,r} c^s_{kr} A^(k)_i A^(r)_j
//! ```
//!
//! (the full Yang-Mills field strength). Residuals use the covariant cyclic
//! sum whose commutator term pairs the derivative direction with the
//! potential, `dF_{ij}/dq^l + [A_l, F_{ij}] + cyclic`; with this pairing the
//! residual vanishes identically on any curvature honestly derived from a
//! potential, which is what the tests pin down.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gauge::algebra::{levi_civita, LieAlgebraSpec};
use crate::tol;
use nalgebra::DMatrix;

/// Step factor for finite-difference derivatives of user-supplied field
/// evaluators: `h = FIELD_FD_STEP * (1 + |q|_inf)`, fourth-order stencils.
pub(crate) const FIELD_FD_STEP: f64 = 1e-4;

type PotentialFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type CurvatureFn = dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync;

/// A background field for particle mechanics: a potential, a curvature, or
/// both.
///
/// Three modes:
/// * potential only — curvature is derived by fourth-order finite
///   differences plus the structure-constant commutator term;
/// * potential plus analytic curvature — the supplied curvature is taken at
///   face value (only antisymmetry is checked), so deliberately mismatched
///   pairs can be built to probe the field-equation residuals;
/// * curvature only ("direct") — no potential exists; operations that need
///   one report a wrong-mode error. This is the mode for crafting fields
///   that violate the closure identities.
#[derive(Clone)]
pub struct GaugeFieldSpec {
    n: usize,
    alg: LieAlgebraSpec,
    potential: Option<Arc<PotentialFn>>,
    curvature: Option<Arc<CurvatureFn>>,
}

impl fmt::Debug for GaugeFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GaugeFieldSpec")
            .field("n", &self.n)
            .field("m", &self.alg.m())
            .field("has_potential", &self.potential.is_some())
            .field("analytic_curvature", &self.curvature.is_some())
            .finish()
    }
}

impl GaugeFieldSpec {
    /// Potential-only field; curvature derived on demand.
    pub fn from_potential(
        alg: &LieAlgebraSpec,
        n: usize,
        a: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        let spec = Self {
            n,
            alg: alg.clone(),
            potential: Some(Arc::new(a)),
            curvature: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Potential with an independently supplied curvature evaluator. The
    /// pair is not cross-checked; antisymmetry of the curvature is.
    pub fn with_analytic_curvature(
        alg: &LieAlgebraSpec,
        n: usize,
        a: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
        f: impl Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Result<Self> {
        let spec = Self {
            n,
            alg: alg.clone(),
            potential: Some(Arc::new(a)),
            curvature: Some(Arc::new(f)),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Curvature-only field with no potential.
    pub fn direct_curvature(
        alg: &LieAlgebraSpec,
        n: usize,
        f: impl Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Result<Self> {
        let spec = Self {
            n,
            alg: alg.clone(),
            potential: None,
            curvature: Some(Arc::new(f)),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::DimensionMismatch {
                context: "GaugeFieldSpec base dimension",
                expected: 1,
                got: 0,
            });
        }
        for q in sample_points(self.n) {
            if self.potential.is_some() {
                self.potential(&q)?;
            }
            let fs = self.curvature(&q)?;
            for (s, f) in fs.iter().enumerate() {
                let scale = f64::max(1.0, f.iter().fold(0.0f64, |a, v| a.max(v.abs())));
                let mut worst: f64 = 0.0;
                for i in 0..self.n {
                    for j in 0..self.n {
                        worst = worst.max((f[(i, j)] + f[(j, i)]).abs());
                    }
                }
                if worst > tol::STRUCTURE_EXACT * scale {
                    return Err(Error::ConstraintViolation {
                        what: format!("curvature antisymmetry (component {s})"),
                        norm: worst,
                        tol: tol::STRUCTURE_EXACT * scale,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.alg.m()
    }

    pub fn algebra(&self) -> &LieAlgebraSpec {
        &self.alg
    }

    pub fn has_potential(&self) -> bool {
        self.potential.is_some()
    }

    /// Potential matrix at `q`: row `s`, column `j` holds `A^(s)_j(q)`.
    pub fn potential(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(q)?;
        let eval = self.potential.as_ref().ok_or(Error::WrongMode(
            "this field was built from a curvature alone and has no potential".into(),
        ))?;
        let a = eval(q);
        if a.nrows() != self.m() || a.ncols() != self.n {
            return Err(Error::DimensionMismatch {
                context: "potential evaluator output",
                expected: self.m() * self.n,
                got: a.nrows() * a.ncols(),
            });
        }
        Ok(a)
    }

    /// Curvature tensors at `q`: one antisymmetric `n x n` matrix per
    /// algebra component.
    pub fn curvature(&self, q: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.check_point(q)?;
        if let Some(eval) = &self.curvature {
            let fs = eval(q);
            if fs.len() != self.m()
                || fs
                    .iter()
                    .any(|f| f.nrows() != self.n || f.ncols() != self.n)
            {
                return Err(Error::DimensionMismatch {
                    context: "curvature evaluator output",
                    expected: self.m(),
                    got: fs.len(),
                });
            }
            return Ok(fs);
        }
        self.derived_curvature(q)
    }

    fn derived_curvature(&self, q: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let n = self.n;
        let m = self.m();
        let a0 = self.potential(q)?;
        let da = fd4_stack(q, |p| self.potential(p))?;
        let mut out = Vec::with_capacity(m);
        for s in 0..m {
            let mut f = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut v = da[i][(s, j)] - da[j][(s, i)];
                    for k in 0..m {
                        for r in 0..m {
                            let c = self.alg.c(s, k, r);
                            if c != 0.0 {
                                v += c * a0[(k, i)] * a0[(r, j)];
                            }
                        }
                    }
                    f[(i, j)] = v;
                }
            }
            out.push(f);
        }
        Ok(out)
    }

    fn check_point(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "field evaluation point",
                expected: self.n,
                got: q.len(),
            });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "field evaluation point".into(),
            });
        }
        Ok(())
    }
}

/// Fourth-order central-difference derivatives of a matrix-valued map:
/// entry `l` of the result is the derivative along `q^l`.
fn fd4_stack(
    q: &[f64],
    eval: impl Fn(&[f64]) -> Result<DMatrix<f64>>,
) -> Result<Vec<DMatrix<f64>>> {
    let linf = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let h = FIELD_FD_STEP * (1.0 + linf);
    let mut out = Vec::with_capacity(q.len());
    for l in 0..q.len() {
        let at = |t: f64| -> Result<DMatrix<f64>> {
            let mut p = q.to_vec();
            p[l] += t;
            eval(&p)
        };
        let d = (8.0 * (at(h)? - at(-h)?) - (at(2.0 * h)? - at(-2.0 * h)?)) / (12.0 * h);
        out.push(d);
    }
    Ok(out)
}

/// Dense rank-3 tensor with equal extents, used for residual reports.
#[derive(Debug, Clone)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

/// Cyclic closure residual of an abelian curvature:
/// `T_{ijk} = dF_{ij}/dq^k + dF_{jk}/dq^i + dF_{ki}/dq^j`, all triples.
/// Zero (to finite-difference tolerance) exactly when the field tensor is
/// closed; a divergence-carrying direct field shows up as `T_{123} = div B`.
pub fn abelian_bianchi_residual(field: &GaugeFieldSpec, q: &[f64]) -> Result<Tensor3> {
    if field.m() != 1 {
        return Err(Error::WrongMode(format!(
            "closure residual needs an abelian field (m = 1), got m = {}",
            field.m()
        )));
    }
    let n = field.n();
    let df = fd4_stack(q, |p| Ok(field.curvature(p)?.remove(0)))?;
    let mut t = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                t.set(i, j, k, df[k][(i, j)] + df[i][(j, k)] + df[j][(k, i)]);
            }
        }
    }
    Ok(t)
}

/// Covariant cyclic residual of a nonabelian curvature, one tensor per
/// algebra component:
///
/// ```text
/// R^(s)_{ijl} = dF^(s)_{ij}/dq^l + dF^(s)_{jl}/dq^i + dF^(s)_{li}/dq^j
///             + sum_{k,r} c^s_{kr} (A^(k)_l F^(r)_{ij} + A^(k)_i F^(r)_{jl} + A^(k)_j F^(r)_{li})
/// ```
///
/// Needs the potential for the commutator terms. Vanishes identically on
/// curvatures derived from a potential; an independently supplied curvature
/// that is not a field strength of the potential leaves a nonzero residual.
pub fn ym_field_residual(
    field: &GaugeFieldSpec,
    alg: &LieAlgebraSpec,
    q: &[f64],
) -> Result<Vec<Tensor3>> {
    if !field.has_potential() {
        return Err(Error::WrongMode(
            "the covariant residual needs a potential for its commutator terms".into(),
        ));
    }
    if alg != field.algebra() {
        return Err(Error::Precondition(
            "algebra passed to ym_field_residual differs from the field's own".into(),
        ));
    }
    let n = field.n();
    let m = field.m();
    let a = field.potential(q)?;
    let f = field.curvature(q)?;
    let mut df: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(m);
    for s in 0..m {
        df.push(fd4_stack(q, |p| Ok(field.curvature(p)?.remove(s)))?);
    }
    let mut out = Vec::with_capacity(m);
    for s in 0..m {
        let mut t = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let mut v = df[s][l][(i, j)] + df[s][i][(j, l)] + df[s][j][(l, i)];
                    for k in 0..m {
                        for r in 0..m {
                            let c = alg.c(s, k, r);
                            if c != 0.0 {
                                v += c
                                    * (a[(k, l)] * f[r][(i, j)]
                                        + a[(k, i)] * f[r][(j, l)]
                                        + a[(k, j)] * f[r][(l, i)]);
                            }
                        }
                    }
                    t.set(i, j, l, v);
                }
            }
        }
        out.push(t);
    }
    Ok(out)
}

/// Deterministic evaluation points used by construction checks.
fn sample_points(n: usize) -> Vec<Vec<f64>> {
    const BASE: [[f64; 3]; 5] = [
        [0.0, 0.0, 0.0],
        [0.3, -0.7, 0.2],
        [-1.1, 0.4, 0.9],
        [0.8, 0.6, -0.5],
        [-0.2, -0.3, -0.9],
    ];
    BASE.iter()
        .map(|row| {
            (0..n)
                .map(|a| row[a % 3] * (1.0 + a as f64 / 7.0))
                .collect()
        })
        .collect()
}

/// Abelian field with a uniform magnetic vector `b` in symmetric gauge:
/// `A(q) = (b x q)/2`, `F_{ij} = eps_{ijk} b_k`.
pub fn abelian_uniform_field(b: [f64; 3]) -> Result<GaugeFieldSpec> {
    let alg = LieAlgebraSpec::abelian(1);
    GaugeFieldSpec::with_analytic_curvature(
        &alg,
        3,
        move |q| {
            DMatrix::from_row_slice(
                1,
                3,
                &[
                    0.5 * (b[1] * q[2] - b[2] * q[1]),
                    0.5 * (b[2] * q[0] - b[0] * q[2]),
                    0.5 * (b[0] * q[1] - b[1] * q[0]),
                ],
            )
        },
        move |_| {
            let mut f = DMatrix::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    f[(i, j)] = (0..3).map(|k| levi_civita(i, j, k) * b[k]).sum();
                }
            }
            vec![f]
        },
    )
}

/// Abelian curvature-only field built from a magnetic vector function:
/// `F_{ij}(q) = eps_{ijk} B_k(q)`. No potential is assumed, so `B` need not
/// be divergence-free — the standard trick for making closure-violating
/// test fields.
pub fn abelian_flux_field(
    b: impl Fn(&[f64]) -> [f64; 3] + Send + Sync + 'static,
) -> Result<GaugeFieldSpec> {
    let alg = LieAlgebraSpec::abelian(1);
    GaugeFieldSpec::direct_curvature(&alg, 3, move |q| {
        let bv = b(q);
        let mut f = DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                f[(i, j)] = (0..3).map(|k| levi_civita(i, j, k) * bv[k]).sum();
            }
        }
        vec![f]
    })
}

/// Flat su(2) connection from the group-valued map
/// `g(q) = exp(alpha q_1 a_1) exp(beta q_2 a_2)`:
///
/// ```text
/// A^(1) = alpha cos(beta q_2) dq^1,  A^(2) = beta dq^2,  A^(3) = alpha sin(beta q_2) dq^1.
/// ```
///
/// Its derived curvature vanishes identically.
pub fn su2_pure_gauge(alpha: f64, beta: f64) -> Result<GaugeFieldSpec> {
    let alg = LieAlgebraSpec::so3();
    GaugeFieldSpec::from_potential(&alg, 3, move |q| {
        let th2 = beta * q[1];
        DMatrix::from_row_slice(
            3,
            3,
            &[
                alpha * th2.cos(),
                0.0,
                0.0,
                0.0,
                beta,
                0.0,
                alpha * th2.sin(),
                0.0,
                0.0,
            ],
        )
    })
}

/// Non-flat su(2) potential `A^(1) = a1 cos(q_2) dq^1, A^(2) = a2 cos(q_1) dq^2`
/// whose derived curvature carries a commutator part
/// `F^(3)_{12} = a1 a2 cos(q_1) cos(q_2) + ...`.
pub fn su2_crossed_field(a1: f64, a2: f64) -> Result<GaugeFieldSpec> {
    let alg = LieAlgebraSpec::so3();
    GaugeFieldSpec::from_potential(&alg, 3, move |q| {
        DMatrix::from_row_slice(
            3,
            3,
            &[
                a1 * q[1].cos(),
                0.0,
                0.0,
                0.0,
                a2 * q[0].cos(),
                0.0,
                0.0,
                0.0,
                0.0,
            ],
        )
    })
}

/// The flat su(2) potential of [`su2_pure_gauge`] paired with a deliberately
/// wrong curvature `F^(1)_{12} = -F^(1)_{21} = eps (1 + q_3)`: the pair
/// violates the covariant closure identity by about `eps` near the origin.
pub fn su2_detuned_curvature(alpha: f64, beta: f64, eps: f64) -> Result<GaugeFieldSpec> {
    let alg = LieAlgebraSpec::so3();
    GaugeFieldSpec::with_analytic_curvature(
        &alg,
        3,
        move |q| {
            let th2 = beta * q[1];
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    alpha * th2.cos(),
                    0.0,
                    0.0,
                    0.0,
                    beta,
                    0.0,
                    alpha * th2.sin(),
                    0.0,
                    0.0,
                ],
            )
        },
        move |q| {
            let mut f1 = DMatrix::zeros(3, 3);
            f1[(0, 1)] = eps * (1.0 + q[2]);
            f1[(1, 0)] = -eps * (1.0 + q[2]);
            vec![f1, DMatrix::zeros(3, 3), DMatrix::zeros(3, 3)]
        },
    )
}
