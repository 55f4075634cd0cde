//! Lie algebra data: structure constants, coadjoint elements, and the
//! ad-invariance test.

use crate::error::{Error, Result};
use crate::tol;
use nalgebra::DMatrix;

/// Real Lie algebra of dimension `m`, given by structure constants
/// `c^r_{sk}` in a fixed basis: `[a_s, a_k] = sum_r c^r_{sk} a_r`.
///
/// Construction checks exact antisymmetry in the lower indices and the
/// structure-constant Jacobi identity.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraSpec {
    m: usize,
    c: Vec<f64>,
}

impl LieAlgebraSpec {
    pub fn from_structure_constants(
        m: usize,
        c: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = vec![0.0; m * m * m];
        for r in 0..m {
            for s in 0..m {
                for k in 0..m {
                    let v = c(r, s, k);
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            what: format!("structure constant c^{r}_{{{s}{k}}}"),
                        });
                    }
                    data[(r * m + s) * m + k] = v;
                }
            }
        }
        let alg = Self { m, c: data };
        alg.validate()?;
        Ok(alg)
    }

    /// Commutative algebra of dimension `m` (all structure constants zero).
    pub fn abelian(m: usize) -> Self {
        Self {
            m,
            c: vec![0.0; m * m * m],
        }
    }

    /// so(3): `c^r_{sk}` is the Levi-Civita symbol.
    pub fn so3() -> Self {
        Self::from_structure_constants(3, |r, s, k| levi_civita(r, s, k))
            .expect("so(3) satisfies the Jacobi identity")
    }

    /// Two-dimensional affine algebra `[a_1, a_2] = a_2`.
    pub fn affine2() -> Self {
        Self::from_structure_constants(2, |r, s, k| match (r, s, k) {
            (1, 0, 1) => 1.0,
            (1, 1, 0) => -1.0,
            _ => 0.0,
        })
        .expect("the affine algebra satisfies the Jacobi identity")
    }

    fn validate(&self) -> Result<()> {
        let m = self.m;
        for r in 0..m {
            for s in 0..m {
                for k in 0..m {
                    let forward = self.c(r, s, k);
                    let swapped = self.c(r, k, s);
                    if forward + swapped != 0.0 {
                        return Err(Error::ConstraintViolation {
                            what: format!("antisymmetry of c^{r}_{{{s}{k}}}"),
                            norm: (forward + swapped).abs(),
                            tol: 0.0,
                        });
                    }
                }
            }
        }
        let mut worst: f64 = 0.0;
        for r in 0..m {
            for s in 0..m {
                for k in 0..m {
                    for t in 0..m {
                        let mut sum = 0.0;
                        for l in 0..m {
                            sum += self.c(l, s, k) * self.c(r, l, t)
                                + self.c(l, k, t) * self.c(r, l, s)
                                + self.c(l, t, s) * self.c(r, l, k);
                        }
                        worst = worst.max(sum.abs());
                    }
                }
            }
        }
        if worst > tol::STRUCTURE_EXACT {
            return Err(Error::ConstraintViolation {
                what: "structure-constant Jacobi identity".into(),
                norm: worst,
                tol: tol::STRUCTURE_EXACT,
            });
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Structure constant `c^r_{sk}` (zero-based indices).
    pub fn c(&self, r: usize, s: usize, k: usize) -> f64 {
        self.c[(r * self.m + s) * self.m + k]
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(|v| *v == 0.0)
    }
}

/// Levi-Civita symbol on `{0,1,2}` as a float.
pub(crate) fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Element of the dual of the Lie algebra, expanded in the bi-orthogonal
/// basis: `xi = sum_s e_s a^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoadjointElement {
    e: Vec<f64>,
}

impl CoadjointElement {
    pub fn new(e: Vec<f64>) -> Result<Self> {
        if e.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "coadjoint element coefficients".into(),
            });
        }
        Ok(Self { e })
    }

    pub fn zero(m: usize) -> Self {
        Self { e: vec![0.0; m] }
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn m(&self) -> usize {
        self.e.len()
    }
}

/// Tests whether `xi` is fixed by the coadjoint action: true iff
/// `sum_r c^r_{sk} e_r = 0` for all `s, k`. The full residual matrix
/// `R_{sk} = sum_r c^r_{sk} e_r` comes back for inspection; for so(3) it is
/// the hat map of `xi`.
pub fn ad_invariance_check(
    alg: &LieAlgebraSpec,
    xi: &CoadjointElement,
) -> Result<(bool, DMatrix<f64>)> {
    let m = alg.m();
    if xi.m() != m {
        return Err(Error::DimensionMismatch {
            context: "ad_invariance_check",
            expected: m,
            got: xi.m(),
        });
    }
    let mut residual = DMatrix::zeros(m, m);
    for s in 0..m {
        for k in 0..m {
            let mut sum = 0.0;
            for r in 0..m {
                sum += alg.c(r, s, k) * xi.e()[r];
            }
            residual[(s, k)] = sum;
        }
    }
    let ok = residual.iter().all(|v| v.abs() <= tol::STRUCTURE_EXACT);
    Ok((ok, residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so3_and_affine2_construct() {
        let so3 = LieAlgebraSpec::so3();
        assert_eq!(so3.m(), 3);
        assert_eq!(so3.c(2, 0, 1), 1.0);
        assert_eq!(so3.c(2, 1, 0), -1.0);
        assert!(!so3.is_abelian());

        let aff = LieAlgebraSpec::affine2();
        assert_eq!(aff.c(1, 0, 1), 1.0);
        assert!(!aff.is_abelian());

        assert!(LieAlgebraSpec::abelian(3).is_abelian());
        assert_eq!(LieAlgebraSpec::abelian(0).m(), 0);
    }

    #[test]
    fn construction_rejects_bad_constants() {
        // not antisymmetric
        let r = LieAlgebraSpec::from_structure_constants(2, |r, s, k| {
            if (r, s, k) == (0, 0, 0) {
                1.0
            } else {
                0.0
            }
        });
        assert!(matches!(r, Err(Error::ConstraintViolation { .. })));

        // antisymmetric but violates the Jacobi identity:
        // [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e2+e1
        let r = LieAlgebraSpec::from_structure_constants(3, |r, s, k| match (r, s, k) {
            (0, 2, 0) => 1.0,
            (0, 0, 2) => -1.0,
            _ => levi_civita(r, s, k),
        });
        assert!(matches!(r, Err(Error::ConstraintViolation { .. })));

        let r = LieAlgebraSpec::from_structure_constants(1, |_, _, _| f64::NAN);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn ad_invariance_truth_table() {
        let so3 = LieAlgebraSpec::so3();
        let (ok, _) = ad_invariance_check(&so3, &CoadjointElement::zero(3)).unwrap();
        assert!(ok);
        let xi = CoadjointElement::new(vec![1.0, 2.0, 3.0]).unwrap();
        let (ok, r) = ad_invariance_check(&so3, &xi).unwrap();
        assert!(!ok);
        // hat map of (1,2,3)
        assert_eq!(r[(0, 1)], 3.0);
        assert_eq!(r[(0, 2)], -2.0);
        assert_eq!(r[(1, 2)], 1.0);
        assert_eq!(r[(1, 0)], -3.0);

        let ab = LieAlgebraSpec::abelian(3);
        let (ok, r) = ad_invariance_check(&ab, &xi).unwrap();
        assert!(ok);
        assert!(r.iter().all(|v| *v == 0.0));

        let aff = LieAlgebraSpec::affine2();
        let accept = |e: [f64; 2]| {
            ad_invariance_check(&aff, &CoadjointElement::new(e.to_vec()).unwrap())
                .unwrap()
                .0
        };
        assert!(accept([5.0, 0.0]));
        assert!(accept([0.0, 0.0]));
        assert!(!accept([0.0, 1e-6]));
        assert!(!accept([2.0, -1.0]));
    }

    #[test]
    fn ad_invariance_checks_dimension() {
        let so3 = LieAlgebraSpec::so3();
        let xi = CoadjointElement::new(vec![1.0]).unwrap();
        assert!(matches!(
            ad_invariance_check(&so3, &xi),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coadjoint_rejects_non_finite() {
        assert!(matches!(
            CoadjointElement::new(vec![1.0, f64::INFINITY]),
            Err(Error::NonFinite { .. })
        ));
    }
}
