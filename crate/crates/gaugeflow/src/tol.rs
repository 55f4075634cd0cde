//! Tolerances used by runtime precondition checks and constraint flags.
//!
//! All field tolerances are relative to a scale defined as
//! `max(1, linf norm of the data involved)`, so bounds behave sensibly for
//! both tiny and large fields.

/// Relative mean bound for solvability of `laplacian(u) = w` on the torus.
pub const MEAN_SOLVE_REL: f64 = 1e-10;

/// Relative divergence bound accepted by `inv_curl`.
pub const DIV_FREE_REL: f64 = 1e-8;

/// Relative bound on `div A - eta` for a state to count as
/// Lorentz-consistent at construction.
pub const LORENTZ_CONSISTENT_REL: f64 = 1e-8;

/// Relative bound on `div F - rho` accepted when a reduced state is built.
pub const GAUSS_CONSISTENT_REL: f64 = 1e-8;

/// Bound on the centered-difference continuity residual of a source pair.
pub const CONTINUITY_REL: f64 = 1e-6;

/// Structure-constant antisymmetry and Jacobi identity bound.
pub const STRUCTURE_EXACT: f64 = 1e-12;

/// Agreement bound between an analytic curvature and the finite-difference
/// curvature of the potential it claims to match.
pub const CURVATURE_CONSISTENT: f64 = 1e-6;

/// Scale for relative tolerances: `max(1, linf)`.
pub fn scale_of(linf: f64) -> f64 {
    linf.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_floors_at_one() {
        assert_eq!(scale_of(0.25), 1.0);
        assert_eq!(scale_of(40.0), 40.0);
    }

    #[test]
    fn tolerance_ordering() {
        // Exact identities are held tighter than solver preconditions,
        // which are tighter than finite-difference consistency checks.
        assert!(STRUCTURE_EXACT < MEAN_SOLVE_REL);
        assert!(MEAN_SOLVE_REL < DIV_FREE_REL);
        assert!(DIV_FREE_REL < CONTINUITY_REL);
    }
}
