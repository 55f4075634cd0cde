//! Charged-particle mechanics in background gauge fields: Lie algebra data,
//! field specifications, Poisson structures in two charts, and trajectory
//! integration with cross-chart consistency checks.

pub mod algebra;
pub mod fields;
pub mod motion;
pub mod poisson;

pub use algebra::{ad_invariance_check, CoadjointElement, LieAlgebraSpec};
pub use fields::{
    abelian_bianchi_residual, abelian_flux_field, abelian_uniform_field, su2_crossed_field,
    su2_detuned_curvature, su2_pure_gauge, ym_field_residual, GaugeFieldSpec, Tensor3,
};
pub use motion::{chart_equivalence, integrate_particle, TrajectoryPoint};
pub use poisson::{
    bracket, canonical_structure, inverse_minimal_coupling, jacobi_residual, minimal_coupling,
    reduced_two_form, twisted_structure, Chart, PhasePoint, PoissonStructure,
};
