//! Numerical Jacobi-identity sweeps, coordinate by coordinate:
//!
//! * canonical chart, abelian charges: every triple vanishes;
//! * twisted chart with a genuine potential: every triple vanishes;
//! * curvature-only field B(q) = q (div B = 3): the momentum triple picks
//!   up the defect -y div B, the price of a field with no potential.

use gaugeflow::gauge::{
    abelian_flux_field, abelian_uniform_field, canonical_structure, jacobi_residual,
    twisted_structure, LieAlgebraSpec, PhasePoint, PoissonStructure,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    canonical: bool,
) -> gaugeflow::Result<PhasePoint> {
    let draw = |rng: &mut ChaCha8Rng, k: usize| -> Vec<f64> {
        (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()
    };
    let (q, p, u, y) = (draw(rng, n), draw(rng, n), draw(rng, m), draw(rng, m));
    if canonical {
        PhasePoint::canonical(&q, &p, &u, &y)
    } else {
        PhasePoint::twisted(&q, &p, &u, &y)
    }
}

fn worst_triple(
    st: &PoissonStructure,
    z: &PhasePoint,
    dim: usize,
) -> gaugeflow::Result<(f64, (usize, usize, usize))> {
    let mut worst = (0.0, (0, 1, 2));
    for i in 0..dim {
        for j in i + 1..dim {
            for k in j + 1..dim {
                let r = jacobi_residual(st, z, (i, j, k))?.abs();
                if r > worst.0 {
                    worst = (r, (i, j, k));
                }
            }
        }
    }
    Ok(worst)
}

fn main() -> gaugeflow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let ab2 = LieAlgebraSpec::abelian(2);
    let st = canonical_structure(3, 2, &ab2)?;
    let mut w = 0.0f64;
    for _ in 0..3 {
        let z = random_point(&mut rng, 3, 2, true)?;
        w = w.max(worst_triple(&st, &z, z.dim())?.0);
    }
    println!("canonical, abelian m=2:   worst |J| over all triples = {w:.3e}");

    let field = abelian_uniform_field([0.3, -0.7, 1.1])?;
    let st = twisted_structure(&field, &field.algebra().clone())?;
    let mut w = 0.0f64;
    for _ in 0..3 {
        let z = random_point(&mut rng, 3, 1, false)?;
        w = w.max(worst_triple(&st, &z, z.dim())?.0);
    }
    println!("twisted, uniform B:       worst |J| over all triples = {w:.3e}");

    let field = abelian_flux_field(|q| [q[0], q[1], q[2]])?;
    let st = twisted_structure(&field, &field.algebra().clone())?;
    println!("\ncurvature-only B(q) = q, momentum triple (p1, p2, p3):");
    println!("{:>10} {:>14} {:>14}", "y", "residual", "-y div B");
    for y in [0.5, 1.0, -0.8] {
        let z = random_point(&mut rng, 3, 1, false)?;
        let z = PhasePoint::twisted(z.q(), z.p(), &[0.0], &[y])?;
        let r = jacobi_residual(&st, &z, (3, 4, 5))?;
        println!("{y:10.2} {r:14.6} {:14.6}", -3.0 * y);
    }
    Ok(())
}
