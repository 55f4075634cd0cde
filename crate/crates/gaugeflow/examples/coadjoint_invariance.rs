//! Which constant charges are legal for a reduced two-form: exactly the
//! ones fixed by the coadjoint action. Abelian algebras accept everything,
//! so(3) accepts only zero, and the 2D affine algebra accepts exactly the
//! e1 axis.

use gaugeflow::gauge::{ad_invariance_check, CoadjointElement, LieAlgebraSpec};

fn verdict(alg: &LieAlgebraSpec, e: Vec<f64>) -> gaugeflow::Result<String> {
    let xi = CoadjointElement::new(e.clone())?;
    let (ok, residual) = ad_invariance_check(alg, &xi)?;
    Ok(format!(
        "{:<18} {}  (max residual {:.2e})",
        format!("{e:?}"),
        if ok { "invariant" } else { "moves" },
        residual.amax()
    ))
}

fn main() -> gaugeflow::Result<()> {
    println!("abelian, m = 2:");
    let ab = LieAlgebraSpec::abelian(2);
    for e in [vec![0.0, 0.0], vec![1.0, 0.0], vec![-0.3, 2.0]] {
        println!("  {}", verdict(&ab, e)?);
    }

    println!("so(3):");
    let so3 = LieAlgebraSpec::so3();
    for e in [vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![0.2, -0.5, 0.9]] {
        println!("  {}", verdict(&so3, e)?);
    }

    println!("affine algebra of the line (translations + scalings):");
    let aff = LieAlgebraSpec::affine2();
    for e in [
        vec![0.0, 0.0],
        vec![0.7, 0.0],
        vec![0.0, 0.4],
        vec![0.7, 0.4],
    ] {
        println!("  {}", verdict(&aff, e)?);
    }
    Ok(())
}
