//! The sufficient conditions for a full-rank solution, on a density that
//! satisfies them and one that does not.

use mixed_christoffel::bodies::{BodySpec, CofactorTensor, IdentityTensor};
use mixed_christoffel::conditions::{check_cond_l, check_cond_n2, check_gm, CheckOptions, ConditionVerdict};
use mixed_christoffel::jets::ScalarField;
use mixed_christoffel::sphere::build_grid;

fn show(v: &ConditionVerdict) {
    println!(
        "  {:<8} {} margin {:+.5} at node {} ({})",
        v.name,
        if v.pass { "pass" } else { "fail" },
        v.margin,
        v.witness.node,
        v.quantifier
    );
}

fn main() -> mixed_christoffel::Result<()> {
    let grid = build_grid(32, 64)?;
    let opts = CheckOptions::default();

    println!("A = I, f = 1");
    let one = ScalarField::constant(1.0);
    show(&check_gm(&one, &grid, opts.tol)?);
    show(&check_cond_n2(&IdentityTensor, &one, &grid, &opts)?);
    show(&check_cond_l(&IdentityTensor, &one, &grid, &opts)?);

    println!("A = I, 1/f = 1 + 0.6 P2(x3)");
    let bad = ScalarField::reciprocal(ScalarField::one_plus_zonal(2, 0.6));
    let v = check_gm(&bad, &grid, opts.tol)?;
    show(&v);
    let x = grid.node(v.witness.node);
    println!("  witness at x = ({:.3}, {:.3}, {:.3})", x.x, x.y, x.z);

    println!("A = cofactor of Ellipsoid(1, 1.1, 1.2), f = 2");
    let a = CofactorTensor::new(&[BodySpec::ellipsoid(1.0, 1.1, 1.2)])?;
    let two = ScalarField::constant(2.0);
    show(&check_cond_n2(&a, &two, &grid, &opts)?);
    show(&check_cond_l(&a, &two, &grid, &opts)?);
    Ok(())
}
