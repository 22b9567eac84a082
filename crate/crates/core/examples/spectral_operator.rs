//! With `A = I` the operator is `Δ + 2`, so each harmonic `Yₗᵐ` is an
//! eigenfunction with eigenvalue `2 − ℓ(ℓ+1)`.

use mixed_christoffel::bodies::SymTensorField;
use mixed_christoffel::solver::operator_apply;
use mixed_christoffel::sphere::{build_grid, real_harmonic, SphericalField};

fn main() -> mixed_christoffel::Result<()> {
    let grid = build_grid(32, 64)?;
    let a = SymTensorField::identity(&grid);
    for l in [0usize, 1, 2, 5, 12] {
        let m = (l as i64) / 2;
        let out = operator_apply(&a, &SphericalField::single(l, m, 1.0), &grid)?;
        let expected = 2.0 - (l * (l + 1)) as f64;
        let err = out
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - expected * real_harmonic(l, m, grid.node(i))).abs())
            .fold(0.0, f64::max);
        println!("Y({l},{m}): eigenvalue {expected:>5}, max node error {err:.1e}");
    }
    Ok(())
}
