//! Forward-generate a density from a known solution with an ellipsoid as the
//! fixed body, then recover the solution.

use mixed_christoffel::bodies::{BodySpec, CofactorTensor, TensorFunction};
use mixed_christoffel::diagnostics::{rank_profile, recovered_density};
use mixed_christoffel::solver::{operator_apply, solution_weingarten, solve, SolveOptions};
use mixed_christoffel::sphere::{build_grid, SphericalField};

fn main() -> mixed_christoffel::Result<()> {
    let grid = build_grid(32, 64)?;
    let body = BodySpec::ellipsoid(1.0, 1.1, 1.2);
    let a = CofactorTensor::new(std::slice::from_ref(&body))?.sample(&grid);

    // u* = 1 + 0.1 Y(3,2)
    let target = SphericalField::constant(1.0).add(&SphericalField::single(3, 2, 0.1));
    let f = operator_apply(&a, &target, &grid)?;
    let report = solve(&a, &f, &grid, 24, &SolveOptions::default())?;

    let mut padded = target.clone();
    padded.resize(24);
    let err: f64 = report
        .u_coeffs
        .coeffs()
        .iter()
        .zip(padded.coeffs())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let recovered = recovered_density(&[body], &report.u_coeffs, &grid)?;
    println!("coefficient error {err:.2e}");
    println!("density error {:.2e}", recovered.l2_distance(&f, &grid)? / f.l2_norm(&grid)?);
    let profile = rank_profile(&solution_weingarten(&report.u_coeffs, &grid), None)?;
    println!("W[u] eigenvalues in [{:.4}, {:.4}], rank histogram {:?}", profile.min_eig, profile.max_eig, profile.histogram);
    Ok(())
}
