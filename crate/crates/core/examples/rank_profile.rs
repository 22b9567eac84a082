//! Eigenvalue and rank diagnostics of inverse Weingarten forms, including a
//! perturbation too large to be convex: its form is indefinite near the
//! poles, so the numeric rank drops there.

use mixed_christoffel::bodies::{weingarten_form, BodySpec};
use mixed_christoffel::diagnostics::{eigen_csv, rank_profile};
use mixed_christoffel::sphere::{build_grid, SphericalField};

fn main() -> mixed_christoffel::Result<()> {
    let grid = build_grid(16, 32)?;
    for (name, body) in [
        ("ball", BodySpec::ball(1.0)),
        ("ellipsoid 1, 1, 3", BodySpec::ellipsoid(1.0, 1.0, 3.0)),
        ("1 + 0.6 P2(x3)", BodySpec::perturbation(1.0, SphericalField::zonal_legendre(2, 0.6))),
    ] {
        let p = rank_profile(&weingarten_form(&body, &grid)?, None)?;
        println!(
            "{name:<18} eigenvalues in [{:+.4}, {:.4}], rank histogram {:?}",
            p.min_eig, p.max_eig, p.histogram
        );
    }

    let p = rank_profile(&weingarten_form(&BodySpec::ellipsoid(1.0, 1.0, 3.0), &grid)?, None)?;
    let csv = eigen_csv(&p, &grid)?;
    println!("{}", csv.lines().take(3).collect::<Vec<_>>().join("\n"));
    Ok(())
}
