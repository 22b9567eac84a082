//! Matrix convexity of `|p|² D²h(p) / f(p/|p|)` against the fourth-order
//! condition it implies, over a small body catalog with `f ≡ 1`.
//!
//! Matrix convexity fails for every closed body: along a great circle the
//! relevant quantity `ψ` would need `ψ″ ≥ ψ > 0`, which no periodic function
//! satisfies. The fourth-order condition is weaker and holds for round bodies.

use mixed_christoffel::bodies::BodySpec;
use mixed_christoffel::conditions::{check_matrix_convexity, check_new_form_3d, CheckOptions};
use mixed_christoffel::jets::ScalarField;
use mixed_christoffel::sphere::{build_grid, SphericalField};

fn main() -> mixed_christoffel::Result<()> {
    let grid = build_grid(16, 32)?;
    let one = ScalarField::constant(1.0);
    let opts = CheckOptions::default();
    let catalog = [
        ("ball", BodySpec::ball(1.0)),
        ("ellipsoid 1, 1.1, 1.2", BodySpec::ellipsoid(1.0, 1.1, 1.2)),
        ("ellipsoid 1, 1, 3", BodySpec::ellipsoid(1.0, 1.0, 3.0)),
        ("1 + 0.02 Y(2,1)", BodySpec::perturbation(1.0, SphericalField::single(2, 1, 0.02))),
    ];
    for (name, body) in catalog {
        let mc = check_matrix_convexity(&body, &one, &grid, &opts)?;
        let nf = check_new_form_3d(&body, &one, &grid, &opts)?;
        println!(
            "{name:<22} matrix convexity {:+.4}  fourth-order {:+.4}  implication {}",
            mc.margin,
            nf.margin,
            if !mc.pass || nf.pass { "holds" } else { "VIOLATED" }
        );
    }
    Ok(())
}
