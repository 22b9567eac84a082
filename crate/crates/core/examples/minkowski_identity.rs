//! The Minkowski identity `C ∫σ₂(W) = ∫u σ₁(W)` on S², with the constant
//! calibrated on the unit ball.

use mixed_christoffel::bodies::BodySpec;
use mixed_christoffel::diagnostics::minkowski_identity_check;
use mixed_christoffel::sphere::{build_grid, SphericalField};

fn main() -> mixed_christoffel::Result<()> {
    let grid = build_grid(32, 64)?;
    for (name, body) in [
        ("ellipsoid 1, 1.1, 1.2", BodySpec::ellipsoid(1.0, 1.1, 1.2)),
        ("1 + 0.05 Y(3,0)", BodySpec::perturbation(1.0, SphericalField::single(3, 0, 0.05))),
    ] {
        let m = minkowski_identity_check(&body, 1, &grid)?;
        println!("{name:<22} C = {:.12}  lhs {:.10}  rhs {:.10}  residual {:.1e}", m.constant, m.lhs, m.rhs, m.residual);
    }
    Ok(())
}
