//! Density of the mixed area measure of two bodies, its vanishing first
//! moments, and the symmetry of the mixed volume it represents.

use mixed_christoffel::bodies::BodySpec;
use mixed_christoffel::diagnostics::{body_density, density_moments, mixed_volume_pairing};
use mixed_christoffel::sphere::build_grid;

fn main() -> mixed_christoffel::Result<()> {
    let grid = build_grid(32, 64)?;
    let k1 = BodySpec::ellipsoid(1.0, 1.1, 1.2);
    let k2 = BodySpec::ellipsoid(0.8, 1.3, 1.0);

    let density = body_density(&[k1.clone(), k2.clone()], &grid)?;
    let v = density.values();
    println!(
        "density in [{:.4}, {:.4}], first moments {:?}",
        v.iter().copied().fold(f64::INFINITY, f64::min),
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        density_moments(&density, &grid)?
    );

    // V(K1, K2, K3) from two different slots
    let k3 = BodySpec::TranslatedBall { r: 0.7, v: [0.1, 0.0, -0.2] };
    let p = mixed_volume_pairing(&[k1], &k2, &k3, &grid)?;
    println!("pairing {:.12} vs {:.12}, relative difference {:.1e}", p.i1, p.i2, p.relative);
    Ok(())
}
