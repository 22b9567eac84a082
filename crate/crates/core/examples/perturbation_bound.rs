//! For `h = C + ψ`, a small `C⁴` norm of `ψ` relative to `C` guarantees the
//! fourth-order condition on `h` with `f ≡ 1`.

use mixed_christoffel::conditions::{check_perturbation_bound, CheckOptions};
use mixed_christoffel::sphere::{build_grid, SphericalField};

fn main() -> mixed_christoffel::Result<()> {
    let grid = build_grid(16, 32)?;
    let opts = CheckOptions::default();
    for eps in [0.01, 0.03, 0.05] {
        let psi = SphericalField::single(2, 0, eps);
        let p = check_perturbation_bound(1.0, &psi, &grid, &opts)?;
        print!("psi = {eps} Y(2,0): C4 estimate {:.4} vs C/4 = 0.25 -> {}", p.norm_estimate, if p.verdict.pass { "pass" } else { "fail" });
        match &p.implied {
            Some(v) => println!(", implied condition margin {:+.4} ({})", v.margin, if v.pass { "holds" } else { "VIOLATED" }),
            None => println!(),
        }
    }
    Ok(())
}
