//! The Christoffel problem for the unit ball: `Δu + 2u = 2` has the support
//! function `u ≡ 1` as its solution.

use mixed_christoffel::bodies::SymTensorField;
use mixed_christoffel::solver::{solve, SolveOptions};
use mixed_christoffel::sphere::{build_grid, NodalField};

fn main() -> mixed_christoffel::Result<()> {
    let grid = build_grid(16, 32)?;
    let a = SymTensorField::identity(&grid);
    let f = NodalField::new(vec![2.0; grid.len()]);
    let report = solve(&a, &f, &grid, 16, &SolveOptions::default())?;

    let err = grid
        .nodes()
        .iter()
        .map(|x| (report.u_coeffs.value_at(x) - 1.0).abs())
        .fold(0.0, f64::max);
    println!("max |u - 1| on the grid: {err:.2e}");
    println!("residual {:.2e}, min eig of W[u] {:.6}", report.residual_l2, report.w_min_eig);
    println!("modes the grid cannot see: {:?}", report.dropped_modes);
    Ok(())
}
