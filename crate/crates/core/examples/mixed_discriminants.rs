//! Mixed discriminants, mixed cofactors, and their relation to the
//! elementary symmetric functions.

use mixed_christoffel::algebra::{mixed_cofactor, mixed_discriminant, cofactor_matrix, sigma_k, SymMatrix};
use nalgebra::DMatrix;

fn main() -> mixed_christoffel::Result<()> {
    let m = SymMatrix::new(DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.3, 0.0, 0.3, 3.0]))?;
    let i = SymMatrix::identity(3);

    println!("det M = {:.6}, D(M, M, M) = {:.6}", m.det(), mixed_discriminant(&[m.clone(), m.clone(), m.clone()])?);
    for k in 0..=3 {
        let mut args = vec![m.clone(); k];
        args.extend(vec![i.clone(); 3 - k]);
        let binom = [1.0, 3.0, 3.0, 1.0][k];
        println!(
            "k = {k}: C(3,k) D(M^k, I^(3-k)) = {:.6}, sigma_k(M) = {:.6}",
            binom * mixed_discriminant(&args)?,
            sigma_k(&m, k)?
        );
    }

    // the cofactor is the gradient of D in its last slot
    let c = mixed_cofactor(&[m.clone(), i.clone()])?;
    let n = SymMatrix::from_diagonal(&[1.0, -1.0, 2.0]);
    let contracted = c.matrix().component_mul(n.matrix()).sum();
    println!("sum c_ij n_ij = {contracted:.6}, D(M, I, N) = {:.6}", mixed_discriminant(&[m, i, n])?);

    let b = SymMatrix::new(DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]))?;
    println!("cofactor matrix of a 2x2 matrix is its adjugate: {}", cofactor_matrix(&[b])?.matrix());
    Ok(())
}
