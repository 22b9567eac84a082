//! Mixed discriminants, mixed cofactor matrices, elementary symmetric
//! functions and PSD margins for symmetric matrices of any size.

use itertools::Itertools;
use nalgebra::{DMatrix, Matrix2, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest size accepted by the permutation expansion (6! terms).
pub const MAX_DISCRIMINANT_SIZE: usize = 6;

const SYMMETRY_TOL: f64 = 1e-12;

/// A real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps `m`, checking squareness and symmetry to `1e-12` relative to
    /// its largest entry. The stored matrix is exactly symmetrized.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Domain(format!(
                "matrix is not symmetric (max |m - mᵀ| = {asym:e})"
            )));
        }
        Ok(Self((&m + m.transpose()) * 0.5))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    /// Symmetric part of an arbitrary square matrix.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        Self((&m + m.transpose()) * 0.5)
    }

    pub fn from_matrix2(m: &Matrix2<f64>) -> Self {
        Self::symmetrize(DMatrix::from_column_slice(2, 2, m.as_slice()))
    }

    pub fn to_matrix2(&self) -> Matrix2<f64> {
        Matrix2::new(self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)])
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self(&self.0 * a)
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        Self(&self.0 + &other.0)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = if self.n() == 2 {
            let (a, b) = eig_2x2(&self.to_matrix2());
            vec![a, b]
        } else {
            SymmetricEigen::new(self.0.clone()).eigenvalues.iter().copied().collect()
        };
        ev.sort_by(f64::total_cmp);
        ev
    }
}

fn check_sizes(ms: &[SymMatrix], n: usize) -> Result<()> {
    for m in ms {
        if m.n() != n {
            return Err(Error::Dimension {
                expected: n,
                found: m.n(),
            });
        }
    }
    Ok(())
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Normalized mixed discriminant
/// `D̃(M₁,…,Mₙ) = (1/n!) Σ_σ det(column j of M_σ(j))`, so that
/// `D̃(M,…,M) = det M`.
pub fn mixed_discriminant(ms: &[SymMatrix]) -> Result<f64> {
    let n = ms.len();
    if n == 0 {
        return Err(Error::Dimension {
            expected: 1,
            found: 0,
        });
    }
    check_sizes(ms, n)?;
    if n > MAX_DISCRIMINANT_SIZE {
        return Err(Error::Domain(format!(
            "mixed discriminant of size {n} exceeds the supported {MAX_DISCRIMINANT_SIZE}"
        )));
    }
    if n == 1 {
        return Ok(ms[0].get(0, 0));
    }
    if n == 2 {
        let (a, b) = (&ms[0].0, &ms[1].0);
        return Ok(0.5 * (a[(0, 0)] * b[(1, 1)] + b[(0, 0)] * a[(1, 1)]
            - a[(0, 1)] * b[(1, 0)]
            - b[(0, 1)] * a[(1, 0)]));
    }
    let mut total = 0.0;
    let mut work = DMatrix::zeros(n, n);
    for perm in (0..n).permutations(n) {
        for (j, &src) in perm.iter().enumerate() {
            work.set_column(j, &ms[src].0.column(j));
        }
        total += work.determinant();
    }
    Ok(total / factorial(n))
}

/// Mixed cofactor matrix `c_ij = ∂D̃(M₁,…,M_{n−1}, M)/∂m_ij` of `n − 1`
/// matrices of size `n`, evaluated exactly as `D̃(M₁,…,M_{n−1}, S_ij)` with
/// `S_ij` the symmetrized unit matrix.
pub fn mixed_cofactor(ms: &[SymMatrix]) -> Result<SymMatrix> {
    let n = ms.len() + 1;
    if ms.is_empty() {
        return Err(Error::Dimension {
            expected: 1,
            found: 0,
        });
    }
    check_sizes(ms, n)?;
    if n == 2 {
        let b = ms[0].to_matrix2();
        let adj = adj_2x2(&b);
        return Ok(SymMatrix::from_matrix2(&(adj * 0.5)));
    }
    let mut args: Vec<SymMatrix> = ms.to_vec();
    args.push(SymMatrix(DMatrix::zeros(n, n)));
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = DMatrix::zeros(n, n);
            if i == j {
                s[(i, i)] = 1.0;
            } else {
                s[(i, j)] = 0.5;
                s[(j, i)] = 0.5;
            }
            args[n - 1] = SymMatrix(s);
            let v = mixed_discriminant(&args)?;
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    Ok(SymMatrix(c))
}

/// `n · mixed_cofactor(Ms)`: equals `I` when every `Mᵢ = I`, and the
/// adjugate when `n = 2`.
pub fn cofactor_matrix(ms: &[SymMatrix]) -> Result<SymMatrix> {
    let n = ms.len() + 1;
    Ok(mixed_cofactor(ms)?.scaled(n as f64))
}

/// Adjugate of a 2×2 matrix, `tr(B) I − B`.
pub fn adj_2x2(b: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(b[(1, 1)], -b[(0, 1)], -b[(1, 0)], b[(0, 0)])
}

/// `k`-th elementary symmetric function of the eigenvalues, from the
/// characteristic polynomial (Faddeev–LeVerrier).
pub fn sigma_k(m: &SymMatrix, k: usize) -> Result<f64> {
    let n = m.n();
    if k > n {
        return Err(Error::Domain(format!("sigma_{k} undefined for size {n}")));
    }
    Ok(char_poly_sigmas(m.matrix())[k])
}

/// `[σ₀, σ₁, …, σₙ]`.
pub fn char_poly_sigmas(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut sigmas = vec![0.0; n + 1];
    sigmas[0] = 1.0;
    // c_{n-k} of det(λI − A) equals (−1)^k σ_k
    let mut mk = DMatrix::<f64>::zeros(n, n);
    let mut c_prev = 1.0;
    for k in 1..=n {
        mk = a * &mk + DMatrix::identity(n, n) * c_prev;
        let c = -(a * &mk).trace() / k as f64;
        sigmas[k] = if k % 2 == 0 { c } else { -c };
        c_prev = c;
    }
    sigmas
}

/// Smallest eigenvalue.
pub fn psd_margin(m: &SymMatrix) -> f64 {
    if m.n() == 2 {
        return min_eig_2x2(&m.to_matrix2());
    }
    SymmetricEigen::new(m.0.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues `(λ_min, λ_max)` of a symmetric 2×2 matrix.
pub fn eig_2x2(m: &Matrix2<f64>) -> (f64, f64) {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (mean - rad, mean + rad)
}

pub fn min_eig_2x2(m: &Matrix2<f64>) -> f64 {
    eig_2x2(m).0
}

/// Smallest eigenvalue of a symmetric 3×3 matrix.
pub fn min_eig_3x3(m: &nalgebra::Matrix3<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}
