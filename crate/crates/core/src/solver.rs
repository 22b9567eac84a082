//! Least-squares collocation for `Σ a_αβ (u_αβ + δ_αβ u) = f` on S².
//!
//! Unknowns are harmonic coefficients of degrees `{0} ∪ [2, L]`. Degree 1 is
//! pinned to zero: linear functions are the kernel of the operator, and
//! zeroing them fixes the translation of the solution body.

use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::min_eig_2x2;
use crate::bodies::SymTensorField;
use crate::conditions::ConditionVerdict;
use crate::diagnostics::RankSummary;
use crate::error::{Error, Result};
use crate::jets::frame_block;
use crate::sphere::{sh_count, sh_index, BasisPoint, CartesianJet, FramedGrid, NodalField, SphericalField};

/// Tolerances for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Each `|∫xⱼ f|` must not exceed `compat_tol · ∫|f|`.
    pub compat_tol: f64,
    /// The weighted L² residual must not exceed `residual_tol · ‖f‖₂`.
    pub residual_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            compat_tol: 1e-8,
            residual_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compatibility {
    /// `(∫x₁f, ∫x₂f, ∫x₃f)`.
    pub moments: [f64; 3],
    /// `∫|f|`, the scale the moments are compared against.
    pub mass: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    /// Solution coefficients; the degree-1 block is exactly zero.
    pub u_coeffs: SphericalField,
    pub l_max: usize,
    pub residual_l2: f64,
    pub residual_tolerance: f64,
    pub compatibility: Compatibility,
    pub ellipticity_margin: f64,
    /// Basis modes the grid cannot see (zero design column), left at zero.
    pub dropped_modes: Vec<(usize, i64)>,
    /// Smallest eigenvalue of `W[u]` over the grid and where it occurs.
    pub w_min_eig: f64,
    pub w_min_node: usize,
    #[serde(default)]
    pub condition_verdicts: Vec<ConditionVerdict>,
    #[serde(default)]
    pub rank_profile: Option<RankSummary>,
}

impl SolveReport {
    /// The solution's inverse Weingarten form is positive definite on the grid.
    pub fn is_geometric(&self) -> bool {
        self.w_min_eig > 0.0
    }
}

/// `W[Y]` in a frame from the Cartesian jet of a polynomial representative:
/// `Eᵀ D²F E + (F − x·∇F) I`.
fn weingarten_block(x: &Vector3<f64>, frame: &[Vector3<f64>; 2], cj: &CartesianJet) -> Matrix2<f64> {
    let radial = cj.value - x.dot(&cj.grad);
    frame_block(&cj.hess, frame) + Matrix2::identity() * radial
}

fn contract(a: &Matrix2<f64>, w: &Matrix2<f64>) -> f64 {
    a.component_mul(w).sum()
}

/// Smallest eigenvalue of `A` over the grid; an error if it is not positive.
pub fn ellipticity_margin(a: &SymTensorField) -> Result<f64> {
    let (node, margin) = a.min_eigenvalue();
    if !(margin > 0.0) {
        return Err(Error::Ellipticity { node, margin });
    }
    Ok(margin)
}

/// `tr(A(x)·W[u](x))` at every node.
pub fn operator_apply(a: &SymTensorField, u: &SphericalField, grid: &FramedGrid) -> Result<NodalField> {
    a.check_grid(grid)?;
    ellipticity_margin(a)?;
    let degree = u.effective_degree();
    if degree > grid.max_analysis_degree() {
        return Err(Error::Aliasing {
            degree,
            max_allowed: grid.max_analysis_degree(),
        });
    }
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let w = weingarten_block(x, grid.frame(i), &u.cartesian_jet(x));
            contract(a.at(i), &w)
        })
        .collect();
    Ok(NodalField::new(values))
}

/// First moments of `f` and the pass/fail verdict at relative tolerance `tol`.
pub fn check_compatibility(f: &NodalField, grid: &FramedGrid, tol: f64) -> Result<Compatibility> {
    f.check_grid(grid)?;
    let mut moments = [0.0; 3];
    for (j, m) in moments.iter_mut().enumerate() {
        let v: Vec<f64> = grid.nodes().iter().zip(f.values()).map(|(x, fv)| x[j] * fv).collect();
        *m = grid.integrate(&v)?;
    }
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let mass = grid.integrate(&abs)?;
    let threshold = tol * mass;
    Ok(Compatibility {
        moments,
        mass,
        threshold,
        pass: moments.iter().all(|m| m.abs() <= threshold),
    })
}

/// Solution modes: degree 0 and degrees 2..=l_max.
fn solution_modes(l_max: usize) -> Vec<(usize, i64)> {
    let mut modes = vec![(0, 0)];
    for l in 2..=l_max {
        for m in -(l as i64)..=(l as i64) {
            modes.push((l, m));
        }
    }
    modes
}

/// Columns with norm at or below this fraction of the largest are treated as
/// invisible to the grid.
const DROP_TOL: f64 = 1e-12;
/// Relative size of the smallest admissible `|R_kk|` after column scaling.
const RANK_TOL: f64 = 1e-10;

/// Solves the collocation least-squares problem for `u`.
pub fn solve(
    a: &SymTensorField,
    f: &NodalField,
    grid: &FramedGrid,
    l_max: usize,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    a.check_grid(grid)?;
    f.check_grid(grid)?;
    let compatibility = check_compatibility(f, grid, opts.compat_tol)?;
    if !compatibility.pass {
        return Err(Error::Compatibility {
            moments: compatibility.moments,
            threshold: compatibility.threshold,
        });
    }
    let margin = ellipticity_margin(a)?;
    if l_max > grid.max_collocation_degree() {
        return Err(Error::Aliasing {
            degree: l_max,
            max_allowed: grid.max_collocation_degree(),
        });
    }

    let modes = solution_modes(l_max);
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let basis = BasisPoint::new(x, l_max);
            let sw = grid.weights()[i].sqrt();
            modes
                .iter()
                .map(|&(l, m)| sw * contract(a.at(i), &weingarten_block(x, grid.frame(i), &basis.jet(l, m))))
                .collect()
        })
        .collect();
    let full = DMatrix::from_fn(grid.len(), modes.len(), |i, j| rows[i][j]);

    let norms: Vec<f64> = (0..modes.len()).map(|j| full.column(j).norm()).collect();
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let kept: Vec<usize> = (0..modes.len()).filter(|&j| norms[j] > DROP_TOL * max_norm).collect();
    let dropped_modes = (0..modes.len())
        .filter(|j| !kept.contains(j))
        .map(|j| modes[j])
        .collect();

    let mut design = DMatrix::zeros(grid.len(), kept.len());
    for (c, &j) in kept.iter().enumerate() {
        design.set_column(c, &(full.column(j) / norms[j]));
    }
    let rhs = DVector::from_iterator(
        grid.len(),
        f.values().iter().zip(grid.weights()).map(|(v, w)| v * w.sqrt()),
    );

    let qr = design.clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(k) = (0..kept.len()).find(|&k| r[(k, k)].abs() < RANK_TOL * diag_max) {
        let (l, m) = modes[kept[k]];
        return Err(Error::Conditioning(format!(
            "collocation matrix is rank deficient at mode ({l}, {m}): |R_kk| = {:e}",
            r[(k, k)].abs()
        )));
    }
    let mut qtb = rhs.clone();
    qr.q_tr_mul(&mut qtb);
    let top = qtb.rows(0, kept.len()).into_owned();
    let scaled = r
        .solve_upper_triangular(&top)
        .ok_or_else(|| Error::Conditioning("singular triangular factor".into()))?;

    let mut coeffs = vec![0.0; sh_count(l_max)];
    for (c, &j) in kept.iter().enumerate() {
        let (l, m) = modes[j];
        coeffs[sh_index(l, m)] = scaled[c] / norms[j];
    }
    let u = SphericalField::from_coeffs(l_max, coeffs)?;

    let residual_l2 = (&design * &scaled - &rhs).norm();
    let f_norm = rhs.norm();
    let tolerance = opts.residual_tol * f_norm;
    if !(residual_l2 <= tolerance) {
        return Err(Error::NonConvergence {
            residual: residual_l2,
            tolerance,
        });
    }

    let (w_min_node, w_min_eig) = weingarten_min_eig(&u, grid);
    Ok(SolveReport {
        u_coeffs: u,
        l_max,
        residual_l2,
        residual_tolerance: tolerance,
        compatibility,
        ellipticity_margin: margin,
        dropped_modes,
        w_min_eig,
        w_min_node,
        condition_verdicts: Vec::new(),
        rank_profile: None,
    })
}

/// `W[u]` at the nodes. Unlike [`crate::bodies::weingarten_form`] this
/// accepts any degree the collocation solve produced.
pub fn solution_weingarten(u: &SphericalField, grid: &FramedGrid) -> SymTensorField {
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            weingarten_block(x, grid.frame(i), &u.cartesian_jet(x))
        })
        .collect();
    SymTensorField::new(values, grid).expect("W[u] is symmetric by construction")
}

fn weingarten_min_eig(u: &SphericalField, grid: &FramedGrid) -> (usize, f64) {
    let w = solution_weingarten(u, grid);
    let mins: Vec<f64> = w.values().iter().map(min_eig_2x2).collect();
    mins.into_iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
}
