//! Checks on computed solutions: eigenvalue and rank profiles of `W`, the
//! constant-rank test function, recovered densities, and structural
//! identities (moment conditions, symmetry of mixed volumes, Minkowski
//! identities).

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::eig_2x2;
use crate::bodies::{weingarten_form, BodySpec, CofactorTensor, SymTensorField, TensorFunction};
use crate::error::{Error, Result};
use crate::solver::solution_weingarten;
use crate::sphere::{FramedGrid, NodalField, SphericalField};

/// Eigenvalues, numeric ranks and the test function `φ` of a tensor field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    /// Ascending eigenvalues per node.
    pub eigenvalues: Vec<[f64; 2]>,
    pub min_eig: f64,
    pub max_eig: f64,
    pub tau: f64,
    pub ranks: Vec<usize>,
    /// `histogram[r]` counts nodes of numeric rank `r`.
    pub histogram: Vec<usize>,
    /// Smallest observed rank.
    pub l: usize,
    /// `φ = σ_{l+1} + σ_{l+2}/σ_{l+1}` per node; `None` when `l` is full.
    pub phi: Option<Vec<f64>>,
}

/// The scalar part of a [`RankProfile`], as stored in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub min_eig: f64,
    pub max_eig: f64,
    pub tau: f64,
    pub histogram: Vec<usize>,
    pub l: usize,
    pub phi_min: Option<f64>,
    pub phi_max: Option<f64>,
}

impl RankProfile {
    pub fn summary(&self) -> RankSummary {
        let (phi_min, phi_max) = match &self.phi {
            Some(p) => (
                Some(p.iter().copied().fold(f64::INFINITY, f64::min)),
                Some(p.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            ),
            None => (None, None),
        };
        RankSummary {
            min_eig: self.min_eig,
            max_eig: self.max_eig,
            tau: self.tau,
            histogram: self.histogram.clone(),
            l: self.l,
            phi_min,
            phi_max,
        }
    }
}

/// Elementary symmetric functions `[σ₀, …, σₙ]` of a list of numbers.
fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; values.len() + 1];
    s[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            s[k] += v * s[k - 1];
        }
    }
    s
}

/// Rank profile at threshold `tau`, defaulting to `1e-6 ×` the largest
/// eigenvalue. Eigenvalues with `|λ| ≤ τ` are treated as zero.
pub fn rank_profile(w: &SymTensorField, tau: Option<f64>) -> Result<RankProfile> {
    const N: usize = 2;
    let eigenvalues: Vec<[f64; 2]> = w
        .values()
        .iter()
        .map(|m| {
            let (a, b) = eig_2x2(m);
            [a, b]
        })
        .collect();
    let min_eig = eigenvalues.iter().map(|e| e[0]).fold(f64::INFINITY, f64::min);
    let max_eig = eigenvalues.iter().map(|e| e[1]).fold(f64::NEG_INFINITY, f64::max);
    let tau = tau.unwrap_or(1e-6 * max_eig);
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("rank threshold {tau:e} must be positive")));
    }
    let ranks: Vec<usize> = eigenvalues
        .iter()
        .map(|e| e.iter().filter(|&&v| v > tau).count())
        .collect();
    let mut histogram = vec![0; N + 1];
    for &r in &ranks {
        histogram[r] += 1;
    }
    let l = ranks.iter().copied().min().unwrap_or(N);
    let phi = (l < N).then(|| {
        eigenvalues
            .iter()
            .zip(&ranks)
            .map(|(e, &r)| {
                if r <= l {
                    return 0.0;
                }
                let clamped: Vec<f64> = e.iter().map(|&v| if v.abs() <= tau { 0.0 } else { v }).collect();
                let s = elementary_symmetric(&clamped);
                let next = if l + 2 <= N { s[l + 2] } else { 0.0 };
                s[l + 1] + next / s[l + 1]
            })
            .collect()
    });
    Ok(RankProfile {
        eigenvalues,
        min_eig,
        max_eig,
        tau,
        ranks,
        histogram,
        l,
        phi,
    })
}

/// `n·D̃(W₁,…,W_{n−1}, W[u]) = tr(n·c(W₁,…,W_{n−1}) · W[u])` at the nodes.
pub fn recovered_density(bodies: &[BodySpec], u: &SphericalField, grid: &FramedGrid) -> Result<NodalField> {
    let a = CofactorTensor::new(bodies)?.sample(grid);
    let w = solution_weingarten(u, grid);
    Ok(NodalField::new(
        a.values()
            .iter()
            .zip(w.values())
            .map(|(a, w)| a.component_mul(w).sum())
            .collect(),
    ))
}

/// Mixed area density `n·D̃(W₁, W₂)` of two bodies on S².
pub fn body_density(bodies: &[BodySpec], grid: &FramedGrid) -> Result<NodalField> {
    match bodies {
        [first, second] => {
            let a = CofactorTensor::new(std::slice::from_ref(first))?.sample(grid);
            let w = weingarten_form(second, grid)?;
            Ok(NodalField::new(
                a.values()
                    .iter()
                    .zip(w.values())
                    .map(|(a, w)| a.component_mul(w).sum())
                    .collect(),
            ))
        }
        _ => Err(Error::Dimension {
            expected: 2,
            found: bodies.len(),
        }),
    }
}

/// `∫ xⱼ · density`.
pub fn density_moments(density: &NodalField, grid: &FramedGrid) -> Result<[f64; 3]> {
    density.check_grid(grid)?;
    let mut out = [0.0; 3];
    for (j, m) in out.iter_mut().enumerate() {
        let v: Vec<f64> = grid.nodes().iter().zip(density.values()).map(|(x, d)| x[j] * d).collect();
        *m = grid.integrate(&v)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairing {
    pub i1: f64,
    pub i2: f64,
    pub residual: f64,
    /// `|I₁ − I₂| / max(|I₁|, |I₂|)`.
    pub relative: f64,
}

/// `I₁ = ∫ u_{Ω′} · n·D̃(W₁,…,W_{n−1}, W_Ω)` and `I₂` with `Ω`, `Ω′`
/// swapped. Both equal a multiple of the same mixed volume.
pub fn mixed_volume_pairing(
    bodies: &[BodySpec],
    omega: &BodySpec,
    omega_prime: &BodySpec,
    grid: &FramedGrid,
) -> Result<Pairing> {
    let a = CofactorTensor::new(bodies)?.sample(grid);
    let integral = |u_of: &BodySpec, w_of: &BodySpec| -> Result<f64> {
        let w = weingarten_form(w_of, grid)?;
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| u_of.support(grid.node(i)) * a.at(i).component_mul(w.at(i)).sum())
            .collect();
        grid.integrate(&values)
    };
    let i1 = integral(omega_prime, omega)?;
    let i2 = integral(omega, omega_prime)?;
    let residual = (i1 - i2).abs();
    Ok(Pairing {
        i1,
        i2,
        residual,
        relative: residual / i1.abs().max(i2.abs()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiCheck {
    pub l: usize,
    /// `C_{n,l}`, calibrated on the unit ball.
    pub constant: f64,
    /// `C_{n,l} ∫ σ_{l+1}(W)`.
    pub lhs: f64,
    /// `∫ u σ_l(W)`.
    pub rhs: f64,
    pub residual: f64,
}

fn minkowski_integrals(body: &BodySpec, l: usize, grid: &FramedGrid) -> Result<(f64, f64)> {
    let w = weingarten_form(body, grid)?;
    let (mut upper, mut lower) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for (i, m) in w.values().iter().enumerate() {
        let s = [1.0, m.trace(), m.determinant()];
        upper.push(s[l + 1]);
        lower.push(body.support(grid.node(i)) * s[l]);
    }
    Ok((grid.integrate(&upper)?, grid.integrate(&lower)?))
}

/// Relative residual of `C_{n,l} ∫σ_{l+1}(W) = ∫u σ_l(W)` on S², with
/// `C_{n,l}` calibrated on the unit ball.
pub fn minkowski_identity_check(body: &BodySpec, l: usize, grid: &FramedGrid) -> Result<MinkowskiCheck> {
    const N: usize = 2;
    if l >= N {
        return Err(Error::Domain(format!("Minkowski identity needs l < {N}, got {l}")));
    }
    let (ball_upper, ball_lower) = minkowski_integrals(&BodySpec::ball(1.0), l, grid)?;
    let constant = ball_lower / ball_upper;
    let (upper, rhs) = minkowski_integrals(body, l, grid)?;
    let lhs = constant * upper;
    Ok(MinkowskiCheck {
        l,
        constant,
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / rhs.abs(),
    })
}

/// CSV with header `node,theta,phi,value`.
pub fn field_csv(values: &[f64], grid: &FramedGrid) -> Result<String> {
    if values.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            found: values.len(),
        });
    }
    let mut out = String::from("node,theta,phi,value\n");
    for (i, v) in values.iter().enumerate() {
        let (t, p) = grid.angles(i);
        writeln!(out, "{i},{t},{p},{v}").expect("writing to a String");
    }
    Ok(out)
}

/// CSV with header `node,theta,phi,lambda1,lambda2`.
pub fn eigen_csv(profile: &RankProfile, grid: &FramedGrid) -> Result<String> {
    if profile.eigenvalues.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            found: profile.eigenvalues.len(),
        });
    }
    let mut out = String::from("node,theta,phi,lambda1,lambda2\n");
    for (i, e) in profile.eigenvalues.iter().enumerate() {
        let (t, p) = grid.angles(i);
        writeln!(out, "{i},{t},{p},{},{}", e[0], e[1]).expect("writing to a String");
    }
    Ok(out)
}
