//! Real spherical harmonics, orthonormal under the surface measure of S².
//!
//! Each basis function is written on the sphere as a polynomial in Cartesian
//! coordinates, `Y = K · Q̄ₗᵐ(z) · Re/Im (x + iy)ᵐ`, where `Q̄ₗᵐ` is the
//! normalized m-th derivative of the Legendre polynomial. The factor
//! `(1 − z²)^{m/2}` of the associated Legendre function is absorbed into
//! `|x + iy|ᵐ`, so values and Cartesian derivatives of every order are free of
//! pole singularities.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::grid::FramedGrid;
use crate::error::{Error, Result};

/// Flat index of `(l, m)` with `-l ≤ m ≤ l`; negative orders are sine-type.
pub fn sh_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

/// Number of basis functions with degree ≤ `l_max`.
pub fn sh_count(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Inverse of [`sh_index`].
pub fn sh_degree_order(index: usize) -> (usize, i64) {
    let l = (index as f64).sqrt() as usize;
    let l = if (l + 1) * (l + 1) <= index { l + 1 } else { l };
    (l, index as i64 - (l * l + l) as i64)
}

/// Value, Cartesian gradient and Cartesian Hessian of a polynomial
/// representative at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianJet {
    pub value: f64,
    pub grad: Vector3<f64>,
    pub hess: Matrix3<f64>,
}

impl CartesianJet {
    pub fn zero() -> Self {
        Self {
            value: 0.0,
            grad: Vector3::zeros(),
            hess: Matrix3::zeros(),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &CartesianJet) {
        self.value += a * other.value;
        self.grad += other.grad * a;
        self.hess += other.hess * a;
    }
}

/// Tables of `Q̄ₗᵏ(z)` and `Re/Im (x+iy)ᵏ` at one point, from which every
/// basis function and its derivatives are read off.
pub(crate) struct BasisPoint {
    l_max: usize,
    q: Vec<f64>,
    cos_k: Vec<f64>,
    sin_k: Vec<f64>,
}

fn tri(l: usize, k: usize) -> usize {
    l * (l + 1) / 2 + k
}

impl BasisPoint {
    pub(crate) fn new(x: &Vector3<f64>, l_max: usize) -> Self {
        let z = x.z;
        let mut q = vec![0.0; tri(l_max, l_max) + 1];
        let mut diag = (0.25 / PI).sqrt();
        for k in 0..=l_max {
            if k > 0 {
                let kf = k as f64;
                diag *= ((2.0 * kf + 1.0) / (2.0 * kf)).sqrt();
            }
            q[tri(k, k)] = diag;
            if k < l_max {
                q[tri(k + 1, k)] = z * (2.0 * k as f64 + 3.0).sqrt() * diag;
            }
            for l in (k + 2)..=l_max {
                let lf = l as f64;
                let kf = k as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - kf * kf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - kf * kf)
                    / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                q[tri(l, k)] = a * (z * q[tri(l - 1, k)] - b * q[tri(l - 2, k)]);
            }
        }
        let mut cos_k = vec![0.0; l_max + 1];
        let mut sin_k = vec![0.0; l_max + 1];
        cos_k[0] = 1.0;
        for k in 1..=l_max {
            cos_k[k] = x.x * cos_k[k - 1] - x.y * sin_k[k - 1];
            sin_k[k] = x.x * sin_k[k - 1] + x.y * cos_k[k - 1];
        }
        Self {
            l_max,
            q,
            cos_k,
            sin_k,
        }
    }

    fn q_at(&self, l: usize, k: usize) -> f64 {
        if k > l {
            0.0
        } else {
            self.q[tri(l, k)]
        }
    }

    /// (C_k, S_k), zero for negative k.
    fn azimuthal(&self, k: i64) -> (f64, f64) {
        if k < 0 {
            (0.0, 0.0)
        } else {
            (self.cos_k[k as usize], self.sin_k[k as usize])
        }
    }

    pub(crate) fn value(&self, l: usize, m: i64) -> f64 {
        let k = m.unsigned_abs() as usize;
        let q = self.q_at(l, k);
        match m.cmp(&0) {
            std::cmp::Ordering::Equal => q,
            std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * q * self.cos_k[k],
            std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * q * self.sin_k[k],
        }
    }

    pub(crate) fn jet(&self, l: usize, m: i64) -> CartesianJet {
        debug_assert!(l <= self.l_max);
        let k = m.unsigned_abs() as usize;
        let kf = k as f64;
        let lf = l as f64;
        let scale = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
        let q0 = self.q_at(l, k);
        let r1 = ((lf + kf + 1.0) * (lf - kf)).sqrt();
        let q1 = r1 * self.q_at(l, k + 1);
        let q2 = if k + 1 <= l {
            r1 * ((lf + kf + 2.0) * (lf - kf - 1.0)).max(0.0).sqrt() * self.q_at(l, k + 2)
        } else {
            0.0
        };
        let ki = k as i64;
        let (c0, s0) = self.azimuthal(ki);
        let (c1, s1) = self.azimuthal(ki - 1);
        let (c2, s2) = self.azimuthal(ki - 2);
        let d1 = kf;
        let d2 = kf * (kf - 1.0);
        // azimuthal factor and its x/y derivatives
        let (a, ax, ay, axx, axy, ayy) = if m >= 0 {
            (c0, d1 * c1, -d1 * s1, d2 * c2, -d2 * s2, -d2 * c2)
        } else {
            (s0, d1 * s1, d1 * c1, d2 * s2, d2 * c2, -d2 * s2)
        };
        let value = scale * q0 * a;
        let grad = Vector3::new(q0 * ax, q0 * ay, q1 * a) * scale;
        let hess = Matrix3::new(
            q0 * axx,
            q0 * axy,
            q1 * ax,
            q0 * axy,
            q0 * ayy,
            q1 * ay,
            q1 * ax,
            q1 * ay,
            q2 * a,
        ) * scale;
        CartesianJet { value, grad, hess }
    }
}

/// A band-limited scalar field given by real harmonic coefficients.
///
/// Serializes as a sparse list of `[l, m, coefficient]` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ShTerm>", into = "Vec<ShTerm>")]
pub struct SphericalField {
    l_max: usize,
    coeffs: Vec<f64>,
}

/// One `(degree, order, coefficient)` entry of a sparse harmonic expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShTerm(pub usize, pub i64, pub f64);

impl SphericalField {
    pub fn zeros(l_max: usize) -> Self {
        Self {
            l_max,
            coeffs: vec![0.0; sh_count(l_max)],
        }
    }

    pub fn from_coeffs(l_max: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != sh_count(l_max) {
            return Err(Error::Dimension {
                expected: sh_count(l_max),
                found: coeffs.len(),
            });
        }
        Ok(Self { l_max, coeffs })
    }

    pub fn from_terms(terms: &[ShTerm]) -> Result<Self> {
        let l_max = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut field = Self::zeros(l_max);
        for &ShTerm(l, m, c) in terms {
            if m.unsigned_abs() as usize > l {
                return Err(Error::Config(format!("invalid harmonic order ({l}, {m})")));
            }
            field.coeffs[sh_index(l, m)] += c;
        }
        Ok(field)
    }

    /// `amplitude · Yₗᵐ`.
    pub fn single(l: usize, m: i64, amplitude: f64) -> Self {
        let mut f = Self::zeros(l);
        f.coeffs[sh_index(l, m)] = amplitude;
        f
    }

    /// `amplitude · Pₗ(x₃)` with the classical (unit at the pole) Legendre
    /// polynomial.
    pub fn zonal_legendre(l: usize, amplitude: f64) -> Self {
        let norm = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
        Self::single(l, 0, amplitude / norm)
    }

    pub fn constant(c: f64) -> Self {
        Self::single(0, 0, c * (4.0 * PI).sqrt())
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, l: usize, m: i64) -> f64 {
        if l > self.l_max {
            0.0
        } else {
            self.coeffs[sh_index(l, m)]
        }
    }

    pub fn set_coeff(&mut self, l: usize, m: i64, value: f64) {
        if l > self.l_max {
            self.resize(l);
        }
        self.coeffs[sh_index(l, m)] = value;
    }

    /// Pads or truncates to a new band limit.
    pub fn resize(&mut self, l_max: usize) {
        self.coeffs.resize(sh_count(l_max), 0.0);
        self.l_max = l_max;
    }

    /// Nonzero coefficients as sparse terms.
    pub fn terms(&self) -> Vec<ShTerm> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, &c)| {
                let (l, m) = sh_degree_order(i);
                ShTerm(l, m, c)
            })
            .collect()
    }

    /// Largest degree carrying a nonzero coefficient.
    pub fn effective_degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != 0.0)
            .map(|i| sh_degree_order(i).0)
            .unwrap_or(0)
    }

    /// Smallest degree carrying a nonzero coefficient, `None` for zero.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .position(|c| *c != 0.0)
            .map(|i| sh_degree_order(i).0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            l_max: self.l_max,
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    pub fn add(&self, other: &SphericalField) -> Self {
        let l_max = self.l_max.max(other.l_max);
        let mut out = Self::zeros(l_max);
        for (i, c) in self.coeffs.iter().enumerate() {
            out.coeffs[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out.coeffs[i] += c;
        }
        out
    }

    pub fn value_at(&self, x: &Vector3<f64>) -> f64 {
        let basis = BasisPoint::new(x, self.l_max);
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| {
                let (l, m) = sh_degree_order(i);
                c * basis.value(l, m)
            })
            .sum()
    }

    /// Cartesian jet of the polynomial representative at `x`.
    pub fn cartesian_jet(&self, x: &Vector3<f64>) -> CartesianJet {
        let basis = BasisPoint::new(x, self.l_max);
        let mut jet = CartesianJet::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c != 0.0 {
                let (l, m) = sh_degree_order(i);
                jet.axpy(*c, &basis.jet(l, m));
            }
        }
        jet
    }

    /// Values at every node of `grid`.
    pub fn synthesize(&self, grid: &FramedGrid) -> Result<Vec<f64>> {
        sh_synthesis(self, grid)
    }
}

impl TryFrom<Vec<ShTerm>> for SphericalField {
    type Error = Error;

    fn try_from(terms: Vec<ShTerm>) -> Result<Self> {
        Self::from_terms(&terms)
    }
}

impl From<SphericalField> for Vec<ShTerm> {
    fn from(field: SphericalField) -> Self {
        field.terms()
    }
}

fn check_degree(l_max: usize, grid: &FramedGrid) -> Result<()> {
    if l_max > grid.max_analysis_degree() {
        return Err(Error::Aliasing {
            degree: l_max,
            max_allowed: grid.max_analysis_degree(),
        });
    }
    Ok(())
}

/// Projects node values onto the harmonics of degree ≤ `l_max` by quadrature.
pub fn sh_analysis(values: &[f64], grid: &FramedGrid, l_max: usize) -> Result<SphericalField> {
    check_degree(l_max, grid)?;
    if values.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            found: values.len(),
        });
    }
    let mut coeffs = vec![0.0; sh_count(l_max)];
    for (i, x) in grid.nodes().iter().enumerate() {
        let wv = grid.weights()[i] * values[i];
        let basis = BasisPoint::new(x, l_max);
        for l in 0..=l_max {
            for m in -(l as i64)..=(l as i64) {
                coeffs[sh_index(l, m)] += wv * basis.value(l, m);
            }
        }
    }
    SphericalField::from_coeffs(l_max, coeffs)
}

/// Evaluates a band-limited field at every node.
pub fn sh_synthesis(field: &SphericalField, grid: &FramedGrid) -> Result<Vec<f64>> {
    check_degree(field.l_max.min(field.effective_degree()), grid)?;
    Ok(grid.sample(|x| field.value_at(x)))
}

/// Value of the basis function `Yₗᵐ` at a unit vector.
pub fn real_harmonic(l: usize, m: i64, x: &Vector3<f64>) -> f64 {
    BasisPoint::new(x, l).value(l, m)
}
