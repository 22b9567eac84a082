use nalgebra::{SVector, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre × equiangular quadrature grid on S², with one orthonormal
/// tangent frame per node.
///
/// Nodes are stored colatitude-major: node `i * n_phi + j` sits at the `i`-th
/// Gauss colatitude (ascending) and longitude `2πj / n_phi`.
#[derive(Debug, Clone)]
pub struct FramedGrid {
    n_theta: usize,
    n_phi: usize,
    nodes: Vec<Vector3<f64>>,
    weights: Vec<f64>,
    frames: Vec<[Vector3<f64>; 2]>,
    theta: Vec<f64>,
    phi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<FramedGrid> {
        build_grid(self.n_theta, self.n_phi)
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1], nodes
/// in descending order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Builds the framed quadrature grid. Frames follow the fixed rule
/// `e₁ = ∂/∂θ`, `e₂ = ∂/∂φ / sin θ`; Gauss nodes never hit the poles.
pub fn build_grid(n_theta: usize, n_phi: usize) -> Result<FramedGrid> {
    if n_theta < 4 || n_phi < 8 {
        return Err(Error::Config(format!(
            "grid {n_theta}x{n_phi} is below the minimum 4x8"
        )));
    }
    let (z, wz) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let count = n_theta * n_phi;
    let mut grid = FramedGrid {
        n_theta,
        n_phi,
        nodes: Vec::with_capacity(count),
        weights: Vec::with_capacity(count),
        frames: Vec::with_capacity(count),
        theta: Vec::with_capacity(count),
        phi: Vec::with_capacity(count),
    };
    for (&zi, &wi) in z.iter().zip(&wz) {
        let theta = zi.acos();
        let sin_t = (1.0 - zi * zi).sqrt();
        for j in 0..n_phi {
            let phi = dphi * j as f64;
            let (sp, cp) = phi.sin_cos();
            grid.nodes.push(Vector3::new(sin_t * cp, sin_t * sp, zi));
            grid.weights.push(wi * dphi);
            grid.frames.push([
                Vector3::new(zi * cp, zi * sp, -sin_t),
                Vector3::new(-sp, cp, 0.0),
            ]);
            grid.theta.push(theta);
            grid.phi.push(phi);
        }
    }
    Ok(grid)
}

impl FramedGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            n_theta: self.n_theta,
            n_phi: self.n_phi,
        }
    }

    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn frames(&self) -> &[[Vector3<f64>; 2]] {
        &self.frames
    }

    pub fn node(&self, i: usize) -> &Vector3<f64> {
        &self.nodes[i]
    }

    pub fn frame(&self, i: usize) -> &[Vector3<f64>; 2] {
        &self.frames[i]
    }

    /// Colatitude and longitude of node `i`.
    pub fn angles(&self, i: usize) -> (f64, f64) {
        (self.theta[i], self.phi[i])
    }

    /// Largest harmonic degree integrated exactly: `2·n_theta − 1` in
    /// colatitude, `n_phi − 1` in longitude.
    pub fn exactness_degree(&self) -> usize {
        (2 * self.n_theta - 1).min(self.n_phi - 1)
    }

    /// Largest degree a band-limited field may carry for analysis to be
    /// alias-free (products of two such fields stay within exactness).
    pub fn max_analysis_degree(&self) -> usize {
        self.exactness_degree() / 2
    }

    /// Largest degree for which the collocation basis stays unisolvent on
    /// the node set.
    pub fn max_collocation_degree(&self) -> usize {
        self.n_theta.min(self.n_phi / 2)
    }

    /// Σ wᵢ vᵢ in node order.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: values.len(),
            });
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// Samples a function at every node.
    pub fn sample<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&Vector3<f64>) -> f64,
    {
        self.nodes.iter().map(f).collect()
    }

    /// Frame at node `i` rotated by `angle` within the tangent plane.
    pub fn rotated_frame(&self, i: usize, angle: f64) -> [Vector3<f64>; 2] {
        rotate_frame(&self.frames[i], angle)
    }
}

pub fn rotate_frame(frame: &[Vector3<f64>; 2], angle: f64) -> [Vector3<f64>; 2] {
    let (s, c) = angle.sin_cos();
    [
        frame[0] * c + frame[1] * s,
        frame[1] * c - frame[0] * s,
    ]
}

/// Projector onto the tangent plane at unit `x`.
pub fn tangent_projector(x: &Vector3<f64>) -> nalgebra::Matrix3<f64> {
    nalgebra::Matrix3::identity() - x * x.transpose()
}

/// Some orthonormal tangent frame at unit `x`, defined everywhere including
/// the poles. Used where only frame-invariant quantities are needed.
pub fn any_tangent_frame(x: &Vector3<f64>) -> [Vector3<f64>; 2] {
    let helper = if x.x.abs() <= x.y.abs() && x.x.abs() <= x.z.abs() {
        Vector3::x()
    } else if x.y.abs() <= x.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = (helper - x * x.dot(&helper)).normalize();
    let e2 = x.cross(&e1);
    [e1, e2]
}

/// Point at arclength `t` along the great circle leaving `x` in the unit
/// tangent direction `alpha`.
pub fn great_circle_point<const D: usize>(
    x: &SVector<f64, D>,
    alpha: &SVector<f64, D>,
    t: f64,
) -> Result<SVector<f64, D>> {
    if (x.norm() - 1.0).abs() > 1e-12 || (alpha.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Geometry(
            "great-circle base point and direction must be unit vectors".into(),
        ));
    }
    if x.dot(alpha).abs() > 1e-12 {
        return Err(Error::Geometry(format!(
            "direction is not tangent: <x, alpha> = {:e}",
            x.dot(alpha)
        )));
    }
    let (s, c) = t.sin_cos();
    Ok(x * c + alpha * s)
}

/// Geodesic through `x` with unit tangent `d`, and a tangent vector `v` at
/// `x` parallel-transported to arclength `t`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Geodesic {
    x: Vector3<f64>,
    d: Vector3<f64>,
    b: Vector3<f64>,
}

impl Geodesic {
    pub(crate) fn new(x: &Vector3<f64>, d: &Vector3<f64>) -> Self {
        Self {
            x: *x,
            d: *d,
            b: x.cross(d),
        }
    }

    pub(crate) fn point(&self, t: f64) -> Vector3<f64> {
        let (s, c) = t.sin_cos();
        self.x * c + self.d * s
    }

    pub(crate) fn velocity(&self, t: f64) -> Vector3<f64> {
        let (s, c) = t.sin_cos();
        self.d * c - self.x * s
    }

    pub(crate) fn transport(&self, v: &Vector3<f64>, t: f64) -> Vector3<f64> {
        self.velocity(t) * v.dot(&self.d) + self.b * v.dot(&self.b)
    }
}
