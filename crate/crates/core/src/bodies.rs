//! Catalog of smooth convex bodies given by their support functions, their
//! inverse Weingarten forms, and tangential tensor fields built from them.

use nalgebra::{Matrix2, Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{adj_2x2, min_eig_2x2};
use crate::error::{Error, Result};
use crate::jets::{frame_block, Jet, SphereFunction};
use crate::sphere::{tangent_projector, FramedGrid, Geodesic, SphericalField};

/// A convex body described by its support function.
///
/// JSON form: `{"variant": "ellipsoid", "q": [1.0, 1.1, 1.2]}`, etc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum BodySpec {
    Ball { r: f64 },
    TranslatedBall { r: f64, v: [f64; 3] },
    /// Semiaxes `q`; support `√(Σ qᵢ² xᵢ²)`.
    Ellipsoid { q: [f64; 3] },
    /// Support `c + ψ`, with `ψ` free of degrees 0 and 1.
    HarmonicPerturbation { c: f64, psi: SphericalField },
    MinkowskiSum { parts: Vec<WeightedBody> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedBody {
    pub body: BodySpec,
    pub weight: f64,
}

impl BodySpec {
    pub fn ball(r: f64) -> Self {
        BodySpec::Ball { r }
    }

    pub fn ellipsoid(q1: f64, q2: f64, q3: f64) -> Self {
        BodySpec::Ellipsoid { q: [q1, q2, q3] }
    }

    pub fn perturbation(c: f64, psi: SphericalField) -> Self {
        BodySpec::HarmonicPerturbation { c, psi }
    }

    /// Checks parameter ranges. This does not check positivity of the
    /// Weingarten form; see [`is_c2plus`].
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            BodySpec::Ball { r } if !(*r > 0.0) => bad(format!("ball radius {r} must be positive")),
            BodySpec::TranslatedBall { r, v } => {
                let norm = Vector3::from(*v).norm();
                if !(*r > 0.0) || norm >= *r {
                    bad(format!("translated ball needs r > 0 and |v| < r (r = {r}, |v| = {norm})"))
                } else {
                    Ok(())
                }
            }
            BodySpec::Ellipsoid { q } if q.iter().any(|&a| !(a > 0.0)) => {
                bad(format!("ellipsoid semiaxes {q:?} must be positive"))
            }
            BodySpec::HarmonicPerturbation { c, psi } => {
                if !(*c > 0.0) {
                    return bad(format!("perturbation constant {c} must be positive"));
                }
                match psi.lowest_degree() {
                    Some(l) if l < 2 => bad(format!(
                        "perturbation carries a degree-{l} component; only degrees >= 2 are allowed"
                    )),
                    _ => Ok(()),
                }
            }
            BodySpec::MinkowskiSum { parts } => {
                if parts.is_empty() {
                    return bad("empty Minkowski sum".into());
                }
                for p in parts {
                    if !(p.weight > 0.0) {
                        return bad(format!("Minkowski weight {} must be positive", p.weight));
                    }
                    p.body.validate()?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Support function at the unit vector `x`.
    pub fn support(&self, x: &Vector3<f64>) -> f64 {
        match self {
            BodySpec::Ball { r } => *r,
            BodySpec::TranslatedBall { r, v } => r + Vector3::from(*v).dot(x),
            BodySpec::Ellipsoid { q } => ellipsoid_quadratic(q, x).sqrt(),
            BodySpec::HarmonicPerturbation { c, psi } => c + psi.value_at(x),
            BodySpec::MinkowskiSum { parts } => {
                parts.iter().map(|p| p.weight * p.body.support(x)).sum()
            }
        }
    }

    /// Closed-form jet of the 1-homogeneous support function at unit `x`.
    pub fn jet(&self, x: &Vector3<f64>) -> Jet {
        match self {
            BodySpec::Ball { r } => Jet {
                value: *r,
                grad: x * *r,
                hess: tangent_projector(x) * *r,
            },
            BodySpec::TranslatedBall { r, v } => Jet {
                value: r + Vector3::from(*v).dot(x),
                grad: x * *r + Vector3::from(*v),
                hess: tangent_projector(x) * *r,
            },
            BodySpec::Ellipsoid { q } => {
                let qq = Matrix3::from_diagonal(&Vector3::new(q[0] * q[0], q[1] * q[1], q[2] * q[2]));
                let g = ellipsoid_quadratic(q, x).sqrt();
                let qx = qq * x;
                Jet {
                    value: g,
                    grad: qx / g,
                    hess: qq / g - qx * qx.transpose() / (g * g * g),
                }
            }
            BodySpec::HarmonicPerturbation { c, psi } => {
                let j = psi.jet(x);
                Jet {
                    value: c + j.value,
                    grad: j.grad + x * *c,
                    hess: j.hess + tangent_projector(x) * *c,
                }
            }
            BodySpec::MinkowskiSum { parts } => parts.iter().fold(
                Jet {
                    value: 0.0,
                    grad: Vector3::zeros(),
                    hess: Matrix3::zeros(),
                },
                |acc, p| {
                    let j = p.body.jet(x);
                    Jet {
                        value: acc.value + p.weight * j.value,
                        grad: acc.grad + j.grad * p.weight,
                        hess: acc.hess + j.hess * p.weight,
                    }
                },
            ),
        }
    }

    /// Ambient inverse Weingarten operator at unit `x` (tangential, annihilates `x`).
    pub fn weingarten_ambient(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        self.jet(x).hess
    }

    /// Largest harmonic degree of the support function, if band-limited.
    pub fn band_limit(&self) -> Option<usize> {
        match self {
            BodySpec::Ball { .. } => Some(0),
            BodySpec::TranslatedBall { .. } => Some(1),
            BodySpec::Ellipsoid { q } if q[0] == q[1] && q[1] == q[2] => Some(0),
            BodySpec::Ellipsoid { .. } => None,
            BodySpec::HarmonicPerturbation { psi, .. } => Some(psi.effective_degree()),
            BodySpec::MinkowskiSum { parts } => parts
                .iter()
                .map(|p| p.body.band_limit())
                .try_fold(0, |acc, b| b.map(|b| acc.max(b))),
        }
    }
}

fn ellipsoid_quadratic(q: &[f64; 3], x: &Vector3<f64>) -> f64 {
    (q[0] * x.x).powi(2) + (q[1] * x.y).powi(2) + (q[2] * x.z).powi(2)
}

impl SphereFunction for BodySpec {
    fn value(&self, x: &Vector3<f64>) -> f64 {
        self.support(x)
    }

    fn jet(&self, x: &Vector3<f64>) -> Jet {
        BodySpec::jet(self, x)
    }

    fn band_limit(&self) -> Option<usize> {
        BodySpec::band_limit(self)
    }
}

/// A symmetric 2×2 tensor per grid node, in the grid's node frames.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    values: Vec<Matrix2<f64>>,
    frame: FrameConvention,
}

/// Which tangent frames the components of a [`SymTensorField`] refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameConvention {
    /// `e₁ = ∂θ`, `e₂ = ∂φ / sin θ` at each node.
    GridFrames,
}

impl SymTensorField {
    /// Wraps per-node matrices given in the grid frames; each must be
    /// symmetric within `1e-12`.
    pub fn new(values: Vec<Matrix2<f64>>, grid: &FramedGrid) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: values.len(),
            });
        }
        for (i, m) in values.iter().enumerate() {
            let scale = m.amax().max(1.0);
            if (m[(0, 1)] - m[(1, 0)]).abs() > 1e-12 * scale {
                return Err(Error::Domain(format!("tensor at node {i} is not symmetric")));
            }
        }
        Ok(Self {
            values,
            frame: FrameConvention::GridFrames,
        })
    }

    /// Constant field with the same components in every node frame.
    pub fn constant(m: Matrix2<f64>, grid: &FramedGrid) -> Result<Self> {
        Self::new(vec![m; grid.len()], grid)
    }

    pub fn identity(grid: &FramedGrid) -> Self {
        Self {
            values: vec![Matrix2::identity(); grid.len()],
            frame: FrameConvention::GridFrames,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, i: usize) -> &Matrix2<f64> {
        &self.values[i]
    }

    pub fn values(&self) -> &[Matrix2<f64>] {
        &self.values
    }

    pub fn frame_convention(&self) -> FrameConvention {
        self.frame
    }

    pub fn check_grid(&self, grid: &FramedGrid) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: self.len(),
            });
        }
        Ok(())
    }

    /// Smallest eigenvalue at each node.
    pub fn min_eigenvalues(&self) -> Vec<f64> {
        self.values.iter().map(min_eig_2x2).collect()
    }

    /// `(node, λ_min)` of the globally smallest eigenvalue, lowest node on ties.
    pub fn min_eigenvalue(&self) -> (usize, f64) {
        self.min_eigenvalues()
            .into_iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|m| m * a).collect(),
            frame: self.frame,
        }
    }

    pub fn add(&self, other: &SymTensorField) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            frame: self.frame,
        })
    }
}

/// A tangential symmetric tensor field on S², given in ambient form: a
/// symmetric 3×3 matrix at each unit `x` that annihilates `x`. Unlike a
/// [`SymTensorField`] it can be evaluated off the grid, which the condition
/// checkers need for covariant derivatives.
pub trait TensorFunction: Sync {
    fn ambient(&self, x: &Vector3<f64>) -> Matrix3<f64>;

    fn in_frame(&self, x: &Vector3<f64>, frame: &[Vector3<f64>; 2]) -> Matrix2<f64> {
        frame_block(&self.ambient(x), frame)
    }

    /// Components in the grid frames.
    fn sample(&self, grid: &FramedGrid) -> SymTensorField {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| self.in_frame(grid.node(i), grid.frame(i)))
            .collect();
        SymTensorField {
            values,
            frame: FrameConvention::GridFrames,
        }
    }
}

/// `A = I`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTensor;

impl TensorFunction for IdentityTensor {
    fn ambient(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        tangent_projector(x)
    }
}

/// Inverse Weingarten form of a body.
#[derive(Debug, Clone)]
pub struct WeingartenTensor(pub BodySpec);

impl TensorFunction for WeingartenTensor {
    fn ambient(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        self.0.weingarten_ambient(x)
    }
}

/// Scaled mixed cofactor `n·c(W₁,…,W_{n−1})` of the bodies' Weingarten forms.
/// On S² (n = 2) this is the adjugate `tr(W₁) I − W₁` of a single body.
#[derive(Debug, Clone)]
pub struct CofactorTensor {
    body: BodySpec,
}

impl CofactorTensor {
    pub fn new(bodies: &[BodySpec]) -> Result<Self> {
        match bodies {
            [b] => Ok(Self { body: b.clone() }),
            _ => Err(Error::Dimension {
                expected: 1,
                found: bodies.len(),
            }),
        }
    }

    pub fn body(&self) -> &BodySpec {
        &self.body
    }
}

impl TensorFunction for CofactorTensor {
    fn ambient(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        let w = self.body.weingarten_ambient(x);
        tangent_projector(x) * w.trace() - w
    }

    fn in_frame(&self, x: &Vector3<f64>, frame: &[Vector3<f64>; 2]) -> Matrix2<f64> {
        adj_2x2(&frame_block(&self.body.weingarten_ambient(x), frame))
    }
}

/// `λ(x)·A(x)` for a positive scalar field `λ`.
pub struct ScaledTensor<S, T> {
    pub scale: S,
    pub inner: T,
}

impl<S: SphereFunction, T: TensorFunction> TensorFunction for ScaledTensor<S, T> {
    fn ambient(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        self.inner.ambient(x) * self.scale.value(x)
    }
}

/// `P (I + Σₖ hₖ(x) Sₖ) P` for scalar fields `hₖ` and constant symmetric
/// `Sₖ`: smooth, frame-free perturbations of the identity.
#[derive(Debug, Clone, Default)]
pub struct PerturbedIdentity {
    pub terms: Vec<(SphericalField, Matrix3<f64>)>,
}

impl TensorFunction for PerturbedIdentity {
    fn ambient(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        let mut m = Matrix3::identity();
        for (h, s) in &self.terms {
            m += (s + s.transpose()) * (0.5 * h.value_at(x));
        }
        let p = tangent_projector(x);
        p * m * p
    }
}

/// Inverse Weingarten form of `g` in the grid frames. Refuses band-limited
/// inputs above the grid's analysis degree.
pub fn weingarten_form<G: SphereFunction + ?Sized>(g: &G, grid: &FramedGrid) -> Result<SymTensorField> {
    if let Some(l) = g.band_limit() {
        if l > grid.max_analysis_degree() {
            return Err(Error::Aliasing {
                degree: l,
                max_allowed: grid.max_analysis_degree(),
            });
        }
    }
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| g.jet(grid.node(i)).in_frame(grid.frame(i)))
        .collect();
    Ok(SymTensorField {
        values,
        frame: FrameConvention::GridFrames,
    })
}

/// Minimum over the grid of the smallest eigenvalue of `W`; the body is
/// C^{2,+} on this grid iff it exceeds `tol`.
pub fn is_c2plus(body: &BodySpec, grid: &FramedGrid, tol: f64) -> (bool, f64) {
    let min = (0..grid.len())
        .into_par_iter()
        .map(|i| min_eig_2x2(&body.jet(grid.node(i)).in_frame(grid.frame(i))))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    (min > tol, min)
}

/// Covariant derivative `w_{ij,k}` of the Weingarten form at `x` in `frame`,
/// by differencing `W(γ(t))[Eᵢ(t), Eⱼ(t)]` along the geodesic in direction
/// `e_k` with parallel-transported `Eᵢ`. Indexed `[i][j][k]`.
pub fn weingarten_derivative(
    body: &BodySpec,
    x: &Vector3<f64>,
    frame: &[Vector3<f64>; 2],
) -> [[[f64; 2]; 2]; 2] {
    const H: f64 = 1e-3;
    let mut out = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        let geo = Geodesic::new(x, &frame[k]);
        let entries = |t: f64| {
            let w = body.weingarten_ambient(&geo.point(t));
            let e = [geo.transport(&frame[0], t), geo.transport(&frame[1], t)];
            frame_block(&w, &e)
        };
        let d = |h: f64| (entries(h) - entries(-h)) / (2.0 * h);
        let coarse = d(H);
        let fine = d(0.5 * H);
        let m = (fine * 4.0 - coarse) / 3.0;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j][k] = m[(i, j)];
            }
        }
    }
    out
}

/// Largest Codazzi defect `|w_{ij,k} − w_{ik,j}|` over the grid, together
/// with the largest `|∇W|` (Frobenius norm of the derivative array).
pub fn codazzi_defect(body: &BodySpec, grid: &FramedGrid) -> (f64, f64) {
    let per_node: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let d = weingarten_derivative(body, grid.node(n), grid.frame(n));
            let mut defect: f64 = 0.0;
            let mut norm2 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        defect = defect.max((d[i][j][k] - d[i][k][j]).abs());
                        norm2 += d[i][j][k] * d[i][j][k];
                    }
                }
            }
            (defect, norm2.sqrt())
        })
        .collect();
    per_node
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (d, n)| (f64::max(a, d), f64::max(b, n)))
}

/// Estimate of `‖ψ‖_{C⁴}`: the largest of `|ψ|, |ψ′|, …, |ψ⁗|` along great
/// circles through every node in `n_dirs` directions. Along a great circle a
/// degree-`L` field is a trigonometric polynomial of degree `L`, so the
/// derivatives are computed exactly from `2L + 1` samples.
pub fn c4_norm_estimate(psi: &SphericalField, grid: &FramedGrid, n_dirs: usize) -> f64 {
    let l = psi.effective_degree();
    let m = 2 * l + 1;
    let angles: Vec<f64> = (0..n_dirs)
        .map(|k| std::f64::consts::PI * k as f64 / n_dirs as f64)
        .collect();
    let per_node: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let x = grid.node(n);
            let mut best: f64 = 0.0;
            for &a in &angles {
                let fr = grid.rotated_frame(n, a);
                let geo = Geodesic::new(x, &fr[0]);
                let samples: Vec<f64> = (0..m)
                    .map(|j| psi.value_at(&geo.point(2.0 * std::f64::consts::PI * j as f64 / m as f64)))
                    .collect();
                for d in trig_derivatives_at_zero(&samples, l) {
                    best = best.max(d.abs());
                }
            }
            best
        })
        .collect();
    per_node.into_iter().fold(0.0, f64::max)
}

/// Derivatives of orders 0..=4 at `t = 0` of the trigonometric polynomial of
/// degree `l` interpolating `samples` at `2πj/m`, `m = 2l + 1`.
fn trig_derivatives_at_zero(samples: &[f64], l: usize) -> [f64; 5] {
    let m = samples.len() as f64;
    let mut out = [0.0; 5];
    for k in 0..=l {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, &s) in samples.iter().enumerate() {
            let (sn, cs) = (2.0 * std::f64::consts::PI * (k * j) as f64 / m).sin_cos();
            a += s * cs;
            b += s * sn;
        }
        let scale = if k == 0 { 1.0 / m } else { 2.0 / m };
        a *= scale;
        b *= scale;
        let kf = k as f64;
        // a cos kt + b sin kt
        out[0] += a;
        out[1] += kf * b;
        out[2] -= kf * kf * a;
        out[3] -= kf.powi(3) * b;
        out[4] += kf.powi(4) * a;
    }
    out
}
