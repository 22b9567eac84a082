//! Scalar functions on the sphere and the derivatives of their 1-homogeneous
//! extensions `G(p) = |p|·g(p/|p|)`.
//!
//! At a unit point `x` the Euclidean Hessian of `G` annihilates `x` and its
//! tangential block is `g_ij + g δ_ij`, the inverse Weingarten operator of
//! `g`. Every quantity in this crate that involves second covariant
//! derivatives goes through that identity.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::bodies::BodySpec;
use crate::error::{Error, Result};
use crate::sphere::{tangent_projector, CartesianJet, SphericalField};

/// Value, gradient and Hessian of the 1-homogeneous extension at a unit point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vector3<f64>,
    pub hess: Matrix3<f64>,
}

impl Jet {
    /// Tangential Hessian block in the frame `(e₁, e₂)`.
    pub fn in_frame(&self, frame: &[Vector3<f64>; 2]) -> nalgebra::Matrix2<f64> {
        frame_block(&self.hess, frame)
    }

    /// Value, covariant gradient and covariant Hessian of `g` itself in the
    /// frame `(e₁, e₂)` at `x`.
    pub fn covariant(
        &self,
        x: &Vector3<f64>,
        frame: &[Vector3<f64>; 2],
    ) -> (f64, nalgebra::Vector2<f64>, nalgebra::Matrix2<f64>) {
        let s = self.to_surface(x);
        (
            s.value,
            nalgebra::Vector2::new(frame[0].dot(&s.grad), frame[1].dot(&s.grad)),
            frame_block(&s.hess, frame),
        )
    }

    fn to_surface(self, x: &Vector3<f64>) -> SurfaceJet {
        SurfaceJet {
            value: self.value,
            grad: self.grad - x * self.value,
            hess: self.hess - tangent_projector(x) * self.value,
        }
    }
}

/// `Eᵀ M E` for a frame `E = (e₁, e₂)`.
pub fn frame_block(m: &Matrix3<f64>, frame: &[Vector3<f64>; 2]) -> nalgebra::Matrix2<f64> {
    let a = frame[0].dot(&(m * frame[0]));
    let b = frame[0].dot(&(m * frame[1]));
    let c = frame[1].dot(&(m * frame[0]));
    let d = frame[1].dot(&(m * frame[1]));
    nalgebra::Matrix2::new(a, 0.5 * (b + c), 0.5 * (b + c), d)
}

/// `E B Eᵀ`, the ambient form of a tangential tensor given in a frame.
pub fn from_frame_block(b: &nalgebra::Matrix2<f64>, frame: &[Vector3<f64>; 2]) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m += frame[i] * frame[j].transpose() * b[(i, j)];
        }
    }
    m
}

/// Value, covariant gradient and covariant Hessian on the sphere, stored as
/// ambient tangential objects. Product and quotient rules hold verbatim.
#[derive(Debug, Clone, Copy)]
struct SurfaceJet {
    value: f64,
    grad: Vector3<f64>,
    hess: Matrix3<f64>,
}

impl SurfaceJet {
    fn to_homog(self, x: &Vector3<f64>) -> Jet {
        Jet {
            value: self.value,
            grad: self.grad + x * self.value,
            hess: self.hess + tangent_projector(x) * self.value,
        }
    }

    fn mul(self, o: SurfaceJet) -> SurfaceJet {
        SurfaceJet {
            value: self.value * o.value,
            grad: o.grad * self.value + self.grad * o.value,
            hess: o.hess * self.value
                + self.hess * o.value
                + self.grad * o.grad.transpose()
                + o.grad * self.grad.transpose(),
        }
    }

    fn recip(self) -> SurfaceJet {
        let g = self.value;
        SurfaceJet {
            value: 1.0 / g,
            grad: -self.grad / (g * g),
            hess: -self.hess / (g * g) + self.grad * self.grad.transpose() * (2.0 / (g * g * g)),
        }
    }
}

/// Jet of the 1-homogeneous extension from a Cartesian jet of any smooth
/// extension `F` of `g`: `∇G = g x + P∇F`, `D²G = P D²F P + (F − x·∇F) P`.
pub fn homog_jet_from_cartesian(x: &Vector3<f64>, cj: &CartesianJet) -> Jet {
    let p = tangent_projector(x);
    let radial = cj.value - x.dot(&cj.grad);
    Jet {
        value: cj.value,
        grad: x * cj.value + p * cj.grad,
        hess: p * cj.hess * p + p * radial,
    }
}

/// Jet of `1/g` from the jet of `g`.
pub fn reciprocal_jet(x: &Vector3<f64>, j: &Jet) -> Jet {
    j.to_surface(x).recip().to_homog(x)
}

/// Jet of `a·b`.
pub fn product_jet(x: &Vector3<f64>, a: &Jet, b: &Jet) -> Jet {
    a.to_surface(x).mul(b.to_surface(x)).to_homog(x)
}

/// A scalar function on the unit sphere.
pub trait SphereFunction: Sync {
    fn value(&self, x: &Vector3<f64>) -> f64;

    /// Derivatives of the 1-homogeneous extension at the unit point `x`.
    /// Defaults to finite differences of [`SphereFunction::value`].
    fn jet(&self, x: &Vector3<f64>) -> Jet {
        fd_jet(self, x)
    }

    /// Harmonic band limit, when the function is band-limited.
    fn band_limit(&self) -> Option<usize> {
        None
    }
}

impl SphereFunction for SphericalField {
    fn value(&self, x: &Vector3<f64>) -> f64 {
        self.value_at(x)
    }

    fn jet(&self, x: &Vector3<f64>) -> Jet {
        homog_jet_from_cartesian(x, &self.cartesian_jet(x))
    }

    fn band_limit(&self) -> Option<usize> {
        Some(self.effective_degree())
    }
}

/// Wraps a closure; derivatives come from finite differences.
pub struct FnField<F>(pub F);

impl<F> SphereFunction for FnField<F>
where
    F: Fn(&Vector3<f64>) -> f64 + Sync,
{
    fn value(&self, x: &Vector3<f64>) -> f64 {
        (self.0)(x)
    }
}

fn extension_value<G: SphereFunction + ?Sized>(g: &G, p: &Vector3<f64>) -> f64 {
    let r = p.norm();
    r * g.value(&(p / r))
}

fn richardson1(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

const FD_STEP_LOW: f64 = 1e-3;
const FD_STEP_HIGH: f64 = 1e-2;

/// Euclidean Hessian of the extension at `p` from values only: central
/// differences with step `1e-3·|p|` and one Richardson level.
pub fn fd_hessian<G: SphereFunction + ?Sized>(g: &G, p: &Vector3<f64>) -> Matrix3<f64> {
    let h = FD_STEP_LOW * p.norm();
    let at = |h: f64| {
        let mut m = Matrix3::zeros();
        let g0 = extension_value(g, p);
        for k in 0..3 {
            let ek = Vector3::ith(k, h);
            m[(k, k)] = (extension_value(g, &(p + ek)) - 2.0 * g0 + extension_value(g, &(p - ek)))
                / (h * h);
            for l in (k + 1)..3 {
                let el = Vector3::ith(l, h);
                let v = (extension_value(g, &(p + ek + el))
                    - extension_value(g, &(p + ek - el))
                    - extension_value(g, &(p - ek + el))
                    + extension_value(g, &(p - ek - el)))
                    / (4.0 * h * h);
                m[(k, l)] = v;
                m[(l, k)] = v;
            }
        }
        m
    };
    let coarse = at(h);
    let fine = at(0.5 * h);
    (fine * 4.0 - coarse) / 3.0
}

fn fd_gradient<G: SphereFunction + ?Sized>(g: &G, p: &Vector3<f64>) -> Vector3<f64> {
    let h = FD_STEP_LOW * p.norm();
    let at = |h: f64| {
        Vector3::from_fn(|k, _| {
            let ek = Vector3::ith(k, h);
            (extension_value(g, &(p + ek)) - extension_value(g, &(p - ek))) / (2.0 * h)
        })
    };
    let coarse = at(h);
    let fine = at(0.5 * h);
    Vector3::from_fn(|k, _| richardson1(coarse[k], fine[k]))
}

/// Finite-difference jet used by [`SphereFunction::jet`]'s default.
pub fn fd_jet<G: SphereFunction + ?Sized>(g: &G, x: &Vector3<f64>) -> Jet {
    Jet {
        value: g.value(x),
        grad: fd_gradient(g, x),
        hess: fd_hessian(g, x),
    }
}

/// Euclidean derivative tensors of the 1-homogeneous extension at `p`.
///
/// `third[k]` is `∂ₖ D²G`; `fourth[k][l]` is `∂ₖ∂ₗ D²G`.
#[derive(Debug, Clone)]
pub struct ExtensionDerivatives {
    pub value: f64,
    pub gradient: Option<Vector3<f64>>,
    pub hessian: Option<Matrix3<f64>>,
    pub third: Option<[Matrix3<f64>; 3]>,
    pub fourth: Option<[[Matrix3<f64>; 3]; 3]>,
}

fn hessian_at<G: SphereFunction + ?Sized>(g: &G, p: &Vector3<f64>) -> Matrix3<f64> {
    let r = p.norm();
    g.jet(&(p / r)).hess / r
}

/// Two-level Richardson extrapolation of an even-order difference quotient
/// evaluated at steps `h`, `h/2`, `h/4`.
fn richardson2(d: [Matrix3<f64>; 3]) -> Matrix3<f64> {
    let r1 = (d[1] * 4.0 - d[0]) / 3.0;
    let r2 = (d[2] * 4.0 - d[1]) / 3.0;
    (r2 * 16.0 - r1) / 15.0
}

/// Derivatives of `G(p) = |p| g(p/|p|)` up to `order` (≤ 4). Orders ≤ 2 come
/// from the function's jet; orders 3 and 4 differentiate the Hessian with
/// step `1e-2·|p|` and two Richardson levels.
pub fn homog_ext_derivs<G: SphereFunction + ?Sized>(
    g: &G,
    p: &Vector3<f64>,
    order: usize,
) -> Result<ExtensionDerivatives> {
    let r = p.norm();
    if r < 1e-6 {
        return Err(Error::Domain(format!(
            "extension derivatives requested at |p| = {r:e} < 1e-6"
        )));
    }
    if order > 4 {
        return Err(Error::Domain(format!("derivative order {order} > 4")));
    }
    let x = p / r;
    let mut out = ExtensionDerivatives {
        value: r * g.value(&x),
        gradient: None,
        hessian: None,
        third: None,
        fourth: None,
    };
    if order >= 1 {
        let jet = g.jet(&x);
        out.gradient = Some(jet.grad);
        if order >= 2 {
            out.hessian = Some(jet.hess / r);
        }
    }
    let h0 = FD_STEP_HIGH * r;
    if order >= 3 {
        let mut third = [Matrix3::zeros(); 3];
        for (k, t) in third.iter_mut().enumerate() {
            let d = [h0, 0.5 * h0, 0.25 * h0].map(|h| {
                let e = Vector3::ith(k, h);
                (hessian_at(g, &(p + e)) - hessian_at(g, &(p - e))) / (2.0 * h)
            });
            *t = richardson2(d);
        }
        out.third = Some(third);
    }
    if order >= 4 {
        let h_center = hessian_at(g, p);
        let mut fourth = [[Matrix3::zeros(); 3]; 3];
        for k in 0..3 {
            for l in k..3 {
                let d = [h0, 0.5 * h0, 0.25 * h0].map(|h| {
                    let ek = Vector3::ith(k, h);
                    if k == l {
                        (hessian_at(g, &(p + ek)) - h_center * 2.0 + hessian_at(g, &(p - ek)))
                            / (h * h)
                    } else {
                        let el = Vector3::ith(l, h);
                        (hessian_at(g, &(p + ek + el))
                            - hessian_at(g, &(p + ek - el))
                            - hessian_at(g, &(p - ek + el))
                            + hessian_at(g, &(p - ek - el)))
                            / (4.0 * h * h)
                    }
                });
                fourth[k][l] = richardson2(d);
                fourth[l][k] = fourth[k][l];
            }
        }
        out.fourth = Some(fourth);
    }
    Ok(out)
}

/// Closed-form scalar fields used for densities and test data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarField {
    Const { value: f64 },
    /// `⟨v, x⟩`.
    Linear { v: [f64; 3] },
    Harmonic { terms: SphericalField },
    Sum { terms: Vec<ScalarField> },
    Product { factors: Vec<ScalarField> },
    Reciprocal { of: Box<ScalarField> },
    Scaled { factor: f64, of: Box<ScalarField> },
    /// Support function of a body.
    Support { body: BodySpec },
}

impl ScalarField {
    pub fn constant(value: f64) -> Self {
        ScalarField::Const { value }
    }

    pub fn harmonic(field: SphericalField) -> Self {
        ScalarField::Harmonic { terms: field }
    }

    pub fn reciprocal(of: ScalarField) -> Self {
        ScalarField::Reciprocal { of: Box::new(of) }
    }

    pub fn sum(terms: Vec<ScalarField>) -> Self {
        ScalarField::Sum { terms }
    }

    /// `1 + ε·Pₗ(x₃)`.
    pub fn one_plus_zonal(l: usize, eps: f64) -> Self {
        Self::sum(vec![
            Self::constant(1.0),
            Self::harmonic(SphericalField::zonal_legendre(l, eps)),
        ])
    }

    fn surface_jet(&self, x: &Vector3<f64>) -> SurfaceJet {
        match self {
            ScalarField::Reciprocal { of } => of.surface_jet(x).recip(),
            ScalarField::Product { factors } => factors.iter().fold(
                SurfaceJet {
                    value: 1.0,
                    grad: Vector3::zeros(),
                    hess: Matrix3::zeros(),
                },
                |acc, f| acc.mul(f.surface_jet(x)),
            ),
            other => other.jet(x).to_surface(x),
        }
    }
}

impl SphereFunction for ScalarField {
    fn value(&self, x: &Vector3<f64>) -> f64 {
        match self {
            ScalarField::Const { value } => *value,
            ScalarField::Linear { v } => Vector3::from(*v).dot(x),
            ScalarField::Harmonic { terms } => terms.value_at(x),
            ScalarField::Sum { terms } => terms.iter().map(|t| t.value(x)).sum(),
            ScalarField::Product { factors } => factors.iter().map(|t| t.value(x)).product(),
            ScalarField::Reciprocal { of } => 1.0 / of.value(x),
            ScalarField::Scaled { factor, of } => factor * of.value(x),
            ScalarField::Support { body } => body.support(x),
        }
    }

    fn jet(&self, x: &Vector3<f64>) -> Jet {
        match self {
            ScalarField::Const { value } => Jet {
                value: *value,
                grad: x * *value,
                hess: tangent_projector(x) * *value,
            },
            ScalarField::Linear { v } => {
                let v = Vector3::from(*v);
                Jet {
                    value: v.dot(x),
                    grad: v,
                    hess: Matrix3::zeros(),
                }
            }
            ScalarField::Harmonic { terms } => terms.jet(x),
            ScalarField::Sum { terms } => terms.iter().fold(
                Jet {
                    value: 0.0,
                    grad: Vector3::zeros(),
                    hess: Matrix3::zeros(),
                },
                |acc, t| {
                    let j = t.jet(x);
                    Jet {
                        value: acc.value + j.value,
                        grad: acc.grad + j.grad,
                        hess: acc.hess + j.hess,
                    }
                },
            ),
            ScalarField::Scaled { factor, of } => {
                let j = of.jet(x);
                Jet {
                    value: factor * j.value,
                    grad: j.grad * *factor,
                    hess: j.hess * *factor,
                }
            }
            ScalarField::Support { body } => body.jet(x),
            ScalarField::Product { .. } | ScalarField::Reciprocal { .. } => {
                self.surface_jet(x).to_homog(x)
            }
        }
    }

    fn band_limit(&self) -> Option<usize> {
        match self {
            ScalarField::Const { .. } => Some(0),
            ScalarField::Linear { .. } => Some(1),
            ScalarField::Harmonic { terms } => Some(terms.effective_degree()),
            ScalarField::Sum { terms } => terms
                .iter()
                .map(|t| t.band_limit())
                .try_fold(0, |acc, b| b.map(|b| acc.max(b))),
            ScalarField::Scaled { of, .. } => of.band_limit(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hessian_of_norm_at_pole() {
        let one = ScalarField::constant(1.0);
        let d = homog_ext_derivs(&one, &Vector3::z(), 2).unwrap();
        let h = d.hessian.unwrap();
        assert_abs_diff_eq!(h, Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0)), epsilon = 1e-15);
    }

    #[test]
    fn linear_extension_has_zero_hessian() {
        let lin = ScalarField::Linear { v: [0.3, -0.2, 0.5] };
        let x = Vector3::new(1.0, 2.0, 2.0).normalize();
        assert_abs_diff_eq!(lin.jet(&x).hess, Matrix3::zeros(), epsilon = 0.0);
        // the finite-difference path agrees
        let fd = fd_hessian(&FnField(|y: &Vector3<f64>| 0.3 * y.x - 0.2 * y.y + 0.5 * y.z), &x);
        assert_abs_diff_eq!(fd, Matrix3::zeros(), epsilon = 1e-8);
    }

    #[test]
    fn reciprocal_jet_matches_finite_differences() {
        let f = ScalarField::reciprocal(ScalarField::one_plus_zonal(2, 0.3));
        let x = Vector3::new(0.3, -0.5, 0.8).normalize();
        let closed = f.jet(&x);
        let fd = fd_jet(&f, &x);
        assert_abs_diff_eq!(closed.value, fd.value, epsilon = 1e-14);
        assert_abs_diff_eq!(closed.grad, fd.grad, epsilon = 1e-9);
        assert_abs_diff_eq!(closed.hess, fd.hess, epsilon = 1e-8);
    }

    #[test]
    fn product_jet_matches_finite_differences() {
        let f = ScalarField::Product {
            factors: vec![
                ScalarField::one_plus_zonal(3, 0.2),
                ScalarField::harmonic(SphericalField::single(2, -1, 0.4)),
            ],
        };
        let x = Vector3::new(-0.1, 0.7, 0.2).normalize();
        assert_abs_diff_eq!(f.jet(&x).hess, fd_jet(&f, &x).hess, epsilon = 1e-8);
    }

    #[test]
    fn third_and_fourth_derivatives_of_norm() {
        let one = ScalarField::constant(1.0);
        let p = Vector3::new(0.2, -0.4, 0.9);
        let d = homog_ext_derivs(&one, &p, 4).unwrap();
        let r = p.norm();
        let u = p / r;
        for k in 0..3 {
            let ek = Vector3::ith(k, 1.0);
            // D³|p|[e_k] = -(u_k I + e_k uᵀ + u e_kᵀ - 3 u_k u uᵀ)/r²
            let expected = -(Matrix3::identity() * u[k] + ek * u.transpose() + u * ek.transpose()
                - u * u.transpose() * (3.0 * u[k]))
                / (r * r);
            assert_abs_diff_eq!(d.third.unwrap()[k], expected, epsilon = 1e-9);
        }
        // fourth: compare against differences of the closed-form third
        let fourth = d.fourth.unwrap();
        for k in 0..3 {
            for l in 0..3 {
                assert_abs_diff_eq!(fourth[k][l], fourth[l][k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn refuses_origin_and_high_order() {
        let one = ScalarField::constant(1.0);
        assert!(homog_ext_derivs(&one, &Vector3::new(1e-7, 0.0, 0.0), 2).is_err());
        assert!(homog_ext_derivs(&one, &Vector3::z(), 5).is_err());
    }
}
