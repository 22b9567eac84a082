//! Numerical tools for the mixed Christoffel problem on S²: find a convex
//! body `Ω` whose mixed area measure with fixed bodies `Ω₁, …, Ω_{n−1}` has a
//! prescribed density `f`. In support-function form this is the linear
//! elliptic equation `Σ a_ij (u_ij + δ_ij u) = f`, where `a_ij` is the mixed
//! cofactor matrix of the fixed bodies' inverse Weingarten forms.
//!
//! - [`sphere`]: Gauss–Legendre grids with tangent frames, real spherical harmonics.
//! - [`jets`]: derivatives of 1-homogeneous extensions, closed-form scalar fields.
//! - [`algebra`]: mixed discriminants, mixed cofactors, `σ_k`.
//! - [`bodies`]: a catalog of convex bodies and their inverse Weingarten forms.
//! - [`solver`]: spectral least-squares collocation for `u`.
//! - [`conditions`]: sufficient conditions for a positive definite solution.
//! - [`diagnostics`]: rank profiles, densities, mixed-volume pairings.
//! - [`runner`]: JSON-configured experiments behind the `mixchris` binary.
//!
//! Each area has a runnable example under `examples/`:
//! `christoffel_ball`, `spectral_operator`, `mixed_discriminants`,
//! `ellipsoid_roundtrip`, `sufficient_conditions`, `perturbation_bound`,
//! `convexity_implication`, `mixed_area_measure`, `minkowski_identity`,
//! `rank_profile`.

pub mod algebra;
pub mod bodies;
pub mod conditions;
pub mod diagnostics;
pub mod error;
pub mod jets;
pub mod runner;
pub mod solver;
pub mod sphere;

pub use error::{Error, Result};
