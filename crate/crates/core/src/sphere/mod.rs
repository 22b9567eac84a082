//! Discretization of S²: framed quadrature grids, real spherical harmonics,
//! and node-sampled fields.

mod field;
mod grid;
mod harmonics;

pub use field::{quadrature, NodalField};
pub use grid::{
    any_tangent_frame, build_grid, gauss_legendre, great_circle_point, rotate_frame,
    tangent_projector, FramedGrid, GridSpec,
};
pub(crate) use grid::Geodesic;
pub(crate) use harmonics::BasisPoint;
pub use harmonics::{
    real_harmonic, sh_analysis, sh_count, sh_degree_order, sh_index, sh_synthesis,
    CartesianJet, ShTerm, SphericalField,
};
