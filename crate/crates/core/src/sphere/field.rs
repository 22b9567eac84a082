use serde::{Deserialize, Serialize};

use super::grid::FramedGrid;
use crate::error::{Error, Result};

/// Values of a scalar function at the nodes of one grid.
///
/// Unlike [`super::SphericalField`] this carries no band limit; it holds
/// node samples of arbitrary (e.g. operator-generated) data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalField {
    values: Vec<f64>,
}

impl NodalField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn for_grid(values: Vec<f64>, grid: &FramedGrid) -> Result<Self> {
        let field = Self { values };
        field.check_grid(grid)?;
        Ok(field)
    }

    pub fn check_grid(&self, grid: &FramedGrid) -> Result<()> {
        if self.values.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                found: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.values.iter().map(|v| f(*v)).collect())
    }

    /// Weighted L² norm on the sphere.
    pub fn l2_norm(&self, grid: &FramedGrid) -> Result<f64> {
        self.check_grid(grid)?;
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        Ok(grid.integrate(&sq)?.sqrt())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Weighted L² norm of the difference.
    pub fn l2_distance(&self, other: &NodalField, grid: &FramedGrid) -> Result<f64> {
        other.check_grid(grid)?;
        let diff = NodalField::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        );
        diff.l2_norm(grid)
    }
}

/// Σ wᵢ gᵢ over the grid.
pub fn quadrature(g: &NodalField, grid: &FramedGrid) -> Result<f64> {
    grid.integrate(g.values())
}
