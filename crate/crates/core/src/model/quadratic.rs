//! Quadratic toy model: F(w) = 1/2 ||w - w_target||^2 in L2.
//!
//! Cell-separable, with analytic gradient g = w - w_target. Mainly used
//! to exercise the driver on instances with known optima.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug)]
pub struct QuadraticModel {
    grid: Arc<Grid>,
    target: Vec<f64>,
}

impl QuadraticModel {
    pub fn new(grid: Arc<Grid>, target: Vec<f64>) -> Result<QuadraticModel> {
        if target.len() != grid.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "target has {} entries but grid has {} cells",
                target.len(),
                grid.n_cells()
            )));
        }
        Ok(QuadraticModel { grid, target })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn objective_real(&self, w: &[f64]) -> Result<f64> {
        self.check_len(w)?;
        let vol = self.grid.cell_volume();
        Ok(0.5
            * vol
            * w.iter()
                .zip(&self.target)
                .map(|(w, t)| (w - t) * (w - t))
                .sum::<f64>())
    }

    pub fn gradient_real(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w)?;
        Ok(w.iter().zip(&self.target).map(|(w, t)| w - t).collect())
    }

    /// g = identity on controls, so the L1-to-Linf Lipschitz constant is
    /// 1 / cell_volume.
    pub fn lipschitz_bound(&self) -> f64 {
        1.0 / self.grid.cell_volume()
    }

    fn check_len(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.grid.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "control has {} entries but grid has {} cells",
                w.len(),
                self.grid.n_cells()
            )));
        }
        Ok(())
    }
}
