//! Forward models F, their Riesz gradients, and Lipschitz bounds.
//!
//! Three tracking-type models are provided: a 1D deconvolution benchmark,
//! a 2D convection-diffusion PDE benchmark, and a quadratic toy model.
//! Gradients follow the first-discretize-then-optimize principle: they
//! are exact adjoints of the discretized forward map, represented
//! cellwise with the convention `(g, v)_{L2} = sum_cells volume * g_i * v_i`.

mod conv1d;
mod linsolve;
mod pde2d;
mod quadratic;

pub use conv1d::{Conv1dModel, DEFAULT_TAU};
pub use linsolve::BandMatrix;
pub use pde2d::{Pde2dCoefficients, Pde2dModel, DEFAULT_C2, DEFAULT_EPS};
pub use quadratic::QuadraticModel;

use std::sync::Arc;

use crate::control::ControlField;
use crate::error::Result;
use crate::grid::Grid;

/// Cellwise Riesz representative of a model gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    grid: Arc<Grid>,
    g: Vec<f64>,
}

impl GradientField {
    pub fn new(grid: Arc<Grid>, g: Vec<f64>) -> Result<GradientField> {
        if g.len() != grid.n_cells() {
            return Err(crate::error::Error::InvalidArgument(format!(
                "gradient has {} entries but grid has {} cells",
                g.len(),
                grid.n_cells()
            )));
        }
        if let Some(v) = g.iter().find(|v| !v.is_finite()) {
            return Err(crate::error::Error::InvalidArgument(format!(
                "gradient contains non-finite entry {v}"
            )));
        }
        Ok(GradientField { grid, g })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.g
    }

    #[inline]
    pub fn value(&self, cell: usize) -> f64 {
        self.g[cell]
    }

    /// `(g, v)_{L2}` for a cellwise direction `v`.
    pub fn inner(&self, v: &[f64]) -> f64 {
        let vol = self.grid.cell_volume();
        self.g.iter().zip(v).map(|(g, v)| g * v).sum::<f64>() * vol
    }
}

/// One of the supported forward models.
#[derive(Debug)]
pub enum Model {
    Conv1d(Conv1dModel),
    Pde2d(Pde2dModel),
    Quadratic(QuadraticModel),
}

impl Model {
    pub fn grid(&self) -> &Arc<Grid> {
        match self {
            Model::Conv1d(m) => m.grid(),
            Model::Pde2d(m) => m.grid(),
            Model::Quadratic(m) => m.grid(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Model::Conv1d(_) => "conv1d",
            Model::Pde2d(_) => "pde2d",
            Model::Quadratic(_) => "quadratic",
        }
    }

    /// F(w) for a feasible integer control.
    pub fn objective(&self, w: &ControlField) -> Result<f64> {
        self.objective_real(&w.to_real())
    }

    /// F on a real-valued (relaxed) cellwise control. Used by the
    /// finite-difference gradient checks.
    pub fn objective_real(&self, w: &[f64]) -> Result<f64> {
        match self {
            Model::Conv1d(m) => m.objective_real(w),
            Model::Pde2d(m) => m.objective_real(w),
            Model::Quadratic(m) => m.objective_real(w),
        }
    }

    pub fn gradient(&self, w: &ControlField) -> Result<GradientField> {
        let g = self.gradient_real(&w.to_real())?;
        GradientField::new(self.grid().clone(), g)
    }

    pub fn gradient_real(&self, w: &[f64]) -> Result<Vec<f64>> {
        match self {
            Model::Conv1d(m) => m.gradient_real(w),
            Model::Pde2d(m) => m.gradient_real(w),
            Model::Quadratic(m) => m.gradient_real(w),
        }
    }

    /// Upper bound on the Lipschitz constant of the gradient map from
    /// L1 controls to L-infinity gradients.
    pub fn lipschitz_bound(&self) -> Result<f64> {
        match self {
            Model::Conv1d(m) => m.lipschitz_bound(),
            Model::Pde2d(m) => m.lipschitz_bound(),
            Model::Quadratic(m) => Ok(m.lipschitz_bound()),
        }
    }
}

/// The composite objective J(w) = F(w) + alpha * TV(w).
///
/// TV is carried in integer jump units so the TV part of J is a single
/// multiplication, never an accumulated float sum.
pub struct Objective<'a> {
    pub model: &'a Model,
    pub alpha: f64,
}

/// Value of J at a point, split into its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub j: f64,
    pub f: f64,
    pub tv_units: i64,
    pub tv: f64,
}

impl<'a> Objective<'a> {
    pub fn new(model: &'a Model, alpha: f64) -> Objective<'a> {
        Objective { model, alpha }
    }

    pub fn eval(&self, w: &ControlField) -> Result<ObjectiveValue> {
        let f = self.model.objective(w)?;
        let tv_units = w.tv_units();
        let tv = tv_units as f64 * w.grid().interface_measure();
        Ok(ObjectiveValue {
            j: f + self.alpha * tv,
            f,
            tv_units,
            tv,
        })
    }
}

/// Relative error of the central finite-difference check of `(g, v)` at
/// a point `w` along direction `v`, with step `eps`.
pub fn gradient_fd_error(model: &Model, w: &[f64], v: &[f64], eps: f64) -> Result<f64> {
    let g = model.gradient_real(w)?;
    let vol = model.grid().cell_volume();
    let inner: f64 = g.iter().zip(v).map(|(g, v)| g * v).sum::<f64>() * vol;

    let wp: Vec<f64> = w.iter().zip(v).map(|(w, v)| w + eps * v).collect();
    let wm: Vec<f64> = w.iter().zip(v).map(|(w, v)| w - eps * v).collect();
    let fd = (model.objective_real(&wp)? - model.objective_real(&wm)?) / (2.0 * eps);
    Ok((inner - fd).abs() / inner.abs().max(1.0))
}
