//! 1D deconvolution benchmark on the interval (-1, 1).
//!
//! The forward map is the causal convolution (k * w)(t) collocated at
//! cell midpoints with a midpoint quadrature per cell, giving a dense
//! strictly lower triangular operator A with
//! `A[m][j] = h * k(t_m - tau_j)` for `tau_j < t_m`. The tracking target
//! is `f(t) = 0.2 cos(2 pi t - 0.25) exp(t)` and
//! `F(w) = 1/2 * h * ||A w - f||^2`.
//!
//! The kernel defaults to `k(s) = exp(-s / tau)` for `s >= 0` (zero
//! otherwise) with `tau = 0.1`; tau is configurable.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::grid::Grid;

pub const DEFAULT_TAU: f64 = 0.1;

#[derive(Debug)]
pub struct Conv1dModel {
    grid: Arc<Grid>,
    tau: f64,
    /// Dense row-major N x N operator, strictly lower triangular.
    a: Vec<f64>,
    /// Target samples at collocation points.
    f: Vec<f64>,
    lipschitz: OnceLock<f64>,
}

/// Paper target for the 1D benchmark.
pub fn conv1d_target(t: f64) -> f64 {
    0.2 * (2.0 * std::f64::consts::PI * t - 0.25).cos() * t.exp()
}

fn kernel(s: f64, tau: f64) -> f64 {
    if s >= 0.0 {
        (-s / tau).exp()
    } else {
        0.0
    }
}

impl Conv1dModel {
    /// Builds the benchmark model with the paper target.
    pub fn new(grid: Arc<Grid>, tau: f64) -> Result<Conv1dModel> {
        let f = (0..grid.n_cells())
            .map(|m| conv1d_target(grid.cell_center(m)[0]))
            .collect();
        Self::with_target(grid, tau, f)
    }

    /// Builds the model with a custom target vector (sampled at cell
    /// midpoints).
    pub fn with_target(grid: Arc<Grid>, tau: f64, f: Vec<f64>) -> Result<Conv1dModel> {
        if grid.dim() != 1 {
            return Err(Error::InvalidArgument("conv1d requires a 1D grid".into()));
        }
        if (grid.lower()[0] - (-1.0)).abs() > 1e-12 || (grid.upper()[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "conv1d benchmark is defined on the domain (-1, 1)".into(),
            ));
        }
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::InvalidArgument("kernel tau must be > 0".into()));
        }
        let n = grid.n_cells();
        if f.len() != n {
            return Err(Error::InvalidArgument("target length must equal cell count".into()));
        }
        let h = grid.cell_volume();
        let mut a = vec![0.0; n * n];
        for m in 0..n {
            let tm = grid.cell_center(m)[0];
            for j in 0..m {
                let tj = grid.cell_center(j)[0];
                a[m * n + j] = h * kernel(tm - tj, tau);
            }
        }
        Ok(Conv1dModel {
            grid,
            tau,
            a,
            f,
            lipschitz: OnceLock::new(),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        let n = self.grid.n_cells();
        let mut out = vec![0.0; n];
        for m in 0..n {
            let row = &self.a[m * n..m * n + m];
            out[m] = row.iter().zip(&w[..m]).map(|(a, w)| a * w).sum();
        }
        out
    }

    fn apply_transpose(&self, r: &[f64]) -> Vec<f64> {
        let n = self.grid.n_cells();
        let mut out = vec![0.0; n];
        for (m, &rm) in r.iter().enumerate() {
            if rm == 0.0 {
                continue;
            }
            let row = &self.a[m * n..m * n + m];
            for (j, a) in row.iter().enumerate() {
                out[j] += a * rm;
            }
        }
        out
    }

    pub fn objective_real(&self, w: &[f64]) -> Result<f64> {
        self.check_len(w)?;
        let h = self.grid.cell_volume();
        let aw = self.apply(w);
        Ok(0.5
            * h
            * aw.iter()
                .zip(&self.f)
                .map(|(a, f)| (a - f) * (a - f))
                .sum::<f64>())
    }

    /// g = A^T (A w - f); with the h-weighted discrete L2 products the
    /// directional derivative of F along v is h * sum_i g_i v_i.
    pub fn gradient_real(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w)?;
        let aw = self.apply(w);
        let r: Vec<f64> = aw.iter().zip(&self.f).map(|(a, f)| a - f).collect();
        Ok(self.apply_transpose(&r))
    }

    /// max_{i,j} |(A^T A)_{ij}| / cell_volume.
    pub fn lipschitz_bound(&self) -> Result<f64> {
        Ok(*self.lipschitz.get_or_init(|| {
            let n = self.grid.n_cells();
            let mut max_abs = 0.0f64;
            // (A^T A)_{ij} = sum_m A_{mi} A_{mj}; A is strictly lower
            // triangular so only m > max(i, j) contributes.
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for m in (j + 1)..n {
                        s += self.a[m * n + i] * self.a[m * n + j];
                    }
                    max_abs = max_abs.max(s.abs());
                }
            }
            max_abs / self.grid.cell_volume()
        }))
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
