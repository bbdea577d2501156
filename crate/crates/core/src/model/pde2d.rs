//! 2D convection-diffusion benchmark on the unit square.
//!
//! State equation: `-eps * lap(u) + c1 . grad(u) + c2 * u * w = f` with
//! Dirichlet data on the left, right and bottom edges (a sine profile on
//! the middle section of the bottom) and a homogeneous Neumann condition
//! on the top edge.
//!
//! Discretization: vertex-centered finite differences on the (N+1)^2
//! nodes of the control grid, 5-point Laplacian, and per-node per-axis
//! convection that switches from central to first-order upwind when the
//! local cell Peclet number `|c| h / eps` exceeds 2 (which keeps the
//! matrix an M-matrix). The control is piecewise constant per cell; a
//! node takes the value of the cell whose closed box contains it, ties
//! toward the lower multi-index.
//!
//! The tracking target `u_d` solves a variant of the same PDE with a
//! rotated convection field and a fixed real-valued control, so the
//! objective stays comfortably away from zero. Gradients are exact
//! discrete adjoints (first-discretize-then-optimize).

use std::sync::{Arc, OnceLock};

use crate::control::ValueSet;
use crate::error::{Error, Result};
use crate::grid::Grid;

use super::linsolve::BandMatrix;

pub const DEFAULT_EPS: f64 = 4e-2;
pub const DEFAULT_C2: f64 = 2.0;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Coefficient functions of one PDE instance. Plain function pointers so
/// problem data stays hashable-by-eye and trivially deterministic.
#[derive(Clone, Copy)]
pub struct Pde2dCoefficients {
    pub eps: f64,
    pub c2: f64,
    pub convection: fn(f64, f64) -> [f64; 2],
    pub source: fn(f64, f64) -> f64,
    /// Dirichlet value on the bottom edge as a function of x; the left
    /// and right edges are homogeneous.
    pub bottom_bc: fn(f64) -> f64,
}

impl std::fmt::Debug for Pde2dCoefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pde2dCoefficients")
            .field("eps", &self.eps)
            .field("c2", &self.c2)
            .finish()
    }
}

fn benchmark_convection(x: f64, y: f64) -> [f64; 2] {
    [(std::f64::consts::PI * x).sin(), (TWO_PI * y).cos()]
}

fn variant_convection(x: f64, y: f64) -> [f64; 2] {
    [-y, 2.0 * x]
}

fn benchmark_source(x: f64, y: f64) -> f64 {
    (TWO_PI * x + TWO_PI * y).sin() + 3.0
}

fn benchmark_bottom_bc(x: f64) -> f64 {
    if x > 0.25 && x < 0.75 {
        (TWO_PI * (x - 0.25)).sin()
    } else {
        0.0
    }
}

impl Pde2dCoefficients {
    pub fn benchmark(eps: f64, c2: f64) -> Pde2dCoefficients {
        Pde2dCoefficients {
            eps,
            c2,
            convection: benchmark_convection,
            source: benchmark_source,
            bottom_bc: benchmark_bottom_bc,
        }
    }

    /// Variant used only to manufacture the tracking target.
    pub fn target_variant(eps: f64, c2: f64) -> Pde2dCoefficients {
        Pde2dCoefficients {
            convection: variant_convection,
            ..Self::benchmark(eps, c2)
        }
    }
}

/// The real-valued control that generates the tracking target, evaluated
/// pointwise.
pub fn target_control_value(x: f64, y: f64) -> f64 {
    if x < 0.35 && y < 0.35 {
        2.5 - 4.0 * (x - 0.35).powi(3)
    } else {
        -6.0 * (y - 0.35).powi(3)
    }
}

#[derive(Debug)]
pub struct Pde2dModel {
    grid: Arc<Grid>,
    coeff: Pde2dCoefficients,
    /// Nodes per axis = cells per axis + 1.
    nn: [usize; 2],
    /// Cell feeding each node's control value.
    node_cell: Vec<usize>,
    /// Trapezoid quadrature weight per node.
    mass: Vec<f64>,
    /// Cached tracking target.
    ud: Vec<f64>,
    /// Value set used for Lipschitz-bound sampling.
    values: ValueSet,
    lipschitz: OnceLock<f64>,
}

impl Pde2dModel {
    /// Builds the standard benchmark on an N x N grid over the unit square.
    pub fn new(grid: Arc<Grid>, eps: f64, c2: f64, values: ValueSet) -> Result<Pde2dModel> {
        Self::with_coefficients(grid, Pde2dCoefficients::benchmark(eps, c2), values)
    }

    pub fn with_coefficients(
        grid: Arc<Grid>,
        coeff: Pde2dCoefficients,
        values: ValueSet,
    ) -> Result<Pde2dModel> {
        if grid.dim() != 2 {
            return Err(Error::InvalidArgument("pde2d requires a 2D grid".into()));
        }
        let unit = grid.lower() == [0.0, 0.0] && grid.upper() == [1.0, 1.0];
        if !unit {
            return Err(Error::InvalidArgument(
                "pde2d benchmark is defined on the domain (0,1)^2".into(),
            ));
        }
        if !coeff.eps.is_finite() || coeff.eps <= 0.0 {
            return Err(Error::InvalidArgument("eps must be > 0".into()));
        }
        let nn = [grid.n()[0] + 1, grid.n()[1] + 1];
        let n_nodes = nn[0] * nn[1];

        let mut node_cell = Vec::with_capacity(n_nodes);
        for j in 0..nn[1] {
            for i in 0..nn[0] {
                let cx = i.saturating_sub(1).min(grid.n()[0] - 1);
                let cy = j.saturating_sub(1).min(grid.n()[1] - 1);
                node_cell.push(grid.flat(cx, cy));
            }
        }

        let h = grid.spacing(0);
        let wq = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 * h } else { h };
        let mut mass = Vec::with_capacity(n_nodes);
        for j in 0..nn[1] {
            for i in 0..nn[0] {
                mass.push(wq(i, nn[0]) * wq(j, nn[1]));
            }
        }

        let mut model = Pde2dModel {
            grid,
            coeff,
            nn,
            node_cell,
            mass,
            ud: Vec::new(),
            values,
            lipschitz: OnceLock::new(),
        };

        // target: variant convection, fixed real control sampled at cell
        // centers
        let target_coeff = Pde2dCoefficients {
            convection: variant_convection,
            ..coeff
        };
        let w_target: Vec<f64> = (0..model.grid.n_cells())
            .map(|c| {
                let p = model.grid.cell_center(c);
                target_control_value(p[0], p[1])
            })
            .collect();
        model.ud = model.solve_with(&target_coeff, &w_target)?;
        Ok(model)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn n_nodes(&self) -> usize {
        self.nn[0] * self.nn[1]
    }

    pub fn nodes_per_axis(&self) -> [usize; 2] {
        self.nn
    }

    /// The cached tracking target, one value per node.
    pub fn target_state(&self) -> &[f64] {
        &self.ud
    }

    pub fn node_coords(&self, node: usize) -> [f64; 2] {
        let h = self.grid.spacing(0);
        let i = node % self.nn[0];
        let j = node / self.nn[0];
        [i as f64 * h, j as f64 * h]
    }

    fn is_dirichlet(&self, i: usize, j: usize) -> bool {
        i == 0 || i == self.nn[0] - 1 || j == 0
    }

    fn dirichlet_value(&self, i: usize, j: usize) -> f64 {
        let h = self.grid.spacing(0);
        if j == 0 && i != 0 && i != self.nn[0] - 1 {
            (self.coeff.bottom_bc)(i as f64 * h)
        } else {
            0.0
        }
    }

    /// Assembles the system for cellwise control `w` under the model's
    /// own coefficients and solves it.
    pub fn solve_state(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w)?;
        self.solve_with(&self.coeff, w)
    }

    fn assemble(&self, coeff: &Pde2dCoefficients, w: &[f64]) -> (BandMatrix, Vec<f64>) {
        let (nx, ny) = (self.nn[0], self.nn[1]);
        let n = nx * ny;
        let h = self.grid.spacing(0);
        let band = nx;
        let mut a = BandMatrix::new(n, band, band);
        let mut b = vec![0.0; n];
        let eps = coeff.eps;

        for j in 0..ny {
            for i in 0..nx {
                let row = j * nx + i;
                if self.is_dirichlet(i, j) {
                    a.set(row, row, 1.0);
                    b[row] = self.dirichlet_value(i, j);
                    continue;
                }
                let x = i as f64 * h;
                let y = j as f64 * h;
                let top = j == ny - 1;

                // 5-point Laplacian, mirror ghost across the top edge
                a.add(row, row, 4.0 * eps / (h * h));
                a.add(row, row - 1, -eps / (h * h));
                a.add(row, row + 1, -eps / (h * h));
                if top {
                    a.add(row, row - nx, -2.0 * eps / (h * h));
                } else {
                    a.add(row, row - nx, -eps / (h * h));
                    a.add(row, row + nx, -eps / (h * h));
                }

                let [cx, cy] = (coeff.convection)(x, y);

                // x convection
                if cx != 0.0 {
                    if cx.abs() * h / eps > 2.0 {
                        if cx > 0.0 {
                            a.add(row, row, cx / h);
                            a.add(row, row - 1, -cx / h);
                        } else {
                            a.add(row, row + 1, cx / h);
                            a.add(row, row, -cx / h);
                        }
                    } else {
                        a.add(row, row + 1, cx / (2.0 * h));
                        a.add(row, row - 1, -cx / (2.0 * h));
                    }
                }

                // y convection; the mirrored ghost cancels the central
                // difference at the top
                if cy != 0.0 {
                    if cy.abs() * h / eps > 2.0 {
                        if cy > 0.0 {
                            a.add(row, row, cy / h);
                            a.add(row, row - nx, -cy / h);
                        } else if top {
                            a.add(row, row - nx, cy / h);
                            a.add(row, row, -cy / h);
                        } else {
                            a.add(row, row + nx, cy / h);
                            a.add(row, row, -cy / h);
                        }
                    } else if !top {
                        a.add(row, row + nx, cy / (2.0 * h));
                        a.add(row, row - nx, -cy / (2.0 * h));
                    }
                }

                // reaction with the cellwise control
                a.add(row, row, coeff.c2 * w[self.node_cell[row]]);
                b[row] = (coeff.source)(x, y);
            }
        }
        (a, b)
    }

    fn solve_with(&self, coeff: &Pde2dCoefficients, w: &[f64]) -> Result<Vec<f64>> {
        let (a, b) = self.assemble(coeff, w);
        solve_checked(&a, &b)
    }

    fn adjoint_with(&self, coeff: &Pde2dCoefficients, w: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
        let (a, _) = self.assemble(coeff, w);
        let lu = a.factor()?;
        let p = lu.solve_transpose(rhs);
        let r = a.matvec_transpose(&p);
        let num: f64 = r.iter().zip(rhs).map(|(r, b)| (r - b) * (r - b)).sum::<f64>();
        let den: f64 = rhs.iter().map(|b| b * b).sum::<f64>();
        if num.sqrt() > 1e-10 * den.sqrt().max(1e-300) {
            return Err(Error::SolverFailure(format!(
                "adjoint solve residual {:.3e} above 1e-10 relative",
                num.sqrt() / den.sqrt().max(1e-300)
            )));
        }
        Ok(p)
    }

    pub fn objective_real(&self, w: &[f64]) -> Result<f64> {
        let u = self.solve_state(w)?;
        Ok(0.5
            * u.iter()
                .zip(&self.ud)
                .zip(&self.mass)
                .map(|((u, ud), m)| m * (u - ud) * (u - ud))
                .sum::<f64>())
    }

    pub fn gradient_real(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_len(w)?;
        let u = self.solve_with(&self.coeff, w)?;
        let rhs: Vec<f64> = u
            .iter()
            .zip(&self.ud)
            .zip(&self.mass)
            .map(|((u, ud), m)| m * (u - ud))
            .collect();
        let p = self.adjoint_with(&self.coeff, w, &rhs)?;

        let vol = self.grid.cell_volume();
        let mut g = vec![0.0; self.grid.n_cells()];
        let nx = self.nn[0];
        for (node, cell) in self.node_cell.iter().enumerate() {
            let (i, j) = (node % nx, node / nx);
            if self.is_dirichlet(i, j) {
                continue;
            }
            g[*cell] -= self.coeff.c2 * u[node] * p[node];
        }
        for gc in &mut g {
            *gc /= vol;
        }
        Ok(g)
    }

    /// Sampled upper bound on the L1-to-Linf Lipschitz constant of the
    /// gradient map. No closed form is available here, so the bound is
    /// estimated from feasible samples and doubled: the estimate takes
    /// the larger of the sampled sup of ||grad F(w)||_inf and sampled
    /// single-cell difference quotients
    /// `||grad F(w') - grad F(w)||_inf / ||w' - w||_L1`, which dominate
    /// the ratio because of the small L1 denominator.
    pub fn lipschitz_bound(&self) -> Result<f64> {
        if let Some(l) = self.lipschitz.get() {
            return Ok(*l);
        }
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = self.grid.n_cells();
        let vol = self.grid.cell_volume();
        let vals = self.values.values();
        let mut bases: Vec<Vec<f64>> = vals.iter().map(|&v| vec![v as f64; n]).collect();
        for _ in 0..4 {
            bases.push((0..n).map(|_| vals[rng.gen_range(0..vals.len())] as f64).collect());
        }

        let mut estimate = 0.0f64;
        // cells probed for single flips: a deterministic spread plus a
        // few random draws
        let stride = (n / 12).max(1);
        let mut probe_cells: Vec<usize> = (0..n).step_by(stride).collect();
        for _ in 0..4 {
            probe_cells.push(rng.gen_range(0..n));
        }

        for w in &bases {
            let g = self.gradient_real(w)?;
            estimate = estimate.max(g.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            for &c in &probe_cells {
                let cur = w[c] as i64;
                let flipped = vals
                    .iter()
                    .map(|&v| v as i64)
                    .filter(|&v| v != cur)
                    .min_by_key(|&v| (v - cur).abs());
                let Some(next) = flipped else { continue };
                let mut w2 = w.clone();
                w2[c] = next as f64;
                let g2 = self.gradient_real(&w2)?;
                let dinf = g
                    .iter()
                    .zip(&g2)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                let l1 = vol * (next - cur).abs() as f64;
                estimate = estimate.max(dinf / l1);
            }
        }
        let l = 2.0 * estimate;
        let _ = self.lipschitz.set(l);
        Ok(l)
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

/// Direct banded solve with a residual check and one refinement step.
fn solve_checked(a: &BandMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let lu = a.factor()?;
    let mut x = lu.solve(b);
    let rel_residual = |x: &[f64]| {
        let r = a.matvec(x);
        let num: f64 = r.iter().zip(b).map(|(r, b)| (r - b) * (r - b)).sum();
        let den: f64 = b.iter().map(|b| b * b).sum();
        (num.sqrt(), den.sqrt().max(1e-300))
    };
    let (num, den) = rel_residual(&x);
    if num > 1e-10 * den {
        // one step of iterative refinement
        let r = a.matvec(&x);
        let d: Vec<f64> = r.iter().zip(b).map(|(r, b)| r - b).collect();
        let corr = lu.solve(&d);
        for (xi, c) in x.iter_mut().zip(&corr) {
            *xi -= c;
        }
        let (num, den) = rel_residual(&x);
        if num > 1e-10 * den {
            return Err(Error::SolverFailure(format!(
                "state solve residual {:.3e} above 1e-10 relative",
                num / den
            )));
        }
    }
    Ok(x)
}
