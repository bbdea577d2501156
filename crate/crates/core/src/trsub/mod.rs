//! Exact solvers for the patch trust-region subproblem: minimize the
//! linearized objective plus the TV change over integer fields that
//! agree with the base iterate outside the patch and stay inside an L1
//! ball around it.
//!
//! Since admissible values are integers and every cell has the same
//! volume, the L1 constraint is an integer budget: a trial may spend at
//! most `floor(radius / cell_volume)` unit changes. All solvers work on
//! that discrete budget, so feasibility is exact.
//!
//! Solver lineup:
//! - [`solve_dp_1d`]: layered-DAG dynamic program for contiguous 1D
//!   patches, globally optimal.
//! - [`solve_dfs_2d`]: depth-first search with pruning for small 2D
//!   patches (default cap 25 cells), globally optimal.
//! - [`solve_profile_2d`]: scanline profile dynamic program for
//!   rectangular 2D patches beyond the DFS cap, globally optimal.
//! - [`solve_bruteforce`]: budget-filtered exhaustive enumeration,
//!   the reference oracle for the others.

mod brute;
mod dfs2d;
mod dp1d;
mod profile2d;

pub use brute::solve_bruteforce;
pub use dfs2d::solve_dfs_2d;
pub use dp1d::solve_dp_1d;
pub use profile2d::solve_profile_2d;

use crate::control::{ControlField, ValueSet};
use crate::error::{Error, Result};
use crate::model::GradientField;
use crate::patches::Patch;

/// Default cell cap for the 2D depth-first solver.
pub const DEFAULT_DFS_CELL_CAP: usize = 25;

/// One instance of the patch trust-region subproblem.
#[derive(Debug, Clone)]
pub struct TrustRegionSubproblem {
    pub base: ControlField,
    pub grad: GradientField,
    pub patch: Patch,
    /// L1 trust-region radius (volume times value units).
    pub radius: f64,
    pub alpha: f64,
    pub values: ValueSet,
}

/// A solved subproblem: the trial field, its predicted reduction, the
/// actual reduction once evaluated, and the (refinement level, patch)
/// key it was tabulated under.
#[derive(Debug, Clone)]
pub struct CandidateStep {
    pub trial: ControlField,
    pub pred: f64,
    pub ared: Option<f64>,
    pub key: (u32, usize),
}

/// Work counters reported by the solvers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub dp_states: u64,
    pub dfs_nodes: u64,
}

impl TrustRegionSubproblem {
    pub fn validate(&self) -> Result<()> {
        if !self.base.grid().same_geometry(self.grad.grid()) {
            return Err(Error::GridMismatch(
                "subproblem base and gradient grids differ".into(),
            ));
        }
        if !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(Error::InvalidArgument("trust-region radius must be > 0".into()));
        }
        if self.alpha < 0.0 {
            return Err(Error::InvalidArgument("alpha must be >= 0".into()));
        }
        Ok(())
    }

    /// The integer unit budget of the L1 ball: the largest `u` with
    /// `u * cell_volume <= radius`, capped at the largest spend the
    /// patch could possibly make.
    pub fn budget_units(&self) -> u64 {
        let vol = self.base.grid().cell_volume();
        let cap = self.patch.n_cells() as u64 * self.values.range() as u64;
        let mut u = (self.radius / vol).floor().max(0.0) as u64;
        u = u.min(cap);
        while u < cap && (u + 1) as f64 * vol <= self.radius {
            u += 1;
        }
        while u > 0 && u as f64 * vol > self.radius {
            u -= 1;
        }
        u
    }

    /// Predicted reduction of a trial: `(g, base - trial)_{L2}` plus
    /// `alpha * (TV(base) - TV(trial))`. Only interfaces touching the
    /// patch are summed; the exterior TV cancels exactly because the
    /// trial agrees with the base there.
    pub fn pred_of(&self, trial: &ControlField) -> Result<f64> {
        if !self.base.grid().same_geometry(trial.grid()) {
            return Err(Error::GridMismatch("trial lives on a different grid".into()));
        }
        let grid = self.base.grid();
        for cell in 0..grid.n_cells() {
            if !self.patch.contains_cell(cell, grid) && trial.value(cell) != self.base.value(cell)
            {
                return Err(Error::InvalidArgument(format!(
                    "trial differs from the base outside the patch (cell {cell})"
                )));
            }
        }
        let vol = grid.cell_volume();
        let linear: f64 = self
            .patch
            .cells
            .iter()
            .map(|&c| {
                vol * self.grad.value(c) * (self.base.value(c) as f64 - trial.value(c) as f64)
            })
            .sum();
        let touching: Vec<usize> = self.patch.touching_interfaces().collect();
        let units_base = self.base.tv_restricted_units(&touching)?;
        let units_trial = trial.tv_restricted_units(&touching)?;
        Ok(linear + self.alpha * grid.interface_measure() * (units_base - units_trial) as f64)
    }

    /// The zero step: trial equals the base, predicted reduction exactly 0.
    pub fn zero_step(&self) -> CandidateStep {
        CandidateStep {
            trial: self.base.clone(),
            pred: 0.0,
            ared: None,
            key: (0, self.patch.id),
        }
    }

    /// TV units of the base over the interfaces touching the patch.
    pub(crate) fn base_touching_units(&self) -> i64 {
        let touching: Vec<usize> = self.patch.touching_interfaces().collect();
        self.base
            .tv_restricted_units(&touching)
            .expect("patch interfaces are valid for the grid")
    }
}

/// Shared epilogue of the exact solvers: rebuild the trial field from
/// patch values, enforce feasibility post-hoc, and recompute the
/// predicted reduction from scratch. A trial that is not strictly better
/// than staying put collapses to the zero step, which keeps `pred >= 0`
/// exact.
pub(crate) fn finish(
    sub: &TrustRegionSubproblem,
    patch_values: &[i32],
    key_hint: usize,
) -> Result<CandidateStep> {
    debug_assert_eq!(patch_values.len(), sub.patch.n_cells());
    for v in patch_values {
        if !sub.values.contains(*v) {
            return Err(Error::SolverFailure(format!(
                "solver produced inadmissible value {v}"
            )));
        }
    }
    let mut values = sub.base.values().to_vec();
    for (local, &cell) in sub.patch.cells.iter().enumerate() {
        values[cell] = patch_values[local];
    }
    let trial = ControlField::from_values_unchecked(sub.base.grid().clone(), values);

    let spent = sub.base.l1_units(&trial)? as u64;
    if spent > sub.budget_units() {
        return Err(Error::SolverFailure(format!(
            "solver exceeded the trust-region budget ({spent} > {} units)",
            sub.budget_units()
        )));
    }

    let pred = sub.pred_of(&trial)?;
    if pred <= 0.0 {
        return Ok(sub.zero_step());
    }
    Ok(CandidateStep {
        trial,
        pred,
        ared: None,
        key: (0, key_hint),
    })
}

/// Dispatches to the appropriate exact solver: the 1D dynamic program,
/// the 2D depth-first search up to `dfs_cell_cap` cells, and the 2D
/// profile dynamic program beyond it.
pub fn solve_auto(
    sub: &TrustRegionSubproblem,
    dfs_cell_cap: usize,
) -> Result<(CandidateStep, SolverStats)> {
    match sub.base.grid().dim() {
        1 => solve_dp_1d(sub),
        2 => {
            if sub.patch.n_cells() <= dfs_cell_cap {
                solve_dfs_2d(sub, dfs_cell_cap)
            } else {
                solve_profile_2d(sub)
            }
        }
        d => Err(Error::InvalidArgument(format!("unsupported dimension {d}"))),
    }
}
