//! Depth-first search with pruning for small 2D patches.
//!
//! Cells are assigned in row-major order with values tried ascending.
//! The running cost covers the linear terms of assigned cells plus the
//! TV of interfaces whose values are settled (both endpoints assigned,
//! or one endpoint fixed outside the patch). The lower bound adds, for
//! every unassigned cell, the best linear term reachable within the
//! remaining budget; unsettled interface TV is nonnegative and ignored.
//! Pruning on `bound >= incumbent` keeps the first-found optimum, so
//! results are deterministic.

use crate::error::{Error, Result};

use super::{finish, CandidateStep, SolverStats, TrustRegionSubproblem};

struct Search<'a> {
    m: usize,
    budget: i64,
    /// linear[i][mi]
    linear: &'a [Vec<f64>],
    /// units[i][mi]
    units: &'a [Vec<i64>],
    /// settled TV cost of assigning value mi to local cell i given the
    /// current partial assignment is resolved through these lists:
    /// earlier in-patch neighbors of i (local indices)
    earlier: &'a [Vec<usize>],
    /// base values of out-of-patch neighbors of i
    fixed_nb: &'a [Vec<i64>],
    vals_i64: &'a [i64],
    alpha_meas: f64,
    /// best_linear[u][i]: sum over cells j >= i of the cheapest linear
    /// term reachable with per-cell budget u
    suffix_best: &'a [Vec<f64>],
    max_unit: i64,
    incumbent: f64,
    best_assign: Vec<usize>,
    nodes: u64,
}

impl Search<'_> {
    fn run(&mut self, assign: &mut Vec<usize>, depth: usize, used: i64, acc: f64) {
        self.nodes += 1;
        if depth == assign.len() {
            if acc < self.incumbent {
                self.incumbent = acc;
                self.best_assign.copy_from_slice(assign);
            }
            return;
        }
        let rem = (self.budget - used).min(self.max_unit) as usize;
        let bound = acc + self.suffix_best[rem][depth];
        if bound >= self.incumbent {
            return;
        }
        for mi in 0..self.m {
            let u = used + self.units[depth][mi];
            if u > self.budget {
                continue;
            }
            let v = self.vals_i64[mi];
            let mut cost = acc + self.linear[depth][mi];
            for &e in &self.earlier[depth] {
                cost += self.alpha_meas * (v - self.vals_i64[assign[e]]).abs() as f64;
            }
            for &b in &self.fixed_nb[depth] {
                cost += self.alpha_meas * (v - b).abs() as f64;
            }
            assign[depth] = mi;
            self.run(assign, depth + 1, u, cost);
        }
    }
}

pub fn solve_dfs_2d(
    sub: &TrustRegionSubproblem,
    cell_cap: usize,
) -> Result<(CandidateStep, SolverStats)> {
    sub.validate()?;
    let grid = sub.base.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument("solve_dfs_2d requires a 2D grid".into()));
    }
    let cells = &sub.patch.cells;
    let n = cells.len();
    if n == 0 {
        return Ok((sub.zero_step(), SolverStats::default()));
    }
    if n > cell_cap {
        return Err(Error::PatchTooLarge { cells: n, cap: cell_cap });
    }
    let budget = sub.budget_units() as i64;
    if budget == 0 {
        return Ok((sub.zero_step(), SolverStats::default()));
    }

    let vals = sub.values.values();
    let vals_i64: Vec<i64> = vals.iter().map(|&v| v as i64).collect();
    let m = vals.len();
    let vol = grid.cell_volume();
    let alpha_meas = sub.alpha * grid.interface_measure();

    let linear: Vec<Vec<f64>> = cells
        .iter()
        .map(|&c| {
            vals.iter()
                .map(|&v| vol * sub.grad.value(c) * (v as f64 - sub.base.value(c) as f64))
                .collect()
        })
        .collect();
    let units: Vec<Vec<i64>> = cells
        .iter()
        .map(|&c| {
            vals.iter()
                .map(|&v| (v as i64 - sub.base.value(c) as i64).abs())
                .collect()
        })
        .collect();

    let mut local_of = vec![usize::MAX; grid.n_cells()];
    for (l, &c) in cells.iter().enumerate() {
        local_of[c] = l;
    }
    let mut earlier: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut fixed_nb: Vec<Vec<i64>> = vec![Vec::new(); n];
    for (l, &c) in cells.iter().enumerate() {
        for nb in grid.neighbors(c)? {
            let ln = local_of[nb];
            if ln == usize::MAX {
                fixed_nb[l].push(sub.base.value(nb) as i64);
            } else if ln < l {
                earlier[l].push(ln);
            }
        }
    }

    // suffix_best[u][i] = sum_{j >= i} min over values within per-cell
    // budget u of the linear term (0 is always reachable by staying)
    let max_unit = sub.values.range();
    let mut suffix_best = vec![vec![0.0f64; n + 1]; (max_unit + 1) as usize];
    for (u, suffix) in suffix_best.iter_mut().enumerate() {
        for i in (0..n).rev() {
            let mut best = f64::INFINITY;
            for mi in 0..m {
                if units[i][mi] <= u as i64 {
                    best = best.min(linear[i][mi]);
                }
            }
            suffix[i] = best + suffix[i + 1];
        }
    }

    // incumbent: staying at the base costs exactly zero
    let base_assign: Vec<usize> = cells
        .iter()
        .map(|&c| vals.binary_search(&sub.base.value(c)).expect("base feasible"))
        .collect();

    let base_touch = sub.base_touching_units();
    let mut search = Search {
        m,
        budget,
        linear: &linear,
        units: &units,
        earlier: &earlier,
        fixed_nb: &fixed_nb,
        vals_i64: &vals_i64,
        alpha_meas,
        suffix_best: &suffix_best,
        max_unit,
        // the search accumulates linear + settled TV; the base costs
        // alpha * TV_touching(base)
        incumbent: alpha_meas * base_touch as f64,
        best_assign: base_assign,
        nodes: 0,
    };
    let mut assign = vec![0usize; n];
    search.run(&mut assign, 0, 0, 0.0);

    let patch_values: Vec<i32> = search.best_assign.iter().map(|&mi| vals[mi]).collect();
    let nodes = search.nodes;
    let step = finish(sub, &patch_values, sub.patch.id)?;
    Ok((
        step,
        SolverStats {
            dp_states: 0,
            dfs_nodes: nodes,
        },
    ))
}
