//! Budget-filtered exhaustive enumeration, the reference oracle for the
//! production solvers. Evaluates the subproblem objective with its own
//! loops so it shares no bookkeeping with the solution paths it checks.

use crate::error::{Error, Result};

use super::{CandidateStep, SolverStats, TrustRegionSubproblem};

const MAX_CELLS: usize = 16;
const MAX_ASSIGNMENTS: f64 = (1u32 << 24) as f64;

struct Edge {
    a: usize,
    b_local: usize,
    b_fixed: i64,
    fixed: bool,
}

struct Enumerator<'a> {
    vals: &'a [i32],
    budget: i64,
    linear: &'a [Vec<f64>],
    units: &'a [Vec<i64>],
    edges: &'a [Edge],
    alpha_meas: f64,
    base_touch_units: i64,
    best_cost: f64,
    best_assign: Vec<usize>,
    leaves: u64,
}

impl Enumerator<'_> {
    fn recurse(&mut self, depth: usize, used: i64, assign: &mut Vec<usize>) {
        if depth == assign.len() {
            self.leaves += 1;
            let mut cost = 0.0;
            for (i, &mi) in assign.iter().enumerate() {
                cost += self.linear[i][mi];
            }
            let mut tv_units = 0i64;
            for e in self.edges {
                let va = self.vals[assign[e.a]] as i64;
                let vb = if e.fixed {
                    e.b_fixed
                } else {
                    self.vals[assign[e.b_local]] as i64
                };
                tv_units += (va - vb).abs();
            }
            cost += self.alpha_meas * (tv_units - self.base_touch_units) as f64;
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best_assign.copy_from_slice(assign);
            }
            return;
        }
        for mi in 0..self.vals.len() {
            let u = used + self.units[depth][mi];
            if u > self.budget {
                continue;
            }
            assign[depth] = mi;
            self.recurse(depth + 1, u, assign);
        }
    }
}

/// Exhaustively enumerates every budget-feasible assignment of the patch
/// cells. Strict improvement keeps the first-found optimum, so results
/// are deterministic.
pub fn solve_bruteforce(sub: &TrustRegionSubproblem) -> Result<(CandidateStep, SolverStats)> {
    sub.validate()?;
    let n = sub.patch.n_cells();
    if n == 0 {
        return Ok((sub.zero_step(), SolverStats::default()));
    }
    if n > MAX_CELLS {
        return Err(Error::InvalidArgument(format!(
            "brute force capped at {MAX_CELLS} cells, patch has {n}"
        )));
    }
    if (sub.values.len() as f64).powi(n as i32) > MAX_ASSIGNMENTS {
        return Err(Error::InvalidArgument(
            "brute force capped at 2^24 assignments".into(),
        ));
    }

    let grid = sub.base.grid().clone();
    let vol = grid.cell_volume();
    let vals = sub.values.values();
    let cells = &sub.patch.cells;

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
    let mut edges = Vec::new();
    for id in sub.patch.touching_interfaces() {
        let it = grid.interfaces()[id];
        let (la, lb) = (local_of[it.cell_a], local_of[it.cell_b]);
        match (la != usize::MAX, lb != usize::MAX) {
            (true, true) => edges.push(Edge { a: la, b_local: lb, b_fixed: 0, fixed: false }),
            (true, false) => edges.push(Edge {
                a: la,
                b_local: 0,
                b_fixed: sub.base.value(it.cell_b) as i64,
                fixed: true,
            }),
            (false, true) => edges.push(Edge {
                a: lb,
                b_local: 0,
                b_fixed: sub.base.value(it.cell_a) as i64,
                fixed: true,
            }),
            (false, false) => unreachable!("interface does not touch the patch"),
        }
    }

    let base_assign: Vec<usize> = cells
        .iter()
        .map(|&c| vals.binary_search(&sub.base.value(c)).expect("base feasible"))
        .collect();

    let mut en = Enumerator {
        vals,
        budget: sub.budget_units() as i64,
        linear: &linear,
        units: &units,
        edges: &edges,
        alpha_meas: sub.alpha * grid.interface_measure(),
        base_touch_units: sub.base_touching_units(),
        // staying at the base costs exactly zero
        best_cost: 0.0,
        best_assign: base_assign,
        leaves: 0,
    };
    let mut assign = vec![0usize; n];
    en.recurse(0, 0, &mut assign);

    let mut values = sub.base.values().to_vec();
    for (l, &c) in cells.iter().enumerate() {
        values[c] = vals[en.best_assign[l]];
    }
    let trial =
        crate::control::ControlField::from_values_unchecked(sub.base.grid().clone(), values);
    let pred = if en.best_cost == 0.0 { 0.0 } else { -en.best_cost };
    Ok((
        CandidateStep {
            trial,
            pred,
            ared: None,
            key: (0, sub.patch.id),
        },
        SolverStats {
            dp_states: 0,
            dfs_nodes: en.leaves,
        },
    ))
}
