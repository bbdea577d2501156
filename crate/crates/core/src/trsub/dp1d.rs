//! Layered-DAG dynamic program for 1D subproblems on contiguous
//! patches.
//!
//! One layer per patch cell; a node is a pair (value index, budget units
//! spent). Arcs carry the linear cost of the new cell value plus the TV
//! cost against the previous cell; entry and exit arcs charge the jumps
//! against the fixed neighbors just outside the patch (absent at the
//! domain boundary). Globally optimal since every feasible trial is a
//! path. Complexity O(cells * |W|^2 * budget).

use crate::error::{Error, Result};

use super::{finish, CandidateStep, SolverStats, TrustRegionSubproblem};

pub fn solve_dp_1d(sub: &TrustRegionSubproblem) -> Result<(CandidateStep, SolverStats)> {
    sub.validate()?;
    let grid = sub.base.grid();
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("solve_dp_1d requires a 1D grid".into()));
    }
    let cells = &sub.patch.cells;
    let n = cells.len();
    if n == 0 {
        return Ok((sub.zero_step(), SolverStats::default()));
    }
    if cells[n - 1] - cells[0] + 1 != n {
        return Err(Error::InvalidArgument(
            "solve_dp_1d requires a contiguous patch cell range".into(),
        ));
    }

    let budget = sub.budget_units() as usize;
    if budget == 0 {
        // only feasible point is the base itself
        return Ok((sub.zero_step(), SolverStats::default()));
    }

    let vals = sub.values.values();
    let m = vals.len();
    let vol = grid.cell_volume();
    let alpha_meas = sub.alpha * grid.interface_measure();
    let states = m * (budget + 1);

    let left_fixed = if cells[0] > 0 {
        Some(sub.base.value(cells[0] - 1) as i64)
    } else {
        None
    };
    let right_fixed = if cells[n - 1] + 1 < grid.n_cells() {
        Some(sub.base.value(cells[n - 1] + 1) as i64)
    } else {
        None
    };

    let linear = |cell: usize, mi: usize| {
        vol * sub.grad.value(cell) * (vals[mi] as f64 - sub.base.value(cell) as f64)
    };
    let units =
        |cell: usize, mi: usize| (vals[mi] as i64 - sub.base.value(cell) as i64).unsigned_abs() as usize;

    let idx = |mi: usize, u: usize| mi * (budget + 1) + u;

    let mut cost = vec![f64::INFINITY; states];
    let mut next = vec![f64::INFINITY; states];
    // parent value index per (layer, state); the parent budget is
    // derived from the spent units, so one byte suffices
    let mut parent = vec![u8::MAX; n * states];

    // entry layer
    for mi in 0..m {
        let du = units(cells[0], mi);
        if du > budget {
            continue;
        }
        let mut c = linear(cells[0], mi);
        if let Some(lf) = left_fixed {
            c += alpha_meas * (vals[mi] as i64 - lf).abs() as f64;
        }
        cost[idx(mi, du)] = c;
    }

    // interior transitions; gather per target state, parents scanned in
    // ascending value order so ties break toward the smaller index
    for layer in 1..n {
        let cell = cells[layer];
        next.iter_mut().for_each(|v| *v = f64::INFINITY);
        for mi in 0..m {
            let du = units(cell, mi);
            let lin = linear(cell, mi);
            for u in du..=budget {
                let u_prev = u - du;
                let mut best = f64::INFINITY;
                let mut best_p = u8::MAX;
                for mp in 0..m {
                    let c_prev = cost[idx(mp, u_prev)];
                    if c_prev == f64::INFINITY {
                        continue;
                    }
                    let c = c_prev + alpha_meas * (vals[mi] as i64 - vals[mp] as i64).abs() as f64;
                    if c < best {
                        best = c;
                        best_p = mp as u8;
                    }
                }
                if best_p != u8::MAX {
                    let t = idx(mi, u);
                    next[t] = best + lin;
                    parent[layer * states + t] = best_p;
                }
            }
        }
        std::mem::swap(&mut cost, &mut next);
    }

    // exit: charge the right fixed neighbor, pick the best final state
    // (ties toward smaller value index, then smaller budget)
    let mut best = f64::INFINITY;
    let mut best_state = None;
    for mi in 0..m {
        let exit = match right_fixed {
            Some(rf) => alpha_meas * (vals[mi] as i64 - rf).abs() as f64,
            None => 0.0,
        };
        for u in 0..=budget {
            let c = cost[idx(mi, u)];
            if c == f64::INFINITY {
                continue;
            }
            let total = c + exit;
            if total < best {
                best = total;
                best_state = Some((mi, u));
            }
        }
    }
    let (mut mi, mut u) = best_state.expect("base assignment is always feasible");

    // backtrack
    let mut patch_values = vec![0i32; n];
    for layer in (0..n).rev() {
        patch_values[layer] = vals[mi];
        let du = units(cells[layer], mi);
        if layer > 0 {
            let p = parent[layer * states + idx(mi, u)] as usize;
            u -= du;
            mi = p;
        } else {
            u -= du;
        }
    }
    debug_assert_eq!(u, 0);

    let step = finish(sub, &patch_values, sub.patch.id)?;
    Ok((
        step,
        SolverStats {
            dp_states: (n * states) as u64,
            dfs_nodes: 0,
        },
    ))
}
