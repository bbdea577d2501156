//! Scanline profile dynamic program for rectangular 2D patches.
//!
//! Cells are assigned in row-major order over the patch rectangle (the
//! shorter side becomes the profile width). A state is the pair of the
//! last `width` assigned values (one value index per column, packed as a
//! base-|W| number) and the spent budget units. Assigning a cell settles
//! its interfaces to the cell above (same column of the profile) and to
//! the left (previous column), plus any fixed neighbors outside the
//! patch, so every feasible trial is a path and the optimum is global.
//!
//! Complexity O(cells * |W|^width * budget * |W|); memory is dominated
//! by one packed decision digit per (cell, state) for the backtrack.

use crate::error::{Error, Result};

use super::{finish, CandidateStep, SolverStats, TrustRegionSubproblem};

const MAX_PROFILES: usize = 1 << 22;
const MAX_STATES: usize = 1 << 24;
const MAX_DECISION_BYTES: usize = 640 << 20;

pub fn solve_profile_2d(sub: &TrustRegionSubproblem) -> Result<(CandidateStep, SolverStats)> {
    sub.validate()?;
    let grid = sub.base.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument("solve_profile_2d requires a 2D grid".into()));
    }
    let n = sub.patch.n_cells();
    if n == 0 {
        return Ok((sub.zero_step(), SolverStats::default()));
    }
    let [cw, ch] = sub.patch.cell_count;
    if cw * ch != n {
        return Err(Error::InvalidArgument(
            "solve_profile_2d requires a full rectangular patch".into(),
        ));
    }
    let budget = sub.budget_units() as usize;
    if budget == 0 {
        return Ok((sub.zero_step(), SolverStats::default()));
    }

    let transpose = ch < cw;
    let (width, height) = if transpose { (ch, cw) } else { (cw, ch) };
    let [sx, sy] = sub.patch.cell_start;
    let cell_at = |r: usize, c: usize| {
        if transpose {
            grid.flat(sx + r, sy + c)
        } else {
            grid.flat(sx + c, sy + r)
        }
    };

    let vals = sub.values.values();
    let m = vals.len();

    let profiles = (m as u64).checked_pow(width as u32).map(|s| s as usize);
    let profiles = match profiles {
        Some(s) if s <= MAX_PROFILES => s,
        _ => {
            return Err(Error::SolverFailure(format!(
                "patch of {n} cells (profile width {width}, {m} values) exceeds the profile \
                 solver's state space; increase the number of patches"
            )))
        }
    };
    let states = profiles
        .checked_mul(budget + 1)
        .filter(|&s| s <= MAX_STATES)
        .ok_or_else(|| {
            Error::SolverFailure(format!(
                "patch of {n} cells with budget {budget} exceeds the profile solver's state \
                 space; increase the number of patches"
            ))
        })?;
    let dec_bits = usize::BITS as usize - (m.max(2) - 1).leading_zeros() as usize;
    let dec_total_bits = n
        .checked_mul(states)
        .and_then(|v| v.checked_mul(dec_bits))
        .ok_or_else(|| Error::SolverFailure("profile solver state overflow".into()))?;
    if dec_total_bits / 8 > MAX_DECISION_BYTES {
        return Err(Error::SolverFailure(format!(
            "profile solver backtrack storage would need {} MiB; increase the number of patches",
            dec_total_bits / 8 / (1 << 20)
        )));
    }

    let vol = grid.cell_volume();
    let alpha_meas = sub.alpha * grid.interface_measure();

    // per-cell tables in scan order
    let mut fixed = vec![0.0f64; n * m];
    let mut units = vec![0usize; n * m];
    for r in 0..height {
        for c in 0..width {
            let t = r * width + c;
            let gc = cell_at(r, c);
            let base = sub.base.value(gc) as i64;
            let mut outside = Vec::new();
            for nb in grid.neighbors(gc).expect("cell in range") {
                if !sub.patch.contains_cell(nb, grid) {
                    outside.push(sub.base.value(nb) as i64);
                }
            }
            for (mi, &v) in vals.iter().enumerate() {
                let v = v as i64;
                let mut f = vol * sub.grad.value(gc) * (v - base) as f64;
                for &b in &outside {
                    f += alpha_meas * (v - b).abs() as f64;
                }
                fixed[t * m + mi] = f;
                units[t * m + mi] = (v - base).unsigned_abs() as usize;
            }
        }
    }
    let tvpair: Vec<f64> = (0..m * m)
        .map(|i| alpha_meas * (vals[i / m] as i64 - vals[i % m] as i64).abs() as f64)
        .collect();

    let mut place = vec![1usize; width + 1];
    for c in 0..width {
        place[c + 1] = place[c] * m;
    }

    let mut cost = vec![f64::INFINITY; states];
    let mut next = vec![f64::INFINITY; states];
    cost[0] = 0.0;

    let mut decisions = vec![0u64; dec_total_bits.div_ceil(64)];
    let dec_mask = (1u64 << dec_bits) - 1;
    let set_dec = |dec: &mut [u64], t: usize, state: usize, d: usize| {
        let bit = (t * states + state) * dec_bits;
        let (w, o) = (bit / 64, bit % 64);
        // dec_bits <= 8 and states is a multiple of nothing in
        // particular, so a digit may straddle a word boundary
        dec[w] = (dec[w] & !(dec_mask << o)) | ((d as u64) << o);
        if o + dec_bits > 64 {
            let spill = o + dec_bits - 64;
            let hi_mask = (1u64 << spill) - 1;
            dec[w + 1] = (dec[w + 1] & !hi_mask) | ((d as u64) >> (dec_bits - spill));
        }
    };
    let get_dec = |dec: &[u64], t: usize, state: usize| -> usize {
        let bit = (t * states + state) * dec_bits;
        let (w, o) = (bit / 64, bit % 64);
        let mut v = (dec[w] >> o) & dec_mask;
        if o + dec_bits > 64 {
            let spill = o + dec_bits - 64;
            v |= (dec[w + 1] & ((1u64 << spill) - 1)) << (dec_bits - spill);
        }
        v as usize
    };

    for r in 0..height {
        for c in 0..width {
            let t = r * width + c;
            let cell_units = &units[t * m..(t + 1) * m];
            let cell_fixed = &fixed[t * m..(t + 1) * m];
            next.iter_mut().for_each(|v| *v = f64::INFINITY);

            let hi_count = profiles / place[c + 1];
            let lo_inner = if c > 0 { place[c - 1] } else { 1 };
            for u in 0..=budget {
                let ubase = u * profiles;
                for hi in 0..hi_count {
                    for d in 0..m {
                        let row_base = (hi * m + d) * place[c];
                        let dl_count = if c > 0 { m } else { 1 };
                        for dl in 0..dl_count {
                            let lo_base = row_base + dl * lo_inner;
                            for lo2 in 0..lo_inner {
                                let p = lo_base + lo2;
                                let cp = cost[ubase + p];
                                if !cp.is_finite() {
                                    continue;
                                }
                                for mi in 0..m {
                                    let un = u + cell_units[mi];
                                    if un > budget {
                                        continue;
                                    }
                                    let mut cn = cp + cell_fixed[mi];
                                    if r > 0 {
                                        cn += tvpair[mi * m + d];
                                    }
                                    if c > 0 {
                                        cn += tvpair[mi * m + dl];
                                    }
                                    let pn = (p as isize
                                        + (mi as isize - d as isize) * place[c] as isize)
                                        as usize;
                                    let tgt = un * profiles + pn;
                                    if cn < next[tgt] {
                                        next[tgt] = cn;
                                        set_dec(&mut decisions, t, tgt, d);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            std::mem::swap(&mut cost, &mut next);
        }
    }

    // best final state: budget ascending, profile ascending, strict <
    let mut best = f64::INFINITY;
    let mut best_state = 0usize;
    for (s, &cval) in cost.iter().enumerate() {
        if cval < best {
            best = cval;
            best_state = s;
        }
    }
    debug_assert!(best.is_finite(), "base assignment is always reachable");

    // backtrack through the packed decisions
    let mut u = best_state / profiles;
    let mut p = best_state % profiles;
    let mut trial_by_scan = vec![0i32; n];
    for t in (0..n).rev() {
        let c = t % width;
        let mi = (p / place[c]) % m;
        trial_by_scan[t] = vals[mi];
        let d_old = get_dec(&decisions, t, u * profiles + p);
        p = (p as isize + (d_old as isize - mi as isize) * place[c] as isize) as usize;
        u -= units[t * m + mi];
    }
    debug_assert_eq!(u, 0);
    debug_assert_eq!(p, 0);

    // scatter scan-order values into patch.cells order
    let mut by_cell = vec![0i32; grid.n_cells()];
    for r in 0..height {
        for c in 0..width {
            by_cell[cell_at(r, c)] = trial_by_scan[r * width + c];
        }
    }
    let patch_values: Vec<i32> = sub.patch.cells.iter().map(|&gc| by_cell[gc]).collect();

    let step = finish(sub, &patch_values, sub.patch.id)?;
    Ok((
        step,
        SolverStats {
            dp_states: (n * states) as u64,
            dfs_nodes: 0,
        },
    ))
}
