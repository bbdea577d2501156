//! The block trust-region driver.
//!
//! Each outer iteration tabulates candidate steps: starting from
//! refinement level k = 0 on every patch, each (k, patch) pair is solved
//! exactly; a candidate enters the accepted set when its actual
//! reduction reaches the sigma fraction of its predicted reduction, a
//! patch with positive prediction but failed acceptance is re-enqueued
//! at level k+1 while a smaller radius could still beat the best
//! accepted reduction (the domination safeguard, using the gradient
//! Lipschitz constant), and a patch with zero prediction is dropped as
//! locally stationary. The greedy update loop then splices accepted
//! trials into the iterate in order of decreasing actual reduction as
//! long as the full objective strictly decreases. An empty accepted set
//! reports stationarity.
//!
//! Levels are processed FIFO, patches in index order; the optional
//! parallel mode pre-solves a whole level and folds results in patch
//! order, which leaves the iterate sequence bit-identical to the
//! sequential run.

use std::collections::VecDeque;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::control::{ControlField, ValueSet};
use crate::error::{Error, Result};
use crate::model::{GradientField, Model, Objective, ObjectiveValue};
use crate::patches::{make_uniform_patches, validate_cover, PatchSet};
use crate::trsub::{solve_auto, CandidateStep, TrustRegionSubproblem, DEFAULT_DFS_CELL_CAP};

/// Driver parameters.
#[derive(Debug, Clone)]
pub struct SlipConfig {
    /// Initial trust-region radius.
    pub delta0: f64,
    /// Acceptance fraction, strictly between 0 and 1.
    pub sigma: f64,
    pub max_outer_iters: usize,
    /// Hard cap on the refinement level; `None` derives the first level
    /// whose radius drops below one cell volume, plus one.
    pub k_cap: Option<u32>,
    /// Gradient Lipschitz constant used by the domination safeguard.
    pub lipschitz: f64,
    /// Pre-solve same-level subproblems in parallel.
    pub parallel: bool,
    /// Cell cap of the 2D depth-first solver; larger rectangular
    /// patches go to the profile solver.
    pub dfs_cell_cap: usize,
    /// Downgrade cover violations to a warning. Stationarity reports
    /// are then meaningless; off by default.
    pub allow_weak_cover: bool,
    /// Keep a copy of every iterate in the result.
    pub collect_iterates: bool,
}

impl Default for SlipConfig {
    fn default() -> Self {
        SlipConfig {
            delta0: 0.125,
            sigma: 1e-4,
            max_outer_iters: 1000,
            k_cap: None,
            lipschitz: 1.0,
            parallel: false,
            dfs_cell_cap: DEFAULT_DFS_CELL_CAP,
            allow_weak_cover: false,
            collect_iterates: false,
        }
    }
}

impl SlipConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || self.sigma <= 0.0 || self.sigma >= 1.0 {
            return Err(Error::Config("sigma must be in (0,1)".into()));
        }
        if !self.delta0.is_finite() || self.delta0 <= 0.0 {
            return Err(Error::Config("delta0 must be > 0".into()));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::Config("max_outer_iters must be >= 1".into()));
        }
        if !self.lipschitz.is_finite() || self.lipschitz < 0.0 {
            return Err(Error::Config("lipschitz must be >= 0".into()));
        }
        Ok(())
    }

    /// Smallest level whose radius falls below one cell volume, plus
    /// one; at that level the subproblem is provably the zero step.
    pub fn effective_k_cap(&self, cell_volume: f64) -> u32 {
        if let Some(k) = self.k_cap {
            return k;
        }
        let mut k = 0u32;
        let mut d = self.delta0;
        while d >= cell_volume && k < 200 {
            k += 1;
            d *= 0.5;
        }
        k + 1
    }
}

/// One solved (level, patch) pair in the tabulation.
#[derive(Debug, Clone, Serialize)]
pub struct TabEntry {
    pub k: u32,
    pub patch: usize,
    pub pred: f64,
    pub ared: f64,
    pub accepted: bool,
    /// Re-enqueued at level k+1.
    pub refined: bool,
    /// Dropped by the domination safeguard (positive prediction, no
    /// acceptance, refinement can no longer win).
    pub dominated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AppliedEntry {
    pub k: u32,
    pub patch: usize,
    pub j_after: f64,
}

/// Log record of one outer iteration.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub n: usize,
    pub j_before: f64,
    pub f_before: f64,
    pub tv_before: f64,
    pub solved: Vec<TabEntry>,
    pub applied: Vec<AppliedEntry>,
    pub j_after: f64,
    pub f_after: f64,
    pub tv_after: f64,
    pub terminal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    /// The tabulation ended with an empty accepted set.
    Stationary,
    MaxOuterIters,
}

#[derive(Debug)]
pub struct RunResult {
    pub final_field: ControlField,
    pub final_objective: ObjectiveValue,
    pub records: Vec<IterationRecord>,
    pub reason: StopReason,
    pub n_subproblems: u64,
    pub wall_s: f64,
    /// Invariant violations observed during the run; always empty unless
    /// something is broken.
    pub violations: Vec<String>,
    /// Iterates w^0, w^1, ... when `collect_iterates` is set.
    pub iterates: Vec<Vec<i32>>,
}

/// Result of one tabulation sweep.
pub struct Tabulation {
    pub accepted: Vec<CandidateStep>,
    pub entries: Vec<TabEntry>,
    pub n_solves: u64,
    pub violations: Vec<String>,
}

/// Runs the inner tabulation loop at the current iterate.
pub fn tabulate(
    obj: &Objective<'_>,
    patches: &PatchSet,
    values: &ValueSet,
    cfg: &SlipConfig,
    w_n: &ControlField,
    g_n: &GradientField,
    j_n: &ObjectiveValue,
) -> Result<Tabulation> {
    let grid = w_n.grid();
    let vol = grid.cell_volume();
    let k_cap = cfg.effective_k_cap(vol);

    let mut queue: VecDeque<(u32, usize)> =
        (0..patches.n_patches()).map(|pid| (0u32, pid)).collect();
    let mut accepted: Vec<CandidateStep> = Vec::new();
    let mut entries: Vec<TabEntry> = Vec::new();
    let mut violations: Vec<String> = Vec::new();
    let mut n_solves = 0u64;

    let solve_one = |k: u32, pid: usize| -> Result<(CandidateStep, f64)> {
        let radius = cfg.delta0 * 0.5f64.powi(k as i32);
        let sub = TrustRegionSubproblem {
            base: w_n.clone(),
            grad: g_n.clone(),
            patch: patches.patches[pid].clone(),
            radius,
            alpha: obj.alpha,
            values: values.clone(),
        };
        let (mut step, _stats) = solve_auto(&sub, cfg.dfs_cell_cap).map_err(|e| {
            Error::SolverFailure(format!("subproblem (k={k}, patch={pid}): {e}"))
        })?;
        step.key = (k, pid);
        // the zero step realizes exactly zero actual reduction; skip the
        // redundant objective evaluation
        let ared = if step.pred == 0.0 {
            0.0
        } else {
            j_n.j - obj.eval(&step.trial)?.j
        };
        step.ared = Some(ared);
        Ok((step, ared))
    };

    while let Some(&(k, _)) = queue.front() {
        // drain the whole level; enqueued refinements all sit at k+1
        let mut batch: Vec<(u32, usize)> = Vec::new();
        while queue.front().is_some_and(|e| e.0 == k) {
            batch.push(queue.pop_front().unwrap());
        }
        let solved: Vec<Result<(CandidateStep, f64)>> = if cfg.parallel {
            batch.par_iter().map(|&(k, pid)| solve_one(k, pid)).collect()
        } else {
            batch.iter().map(|&(k, pid)| solve_one(k, pid)).collect()
        };

        let radius = cfg.delta0 * 0.5f64.powi(k as i32);
        for (&(k, pid), res) in batch.iter().zip(solved) {
            let (step, ared) = res?;
            n_solves += 1;
            let pred = step.pred;
            if radius < vol && pred != 0.0 {
                violations.push(format!(
                    "radius {radius} below cell volume but pred = {pred} (k={k}, patch={pid})"
                ));
            }
            let mut entry = TabEntry {
                k,
                patch: pid,
                pred,
                ared,
                accepted: false,
                refined: false,
                dominated: false,
            };
            if ared >= cfg.sigma * pred && pred > 0.0 {
                entry.accepted = true;
                accepted.push(step);
            } else if pred > 0.0 {
                let max_ared = accepted
                    .iter()
                    .map(|s| s.ared.expect("accepted steps carry ared"))
                    .fold(f64::NEG_INFINITY, f64::max);
                if max_ared < pred + cfg.lipschitz * radius {
                    if k < k_cap {
                        entry.refined = true;
                        queue.push_back((k + 1, pid));
                    } else if cfg.k_cap.is_none() {
                        // unreachable with the derived cap: the level
                        // below one cell volume must have pred = 0
                        violations.push(format!(
                            "derived k cap {k_cap} reached with positive pred (patch {pid})"
                        ));
                    }
                } else {
                    entry.dominated = true;
                }
            }
            entries.push(entry);
        }
    }

    Ok(Tabulation {
        accepted,
        entries,
        n_solves,
        violations,
    })
}

/// Outcome of the greedy update loop.
pub struct GreedyOutcome {
    pub next: ControlField,
    pub next_value: ObjectiveValue,
    pub applied: Vec<AppliedEntry>,
    pub violations: Vec<String>,
}

/// Applies accepted steps in order of decreasing actual reduction while
/// the full objective strictly decreases (ties on ared break toward the
/// smaller patch index, then the smaller level).
pub fn greedy_apply(
    obj: &Objective<'_>,
    patches: &PatchSet,
    w_n: &ControlField,
    j_n: &ObjectiveValue,
    mut accepted: Vec<CandidateStep>,
) -> Result<GreedyOutcome> {
    let mut violations = Vec::new();
    let mut wbar = w_n.clone();
    let mut jbar = *j_n;
    let mut applied = Vec::new();
    let mut first = true;

    while !accepted.is_empty() {
        let mut bi = 0usize;
        for i in 1..accepted.len() {
            let (a, b) = (&accepted[i], &accepted[bi]);
            let (aa, ba) = (a.ared.unwrap_or(f64::NEG_INFINITY), b.ared.unwrap_or(f64::NEG_INFINITY));
            if aa > ba || (aa == ba && (a.key.1, a.key.0) < (b.key.1, b.key.0)) {
                bi = i;
            }
        }
        let step = accepted.swap_remove(bi);
        let (k, pid) = step.key;
        let candidate = wbar.splice(&patches.patches[pid].cells, &step.trial)?;
        let jc = obj.eval(&candidate)?;
        if jc.j < jbar.j {
            if first {
                let realized = j_n.j - jc.j;
                let tabulated = step.ared.unwrap_or(f64::NAN);
                if realized.to_bits() != tabulated.to_bits() {
                    violations.push(format!(
                        "first greedy application realized {realized} but tabulated {tabulated}"
                    ));
                }
            }
            applied.push(AppliedEntry {
                k,
                patch: pid,
                j_after: jc.j,
            });
            wbar = candidate;
            jbar = jc;
            first = false;
        } else {
            if first {
                violations.push(format!(
                    "first greedy application did not decrease the objective \
                     (j {} -> {}, patch {pid})",
                    jbar.j, jc.j
                ));
            }
            break;
        }
    }
    if applied.is_empty() {
        violations.push("accepted set was nonempty but no update was applied".into());
    }
    Ok(GreedyOutcome {
        next: wbar,
        next_value: jbar,
        applied,
        violations,
    })
}

/// Runs the driver from `w0` until the accepted set comes back empty
/// (stationary) or the outer iteration cap is reached. One JSON line per
/// iteration record goes to `log` when given.
pub fn run(
    model: &Model,
    alpha: f64,
    values: &ValueSet,
    patches: &PatchSet,
    cfg: &SlipConfig,
    w0: ControlField,
    mut log: Option<&mut dyn Write>,
) -> Result<RunResult> {
    cfg.validate()?;
    let report = validate_cover(patches, model.grid());
    if !report.is_ok() {
        if cfg.allow_weak_cover {
            eprintln!(
                "warning: patch cover violation ({} uncovered, {} split neighborhoods); \
                 stationarity reports are unreliable",
                report.uncovered_cells.len(),
                report.split_neighborhood_cells.len()
            );
        } else {
            return Err(Error::Config(format!(
                "patch cover validation failed: {}",
                match report.into_result() {
                    Err(e) => e.to_string(),
                    Ok(()) => unreachable!(),
                }
            )));
        }
    }

    let start = Instant::now();
    let obj = Objective::new(model, alpha);
    let np = patches.n_patches() as u64;
    let k_cap = cfg.effective_k_cap(model.grid().cell_volume());

    let mut w = w0;
    let mut jv = obj.eval(&w)?;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut violations: Vec<String> = Vec::new();
    let mut iterates: Vec<Vec<i32>> = Vec::new();
    let mut n_subproblems = 0u64;
    let mut reason = StopReason::MaxOuterIters;

    if cfg.collect_iterates {
        iterates.push(w.values().to_vec());
    }

    for n in 0..cfg.max_outer_iters {
        let g = model.gradient(&w)?;
        let tab = tabulate(&obj, patches, values, cfg, &w, &g, &jv)?;
        n_subproblems += tab.n_solves;
        violations.extend(tab.violations.iter().cloned());
        if tab.n_solves > np * (k_cap as u64 + 1) {
            violations.push(format!(
                "iteration {n}: {} solves exceed the tabulation bound {}",
                tab.n_solves,
                np * (k_cap as u64 + 1)
            ));
        }
        for e in &tab.entries {
            if e.accepted && !(e.ared >= cfg.sigma * e.pred && e.pred > 0.0) {
                violations.push(format!(
                    "iteration {n}: unsound acceptance (pred {}, ared {})",
                    e.pred, e.ared
                ));
            }
        }

        if tab.accepted.is_empty() {
            records.push(IterationRecord {
                n,
                j_before: jv.j,
                f_before: jv.f,
                tv_before: jv.tv,
                solved: tab.entries,
                applied: Vec::new(),
                j_after: jv.j,
                f_after: jv.f,
                tv_after: jv.tv,
                terminal: true,
            });
            if let Some(log) = log.as_deref_mut() {
                writeln!(log, "{}", serde_json::to_string(records.last().unwrap())?)?;
            }
            reason = StopReason::Stationary;
            break;
        }

        let greedy = greedy_apply(&obj, patches, &w, &jv, tab.accepted)?;
        violations.extend(greedy.violations.iter().cloned());
        let decreased = greedy.next_value.j < jv.j;
        if !decreased {
            violations.push(format!(
                "iteration {n}: objective did not strictly decrease ({} -> {})",
                jv.j, greedy.next_value.j
            ));
        }

        records.push(IterationRecord {
            n,
            j_before: jv.j,
            f_before: jv.f,
            tv_before: jv.tv,
            solved: tab.entries,
            applied: greedy.applied,
            j_after: greedy.next_value.j,
            f_after: greedy.next_value.f,
            tv_after: greedy.next_value.tv,
            terminal: false,
        });
        if let Some(log) = log.as_deref_mut() {
            writeln!(log, "{}", serde_json::to_string(records.last().unwrap())?)?;
        }

        w = greedy.next;
        jv = greedy.next_value;
        if cfg.collect_iterates {
            iterates.push(w.values().to_vec());
        }
    }

    Ok(RunResult {
        final_field: w,
        final_objective: jv,
        records,
        reason,
        n_subproblems,
        wall_s: start.elapsed().as_secs_f64(),
        violations,
        iterates,
    })
}

/// Classic single-domain trust-region loop, kept as an independent code
/// path: per outer iteration the radius contracts from delta0 until the
/// first acceptable step is taken or the prediction vanishes. With one
/// whole-domain patch the block driver must reproduce this iterate
/// sequence bit for bit.
pub fn run_slip_reference(
    model: &Model,
    alpha: f64,
    values: &ValueSet,
    cfg: &SlipConfig,
    w0: ControlField,
) -> Result<RunResult> {
    cfg.validate()?;
    let start = Instant::now();
    let grid = model.grid();
    let whole = make_uniform_patches(grid, [1, 1], [0.0, 0.0])?;
    let patch = whole.patches[0].clone();
    let obj = Objective::new(model, alpha);
    let k_cap = cfg.effective_k_cap(grid.cell_volume());

    let mut w = w0;
    let mut jv = obj.eval(&w)?;
    let mut records = Vec::new();
    let mut violations: Vec<String> = Vec::new();
    let mut iterates: Vec<Vec<i32>> = Vec::new();
    let mut n_subproblems = 0u64;
    let mut reason = StopReason::MaxOuterIters;

    if cfg.collect_iterates {
        iterates.push(w.values().to_vec());
    }

    'outer: for n in 0..cfg.max_outer_iters {
        let g = model.gradient(&w)?;
        let mut solved = Vec::new();
        let mut k = 0u32;
        loop {
            let radius = cfg.delta0 * 0.5f64.powi(k as i32);
            let sub = TrustRegionSubproblem {
                base: w.clone(),
                grad: g.clone(),
                patch: patch.clone(),
                radius,
                alpha,
                values: values.clone(),
            };
            let (mut step, _) = solve_auto(&sub, cfg.dfs_cell_cap)?;
            step.key = (k, 0);
            n_subproblems += 1;
            if step.pred == 0.0 {
                solved.push(TabEntry {
                    k,
                    patch: 0,
                    pred: 0.0,
                    ared: 0.0,
                    accepted: false,
                    refined: false,
                    dominated: false,
                });
                records.push(IterationRecord {
                    n,
                    j_before: jv.j,
                    f_before: jv.f,
                    tv_before: jv.tv,
                    solved,
                    applied: Vec::new(),
                    j_after: jv.j,
                    f_after: jv.f,
                    tv_after: jv.tv,
                    terminal: true,
                });
                reason = StopReason::Stationary;
                break 'outer;
            }
            let jt = obj.eval(&step.trial)?;
            let ared = jv.j - jt.j;
            if ared >= cfg.sigma * step.pred {
                solved.push(TabEntry {
                    k,
                    patch: 0,
                    pred: step.pred,
                    ared,
                    accepted: true,
                    refined: false,
                    dominated: false,
                });
                records.push(IterationRecord {
                    n,
                    j_before: jv.j,
                    f_before: jv.f,
                    tv_before: jv.tv,
                    solved,
                    applied: vec![AppliedEntry {
                        k,
                        patch: 0,
                        j_after: jt.j,
                    }],
                    j_after: jt.j,
                    f_after: jt.f,
                    tv_after: jt.tv,
                    terminal: false,
                });
                w = step.trial;
                jv = jt;
                if cfg.collect_iterates {
                    iterates.push(w.values().to_vec());
                }
                break;
            }
            solved.push(TabEntry {
                k,
                patch: 0,
                pred: step.pred,
                ared,
                accepted: false,
                refined: true,
                dominated: false,
            });
            k += 1;
            if k > k_cap {
                if cfg.k_cap.is_none() {
                    violations.push(format!(
                        "reference loop exceeded the derived level cap {k_cap} with positive pred"
                    ));
                }
                break 'outer;
            }
        }
    }

    Ok(RunResult {
        final_field: w,
        final_objective: jv,
        records,
        reason,
        n_subproblems,
        wall_s: start.elapsed().as_secs_f64(),
        violations,
        iterates,
    })
}

/// Default start iterate: constant at the admissible value closest to
/// zero.
pub fn default_start(model: &Model, values: &ValueSet) -> ControlField {
    ControlField::constant(model.grid().clone(), values.closest_to_zero())
}


#[cfg(test)]
mod k_cap_tests {
    use super::*;
    use crate::grid::Grid;
    use crate::model::QuadraticModel;
    use std::sync::Arc;

    #[test]
    fn explicit_k_cap_truncates_without_violation() {
        // curvature keeps every step unacceptable at sigma = 0.9 until
        // the radius shrinks; a hard cap of 1 cuts refinement early and
        // must count as a configured truncation, not a violation
        let grid = Arc::new(Grid::new_1d(-1.0, 1.0, 16).unwrap());
        let vset = ValueSet::new(vec![0, 1]).unwrap();
        let model = Model::Quadratic(
            QuadraticModel::new(grid.clone(), vec![0.4; 16]).unwrap(),
        );
        let patches = make_uniform_patches(&grid, [1, 1], [0.0, 0.0]).unwrap();
        let cfg = SlipConfig {
            delta0: 0.125,
            sigma: 0.9,
            max_outer_iters: 10,
            k_cap: Some(1),
            lipschitz: model.lipschitz_bound().unwrap(),
            ..SlipConfig::default()
        };
        let w0 = ControlField::constant(grid, 0);
        let res = run(&model, 0.0, &vset, &patches, &cfg, w0, None).unwrap();
        assert!(res.violations.is_empty(), "{:?}", res.violations);
        for rec in &res.records {
            assert!(rec.solved.iter().all(|e| e.k <= 1));
        }
    }

    #[test]
    fn iteration_cap_reported_as_max_outer_iters() {
        let grid = Arc::new(Grid::new_1d(-1.0, 1.0, 8).unwrap());
        let vset = ValueSet::new(vec![0, 1]).unwrap();
        let model = Model::Quadratic(QuadraticModel::new(grid.clone(), vec![1.0; 8]).unwrap());
        let patches = make_uniform_patches(&grid, [1, 1], [0.0, 0.0]).unwrap();
        let cfg = SlipConfig {
            delta0: 0.25,
            max_outer_iters: 1,
            lipschitz: model.lipschitz_bound().unwrap(),
            ..SlipConfig::default()
        };
        let w0 = ControlField::constant(grid, 0);
        let res = run(&model, 0.0, &vset, &patches, &cfg, w0, None).unwrap();
        assert_eq!(res.reason, StopReason::MaxOuterIters);
        assert_eq!(res.records.len(), 1);
        assert!(!res.records[0].terminal);
        assert!(res.violations.is_empty(), "{:?}", res.violations);
    }

    #[test]
    fn initial_radius_below_cell_volume_is_immediately_stationary() {
        let grid = Arc::new(Grid::new_1d(-1.0, 1.0, 8).unwrap()); // vol 0.25
        let vset = ValueSet::new(vec![0, 1]).unwrap();
        let model = Model::Quadratic(QuadraticModel::new(grid.clone(), vec![1.0; 8]).unwrap());
        let patches = make_uniform_patches(&grid, [1, 1], [0.0, 0.0]).unwrap();
        let cfg = SlipConfig {
            delta0: 0.2,
            lipschitz: model.lipschitz_bound().unwrap(),
            ..SlipConfig::default()
        };
        let w0 = ControlField::constant(grid, 0);
        let res = run(&model, 0.0, &vset, &patches, &cfg, w0.clone(), None).unwrap();
        assert_eq!(res.reason, StopReason::Stationary);
        assert_eq!(res.records.len(), 1);
        assert_eq!(res.final_field, w0);
        assert!(res.violations.is_empty(), "{:?}", res.violations);
    }

    #[test]
    fn effective_k_cap_matches_radius_floor() {
        let cfg = SlipConfig {
            delta0: 0.125,
            ..SlipConfig::default()
        };
        // 1/256 cell volume: radius falls below it first at k = 6
        let cap = cfg.effective_k_cap(1.0 / 256.0);
        assert_eq!(cap, 7);
        // radius already below one cell: cap is 1
        assert_eq!(cfg.effective_k_cap(0.25), 1);
        let fixed = SlipConfig {
            k_cap: Some(3),
            ..SlipConfig::default()
        };
        assert_eq!(fixed.effective_k_cap(1e-9), 3);
    }
}
