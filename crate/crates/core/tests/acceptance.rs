//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured figures (run with `--nocapture` to see them).

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use tvslip::control::{ControlField, ValueSet};
use tvslip::grid::Grid;
use tvslip::model::{Conv1dModel, GradientField, Model, Pde2dModel, QuadraticModel};
use tvslip::patches::{make_uniform_patches, Patch};
use tvslip::slip::{self, RunResult, SlipConfig, StopReason};
use tvslip::trsub::{
    solve_bruteforce, solve_dfs_2d, solve_dp_1d, solve_profile_2d, TrustRegionSubproblem,
};

fn pass(criterion: &str, details: &str) {
    println!("[acceptance] {criterion}: PASS ({details})");
}

fn random_sub_1d(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> TrustRegionSubproblem {
    let n = rng.gen_range(2..=max_n);
    let grid = Arc::new(Grid::new_1d(-1.0, 1.0, n).unwrap());
    let m = rng.gen_range(2..=max_m);
    let lo = rng.gen_range(-2..=0);
    let vals: Vec<i32> = (0..m as i32).map(|i| lo + i).collect();
    let vset = ValueSet::new(vals.clone()).unwrap();
    let base_vals: Vec<i32> = (0..n).map(|_| vals[rng.gen_range(0..m)]).collect();
    let base = ControlField::new(grid.clone(), base_vals, &vset).unwrap();
    let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let grad = GradientField::new(grid.clone(), g).unwrap();

    let a = rng.gen_range(0..n);
    let b = rng.gen_range(a..n);
    let h = grid.spacing(0);
    let patch = Patch::from_box(
        &grid,
        0,
        [-1.0 + a as f64 * h + 1e-9, 0.0],
        [-1.0 + (b + 1) as f64 * h - 1e-9, 1.0],
    )
    .unwrap();

    TrustRegionSubproblem {
        base,
        grad,
        patch,
        radius: rng.gen_range(0.05..(2.0 * n as f64 * h)),
        alpha: rng.gen_range(0.0..0.5),
        values: vset,
    }
}

fn random_sub_2d(
    rng: &mut ChaCha8Rng,
    grid_n: usize,
    patch_w: usize,
    patch_h: usize,
    m: usize,
) -> TrustRegionSubproblem {
    let grid = Arc::new(Grid::new_2d([0.0, 0.0], [1.0, 1.0], [grid_n, grid_n]).unwrap());
    let lo = rng.gen_range(-1..=0);
    let vals: Vec<i32> = (0..m as i32).map(|i| lo + i).collect();
    let vset = ValueSet::new(vals.clone()).unwrap();
    let base_vals: Vec<i32> = (0..grid.n_cells())
        .map(|_| vals[rng.gen_range(0..m)])
        .collect();
    let base = ControlField::new(grid.clone(), base_vals, &vset).unwrap();
    let g: Vec<f64> = (0..grid.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let grad = GradientField::new(grid.clone(), g).unwrap();

    let h = grid.spacing(0);
    let sx = rng.gen_range(0..=grid_n - patch_w);
    let sy = rng.gen_range(0..=grid_n - patch_h);
    let patch = Patch::from_box(
        &grid,
        0,
        [sx as f64 * h + 1e-9, sy as f64 * h + 1e-9],
        [(sx + patch_w) as f64 * h - 1e-9, (sy + patch_h) as f64 * h - 1e-9],
    )
    .unwrap();
    assert_eq!(patch.n_cells(), patch_w * patch_h);

    let vol = grid.cell_volume();
    TrustRegionSubproblem {
        base,
        grad,
        patch,
        radius: rng.gen_range(0.5 * vol..(patch_w * patch_h * m) as f64 * vol),
        alpha: rng.gen_range(0.0..0.2),
        values: vset,
    }
}

/// Criterion 1: the 1D dynamic program equals exhaustive enumeration on
/// 500 random instances.
#[test]
fn acceptance_1_oracle_equivalence_1d() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let sub = random_sub_1d(&mut rng, 12, 3);
        let (dp, _) = solve_dp_1d(&sub).unwrap();
        let (bf, _) = solve_bruteforce(&sub).unwrap();
        let diff = (dp.pred - bf.pred).abs();
        worst = worst.max(diff);
        assert!(diff <= 1e-12, "dp pred {} vs brute {}", dp.pred, bf.pred);
    }
    pass(
        "1 (1D oracle equivalence)",
        &format!("500 instances, max |pred diff| = {worst:.2e}, {:.2}s", start.elapsed().as_secs_f64()),
    );
}

/// Criterion 2: the 2D depth-first solver (and the profile solver used
/// for larger rectangles) equals exhaustive enumeration on 300 random
/// 3x3 and 4x4 patches. 4x4 draws use |W| = 2 so the oracle stays
/// inside its own 2^24 assignment cap.
#[test]
fn acceptance_2_oracle_equivalence_2d() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for i in 0..300 {
        let sub = if i % 2 == 0 {
            let m = if i % 4 == 0 { 2 } else { 3 };
            random_sub_2d(&mut rng, 6, 3, 3, m)
        } else {
            random_sub_2d(&mut rng, 6, 4, 4, 2)
        };
        let (dfs, _) = solve_dfs_2d(&sub, 25).unwrap();
        let (bf, _) = solve_bruteforce(&sub).unwrap();
        let (pf, _) = solve_profile_2d(&sub).unwrap();
        let d1 = (dfs.pred - bf.pred).abs();
        let d2 = (pf.pred - bf.pred).abs();
        worst = worst.max(d1).max(d2);
        assert!(d1 <= 1e-12, "dfs pred {} vs brute {}", dfs.pred, bf.pred);
        assert!(d2 <= 1e-12, "profile pred {} vs brute {}", pf.pred, bf.pred);
    }
    pass(
        "2 (2D oracle equivalence)",
        &format!("300 instances, max |pred diff| = {worst:.2e}, {:.2}s", start.elapsed().as_secs_f64()),
    );
}

/// Criterion 3: with one whole-domain patch the block driver reproduces
/// the reference single-patch trust-region loop bit for bit on the 1D
/// benchmark.
#[test]
fn acceptance_3_slip_equivalence() {
    let start = Instant::now();
    let grid = Arc::new(Grid::new_1d(-1.0, 1.0, 512).unwrap());
    let vset = ValueSet::new(vec![-1, 0, 1]).unwrap();
    let model = Model::Conv1d(Conv1dModel::new(grid.clone(), 0.1).unwrap());
    let lipschitz = model.lipschitz_bound().unwrap();
    let patches = make_uniform_patches(&grid, [1, 1], [0.0, 0.0]).unwrap();
    let mut total_iters = 0usize;
    for alpha in [1.25e-4, 5e-4, 2e-3] {
        let cfg = SlipConfig {
            delta0: 0.125,
            sigma: 1e-4,
            max_outer_iters: 1000,
            lipschitz,
            collect_iterates: true,
            ..SlipConfig::default()
        };
        let w0 = slip::default_start(&model, &vset);
        let block = slip::run(&model, alpha, &vset, &patches, &cfg, w0.clone(), None).unwrap();
        let reference = slip::run_slip_reference(&model, alpha, &vset, &cfg, w0).unwrap();

        assert_eq!(block.iterates, reference.iterates, "iterate sequences differ at alpha {alpha}");
        assert_eq!(block.reason, reference.reason);
        assert_eq!(
            block.final_objective.j.to_bits(),
            reference.final_objective.j.to_bits()
        );
        assert_eq!(
            block.final_objective.f.to_bits(),
            reference.final_objective.f.to_bits()
        );
        assert_eq!(block.final_objective.tv_units, reference.final_objective.tv_units);
        assert!(block.violations.is_empty(), "{:?}", block.violations);
        assert!(reference.violations.is_empty(), "{:?}", reference.violations);
        total_iters += block.iterates.len();
    }
    pass(
        "3 (SLIP equivalence, N_p = 1)",
        &format!(
            "N = 512, 3 alphas, {total_iters} iterates bit-identical, {:.2}s",
            start.elapsed().as_secs_f64()
        ),
    );
}

struct BatteryRun {
    name: String,
    n_patches: usize,
    delta0: f64,
    cell_volume: f64,
    result: RunResult,
}

/// The shared run battery behind criteria 4, 5 and 6.
fn battery() -> &'static Vec<BatteryRun> {
    static BATTERY: OnceLock<Vec<BatteryRun>> = OnceLock::new();
    BATTERY.get_or_init(|| {
        let mut runs = Vec::new();

        // 1D deconvolution: 3 alphas x {1, 4} patches
        let grid = Arc::new(Grid::new_1d(-1.0, 1.0, 128).unwrap());
        let vset = ValueSet::new(vec![-1, 0, 1]).unwrap();
        let model = Model::Conv1d(Conv1dModel::new(grid.clone(), 0.1).unwrap());
        let lipschitz = model.lipschitz_bound().unwrap();
        for alpha in [1.25e-4, 5e-4, 2e-3] {
            for np in [1usize, 4] {
                let patches = make_uniform_patches(&grid, [np, 1], [0.2, 0.0]).unwrap();
                let cfg = SlipConfig {
                    delta0: 0.125,
                    sigma: 1e-4,
                    max_outer_iters: 1000,
                    lipschitz,
                    ..SlipConfig::default()
                };
                let w0 = slip::default_start(&model, &vset);
                let result = slip::run(&model, alpha, &vset, &patches, &cfg, w0, None).unwrap();
                runs.push(BatteryRun {
                    name: format!("conv1d N=128 alpha={alpha} np={np}"),
                    n_patches: patches.n_patches(),
                    delta0: cfg.delta0,
                    cell_volume: grid.cell_volume(),
                    result,
                });
            }
        }

        // 2D PDE: 3 alphas x {2x2} patches at N=8, plus N=12
        let vset2 = ValueSet::new(vec![0, 1]).unwrap();
        for (n, ov, alphas) in [
            (8usize, 0.3, vec![5e-4, 1e-3, 2.25e-3]),
            (12, 0.25, vec![1e-3]),
        ] {
            let grid = Arc::new(Grid::new_2d([0.0, 0.0], [1.0, 1.0], [n, n]).unwrap());
            let model =
                Model::Pde2d(Pde2dModel::new(grid.clone(), 4e-2, 2.0, vset2.clone()).unwrap());
            let lipschitz = model.lipschitz_bound().unwrap();
            for alpha in alphas {
                let patches = make_uniform_patches(&grid, [2, 2], [ov, ov]).unwrap();
                let cfg = SlipConfig {
                    delta0: 0.125,
                    sigma: 1e-4,
                    max_outer_iters: 100,
                    lipschitz,
                    ..SlipConfig::default()
                };
                let w0 = slip::default_start(&model, &vset2);
                let result = slip::run(&model, alpha, &vset2, &patches, &cfg, w0, None).unwrap();
                runs.push(BatteryRun {
                    name: format!("pde2d N={n} alpha={alpha} np=4"),
                    n_patches: patches.n_patches(),
                    delta0: cfg.delta0,
                    cell_volume: grid.cell_volume(),
                    result,
                });
            }
        }

        // quadratic toys, 1D and 2D
        {
            let grid = Arc::new(Grid::new_1d(-1.0, 1.0, 64).unwrap());
            let vset = ValueSet::new(vec![0, 1]).unwrap();
            let target: Vec<f64> = (0..64).map(|i| if i % 5 < 2 { 1.0 } else { 0.0 }).collect();
            let model = Model::Quadratic(QuadraticModel::new(grid.clone(), target).unwrap());
            let lipschitz = model.lipschitz_bound().unwrap();
            for (alpha, np) in [(0.0, 1usize), (5e-3, 3)] {
                let patches = make_uniform_patches(&grid, [np, 1], [0.4, 0.0]).unwrap();
                let cfg = SlipConfig {
                    delta0: 0.5,
                    sigma: 1e-4,
                    max_outer_iters: 1000,
                    lipschitz,
                    ..SlipConfig::default()
                };
                let w0 = slip::default_start(&model, &vset);
                let result = slip::run(&model, alpha, &vset, &patches, &cfg, w0, None).unwrap();
                runs.push(BatteryRun {
                    name: format!("quadratic1d N=64 alpha={alpha} np={np}"),
                    n_patches: patches.n_patches(),
                    delta0: cfg.delta0,
                    cell_volume: grid.cell_volume(),
                    result,
                });
            }
        }
        {
            let grid = Arc::new(Grid::new_2d([0.0, 0.0], [1.0, 1.0], [8, 8]).unwrap());
            let vset = ValueSet::new(vec![0, 1]).unwrap();
            let target: Vec<f64> = (0..64)
                .map(|c| {
                    let (x, y) = (c % 8, c / 8);
                    if (x / 3 + y / 3) % 2 == 0 {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let model = Model::Quadratic(QuadraticModel::new(grid.clone(), target).unwrap());
            let lipschitz = model.lipschitz_bound().unwrap();
            let patches = make_uniform_patches(&grid, [2, 2], [0.3, 0.3]).unwrap();
            let cfg = SlipConfig {
                delta0: 0.25,
                sigma: 1e-4,
                max_outer_iters: 100,
                lipschitz,
                ..SlipConfig::default()
            };
            let w0 = slip::default_start(&model, &vset);
            let result = slip::run(&model, 5e-3, &vset, &patches, &cfg, w0, None).unwrap();
            runs.push(BatteryRun {
                name: "quadratic2d N=8 alpha=0.005 np=4".into(),
                n_patches: patches.n_patches(),
                delta0: cfg.delta0,
                cell_volume: grid.cell_volume(),
                result,
            });
        }

        assert!(runs.len() >= 12, "battery must cover at least 12 configurations");
        runs
    })
}

/// Criterion 4: strictly decreasing objective across applied outer
/// iterations; every battery run stops as Stationary before its cap.
#[test]
fn acceptance_4_monotone_descent_and_termination() {
    let start = Instant::now();
    let runs = battery();
    for run in runs {
        let res = &run.result;
        assert_eq!(
            res.reason,
            StopReason::Stationary,
            "{} did not reach stationarity",
            run.name
        );
        for rec in &res.records {
            if !rec.terminal {
                assert!(
                    rec.j_after < rec.j_before,
                    "{}: iteration {} did not strictly decrease",
                    run.name,
                    rec.n
                );
            } else {
                assert_eq!(rec.j_after, rec.j_before);
            }
        }
        for w in res.records.windows(2) {
            assert_eq!(w[1].j_before, w[0].j_after);
        }
    }
    pass(
        "4 (monotone descent & termination)",
        &format!("{} configurations, all stationary, {:.2}s", runs.len(), start.elapsed().as_secs_f64()),
    );
}

/// Criterion 5: in-run acceptance soundness; no violations anywhere in
/// the battery.
#[test]
fn acceptance_5_acceptance_soundness() {
    let runs = battery();
    let mut n_accepted = 0usize;
    for run in runs {
        let res = &run.result;
        assert!(
            res.violations.is_empty(),
            "{} recorded violations: {:?}",
            run.name,
            res.violations
        );
        for rec in &res.records {
            let any_accepted = rec.solved.iter().any(|e| e.accepted);
            for e in &rec.solved {
                if e.accepted {
                    n_accepted += 1;
                    assert!(e.pred > 0.0, "{}: accepted with pred <= 0", run.name);
                    assert!(
                        e.ared >= 1e-4 * e.pred,
                        "{}: accepted with ared < sigma pred",
                        run.name
                    );
                }
            }
            if any_accepted {
                assert!(
                    !rec.applied.is_empty(),
                    "{}: accepted set nonempty but nothing applied",
                    run.name
                );
            }
        }
    }
    pass(
        "5 (acceptance soundness)",
        &format!("{} accepted steps checked, zero violations", n_accepted),
    );
}

/// Criterion 6: per outer iteration the tabulation solves at most
/// N_p * (k_cap + 1) subproblems with k_cap = ceil(log2(delta0 / cell
/// volume)) + 1.
#[test]
fn acceptance_6_tabulation_bound() {
    let runs = battery();
    let mut max_ratio = 0.0f64;
    for run in runs {
        let k_cap = (run.delta0 / run.cell_volume).log2().ceil() as u64 + 1;
        let bound = run.n_patches as u64 * (k_cap + 1);
        for rec in &run.result.records {
            let solves = rec.solved.len() as u64;
            assert!(
                solves <= bound,
                "{}: iteration {} used {} solves, bound {}",
                run.name,
                rec.n,
                solves,
                bound
            );
            max_ratio = max_ratio.max(solves as f64 / bound as f64);
        }
    }
    pass(
        "6 (tabulation bound)",
        &format!("max solves/bound ratio {max_ratio:.2} over {} runs", runs.len()),
    );
}

/// Criterion 7: central finite-difference gradient checks at 1e-6 for
/// both benchmark models.
#[test]
fn acceptance_7_gradient_correctness() {
    let start = Instant::now();
    let grid1 = Arc::new(Grid::new_1d(-1.0, 1.0, 64).unwrap());
    let vset1 = ValueSet::new(vec![-1, 0, 1]).unwrap();
    let conv = Model::Conv1d(Conv1dModel::new(grid1, 0.1).unwrap());
    let err1 = tvslip::cli::gradcheck(&conv, &vset1, 10, 4242).unwrap();
    assert!(err1 <= 1e-6, "conv1d fd error {err1}");

    let grid2 = Arc::new(Grid::new_2d([0.0, 0.0], [1.0, 1.0], [8, 8]).unwrap());
    let vset2 = ValueSet::new(vec![0, 1]).unwrap();
    let pde = Model::Pde2d(Pde2dModel::new(grid2, 4e-2, 2.0, vset2.clone()).unwrap());
    let err2 = tvslip::cli::gradcheck(&pde, &vset2, 10, 4242).unwrap();
    assert!(err2 <= 1e-6, "pde2d fd error {err2}");

    pass(
        "7 (gradient correctness)",
        &format!(
            "conv1d N=64 err {err1:.2e}, pde2d N=8 err {err2:.2e}, {:.2}s",
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 8: on the 2D benchmark at N = 16 the objective reached with
/// 4 or 9 patches stays within 1% of the single-patch result.
#[test]
fn acceptance_8_2d_quality_parity() {
    let start = Instant::now();
    let grid = Arc::new(Grid::new_2d([0.0, 0.0], [1.0, 1.0], [16, 16]).unwrap());
    let vset = ValueSet::new(vec![0, 1]).unwrap();
    let model = Model::Pde2d(Pde2dModel::new(grid.clone(), 4e-2, 2.0, vset.clone()).unwrap());
    let lipschitz = model.lipschitz_bound().unwrap();
    let alpha = 1e-3;

    // overlaps chosen so each layout passes strong-overlap validation
    // at this grid resolution
    let mut js = Vec::new();
    for (np_axis, ov) in [(1usize, 0.0), (2, 0.2), (3, 0.3)] {
        let patches = make_uniform_patches(&grid, [np_axis, np_axis], [ov, ov]).unwrap();
        let cfg = SlipConfig {
            delta0: 0.125,
            sigma: 1e-4,
            max_outer_iters: 100,
            lipschitz,
            ..SlipConfig::default()
        };
        let w0 = slip::default_start(&model, &vset);
        let res = slip::run(&model, alpha, &vset, &patches, &cfg, w0, None).unwrap();
        assert_eq!(res.reason, StopReason::Stationary);
        assert!(res.violations.is_empty(), "{:?}", res.violations);
        js.push((np_axis * np_axis, res.final_objective.j));
    }
    let j1 = js[0].1;
    for &(np, j) in &js[1..] {
        let rel = (j - j1).abs() / j1;
        assert!(rel <= 0.01, "N_p = {np}: J = {j} vs  {j1} (rel {rel:.3e})");
    }
    pass(
        "8 (2D quality parity)",
        &format!(
            "J(1) = {:.6e}, J(4) rel {:.2e}, J(9) rel {:.2e}, {:.1}s",
            j1,
            (js[1].1 - j1).abs() / j1,
            (js[2].1 - j1).abs() / j1,
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Criterion 9: randomized TV and solver invariants, 1000 cases.
#[test]
fn acceptance_9_tv_invariance_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut cases = 0usize;

    // shift invariance (200)
    for _ in 0..200 {
        let n = rng.gen_range(2..=10);
        let grid: Arc<Grid> = if rng.gen_bool(0.5) {
            Arc::new(Grid::new_1d(-1.0, 1.0, n).unwrap())
        } else {
            Arc::new(Grid::new_2d([0.0, 0.0], [1.0, 1.0], [n, n]).unwrap())
        };
        let vals: Vec<i32> = (0..3).map(|i| i - 1).collect();
        let vset = ValueSet::new(vals.clone()).unwrap();
        let field = ControlField::new(
            grid.clone(),
            (0..grid.n_cells()).map(|_| vals[rng.gen_range(0..3)]).collect(),
            &vset,
        )
        .unwrap();
        let c = rng.gen_range(-3..=3);
        let shifted = ControlField::new(
            grid.clone(),
            field.values().iter().map(|v| v + c).collect(),
            &ValueSet::new(vals.iter().map(|v| v + c).collect()).unwrap(),
        )
        .unwrap();
        assert_eq!(field.tv_units(), shifted.tv_units());
        cases += 1;
    }

    // reflection invariance along each axis (200)
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let grid = Arc::new(Grid::new_2d([0.0, 0.0], [1.0, 1.0], [n, n]).unwrap());
        let vset = ValueSet::new(vec![0, 1, 2]).unwrap();
        let field = ControlField::new(
            grid.clone(),
            (0..n * n).map(|_| rng.gen_range(0..3)).collect(),
            &vset,
        )
        .unwrap();
        for axis in 0..2 {
            let mirrored: Vec<i32> = (0..n * n)
                .map(|cell| {
                    let (ix, iy) = grid.multi(cell);
                    let (mx, my) = if axis == 0 {
                        (n - 1 - ix, iy)
                    } else {
                        (ix, n - 1 - iy)
                    };
                    field.value(grid.flat(mx, my))
                })
                .collect();
            let mirrored = ControlField::new(grid.clone(), mirrored, &vset).unwrap();
            assert_eq!(field.tv_units(), mirrored.tv_units());
        }
        cases += 1;
    }

    // tv >= 0, and zero iff constant (200)
    for _ in 0..200 {
        let n = rng.gen_range(2..=10);
        let grid = Arc::new(Grid::new_1d(-1.0, 1.0, n).unwrap());
        let vset = ValueSet::new(vec![0, 1]).unwrap();
        let field = ControlField::new(
            grid.clone(),
            (0..n).map(|_| rng.gen_range(0..2)).collect(),
            &vset,
        )
        .unwrap();
        let constant = field.values().windows(2).all(|w| w[0] == w[1]);
        assert!(field.tv_units() >= 0);
        assert_eq!(field.tv_units() == 0, constant);
        cases += 1;
    }

    // restricted-TV additivity over a random interface partition (200)
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let grid = Arc::new(Grid::new_2d([0.0, 0.0], [1.0, 1.0], [n, n]).unwrap());
        let vset = ValueSet::new(vec![-1, 0, 1]).unwrap();
        let field = ControlField::new(
            grid.clone(),
            (0..n * n).map(|_| rng.gen_range(-1..=1)).collect(),
            &vset,
        )
        .unwrap();
        let mut part_a = Vec::new();
        let mut part_b = Vec::new();
        for id in 0..grid.interfaces().len() {
            if rng.gen_bool(0.5) {
                part_a.push(id);
            } else {
                part_b.push(id);
            }
        }
        let sum = field.tv_restricted_units(&part_a).unwrap()
            + field.tv_restricted_units(&part_b).unwrap();
        assert_eq!(sum, field.tv_units());
        cases += 1;
    }

    // pred monotone in the radius (200)
    for _ in 0..200 {
        let mut sub = random_sub_1d(&mut rng, 10, 3);
        let r1 = rng.gen_range(0.05..1.0);
        let r2 = r1 + rng.gen_range(0.0..1.0);
        sub.radius = r1;
        let (small, _) = solve_dp_1d(&sub).unwrap();
        sub.radius = r2;
        let (large, _) = solve_dp_1d(&sub).unwrap();
        assert!(
            large.pred >= small.pred - 1e-12,
            "pred not monotone: {} at {r1} vs {} at {r2}",
            small.pred,
            large.pred
        );
        cases += 1;
    }

    assert_eq!(cases, 1000);
    pass(
        "9 (TV invariance suite)",
        &format!("{cases} randomized cases, {:.2}s", start.elapsed().as_secs_f64()),
    );
}
