//! Command implementations behind the binary: `run`, `gradcheck`,
//! `subsolve` and `bench`. Verbosity is controlled by the TVSLIP_LOG
//! environment variable ("quiet", "info", "debug").

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::control::ValueSet;
use crate::error::{Error, Result};
use crate::io;
use crate::model::{gradient_fd_error, Model};
use crate::patches::{make_uniform_patches, validate_cover};
use crate::slip::{self, RunResult, SlipConfig};
use crate::trsub::{solve_dfs_2d, solve_dp_1d, DEFAULT_DFS_CELL_CAP};

fn verbosity() -> u8 {
    match std::env::var("TVSLIP_LOG").as_deref() {
        Ok("quiet") | Ok("0") => 0,
        Ok("debug") | Ok("2") => 2,
        _ => 1,
    }
}

macro_rules! info {
    ($($arg:tt)*) => {
        if verbosity() >= 1 { eprintln!($($arg)*); }
    };
}

/// Executes a configured run and writes the requested outputs. Returns
/// the run result for callers that want to inspect it.
pub fn cmd_run(config_path: &Path) -> Result<RunResult> {
    let cfg = RunConfig::from_path(config_path)?;
    let setup = cfg.resolve()?;
    let out_dir = setup.output.dir.clone();
    if let Some(dir) = &out_dir {
        fs::create_dir_all(dir)?;
    }

    if let Some(dir) = &out_dir {
        if setup.output.patch_layout {
            let json = io::patch_layout_json(&setup.patches);
            fs::write(dir.join("patches.json"), serde_json::to_string_pretty(&json)?)?;
        }
        if setup.output.fields {
            io::write_field_txt(&dir.join("w0.txt"), &setup.w0)?;
        }
        if setup.output.pgm && setup.grid.dim() == 2 {
            io::write_pgm(&dir.join("w0.pgm"), &setup.w0, &setup.values)?;
        }
    }

    let mut log_file = match (&out_dir, setup.output.iteration_log) {
        (Some(dir), true) => Some(fs::File::create(dir.join("iterations.jsonl"))?),
        _ => None,
    };
    let log: Option<&mut dyn Write> = log_file.as_mut().map(|f| f as &mut dyn Write);

    info!(
        "run: {} model, {} cells, {} patches, alpha {}",
        setup.model.kind_name(),
        setup.grid.n_cells(),
        setup.patches.n_patches(),
        setup.alpha
    );
    let res = slip::run(
        &setup.model,
        setup.alpha,
        &setup.values,
        &setup.patches,
        &setup.slip,
        setup.w0.clone(),
        log,
    )?;
    info!(
        "done: J = {:.6e} (F = {:.6e}, TV = {:.6e}), {} outer iterations, {} subproblems, {:?}",
        res.final_objective.j,
        res.final_objective.f,
        res.final_objective.tv,
        res.records.len(),
        res.n_subproblems,
        res.reason
    );
    if !res.violations.is_empty() {
        eprintln!("warning: {} invariant violations recorded", res.violations.len());
    }

    if let Some(dir) = &out_dir {
        if setup.output.summary_csv {
            io::append_csv_line(
                &dir.join("summary.csv"),
                io::SUMMARY_CSV_HEADER,
                &io::summary_csv_row(
                    setup.grid.n_cells(),
                    setup.patches.n_patches(),
                    setup.alpha,
                    &res,
                ),
            )?;
        }
        if setup.output.fields {
            io::write_field_txt(&dir.join("w_final.txt"), &res.final_field)?;
        }
        if setup.output.pgm && setup.grid.dim() == 2 {
            io::write_pgm(&dir.join("w_final.pgm"), &res.final_field, &setup.values)?;
        }
        if setup.output.states {
            if let Model::Pde2d(m) = &setup.model {
                let nn = m.nodes_per_axis();
                let u0 = m.solve_state(&setup.w0.to_real())?;
                let uf = m.solve_state(&res.final_field.to_real())?;
                io::write_csv_grid(&dir.join("u0.csv"), &u0, nn[0], nn[1])?;
                io::write_csv_grid(&dir.join("u_final.csv"), &uf, nn[0], nn[1])?;
                io::write_csv_grid(&dir.join("u_target.csv"), m.target_state(), nn[0], nn[1])?;
            }
        }
        fs::write(
            dir.join("result.json"),
            serde_json::to_string_pretty(&io::run_result_json(&res))?,
        )?;
    }
    Ok(res)
}

/// Central finite-difference check of the model gradient at seeded
/// random feasible points and integer directions. Returns the largest
/// relative error.
pub fn gradcheck(model: &Model, values: &ValueSet, trials: usize, seed: u64) -> Result<f64> {
    let n = model.grid().n_cells();
    let vals = values.values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err = 0.0f64;
    for _ in 0..trials {
        let w: Vec<f64> = (0..n)
            .map(|_| vals[rng.gen_range(0..vals.len())] as f64)
            .collect();
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1..=1) as f64).collect();
        if v.iter().all(|&x| x == 0.0) {
            v[0] = 1.0;
        }
        let err = gradient_fd_error(model, &w, &v, 1e-5)?;
        max_err = max_err.max(err);
    }
    Ok(max_err)
}

/// Runs the gradient check on the configured model; passes at 1e-6.
pub fn cmd_gradcheck(config_path: &Path) -> Result<f64> {
    let cfg = RunConfig::from_path(config_path)?;
    let setup = cfg.resolve()?;
    let max_err = gradcheck(&setup.model, &setup.values, 10, 2024)?;
    println!("max relative gradient error: {max_err:.3e}");
    Ok(max_err)
}

/// Solves a serialized subproblem instance and prints the solution as
/// JSON (trial values, predicted reduction, solver work counters).
pub fn cmd_subsolve(instance_path: &Path) -> Result<()> {
    let text = fs::read_to_string(instance_path)?;
    let file: io::SubproblemFile = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", instance_path.display())))?;
    let sub = file.into_subproblem()?;
    let (step, stats) = match sub.base.grid().dim() {
        1 => solve_dp_1d(&sub)?,
        _ => solve_dfs_2d(&sub, DEFAULT_DFS_CELL_CAP)?,
    };
    let out = serde_json::json!({
        "trial": step.trial.values(),
        "pred": step.pred,
        "budget_units": sub.budget_units(),
        "stats": { "dp_states": stats.dp_states, "dfs_nodes": stats.dfs_nodes },
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

/// The alpha grids of the two benchmark suites.
pub const ONED_ALPHAS: [f64; 3] = [1.25e-4, 5.0e-4, 2.0e-3];
pub const TWOD_ALPHAS: [f64; 8] = [5e-4, 7.5e-4, 1e-3, 1.25e-3, 1.5e-3, 1.75e-3, 2e-3, 2.25e-3];
pub const BENCH_N_PATCHES: [usize; 3] = [1, 4, 9];

/// Smallest overlap from the default upward whose uniform layout passes
/// cover validation on this grid (coarse grids need wider overlaps to
/// keep whole neighborhoods inside single patches).
pub fn bench_overlap(grid: &crate::grid::Grid, np_axis: usize, start: f64) -> Result<f64> {
    let np = if grid.dim() == 2 {
        [np_axis, np_axis]
    } else {
        [np_axis, 1]
    };
    let mut v = start;
    for _ in 0..12 {
        let ov = if grid.dim() == 2 { [v, v] } else { [v, 0.0] };
        if let Ok(set) = crate::patches::make_uniform_patches_unchecked(grid, np, ov) {
            if validate_cover(&set, grid).is_ok() {
                return Ok(v);
            }
        }
        v += 0.05;
    }
    Err(Error::Config(format!(
        "no valid overlap found for {np_axis} patches per axis on this grid"
    )))
}

/// Runs a benchmark suite, emitting one CSV row per (grid, patches,
/// alpha) configuration on stdout and optionally into `out_dir`.
pub fn cmd_bench(suite: &str, n_override: Option<usize>, out_dir: Option<&Path>) -> Result<()> {
    let (alphas, n, is_2d): (&[f64], usize, bool) = match suite {
        "oned" => (&ONED_ALPHAS, n_override.unwrap_or(256), false),
        "twod" => (&TWOD_ALPHAS, n_override.unwrap_or(16), true),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown suite {other:?} (expected oned or twod)"
            )))
        }
    };

    let grid = std::sync::Arc::new(if is_2d {
        crate::grid::Grid::new_2d([0.0, 0.0], [1.0, 1.0], [n, n])?
    } else {
        crate::grid::Grid::new_1d(-1.0, 1.0, n)?
    });
    let values = ValueSet::new(if is_2d { vec![0, 1] } else { vec![-1, 0, 1] })?;
    let model = if is_2d {
        Model::Pde2d(crate::model::Pde2dModel::new(
            grid.clone(),
            4e-2,
            2.0,
            values.clone(),
        )?)
    } else {
        Model::Conv1d(crate::model::Conv1dModel::new(grid.clone(), 0.1)?)
    };
    let lipschitz = model.lipschitz_bound()?;

    let mut rows = vec![io::SUMMARY_CSV_HEADER.to_string()];
    println!("{}", io::SUMMARY_CSV_HEADER);
    for &np in &BENCH_N_PATCHES {
        let np_axis = (np as f64).sqrt().round() as usize;
        let default_overlap = if is_2d { 0.1 } else { 0.2 };
        let (np_per_axis, overlap) = if is_2d {
            let v = bench_overlap(&grid, np_axis, default_overlap)?;
            ([np_axis, np_axis], [v, v])
        } else {
            let v = bench_overlap(&grid, np, default_overlap)?;
            ([np, 1], [v, 0.0])
        };
        let patches = make_uniform_patches(&grid, np_per_axis, overlap)?;
        for &alpha in alphas {
            let cfg = SlipConfig {
                delta0: 0.125,
                sigma: 1e-4,
                max_outer_iters: if is_2d { 100 } else { 1000 },
                lipschitz,
                ..SlipConfig::default()
            };
            let w0 = slip::default_start(&model, &values);
            info!("bench {suite}: N = {n}, N_p = {np}, alpha = {alpha}");
            let res = slip::run(&model, alpha, &values, &patches, &cfg, w0, None)?;
            let row = io::summary_csv_row(grid.n_cells(), patches.n_patches(), alpha, &res);
            println!("{row}");
            rows.push(row);
        }
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(
            PathBuf::from(dir).join(format!("bench_{suite}.csv")),
            rows.join("\n") + "\n",
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn gradcheck_quadratic_is_exact() {
        let grid = Arc::new(crate::grid::Grid::new_1d(-1.0, 1.0, 8).unwrap());
        let values = ValueSet::new(vec![0, 1]).unwrap();
        let model = Model::Quadratic(
            crate::model::QuadraticModel::new(grid, vec![0.3; 8]).unwrap(),
        );
        let err = gradcheck(&model, &values, 5, 7).unwrap();
        assert!(err <= 1e-9, "quadratic fd error {err}");
    }

    #[test]
    fn minimal_run_writes_summary() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let cfg_path = dir.path().join("cfg.json");
        std::fs::write(
            &cfg_path,
            format!(
                r#"{{"model": {{"kind": "conv1d", "alpha": 2e-3}},
                   "grid": {{"n": 32}},
                   "patches": {{"n_per_axis": [2], "overlap": [0.8]}},
                   "output": {{"dir": {:?}}}}}"#,
                out.to_str().unwrap()
            ),
        )
        .unwrap();
        let res = cmd_run(&cfg_path).unwrap();
        assert!(res.violations.is_empty(), "{:?}", res.violations);
        let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
        let mut lines = summary.lines();
        assert_eq!(lines.next(), Some(io::SUMMARY_CSV_HEADER));
        assert_eq!(lines.count(), 1);
        assert!(out.join("iterations.jsonl").exists());
        assert!(out.join("w_final.txt").exists());
        assert!(out.join("result.json").exists());
    }

    #[test]
    fn run_writes_states_and_pgm_for_2d() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out2d");
        let cfg_path = dir.path().join("cfg2d.json");
        std::fs::write(
            &cfg_path,
            format!(
                r#"{{"model": {{"kind": "pde2d", "alpha": 1e-3}},
                   "grid": {{"n": 6}},
                   "patches": {{"n_per_axis": [2, 2], "overlap": [0.4, 0.4]}},
                   "output": {{"dir": {:?}, "states": true}}}}"#,
                out.to_str().unwrap()
            ),
        )
        .unwrap();
        let res = cmd_run(&cfg_path).unwrap();
        assert!(res.violations.is_empty());
        for name in ["w0.pgm", "w_final.pgm", "u0.csv", "u_final.csv", "u_target.csv"] {
            assert!(out.join(name).exists(), "{name} missing");
        }
        // nodal grids are (n+1) lines of (n+1) columns
        let u = std::fs::read_to_string(out.join("u_final.csv")).unwrap();
        assert_eq!(u.lines().count(), 7);
        assert!(u.lines().all(|l| l.split(',').count() == 7));
    }

    #[test]
    fn subsolve_roundtrip_zero_radius() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        // radius below one cell volume: trial must equal the base
        std::fs::write(
            &path,
            r#"{"dim": 1, "lower": [-1.0, 0.0], "upper": [1.0, 1.0], "n": [4, 1],
                "values": [-1, 0, 1], "base": [0, 1, 0, -1],
                "grad": [0.5, -0.25, 1.0, -0.75],
                "patch_box_lower": [-1.0, 0.0], "patch_box_upper": [1.0, 1.0],
                "radius": 0.4, "alpha": 0.01}"#,
        )
        .unwrap();
        cmd_subsolve(&path).unwrap();
    }
}
