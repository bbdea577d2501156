//! File formats: control fields as flat integer text, PGM snapshots,
//! patch layout dumps, subproblem instances, and run summaries.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::control::{ControlField, ValueSet};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::GradientField;
use crate::patches::{Patch, PatchSet};
use crate::slip::{RunResult, StopReason};
use crate::trsub::TrustRegionSubproblem;

/// Writes a field as one integer per line, in cell order.
pub fn write_field_txt(path: &Path, field: &ControlField) -> Result<()> {
    let mut out = String::with_capacity(field.values().len() * 3);
    for v in field.values() {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a field written by [`write_field_txt`]; values are validated
/// against the value set.
pub fn read_field_txt(path: &Path, grid: Arc<Grid>, vset: &ValueSet) -> Result<ControlField> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::with_capacity(grid.n_cells());
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: i32 = line.parse().map_err(|_| {
            Error::InvalidArgument(format!("{}: line {}: not an integer", path.display(), lineno + 1))
        })?;
        values.push(v);
    }
    ControlField::new(grid, values, vset)
}

/// Writes a 2D field as an ASCII PGM (P2) image, admissible values
/// mapped linearly onto 0..=255, rows top to bottom.
pub fn write_pgm(path: &Path, field: &ControlField, vset: &ValueSet) -> Result<()> {
    let grid = field.grid();
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument("PGM export requires a 2D field".into()));
    }
    let [nx, ny] = grid.n();
    let lo = vset.min() as f64;
    let range = (vset.max() - vset.min()) as f64;
    let mut out = format!("P2\n{nx} {ny}\n255\n");
    for iy in (0..ny).rev() {
        let mut row = String::with_capacity(nx * 4);
        for ix in 0..nx {
            let v = field.value(grid.flat(ix, iy)) as f64;
            let g = if range > 0.0 {
                ((v - lo) / range * 255.0).round() as u32
            } else {
                0
            };
            if ix > 0 {
                row.push(' ');
            }
            row.push_str(&g.to_string());
        }
        out.push_str(&row);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a real-valued nodal or cellwise vector as a CSV grid of
/// `rows` lines with `cols` comma-separated values each, starting from
/// the top of the domain (largest y).
pub fn write_csv_grid(path: &Path, values: &[f64], cols: usize, rows: usize) -> Result<()> {
    if values.len() != cols * rows {
        return Err(Error::InvalidArgument("csv grid size mismatch".into()));
    }
    let mut out = String::new();
    for r in (0..rows).rev() {
        let line: Vec<String> = (0..cols)
            .map(|c| format!("{:.17e}", values[r * cols + c]))
            .collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Patch layout as JSON: boxes and cell index lists.
pub fn patch_layout_json(set: &PatchSet) -> serde_json::Value {
    serde_json::json!({
        "overlap": set.overlap,
        "patches": set.patches.iter().map(|p| serde_json::json!({
            "id": p.id,
            "box_lower": p.box_lower,
            "box_upper": p.box_upper,
            "cells": p.cells,
        })).collect::<Vec<_>>(),
    })
}

/// Serialized subproblem instance for reproducing solver behavior.
#[derive(Debug, Serialize, Deserialize)]
pub struct SubproblemFile {
    pub dim: usize,
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub n: [usize; 2],
    pub values: Vec<i32>,
    pub base: Vec<i32>,
    pub grad: Vec<f64>,
    pub patch_box_lower: [f64; 2],
    pub patch_box_upper: [f64; 2],
    pub radius: f64,
    pub alpha: f64,
}

impl SubproblemFile {
    pub fn from_subproblem(sub: &TrustRegionSubproblem) -> SubproblemFile {
        let grid = sub.base.grid();
        SubproblemFile {
            dim: grid.dim(),
            lower: grid.lower(),
            upper: grid.upper(),
            n: grid.n(),
            values: sub.values.values().to_vec(),
            base: sub.base.values().to_vec(),
            grad: sub.grad.values().to_vec(),
            patch_box_lower: sub.patch.box_lower,
            patch_box_upper: sub.patch.box_upper,
            radius: sub.radius,
            alpha: sub.alpha,
        }
    }

    pub fn into_subproblem(self) -> Result<TrustRegionSubproblem> {
        let grid = Arc::new(if self.dim == 1 {
            Grid::new_1d(self.lower[0], self.upper[0], self.n[0])?
        } else {
            Grid::new_2d(self.lower, self.upper, self.n)?
        });
        let vset = ValueSet::new(self.values)?;
        let base = ControlField::new(grid.clone(), self.base, &vset)?;
        let grad = GradientField::new(grid.clone(), self.grad)?;
        let patch = Patch::from_box(&grid, 0, self.patch_box_lower, self.patch_box_upper)?;
        Ok(TrustRegionSubproblem {
            base,
            grad,
            patch,
            radius: self.radius,
            alpha: self.alpha,
            values: vset,
        })
    }
}

pub const SUMMARY_CSV_HEADER: &str = "n_cells,n_patches,alpha,J,F,TV,n_subproblems,wall_s,reason";

pub fn summary_csv_row(
    n_cells: usize,
    n_patches: usize,
    alpha: f64,
    res: &RunResult,
) -> String {
    format!(
        "{},{},{},{:.12e},{:.12e},{:.12e},{},{:.3},{}",
        n_cells,
        n_patches,
        alpha,
        res.final_objective.j,
        res.final_objective.f,
        res.final_objective.tv,
        res.n_subproblems,
        res.wall_s,
        match res.reason {
            StopReason::Stationary => "stationary",
            StopReason::MaxOuterIters => "max_outer_iters",
        }
    )
}

/// Final run document (without the per-iteration log, which streams
/// separately as JSON lines).
pub fn run_result_json(res: &RunResult) -> serde_json::Value {
    serde_json::json!({
        "reason": res.reason,
        "objective": {
            "j": res.final_objective.j,
            "f": res.final_objective.f,
            "tv": res.final_objective.tv,
            "tv_units": res.final_objective.tv_units,
        },
        "n_outer_iterations": res.records.len(),
        "n_subproblems": res.n_subproblems,
        "wall_s": res.wall_s,
        "violations": res.violations,
        "final_field": res.final_field.values(),
    })
}

/// Appends a line to a file, creating it (with the given header) first.
pub fn append_csv_line(path: &Path, header: &str, line: &str) -> Result<()> {
    let existed = path.exists();
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    if !existed {
        writeln!(f, "{header}")?;
    }
    writeln!(f, "{line}")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_roundtrip_and_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Arc::new(Grid::new_2d([0.0, 0.0], [1.0, 1.0], [3, 3]).unwrap());
        let vset = ValueSet::new(vec![0, 1]).unwrap();
        let mut vals = vec![0; 9];
        vals[grid.flat(1, 1)] = 1;
        let field = ControlField::new(grid.clone(), vals, &vset).unwrap();

        let path = dir.path().join("w.txt");
        write_field_txt(&path, &field).unwrap();
        let back = read_field_txt(&path, grid.clone(), &vset).unwrap();
        assert_eq!(back, field);

        let pgm = dir.path().join("w.pgm");
        write_pgm(&pgm, &field, &vset).unwrap();
        let text = fs::read_to_string(&pgm).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("P2"));
        assert_eq!(lines.next(), Some("3 3"));
        assert_eq!(lines.next(), Some("255"));
        // center cell maps to 255, top row first
        assert_eq!(lines.next(), Some("0 0 0"));
        assert_eq!(lines.next(), Some("0 255 0"));
        assert_eq!(lines.next(), Some("0 0 0"));
    }

    #[test]
    fn subproblem_file_roundtrip() {
        use crate::trsub::{solve_bruteforce, solve_dp_1d};
        let grid = Arc::new(Grid::new_1d(-1.0, 1.0, 8).unwrap());
        let vset = ValueSet::new(vec![-1, 0, 1]).unwrap();
        let base = ControlField::constant(grid.clone(), 0);
        let grad =
            GradientField::new(grid.clone(), (0..8).map(|i| (i as f64) - 3.5).collect()).unwrap();
        let patch = Patch::from_box(&grid, 0, [-0.8, 0.0], [0.8, 1.0]).unwrap();
        let sub = TrustRegionSubproblem {
            base,
            grad,
            patch,
            radius: 0.8,
            alpha: 0.05,
            values: vset,
        };
        let json = serde_json::to_string(&SubproblemFile::from_subproblem(&sub)).unwrap();
        let back: SubproblemFile = serde_json::from_str(&json).unwrap();
        let sub2 = back.into_subproblem().unwrap();
        let (a, _) = solve_dp_1d(&sub2).unwrap();
        let (b, _) = solve_bruteforce(&sub).unwrap();
        assert!((a.pred - b.pred).abs() <= 1e-12);
    }
}
