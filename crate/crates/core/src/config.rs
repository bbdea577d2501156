//! Run configuration: a JSON file with model, grid, patches, algorithm
//! and output sections. Missing entries fall back to the benchmark
//! defaults of the respective model kind.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::control::{ControlField, ValueSet};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{Conv1dModel, Model, Pde2dModel, QuadraticModel};
use crate::model::{DEFAULT_C2, DEFAULT_EPS, DEFAULT_TAU};
use crate::patches::{make_uniform_patches, make_uniform_patches_unchecked, PatchSet};
use crate::slip::SlipConfig;
use crate::trsub::DEFAULT_DFS_CELL_CAP;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub patches: PatchesSection,
    #[serde(default)]
    pub algorithm: AlgorithmSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// "conv1d", "pde2d" or "quadratic".
    pub kind: String,
    pub alpha: f64,
    /// Admissible integer values; defaults to {-1,0,1} in 1D and {0,1}
    /// in 2D.
    #[serde(default)]
    pub values: Option<Vec<i32>>,
    /// conv1d kernel decay time.
    #[serde(default)]
    pub tau: Option<f64>,
    /// pde2d diffusion coefficient.
    #[serde(default)]
    pub eps: Option<f64>,
    /// pde2d reaction coefficient.
    #[serde(default)]
    pub c2: Option<f64>,
    /// quadratic tracking target, one real per cell (default zero).
    #[serde(default)]
    pub target: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Cells per axis (a square grid in 2D).
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub lower: Option<Vec<f64>>,
    #[serde(default)]
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchesSection {
    /// Patches per axis; defaults to 1 (whole domain).
    #[serde(default)]
    pub n_per_axis: Option<Vec<usize>>,
    /// Overlap parameter per axis; defaults to 0.2 in 1D and 0.1 in 2D.
    #[serde(default)]
    pub overlap: Option<Vec<f64>>,
    /// Downgrade cover violations to warnings.
    #[serde(default)]
    pub allow_weak_cover: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    #[serde(default)]
    pub delta0: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    /// Defaults to 1000 in 1D and 100 in 2D.
    #[serde(default)]
    pub max_outer_iters: Option<usize>,
    /// Gradient Lipschitz constant override; derived from the model
    /// when absent.
    #[serde(default)]
    pub lipschitz: Option<f64>,
    #[serde(default)]
    pub k_cap: Option<u32>,
    #[serde(default)]
    pub parallel: bool,
    #[serde(default)]
    pub dfs_cell_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory; nothing is written when absent.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// JSON-lines iteration log (default on).
    #[serde(default = "default_true")]
    pub iteration_log: bool,
    #[serde(default = "default_true")]
    pub summary_csv: bool,
    /// Start/final control fields as flat integer text (default on).
    #[serde(default = "default_true")]
    pub fields: bool,
    /// PGM snapshots of the start and final control (2D only).
    #[serde(default = "default_true")]
    pub pgm: bool,
    /// State and target CSV grids (pde2d only, default off).
    #[serde(default)]
    pub states: bool,
    /// Patch layout JSON (default on).
    #[serde(default = "default_true")]
    pub patch_layout: bool,
    /// Start iterate file (flat integer text); constant default start
    /// when absent.
    #[serde(default)]
    pub w0_path: Option<PathBuf>,
}

fn default_true() -> bool {
    true
}

/// A fully resolved run setup.
pub struct Setup {
    pub grid: Arc<Grid>,
    pub values: ValueSet,
    pub model: Model,
    pub alpha: f64,
    pub patches: PatchSet,
    pub slip: SlipConfig,
    pub w0: ControlField,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn dim(&self) -> Result<usize> {
        match self.model.kind.as_str() {
            "conv1d" => Ok(1),
            "pde2d" => Ok(2),
            "quadratic" => Ok(if self.grid_dim_hint() == 2 { 2 } else { 1 }),
            other => Err(Error::Config(format!(
                "unknown model kind {other:?} (expected conv1d, pde2d or quadratic)"
            ))),
        }
    }

    fn grid_dim_hint(&self) -> usize {
        self.grid
            .lower
            .as_ref()
            .or(self.grid.upper.as_ref())
            .map(|v| v.len())
            .unwrap_or(1)
    }

    /// Validates and materializes grid, model, patches, driver config
    /// and start iterate.
    pub fn resolve(&self) -> Result<Setup> {
        let dim = self.dim()?;
        let is_2d = dim == 2;

        let n = self.grid.n.unwrap_or(if is_2d { 16 } else { 256 });
        let default_lower = if is_2d { vec![0.0, 0.0] } else { vec![-1.0] };
        let default_upper = if is_2d { vec![1.0, 1.0] } else { vec![1.0] };
        let lower = self.grid.lower.clone().unwrap_or(default_lower);
        let upper = self.grid.upper.clone().unwrap_or(default_upper);
        if lower.len() != dim || upper.len() != dim {
            return Err(Error::Config(format!(
                "grid bounds must have {dim} entries for a {dim}D model"
            )));
        }
        let grid = Arc::new(if is_2d {
            Grid::new_2d([lower[0], lower[1]], [upper[0], upper[1]], [n, n])?
        } else {
            Grid::new_1d(lower[0], upper[0], n)?
        });

        let values = ValueSet::new(
            self.model
                .values
                .clone()
                .unwrap_or(if is_2d { vec![0, 1] } else { vec![-1, 0, 1] }),
        )?;

        let model = match self.model.kind.as_str() {
            "conv1d" => Model::Conv1d(Conv1dModel::new(
                grid.clone(),
                self.model.tau.unwrap_or(DEFAULT_TAU),
            )?),
            "pde2d" => Model::Pde2d(Pde2dModel::new(
                grid.clone(),
                self.model.eps.unwrap_or(DEFAULT_EPS),
                self.model.c2.unwrap_or(DEFAULT_C2),
                values.clone(),
            )?),
            "quadratic" => {
                let target = self
                    .model
                    .target
                    .clone()
                    .unwrap_or_else(|| vec![0.0; grid.n_cells()]);
                Model::Quadratic(QuadraticModel::new(grid.clone(), target)?)
            }
            other => return Err(Error::Config(format!("unknown model kind {other:?}"))),
        };

        let np = match &self.patches.n_per_axis {
            Some(v) if v.len() == dim => {
                if is_2d {
                    [v[0], v[1]]
                } else {
                    [v[0], 1]
                }
            }
            Some(v) if v.len() == 1 => {
                if is_2d {
                    [v[0], v[0]]
                } else {
                    [v[0], 1]
                }
            }
            Some(_) => {
                return Err(Error::Config("patches.n_per_axis length must match dim".into()))
            }
            None => [1, 1],
        };
        let default_overlap = if is_2d { 0.1 } else { 0.2 };
        let overlap = match &self.patches.overlap {
            Some(v) if v.len() == dim => {
                if is_2d {
                    [v[0], v[1]]
                } else {
                    [v[0], 0.0]
                }
            }
            Some(v) if v.len() == 1 => {
                if is_2d {
                    [v[0], v[0]]
                } else {
                    [v[0], 0.0]
                }
            }
            Some(_) => return Err(Error::Config("patches.overlap length must match dim".into())),
            None => {
                if is_2d {
                    [default_overlap, default_overlap]
                } else {
                    [default_overlap, 0.0]
                }
            }
        };
        let patches = if self.patches.allow_weak_cover {
            make_uniform_patches_unchecked(&grid, np, overlap)?
        } else {
            make_uniform_patches(&grid, np, overlap)?
        };

        let lipschitz = match self.algorithm.lipschitz {
            Some(l) => l,
            None => model.lipschitz_bound()?,
        };
        let slip = SlipConfig {
            delta0: self.algorithm.delta0.unwrap_or(0.125),
            sigma: self.algorithm.sigma.unwrap_or(1e-4),
            max_outer_iters: self
                .algorithm
                .max_outer_iters
                .unwrap_or(if is_2d { 100 } else { 1000 }),
            k_cap: self.algorithm.k_cap,
            lipschitz,
            parallel: self.algorithm.parallel,
            dfs_cell_cap: self.algorithm.dfs_cell_cap.unwrap_or(DEFAULT_DFS_CELL_CAP),
            allow_weak_cover: self.patches.allow_weak_cover,
            collect_iterates: false,
        };
        slip.validate()?;

        let w0 = match &self.output.w0_path {
            Some(p) => crate::io::read_field_txt(p, grid.clone(), &values)?,
            None => ControlField::constant(grid.clone(), values.closest_to_zero()),
        };

        Ok(Setup {
            grid,
            values,
            model,
            alpha: self.model.alpha,
            patches,
            slip,
            w0,
            output: self.output.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_conv1d_config_resolves_with_benchmark_defaults() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"model": {"kind": "conv1d", "alpha": 5e-4}, "grid": {"n": 32}}"#,
        )
        .unwrap();
        let setup = cfg.resolve().unwrap();
        assert_eq!(setup.grid.dim(), 1);
        assert_eq!(setup.grid.n_cells(), 32);
        assert_eq!(setup.values.values(), &[-1, 0, 1]);
        assert_eq!(setup.slip.delta0, 0.125);
        assert_eq!(setup.slip.sigma, 1e-4);
        assert_eq!(setup.slip.max_outer_iters, 1000);
        assert_eq!(setup.patches.n_patches(), 1);
        assert!(setup.w0.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn sigma_bound_reported() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"model": {"kind": "conv1d", "alpha": 1e-3},
                "grid": {"n": 16},
                "algorithm": {"sigma": 1.5}}"#,
        )
        .unwrap();
        let err = match cfg.resolve() {
            Err(e) => e,
            Ok(_) => panic!("expected sigma validation error"),
        };
        assert!(err.to_string().contains("sigma must be in (0,1)"));
    }

    #[test]
    fn unknown_fields_rejected() {
        let res: std::result::Result<RunConfig, _> = serde_json::from_str(
            r#"{"model": {"kind": "conv1d", "alpha": 1e-3, "bogus": 1}}"#,
        );
        assert!(res.is_err());
    }

    #[test]
    fn pde2d_defaults() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"model": {"kind": "pde2d", "alpha": 1e-3}, "grid": {"n": 4}}"#,
        )
        .unwrap();
        let setup = cfg.resolve().unwrap();
        assert_eq!(setup.grid.dim(), 2);
        assert_eq!(setup.values.values(), &[0, 1]);
        assert_eq!(setup.slip.max_outer_iters, 100);
    }
}
