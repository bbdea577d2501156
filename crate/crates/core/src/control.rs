//! Integer control fields: admissible value sets, discrete total
//! variation, L1 distances and patch splicing.
//!
//! The discrete TV is the anisotropic grid TV: the sum over interior
//! interfaces of interface measure times absolute jump. Jumps are
//! integers and all interfaces of a uniform grid share one measure, so
//! TV and L1 quantities are carried as integer "units" and scaled by the
//! measure (resp. cell volume) only on output. This keeps acceptance
//! comparisons free of accumulated float drift.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// The ordered set W of admissible integer control values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueSet {
    values: Vec<i32>,
}

impl ValueSet {
    pub fn new(values: Vec<i32>) -> Result<ValueSet> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("value set must be nonempty".into()));
        }
        if !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "value set must be strictly increasing".into(),
            ));
        }
        Ok(ValueSet { values })
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> i32 {
        self.values[0]
    }

    pub fn max(&self) -> i32 {
        *self.values.last().unwrap()
    }

    /// Largest absolute difference between two admissible values.
    pub fn range(&self) -> i64 {
        self.max() as i64 - self.min() as i64
    }

    pub fn contains(&self, v: i32) -> bool {
        self.values.binary_search(&v).is_ok()
    }

    /// The admissible value closest to zero; ties go to the smaller value.
    pub fn closest_to_zero(&self) -> i32 {
        *self
            .values
            .iter()
            .min_by_key(|&&v| ((v as i64).abs(), v as i64))
            .unwrap()
    }
}

/// A piecewise-constant integer control on a grid, one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    grid: Arc<Grid>,
    values: Vec<i32>,
}

impl ControlField {
    /// Builds a field after checking feasibility against `vset`.
    pub fn new(grid: Arc<Grid>, values: Vec<i32>, vset: &ValueSet) -> Result<ControlField> {
        if values.len() != grid.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values but grid has {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if let Some(v) = values.iter().find(|v| !vset.contains(**v)) {
            return Err(Error::InvalidArgument(format!(
                "value {v} is not in the admissible set {:?}",
                vset.values()
            )));
        }
        Ok(ControlField { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, value: i32) -> ControlField {
        let n = grid.n_cells();
        ControlField {
            grid,
            values: vec![value; n],
        }
    }

    /// Builds a field without a feasibility check. The caller guarantees
    /// the values are admissible.
    pub fn from_values_unchecked(grid: Arc<Grid>, values: Vec<i32>) -> ControlField {
        debug_assert_eq!(values.len(), grid.n_cells());
        ControlField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    #[inline]
    pub fn value(&self, cell: usize) -> i32 {
        self.values[cell]
    }

    /// Total variation in integer jump units: sum over interior
    /// interfaces of |w_a - w_b|. Multiply by the interface measure to
    /// get TV.
    pub fn tv_units(&self) -> i64 {
        self.grid
            .interfaces()
            .iter()
            .map(|it| (self.values[it.cell_a] as i64 - self.values[it.cell_b] as i64).abs())
            .sum()
    }

    /// Discrete total variation.
    pub fn tv(&self) -> f64 {
        self.tv_units() as f64 * self.grid.interface_measure()
    }

    /// Total variation scaled by a weight (typically alpha).
    pub fn tv_weighted(&self, alpha: f64) -> f64 {
        alpha * self.tv()
    }

    /// TV restricted to a subset of interfaces, given by indices into
    /// `grid.interfaces()`.
    pub fn tv_restricted_units(&self, interface_ids: &[usize]) -> Result<i64> {
        let ifs = self.grid.interfaces();
        let mut units = 0i64;
        for &id in interface_ids {
            let it = ifs.get(id).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "interface index {id} out of range ({} interfaces)",
                    ifs.len()
                ))
            })?;
            units += (self.values[it.cell_a] as i64 - self.values[it.cell_b] as i64).abs();
        }
        Ok(units)
    }

    pub fn tv_restricted(&self, interface_ids: &[usize]) -> Result<f64> {
        Ok(self.tv_restricted_units(interface_ids)? as f64 * self.grid.interface_measure())
    }

    /// L1 distance in integer units: sum over cells of |a_i - b_i|.
    /// Multiply by the cell volume to get the L1 norm of the difference.
    pub fn l1_units(&self, other: &ControlField) -> Result<i64> {
        if !self.grid.same_geometry(&other.grid) {
            return Err(Error::GridMismatch(
                "l1 distance requires both fields on the same grid".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a as i64 - *b as i64).abs())
            .sum())
    }

    pub fn l1_distance(&self, other: &ControlField) -> Result<f64> {
        Ok(self.l1_units(other)? as f64 * self.grid.cell_volume())
    }

    /// Returns a field equal to `donor` on `patch_cells` and to `self`
    /// elsewhere.
    pub fn splice(&self, patch_cells: &[usize], donor: &ControlField) -> Result<ControlField> {
        if !self.grid.same_geometry(&donor.grid) {
            return Err(Error::GridMismatch(
                "splice requires base and donor on the same grid".into(),
            ));
        }
        let mut values = self.values.clone();
        for &c in patch_cells {
            if c >= values.len() {
                return Err(Error::InvalidArgument(format!("patch cell {c} out of range")));
            }
            values[c] = donor.values[c];
        }
        Ok(ControlField {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Cell values as f64, for model evaluation.
    pub fn to_real(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}
