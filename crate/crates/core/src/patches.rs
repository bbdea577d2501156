//! Overlapping patch covers of the grid.
//!
//! A patch is an axis-aligned box; it owns the cells whose centers lie in
//! the closed box. A patch set must cover every cell, and must overlap
//! strongly: every cell together with all its axis neighbors has to fit
//! inside at least one single patch. Termination of the driver reports
//! stationarity only relative to the cover, so violations are hard errors
//! by default.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// One patch: a box, its cells, and the interfaces it touches.
#[derive(Debug, Clone)]
pub struct Patch {
    pub id: usize,
    pub box_lower: [f64; 2],
    pub box_upper: [f64; 2],
    /// Cells whose centers lie in the closed box, ascending flat order.
    pub cells: Vec<usize>,
    /// Interfaces with both endpoint cells in the patch.
    pub interior_interfaces: Vec<usize>,
    /// Interfaces with exactly one endpoint cell in the patch.
    pub boundary_interfaces: Vec<usize>,
    /// Inclusive cell-index ranges per axis; with the center-in-closed-box
    /// rule the cells of a box patch always form a full index rectangle.
    pub cell_start: [usize; 2],
    pub cell_count: [usize; 2],
}

impl Patch {
    /// Builds a patch from a box on the given grid.
    pub fn from_box(grid: &Grid, id: usize, box_lower: [f64; 2], box_upper: [f64; 2]) -> Result<Patch> {
        let mut start = [0usize; 2];
        let mut count = [1usize; 2];
        for a in 0..grid.dim() {
            let h = grid.spacing(a);
            let mut first = None;
            let mut last = None;
            for i in 0..grid.n()[a] {
                let center = grid.lower()[a] + (i as f64 + 0.5) * h;
                if center >= box_lower[a] && center <= box_upper[a] {
                    if first.is_none() {
                        first = Some(i);
                    }
                    last = Some(i);
                }
            }
            match (first, last) {
                (Some(f), Some(l)) => {
                    start[a] = f;
                    count[a] = l - f + 1;
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "patch {id} contains no cell centers along axis {a}"
                    )))
                }
            }
        }

        let mut cells = Vec::with_capacity(count[0] * count[1]);
        for iy in start[1]..start[1] + count[1] {
            for ix in start[0]..start[0] + count[0] {
                cells.push(grid.flat(ix, iy));
            }
        }

        let mut member = vec![false; grid.n_cells()];
        for &c in &cells {
            member[c] = true;
        }
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for (idx, it) in grid.interfaces().iter().enumerate() {
            match (member[it.cell_a], member[it.cell_b]) {
                (true, true) => interior.push(idx),
                (true, false) | (false, true) => boundary.push(idx),
                (false, false) => {}
            }
        }

        Ok(Patch {
            id,
            box_lower,
            box_upper,
            cells,
            interior_interfaces: interior,
            boundary_interfaces: boundary,
            cell_start: start,
            cell_count: count,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn contains_cell(&self, cell: usize, grid: &Grid) -> bool {
        let (ix, iy) = grid.multi(cell);
        ix >= self.cell_start[0]
            && ix < self.cell_start[0] + self.cell_count[0]
            && iy >= self.cell_start[1]
            && iy < self.cell_start[1] + self.cell_count[1]
    }

    /// All interfaces with at least one endpoint in the patch.
    pub fn touching_interfaces(&self) -> impl Iterator<Item = usize> + '_ {
        self.interior_interfaces
            .iter()
            .chain(self.boundary_interfaces.iter())
            .copied()
    }
}

/// A finite cover of the grid by overlapping box patches.
#[derive(Debug, Clone)]
pub struct PatchSet {
    pub patches: Vec<Patch>,
    pub overlap: [f64; 2],
}

impl PatchSet {
    pub fn n_patches(&self) -> usize {
        self.patches.len()
    }
}

/// Report of `validate_cover`: which cells are uncovered, and which cells
/// have no single patch containing them together with every neighbor.
#[derive(Debug, Clone, Default)]
pub struct CoverReport {
    pub uncovered_cells: Vec<usize>,
    pub split_neighborhood_cells: Vec<usize>,
}

impl CoverReport {
    pub fn is_ok(&self) -> bool {
        self.uncovered_cells.is_empty() && self.split_neighborhood_cells.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::CoverViolation(format!(
                "{} uncovered cells (first: {:?}), {} cells with split neighborhoods (first: {:?})",
                self.uncovered_cells.len(),
                self.uncovered_cells.first(),
                self.split_neighborhood_cells.len(),
                self.split_neighborhood_cells.first()
            )))
        }
    }
}

/// Checks the cover and strong-overlap properties of a patch set by
/// enumeration over all cells.
pub fn validate_cover(patchset: &PatchSet, grid: &Grid) -> CoverReport {
    let mut report = CoverReport::default();
    for cell in 0..grid.n_cells() {
        let covered = patchset.patches.iter().any(|p| p.contains_cell(cell, grid));
        if !covered {
            report.uncovered_cells.push(cell);
        }
        let nbrs = grid.neighbors(cell).expect("cell index in range");
        let strongly = patchset.patches.iter().any(|p| {
            p.contains_cell(cell, grid) && nbrs.iter().all(|&b| p.contains_cell(b, grid))
        });
        if !strongly {
            report.split_neighborhood_cells.push(cell);
        }
    }
    report
}

/// Per-axis box breakpoints for `n` patches of uniform size, uniformly
/// distributed, sized so that consecutive boxes share an overlap region.
///
/// Each box has length `(extent + overlap) / n`; box starts are spaced
/// evenly so the first box begins at the lower domain bound and the last
/// ends at the upper bound. With two boxes per axis and overlap 0.2 on a
/// unit axis this yields (0, 0.6) and (0.4, 1); with three boxes the
/// breakpoints are 0, 0.3, 0.4, 0.6, 0.7, 1.
fn axis_boxes(lower: f64, extent: f64, n: usize, overlap: f64) -> Result<Vec<(f64, f64)>> {
    if n == 1 {
        return Ok(vec![(lower, lower + extent)]);
    }
    let len = (extent + overlap) / n as f64;
    if len > extent + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "overlap {overlap} makes patches longer than the axis extent {extent}"
        )));
    }
    let step = (extent - len) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let a = lower + i as f64 * step;
            (a, a + len)
        })
        .collect())
}

/// Builds the uniform overlapping patch layout and validates the cover
/// and strong-overlap properties (hard error on violation).
pub fn make_uniform_patches(
    grid: &Grid,
    n_per_axis: [usize; 2],
    overlap_per_axis: [f64; 2],
) -> Result<PatchSet> {
    let set = make_uniform_patches_unchecked(grid, n_per_axis, overlap_per_axis)?;
    validate_cover(&set, grid).into_result()?;
    Ok(set)
}

/// Same layout as [`make_uniform_patches`] but skips the cover
/// validation; callers opting in must treat stationarity reports with
/// care.
pub fn make_uniform_patches_unchecked(
    grid: &Grid,
    n_per_axis: [usize; 2],
    overlap_per_axis: [f64; 2],
) -> Result<PatchSet> {
    for a in 0..grid.dim() {
        if n_per_axis[a] == 0 {
            return Err(Error::InvalidArgument("need at least one patch per axis".into()));
        }
        if overlap_per_axis[a] < 0.0 {
            return Err(Error::InvalidArgument("patch overlap must be >= 0".into()));
        }
    }
    let bx = axis_boxes(grid.lower()[0], grid.extent(0), n_per_axis[0], overlap_per_axis[0])?;
    let by = if grid.dim() == 2 {
        axis_boxes(grid.lower()[1], grid.extent(1), n_per_axis[1], overlap_per_axis[1])?
    } else {
        vec![(0.0, 1.0)]
    };

    let mut patches = Vec::with_capacity(bx.len() * by.len());
    for (a1, b1) in &by {
        for (a0, b0) in &bx {
            let id = patches.len();
            patches.push(Patch::from_box(grid, id, [*a0, *a1], [*b0, *b1])?);
        }
    }
    Ok(PatchSet {
        patches,
        overlap: overlap_per_axis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn two_by_two_boxes_on_unit_square() {
        let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], [16, 16]).unwrap();
        let set = make_uniform_patches(&g, [2, 2], [0.2, 0.2]).unwrap();
        assert_eq!(set.n_patches(), 4);
        let expect = [
            ([0.0, 0.0], [0.6, 0.6]),
            ([0.4, 0.0], [1.0, 0.6]),
            ([0.0, 0.4], [0.6, 1.0]),
            ([0.4, 0.4], [1.0, 1.0]),
        ];
        for (p, (lo, hi)) in set.patches.iter().zip(expect) {
            assert!(close(p.box_lower[0], lo[0]) && close(p.box_lower[1], lo[1]));
            assert!(close(p.box_upper[0], hi[0]) && close(p.box_upper[1], hi[1]));
        }
    }

    #[test]
    fn three_by_three_breakpoints() {
        let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], [30, 30]).unwrap();
        let set = make_uniform_patches(&g, [3, 3], [0.2, 0.2]).unwrap();
        assert_eq!(set.n_patches(), 9);
        // axis breakpoints 0, .3, .4, .6, .7, 1
        let xs: Vec<(f64, f64)> = set.patches[0..3]
            .iter()
            .map(|p| (p.box_lower[0], p.box_upper[0]))
            .collect();
        assert!(close(xs[0].0, 0.0) && close(xs[0].1, 0.4));
        assert!(close(xs[1].0, 0.3) && close(xs[1].1, 0.7));
        assert!(close(xs[2].0, 0.6) && close(xs[2].1, 1.0));
    }

    #[test]
    fn single_patch_is_whole_domain() {
        let g = Grid::new_1d(-1.0, 1.0, 8).unwrap();
        let set = make_uniform_patches(&g, [1, 1], [0.7, 0.0]).unwrap();
        assert_eq!(set.n_patches(), 1);
        let p = &set.patches[0];
        assert_eq!(p.n_cells(), 8);
        assert!(close(p.box_lower[0], -1.0) && close(p.box_upper[0], 1.0));
        assert!(validate_cover(&set, &g).is_ok());
    }

    #[test]
    fn fig_layout_covers_64_grid() {
        let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], [64, 64]).unwrap();
        let set = make_uniform_patches(&g, [2, 2], [0.2, 0.2]).unwrap();
        assert!(validate_cover(&set, &g).is_ok());
        let set = make_uniform_patches(&g, [3, 3], [0.2, 0.2]).unwrap();
        assert!(validate_cover(&set, &g).is_ok());
    }

    #[test]
    fn disjoint_halves_fail_strong_overlap() {
        let g = Grid::new_1d(0.0, 1.0, 8).unwrap();
        let set = make_uniform_patches_unchecked(&g, [2, 1], [0.0, 0.0]).unwrap();
        let report = validate_cover(&set, &g);
        assert!(report.uncovered_cells.is_empty());
        // the two cells adjacent to the midline have neighbors in no
        // common patch
        assert_eq!(report.split_neighborhood_cells, vec![3, 4]);
        assert!(make_uniform_patches(&g, [2, 1], [0.0, 0.0]).is_err());
    }

    #[test]
    fn oversized_overlap_rejected() {
        let g = Grid::new_1d(0.0, 1.0, 8).unwrap();
        assert!(make_uniform_patches(&g, [2, 1], [1.5, 0.0]).is_err());
    }

    #[test]
    fn strong_overlap_property_enumerated() {
        // every cell plus all neighbors inside one patch, several layouts
        for (n, np, ov) in [(16, 2, 0.2), (32, 3, 0.2), (12, 2, 0.3)] {
            let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], [n, n]).unwrap();
            let set = make_uniform_patches(&g, [np, np], [ov, ov]).unwrap();
            for cell in 0..g.n_cells() {
                let nbrs = g.neighbors(cell).unwrap();
                assert!(set.patches.iter().any(|p| p.contains_cell(cell, &g)
                    && nbrs.iter().all(|&b| p.contains_cell(b, &g))));
            }
        }
    }

    #[test]
    fn interface_classification_consistent() {
        let g = Grid::new_2d([0.0, 0.0], [1.0, 1.0], [8, 8]).unwrap();
        let set = make_uniform_patches(&g, [2, 2], [0.3, 0.3]).unwrap();
        for p in &set.patches {
            let mut member = vec![false; g.n_cells()];
            for &c in &p.cells {
                member[c] = true;
            }
            let mut touching = 0;
            for (idx, it) in g.interfaces().iter().enumerate() {
                let a = member[it.cell_a];
                let b = member[it.cell_b];
                if a && b {
                    assert!(p.interior_interfaces.contains(&idx));
                    touching += 1;
                } else if a || b {
                    assert!(p.boundary_interfaces.contains(&idx));
                    touching += 1;
                }
            }
            assert_eq!(touching, p.interior_interfaces.len() + p.boundary_interfaces.len());
        }
    }
}
