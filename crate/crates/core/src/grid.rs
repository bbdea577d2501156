//! Uniform 1D/2D tensor grids: cells, volumes, interior interfaces and
//! cell adjacency.
//!
//! Cells are ordered row by row: in 2D the flat index of the cell with
//! multi-index `(ix, iy)` is `iy * nx + ix` (x varies fastest). All
//! downstream determinism (interface order, neighbor order, solver scan
//! order) relies on this ordering.

use crate::error::{Error, Result};

/// An interior interface between two axis-adjacent cells.
///
/// `measure` is the (d-1)-dimensional measure of the shared face: 1 in 1D
/// (a point carries counting measure 1), the edge length `h` in 2D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub cell_a: usize,
    pub cell_b: usize,
    pub measure: f64,
}

/// A uniform tensor grid over an axis-aligned box domain.
#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    lower: [f64; 2],
    upper: [f64; 2],
    n: [usize; 2],
    cell_volume: f64,
    interface_measure: f64,
    interfaces: Vec<Interface>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.lower == other.lower
            && self.upper == other.upper
            && self.n == other.n
    }
}

impl Grid {
    /// Builds a 1D grid of `n` cells on the interval `(lower, upper)`.
    pub fn new_1d(lower: f64, upper: f64, n: usize) -> Result<Grid> {
        Self::build(1, [lower, 0.0], [upper, 1.0], [n, 1])
    }

    /// Builds a 2D grid of `nx` by `ny` square cells on the given box.
    ///
    /// The cell spacing must be equal along both axes; a single interface
    /// measure is attached to the grid.
    pub fn new_2d(lower: [f64; 2], upper: [f64; 2], n: [usize; 2]) -> Result<Grid> {
        Self::build(2, lower, upper, n)
    }

    fn build(dim: usize, lower: [f64; 2], upper: [f64; 2], n: [usize; 2]) -> Result<Grid> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("dim must be 1 or 2, got {dim}")));
        }
        for a in 0..dim {
            if n[a] == 0 {
                return Err(Error::InvalidArgument(format!("axis {a}: cell count must be >= 1")));
            }
            if !(upper[a] - lower[a]).is_finite() || upper[a] <= lower[a] {
                return Err(Error::InvalidArgument(format!(
                    "axis {a}: domain extent must be positive, got ({}, {})",
                    lower[a], upper[a]
                )));
            }
        }
        let hx = (upper[0] - lower[0]) / n[0] as f64;
        let (cell_volume, interface_measure) = if dim == 1 {
            (hx, 1.0)
        } else {
            let hy = (upper[1] - lower[1]) / n[1] as f64;
            if (hx - hy).abs() > 1e-12 * hx.abs().max(hy.abs()) {
                return Err(Error::InvalidArgument(format!(
                    "2D cells must be square: hx = {hx}, hy = {hy}"
                )));
            }
            (hx * hy, hx)
        };

        let mut grid = Grid {
            dim,
            lower,
            upper,
            n,
            cell_volume,
            interface_measure,
            interfaces: Vec::new(),
        };
        grid.rebuild_interfaces();
        Ok(grid)
    }

    fn rebuild_interfaces(&mut self) {
        let (nx, ny) = (self.n[0], self.n[1]);
        let mut interfaces = Vec::with_capacity(self.n_cells() * self.dim);
        for iy in 0..ny {
            for ix in 0..nx {
                let c = self.flat(ix, iy);
                if ix + 1 < nx {
                    interfaces.push(Interface {
                        cell_a: c,
                        cell_b: self.flat(ix + 1, iy),
                        measure: self.interface_measure,
                    });
                }
                if iy + 1 < ny {
                    interfaces.push(Interface {
                        cell_a: c,
                        cell_b: self.flat(ix, iy + 1),
                        measure: self.interface_measure,
                    });
                }
            }
        }
        self.interfaces = interfaces;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis; `n()[1] == 1` in 1D.
    pub fn n(&self) -> [usize; 2] {
        self.n
    }

    pub fn lower(&self) -> [f64; 2] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Cell spacing along an axis.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.extent(axis) / self.n[axis] as f64
    }

    pub fn n_cells(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn interface_measure(&self) -> f64 {
        self.interface_measure
    }

    pub fn interfaces(&self) -> &[Interface] {
        &self.interfaces
    }

    #[inline]
    pub fn flat(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.n[0] && iy < self.n[1]);
        iy * self.n[0] + ix
    }

    #[inline]
    pub fn multi(&self, cell: usize) -> (usize, usize) {
        (cell % self.n[0], cell / self.n[0])
    }

    /// Center coordinates of a cell; the second component is meaningless
    /// in 1D.
    pub fn cell_center(&self, cell: usize) -> [f64; 2] {
        let (ix, iy) = self.multi(cell);
        [
            self.lower[0] + (ix as f64 + 0.5) * self.spacing(0),
            if self.dim == 2 {
                self.lower[1] + (iy as f64 + 0.5) * self.spacing(1)
            } else {
                0.0
            },
        ]
    }

    /// Axis-adjacent cells of `cell`, in ascending flat-index order.
    pub fn neighbors(&self, cell: usize) -> Result<Vec<usize>> {
        if cell >= self.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "cell index {cell} out of range (grid has {} cells)",
                self.n_cells()
            )));
        }
        let (ix, iy) = self.multi(cell);
        let mut out = Vec::with_capacity(2 * self.dim);
        if iy > 0 {
            out.push(self.flat(ix, iy - 1));
        }
        if ix > 0 {
            out.push(self.flat(ix - 1, iy));
        }
        if ix + 1 < self.n[0] {
            out.push(self.flat(ix + 1, iy));
        }
        if iy + 1 < self.n[1] {
            out.push(self.flat(ix, iy + 1));
        }
        Ok(out)
    }

    pub fn same_geometry(&self, other: &Grid) -> bool {
        self == other
    }
}
