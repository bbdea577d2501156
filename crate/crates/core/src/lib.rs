//! Solver library for total-variation-regularized integer optimal
//! control on uniform 1D/2D grids.
//!
//! The driver ([`slip`]) runs a trust-region method whose subproblems are
//! restricted to overlapping patches of the domain and solved exactly by
//! combinatorial solvers ([`trsub`]). Two benchmark forward models and a
//! quadratic toy model live in [`model`]; grids, integer control fields
//! and patch covers in [`grid`], [`control`] and [`patches`].

pub mod cli;
pub mod config;
pub mod control;
pub mod error;
pub mod grid;
pub mod io;
pub mod model;
pub mod patches;
pub mod slip;
pub mod trsub;

pub use error::{Error, Result};
