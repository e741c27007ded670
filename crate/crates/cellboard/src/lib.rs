//! Gibbs-measure uniqueness maps for the cell-board Ising model.
//!
//! The model is a ferromagnetic nearest-neighbour Ising model on the
//! square lattice with a staggered external field that is constant on
//! `L1 x L2` rectangular cells and alternates sign in a chess-board
//! pattern of cells. This crate evaluates three sufficient uniqueness
//! criteria exactly:
//!
//! * disagreement percolation, comparing the worst-case single-site
//!   disagreement probability against a site-percolation threshold;
//! * the single-site influence bound (one neighbour flip, threshold
//!   1/4);
//! * its multi-site window generalization (one boundary-spin flip on
//!   an `n x n` window, threshold 1), maximized over all distinct
//!   placements of the staggered field.
//!
//! On top of the point evaluations, [`sweep`] traces uniqueness
//! boundaries over parameter grids and [`report`] serializes curves to
//! CSV/JSON and renders SVG phase diagrams.

pub mod criteria;
pub mod error;
pub mod field;
pub mod gibbs;
pub mod parallel;
pub mod report;
pub mod sweep;

pub use criteria::{
    alpha_st, dc_gamma, dc_unique, dp_p, dp_unique, ds_gamma, ds_gamma_with, enumerate_placements,
    Criterion, CriterionEvaluation, DsOptions, DsOutcome, FieldPlacement, PlacementMode, ThermoPoint,
    DC_THRESHOLD, DEFAULT_PC_BOUND, DS_THRESHOLD,
};
pub use error::{Error, Result};
pub use field::{critical_field, energy_density, CellSize, FieldSpec, GroundStateKind, ModelParams};
pub use gibbs::{
    build_energy_tables, build_window, single_site_tv, BoundaryConfig, EnergyTables, InteriorConfig,
    SquareWindow, WindowField,
};
