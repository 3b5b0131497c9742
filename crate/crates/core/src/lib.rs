//! Arithmetic-average (AA) and geometric-average (GA) fusion of point
//! estimates, probability densities and Gaussian-mixture intensities, with
//! the tools to compare their variance and mean squared error.
//!
//! - [`vfusion`]: AA/GA of random variables, closed-form AA variance and MSE,
//!   optimal weights and bounds.
//! - [`montecarlo`]: seeded correlated sample pairs and empirical weight sweeps.
//! - [`ffusion`]: AA/GA of Gaussian densities in closed form and of tabulated
//!   densities on a grid.
//! - [`gmfusion`]: Gaussian-mixture AA, approximate GA with cardinality
//!   consensus, reduction and state extraction.
//! - [`scenario`]: a multi-sensor detection/clutter generator feeding
//!   mixture fusion, plus a simple scoring pass.

// Validation uses `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod density;
pub mod error;
pub mod ffusion;
pub mod gmfusion;
pub mod montecarlo;
pub mod scenario;
pub mod vfusion;
pub mod weights;

pub use density::{
    moments_of_grid, mse_of_grid, Gaussian1D, GridDensity, MomentSummary, MseBreakdown, TruthContext,
};
pub use error::{FusionError, Result};
pub use weights::FusionWeights;
