//! Regression model laboratory for consumer-indebtedness style tabular data.
//!
//! The crate bundles four model families (ordinary least squares, random
//! forest regression, and multilayer perceptrons trained with either plain
//! gradient backpropagation or resilient backpropagation), a factor-analysis
//! toolkit, and a topology builder that sizes network hidden layers from the
//! retained factor count and the number of debtor classes. Everything is
//! evaluated through one k-fold cross-validation harness so that model
//! families see identical fold assignments.
//!
//! Module map:
//!
//! - [`dataset`]: the [`Table`] type, CSV I/O, the synthetic generator and the
//!   A–D dataset variants.
//! - [`linreg`]: Householder-QR least squares and residual diagnostics.
//! - [`forest`]: bootstrap-aggregated CART regression trees.
//! - [`neural`]: feed-forward networks, exact gradients, backprop and Rprop.
//! - [`factor`]: correlation eigendecomposition, scree, parallel analysis,
//!   loadings.
//! - [`topdnn`]: factor/class-defined network topologies.
//! - [`evalcv`]: fold plans, RMSE / R², cross-validation, hidden-size sweeps
//!   and the model comparison table.
//!
//! With the default `parallel` feature, folds, trees, sweep candidates and
//! simulations run on rayon. Every random draw comes from a named substream
//! of the run seed, so results do not depend on the thread count or on
//! whether the feature is enabled.

pub mod dataset;
pub mod encode;
pub mod error;
pub mod evalcv;
pub mod factor;
pub mod forest;
pub mod linalg;
pub mod linreg;
pub mod neural;
pub mod par;
pub mod rng;
pub mod topdnn;

pub use dataset::{DatasetVariant, GeneratorConfig, Table};
pub use error::{Error, Result};
