//! Unsupervised outlier detection with one full-space generator and an
//! ensemble of subspace detectors trained adversarially, followed by an
//! active-learning phase for the detectors.
//!
//! The crate bundles everything needed to train and evaluate the detector:
//!
//! - [`nn`]: a small dense network engine with hand-written backpropagation;
//! - [`subspace`]: feature masks and the averaged-marginal statistic;
//! - [`gsaal`]: the model, its training loop and JSON persistence;
//! - [`baselines`]: exact kNN and LOF scorers;
//! - [`datagen`]: synthetic shapes, inlier-assumption outlier sets, MMD;
//! - [`eval`]: splits, ROC AUC, parameter sweeps and timing runs;
//! - [`cli`]: the command implementations behind the `gsaal` binary.
//!
//! ```no_run
//! use gsaal::datagen::{generate_shape, Shape, ShapeSpec};
//! use gsaal::gsaal::{fit, TrainConfig};
//! use gsaal::subspace::{default_k, draw_masks};
//!
//! let data = generate_shape(&ShapeSpec::new(Shape::Banana, 960, 7));
//! let masks = draw_masks(data.dim(), default_k(data.dim()), 7)?;
//! let (model, _trace) = fit(&data.points, &masks, &TrainConfig::with_epochs(100, 7))?;
//! let scores = model.score(&data.points)?;
//! # Ok::<(), gsaal::Error>(())
//! ```

pub mod baselines;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod gsaal;
pub mod io;
pub mod matrix;
pub mod nn;
pub mod subspace;

pub use error::{Error, Result};
pub use matrix::Matrix;
