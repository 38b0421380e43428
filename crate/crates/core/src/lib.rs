//! Partial-label learning with a guided prototypical classifier.
//!
//! A shared encoder feeds a linear classifier and a projector. The
//! classifier's predictions, restricted to each example's candidate labels
//! and smoothed by an exponential moving average, become soft targets. Those
//! targets train the classifier through cross-entropy and pull a
//! prototype-based similarity distribution toward them through a KL
//! alignment term computed on mixup-interpolated inputs. Class prototypes
//! follow the projected embeddings by moving average.
//!
//! Modules, bottom-up:
//!
//! - [`numerics`]: matrices, layers with explicit backward passes, losses, SGD, gradient checking
//! - [`data`]: datasets, candidate-set generators, augmentations, mixup, CSV IO
//! - [`model`]: encoder / projector / classifier, forward caches, prototypes, checkpoints
//! - [`papi`]: the training objective and loop
//! - [`eval`]: accuracy and representation diagnostics
//! - [`experiment`]: config files, experiment commands and SVG plots

pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod model;
pub mod numerics;
pub mod papi;
pub mod rng;

pub use error::{Error, Result};
