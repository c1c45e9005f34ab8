//! Surgical skill classification from simulator recordings.
//!
//! The pipeline turns raw tool-tip kinematics, contact force and pedal state
//! into a 68-entry parametric feature catalog, normalizes it exponentially,
//! ranks features with a t-test filter followed by greedy forward selection,
//! and scores four classifiers (k-nearest neighbors, Parzen window, SVM and
//! fuzzy k-nearest neighbors) by their equal error rate over repeated
//! stratified train/test splits.
//!
//! A seeded synthetic generator ([`datagen`]) stands in for recorded data.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod io;
pub mod selection;
pub mod signal;
pub mod stats;

pub use error::{Error, Result};
pub use features::{FeatureId, FeatureMatrix, FeatureVector};
pub use signal::{Channel, Dataset, Label, Region, Trial};
