//! Soft-biometric person retrieval over annotated surveillance sequences.
//!
//! A semantic description (height class, torso type, two torso colors,
//! gender) is matched against per-frame person detections by a linear
//! cascade of filters: height from a calibrated camera, torso color from an
//! adaptively placed torso patch, then gender. When a stage leaves no
//! candidate, the previous frame's box is carried forward by maximum IoU.
//!
//! Module map:
//!
//! - [`model`]: taxonomy, annotations, queries, ground-truth boxes
//! - [`calib`]: Tsai camera model and height estimation
//! - [`detect`]: masks, run-length codec, detection providers
//! - [`patch`]: torso/leg bands, patch extraction, gamma adjustment
//! - [`attr`]: color and gender classifiers
//! - [`cascade`]: the filter cascade and IoU regression
//! - [`eval`]: IoU, TPR and evaluation reports
//! - [`synth`]: synthetic calibrated scene generator
//! - [`registry`]: name → strategy lookup used by the CLI

pub mod attr;
pub mod calib;
pub mod cascade;
pub mod detect;
pub mod error;
pub mod eval;
pub mod frames;
pub mod model;
pub mod patch;
pub mod registry;
mod rng;
pub mod synth;

pub use error::{Error, Result};
