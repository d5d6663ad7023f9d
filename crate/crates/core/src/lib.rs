//! Full-reference stereoscopic image quality assessment by parallel
//! boosting: distortion-targeted nu-SVR scorers whose outputs are fused by a
//! second nu-SVR.
//!
//! Stage I extracts per-view features ([`features`], [`depth`]) and trains
//! one regressor per scorer ([`svr`]); stage II fuses the score vectors
//! ([`paraboost`]). [`eval`] reports PCC, SROCC and RMSE after a logistic
//! remap.

pub mod dataset;
pub mod depth;
pub mod error;
pub mod eval;
pub mod features;
pub mod image;
pub mod paraboost;
pub mod svr;
pub mod synth;

pub use dataset::{load_manifest, write_manifest, ManifestLayout, Sample, ViewSet};
pub use error::{Error, Result};
pub use eval::{evaluate, EvalReport};
pub use features::{FeatureConfig, FeatureExtractor, FeatureId};
pub use image::{load_image, ColorImage, DepthMap, Image, LoadMode};
pub use svr::{SvrConfig, SvrModel};
