//! Detection of bone marrow cells (BMC) in stained microscopy images.
//!
//! The pipeline runs in three stages: localization of candidate cells from a
//! color-enhanced image, precise segmentation of nucleus and cell body, and
//! classification of a 39-entry feature vector with a one-vs-one RBF SVM.
//! A deterministic synthetic scene generator provides ground truth for
//! end-to-end testing in place of proprietary clinical data.

pub mod classification;
pub mod colortransforms;
pub mod features;
pub mod imgcore;
pub mod localization;
pub mod parallel;
pub mod pipeline;
pub mod segmentation;
pub mod synthgen;
pub mod thresholding;

pub use imgcore::{Contour, GrayImage, Mask, Region, RgbImage, Roi};
