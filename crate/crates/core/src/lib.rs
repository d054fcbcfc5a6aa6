//! Tree segmentation, skeletons and biomass from forest point clouds.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloud;
pub mod commands;
pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod kdtree;
pub mod model;
pub mod pipeline;
pub mod segment;
pub mod skeleton;
pub mod synth;

pub use cloud::{Point, PointCloud};
pub use config::{DbhSource, RunConfig};
pub use error::{Error, Result};
