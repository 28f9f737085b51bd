//! Radar-to-shape benchmark toolkit.
//!
//! Simulates high-frequency monostatic radar responses of triangle meshes
//! (physical optics, shooting-and-bouncing rays, parametric scattering
//! centers), generates reproducible datasets, implements the deterministic
//! math of a hierarchical SDF latent space and its diffusion sampler, and
//! scores reconstructions with 3D and roll-symmetric metrics.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod diffusion;
pub mod encoding;
pub mod error;
pub mod geometry;
pub mod heatmap;
pub mod metrics;
pub mod rcs;
pub mod revolve;
pub mod rng;
pub mod sdfgrid;
pub mod signal;

pub use error::{Error, Result};
pub use geometry::{Mesh, Ray, Vec3};
pub use rcs::{FrequencySweep, RadarResponse, ViewingGrid};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
