//! Time-series structure statistics built from 2-D delay embeddings.
//!
//! The pipeline is: delay-embed a series into a planar point cloud
//! ([`embedding`]), smooth the cloud into a gridded Gaussian kernel density
//! ([`density`]), and measure the result with entropy or KL divergence
//! ([`infotheory`]). On top of that sit the multi-scale entropy range
//! ([`kdee`]), the sliding-baseline change detectors ([`detector`]), seeded
//! signal generators ([`simulators`]) and the scoring harness
//! ([`evaluation`]).
//!
//! The crate is `no_std` (it needs `alloc`). Enable `parallel` to spread
//! window and sweep work across a rayon pool; results are identical either
//! way.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod density;
pub mod detector;
pub mod embedding;
mod error;
pub mod evaluation;
pub mod infotheory;
pub mod kdee;
pub mod simulators;
pub mod spectrum;
pub mod stats;
pub mod timeseries;

mod par;

pub use error::{Error, Result};

pub use density::{DensityGrid, GaussianKde, GridSpec};
pub use detector::{DetectionReport, Representation, WindowConfig};
pub use embedding::{takens_embed, PointCloud};
pub use infotheory::Bits;
pub use kdee::KdeeProfile;
pub use timeseries::{LabeledInterval, LabeledRecord, TimeSeries};
