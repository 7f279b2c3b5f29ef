//! Color quantization built around Weighted Sort-Means (WSM): an exact k-means
//! that clusters the frequency-weighted unique colors of an image and skips most
//! point-to-center distance evaluations with a sorted triangle-inequality test.
//!
//! The crate is organized as a pipeline:
//!
//! - [`imageio`] loads and saves PNG/PPM rasters and palette files.
//! - [`histogram`] subsamples pixels and reduces them to a [`WeightedHistogram`].
//! - [`kmeans`] holds the reference Lloyd iteration and WSM.
//! - [`init`] implements the generic seeding schemes.
//! - [`precluster`] implements the one-pass quantizers (median-cut, Otto, octree,
//!   Wan, Wu, binary splitting), usable standalone or as WSM seeds.
//! - [`metrics`] maps pixels onto a palette and measures MSE / PSNR.
//! - [`pipeline`] and [`bench`] wire everything into single-image runs and the
//!   multi-method benchmark with rank aggregation.

pub mod bench;
pub mod color;
pub mod error;
pub mod histogram;
pub mod imageio;
pub mod init;
pub mod kmeans;
pub mod metrics;
pub mod pipeline;
pub mod precluster;

mod hashtable;

pub use color::{ColorPoint, Palette, Rgb8};
pub use error::{Error, Result};
pub use histogram::{SamplingMode, WeightedData, WeightedHistogram};
pub use imageio::RawImage;
pub use kmeans::{ClusterState, Termination};
pub use metrics::QuantReport;
pub use pipeline::{Method, QuantizeConfig};
