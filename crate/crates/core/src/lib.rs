//! Motion time-series features and skill classification.
//!
//! The numeric kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the ingestion,
//! synthesis and CLI layers use.

pub mod entropy;
pub mod baselines;
pub mod error;
pub mod features;
pub mod ingest;
pub mod learn;
pub mod rng;
pub mod scalar;
pub mod series;
pub mod synth;

pub use error::{Error, Result};
pub use features::{Family, FeatureDescriptor, FeatureVector, Modality, Source};
pub use scalar::Scalar;
pub use series::{validate, zscore_normalize, EntropyParams, MultiTimeSeries, Normalized, Violation};

pub type Series = MultiTimeSeries<f64>;
pub type Series32 = MultiTimeSeries<f32>;
pub type Features = FeatureVector<f64>;
pub type Params = EntropyParams<f64>;
