//! Numerical core for weighted polynomial approximation on discrete planar
//! measures: Lᵖ and sup-norm best approximation against measure-adapted
//! bases, the Gaussian-weight density scheme, slit decompositions with
//! connectivity certificates, explicit cyclic weights, and Rohlin layer
//! analysis of multiplication operators.
//!
//! Data-parallel inner loops run on rayon when the default `parallel`
//! feature is enabled and fall back to sequential code otherwise; either way
//! reductions use fixed chunking, so results are bit-identical across thread
//! counts and builds.

pub mod alpha;
pub mod cyclic;
pub mod error;
pub mod fit;
pub mod gauss;
pub mod generators;
pub mod io;
pub mod measure;
pub mod par;
pub mod poly;
pub mod rohlin;

pub use error::{CoreError, Result};
pub use measure::{
    bounded_transform, inverse_transform, lp_distance, lp_norm, pushforward, reweight_measure,
    DiscreteMeasure, Norm, PlanePoint, RealPoint, SampledFunction,
};
