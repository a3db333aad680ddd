//! Particle-filter EM with fixed-lag statistics and adaptive learning rates.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the bottom of this file pin the common types to `f64`.

mod error;
mod model;
mod params;
mod rng;
mod scalar;

pub mod em;
pub mod models;
pub mod regression;
pub mod smc;

pub use em::{Method, Scheduler};
pub use error::{Error, Result};
pub use model::{Diagnostics, IdentityMap, ParameterMap, StateSpaceModel};
pub use params::ParamVector;
pub use regression::{RegressionEstimates, RegressionState};
pub use rng::{derive_stream, RngStream};
pub use scalar::Scalar;
pub use smc::{ParticleSystem, Resampler};

pub type ParamVector64 = ParamVector<f64>;
pub type Method64 = Method<f64>;
pub type Scheduler64 = Scheduler<f64>;
pub type Regression64 = RegressionState<f64>;
pub type ParticleSystem64 = ParticleSystem<f64>;

pub type ParamVector32 = ParamVector<f32>;
pub type Scheduler32 = Scheduler<f32>;
