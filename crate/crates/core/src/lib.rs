//! Temporal-spatial aggregation multicasting in cache-enabled wireless
//! networks: an analytical evaluator of the successful transmission
//! probability, its asymptotic limits, and a Monte Carlo simulator of the
//! same network used to cross-check it.

pub mod analysis;
pub mod asymptotics;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod simulator;
pub mod special;

pub use error::{Error, Result, Violation};
pub use model::{validate_inputs, zipf_popularity, CacheDesign, Model, NetworkConfig, Popularity, SchemeConfig};
