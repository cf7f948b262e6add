//! Empirical-stochastic model of daily global horizontal irradiance.
//!
//! Pipeline: [`ingest`] → [`smoothing`] → [`daily_fit`] → [`trends`] →
//! [`residual_maps`], persisted as a [`model::ModelFile`] and run forward by
//! [`sim`]. [`pv`] converts irradiance curves into photovoltaic charge.

pub mod daily_fit;
pub mod error;
pub mod ingest;
mod linalg;
pub mod model;
pub mod pipeline;
pub mod pv;
pub mod residual_maps;
pub mod sim;
pub mod smoothing;
pub mod stats;
pub mod trends;

pub use error::{Error, Result};
