//! heatcast: forecasting unusually high (Q(.95)) surface temperatures two
//! weeks ahead from lagged atmospheric precursors.
//!
//! The toolkit covers the full pipeline on gridded daily observations:
//! ingestion and complete-case filtering, a within-subject stacked design
//! with a quantile response and 14-day-lagged precursors, a from-scratch
//! random forest / quantile regression forest, conformal prediction regions
//! for daily series and grid cells, spatial and temporal dependence
//! diagnostics (Moran's I correlograms, ACF, loess smoothing), and a
//! deterministic synthetic-data generator with independent brute-force
//! oracles for verification.

pub mod conformal;
pub mod design;
pub mod diagnostics;
pub mod error;
pub mod forest;
pub mod ingest;
pub mod pipeline;
pub mod quantile;
mod seeding;
pub mod synth;
pub mod types;
pub mod units;

pub use error::{Error, Result};
