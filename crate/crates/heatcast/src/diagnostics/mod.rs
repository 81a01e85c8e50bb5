//! Dependence diagnostics and smoothing: haversine distances, Moran's I
//! correlograms with permutation tests, the autocorrelation function, and
//! weighted loess.

mod loess;
mod spatial;
mod temporal;

pub use loess::{loess_fit, LoessSpec};
pub use spatial::{correlogram, haversine_km, morans_i, CorrelogramBin, EARTH_RADIUS_KM};
pub use temporal::acf;
