//! Domain types shared by every module: grid-cell geometry, precursor
//! vectors, per-cell-per-day observations, and exposure conditions.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper sanity bound for surface temperatures; anything at or above this is
/// treated as a corrupt reading.
pub const MAX_SURFACE_TEMP_K: f64 = 400.0;

/// Grid-cell centroid in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    /// Builds a centroid, rejecting non-finite or out-of-range coordinates.
    pub fn new(lat_deg: f64, lon_deg: f64) -> Result<Self> {
        if !lat_deg.is_finite() || !(-90.0..=90.0).contains(&lat_deg) {
            return Err(Error::domain(format!(
                "latitude {lat_deg} outside [-90, 90]"
            )));
        }
        if !lon_deg.is_finite() || !(-180.0..=180.0).contains(&lon_deg) {
            return Err(Error::domain(format!(
                "longitude {lon_deg} outside [-180, 180]"
            )));
        }
        Ok(GeoPoint { lat_deg, lon_deg })
    }
}

/// A complete set of the four precursor measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecursorVector {
    /// Grid-cell elevation, meters above sea level.
    pub elevation_m: f64,
    /// Temperature at level 8, Kelvin.
    pub temp_l8_k: f64,
    /// Water vapor concentration at level 8, dimensionless fraction.
    pub h2o_l8: f64,
    /// Height of the tropopause, meters.
    pub tropopause_m: f64,
}

impl PrecursorVector {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.elevation_m,
            self.temp_l8_k,
            self.h2o_l8,
            self.tropopause_m,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite precursor value".to_string()));
        }
        if self.temp_l8_k <= 0.0 {
            return Err(Error::domain(format!(
                "temp_l8_k {} must be positive",
                self.temp_l8_k
            )));
        }
        if !(0.0..=1.0).contains(&self.h2o_l8) {
            return Err(Error::domain(format!(
                "h2o_l8 {} outside [0, 1]",
                self.h2o_l8
            )));
        }
        Ok(())
    }

    /// Feature vector in the canonical training order.
    pub fn features(&self) -> [f64; 4] {
        [
            self.elevation_m,
            self.temp_l8_k,
            self.h2o_l8,
            self.tropopause_m,
        ]
    }
}

/// Canonical order and naming of the precursor features.
pub const PRECURSOR_NAMES: [&str; 4] = ["elevation_m", "temp_l8_k", "h2o_l8", "tropopause_m"];

/// Precursor measurements with per-field presence, as they arrive from the
/// observation stream.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PrecursorReadings {
    pub elevation_m: Option<f64>,
    pub temp_l8_k: Option<f64>,
    pub h2o_l8: Option<f64>,
    pub tropopause_m: Option<f64>,
}

impl PrecursorReadings {
    /// Collapses to a complete vector, or `None` when any field is absent.
    pub fn complete(&self) -> Option<PrecursorVector> {
        Some(PrecursorVector {
            elevation_m: self.elevation_m?,
            temp_l8_k: self.temp_l8_k?,
            h2o_l8: self.h2o_l8?,
            tropopause_m: self.tropopause_m?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for v in [
            self.elevation_m,
            self.temp_l8_k,
            self.h2o_l8,
            self.tropopause_m,
        ]
        .into_iter()
        .flatten()
        {
            if !v.is_finite() {
                return Err(Error::domain("non-finite precursor value".to_string()));
            }
        }
        if let Some(t) = self.temp_l8_k {
            if t <= 0.0 {
                return Err(Error::domain(format!("temp_l8_k {t} must be positive")));
            }
        }
        if let Some(h) = self.h2o_l8 {
            if !(0.0..=1.0).contains(&h) {
                return Err(Error::domain(format!("h2o_l8 {h} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// One grid cell on one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCellRecord {
    pub cell_id: String,
    pub location: GeoPoint,
    pub date: NaiveDate,
    pub precursors: PrecursorReadings,
    pub surface_temp_k: Option<f64>,
}

impl GridCellRecord {
    pub fn validate(&self) -> Result<()> {
        GeoPoint::new(self.location.lat_deg, self.location.lon_deg)?;
        self.precursors.validate()?;
        if let Some(t) = self.surface_temp_k {
            if !t.is_finite() || t <= 0.0 || t >= MAX_SURFACE_TEMP_K {
                return Err(Error::domain(format!(
                    "surface_temp_k {t} outside (0, {MAX_SURFACE_TEMP_K})"
                )));
            }
        }
        Ok(())
    }
}

/// Which precursor stream a stacked observation was exposed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExposureCondition {
    Reported,
    Faux,
}

impl ExposureCondition {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExposureCondition::Reported => "reported",
            ExposureCondition::Faux => "faux",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "reported" => Ok(ExposureCondition::Reported),
            "faux" => Ok(ExposureCondition::Faux),
            other => Err(Error::domain(format!(
                "unknown exposure condition {other:?} (expected \"reported\" or \"faux\")"
            ))),
        }
    }
}

impl std::fmt::Display for ExposureCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fields that may be required present by the complete-case filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    ElevationM,
    TempL8K,
    H2oL8,
    TropopauseM,
    SurfaceTempK,
}

impl Field {
    pub const ALL: [Field; 5] = [
        Field::ElevationM,
        Field::TempL8K,
        Field::H2oL8,
        Field::TropopauseM,
        Field::SurfaceTempK,
    ];

    pub fn is_present(&self, record: &GridCellRecord) -> bool {
        match self {
            Field::ElevationM => record.precursors.elevation_m.is_some(),
            Field::TempL8K => record.precursors.temp_l8_k.is_some(),
            Field::H2oL8 => record.precursors.h2o_l8.is_some(),
            Field::TropopauseM => record.precursors.tropopause_m.is_some(),
            Field::SurfaceTempK => record.surface_temp_k.is_some(),
        }
    }
}
