//! Within-subject design construction.
//!
//! Each grid cell contributes one stacked observation per exposure condition:
//! the response is the Q(q) of its surface temperatures over a fixed window,
//! the predictors are the four precursors measured `lag_days` before the
//! window opens. Rows where either side fails to resolve are dropped
//! individually (row-level deletion), so a cell may survive in one condition
//! only.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};
use crate::ingest::ObservationTable;
use crate::quantile::empirical_quantile;
use crate::types::{ExposureCondition, GeoPoint, PrecursorVector};

pub const DESIGN_HEADER: &str = "cell_id,condition,lat_deg,lon_deg,elevation_m,temp_l8_k,h2o_l8,tropopause_m,response_q95_k,weight";

/// One stacked within-subject observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRow {
    pub cell_id: String,
    pub condition: ExposureCondition,
    pub location: GeoPoint,
    pub precursors: PrecursorVector,
    pub response_q95_k: f64,
    pub weight: f64,
}

/// Window, lag, and quantile parameters for one exposure condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    /// First day of the response window.
    pub window_start: NaiveDate,
    /// Number of days in the response window.
    pub window_days: u32,
    /// Days between precursor measurement and window start.
    pub lag_days: u32,
    /// Response quantile probability.
    pub q: f64,
    /// Minimum in-window days with a surface temperature for a valid response.
    pub min_days_present: u32,
}

impl DesignSpec {
    pub fn new(window_start: NaiveDate) -> Self {
        DesignSpec {
            window_start,
            window_days: 14,
            lag_days: 14,
            q: 0.95,
            min_days_present: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_days < 1 {
            return Err(Error::domain("window_days must be at least 1".to_string()));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::domain(format!("q {} outside (0, 1)", self.q)));
        }
        if self.min_days_present < 1 || self.min_days_present > self.window_days {
            return Err(Error::domain(format!(
                "min_days_present {} outside [1, {}]",
                self.min_days_present, self.window_days
            )));
        }
        Ok(())
    }

    /// Date on which the precursors for this window are measured.
    pub fn precursor_date(&self) -> NaiveDate {
        self.window_start - Days::new(self.lag_days as u64)
    }
}

/// Q(q) of one cell's surface temperatures over the response window, or
/// `None` when fewer than `min_days_present` in-window days carry a value.
pub fn compute_cell_response(
    table: &ObservationTable,
    spec: &DesignSpec,
    cell_id: &str,
) -> Result<Option<f64>> {
    spec.validate()?;
    if !table.contains_cell(cell_id) {
        return Err(Error::Lookup(format!("unknown cell_id {cell_id:?}")));
    }
    let window_end = spec.window_start + Days::new(spec.window_days as u64);
    let temps: Vec<f64> = table
        .cell_records(cell_id)
        .filter(|r| r.date >= spec.window_start && r.date < window_end)
        .filter_map(|r| r.surface_temp_k)
        .collect();
    if (temps.len() as u32) < spec.min_days_present {
        return Ok(None);
    }
    Ok(Some(empirical_quantile(&temps, spec.q)?))
}

/// Q(q) over all cells' surface temperatures on a single day.
pub fn compute_daily_response(table: &ObservationTable, day: NaiveDate, q: f64) -> Result<f64> {
    let temps: Vec<f64> = table
        .day_records(day)
        .filter_map(|r| r.surface_temp_k)
        .collect();
    if temps.is_empty() {
        return Err(Error::domain(format!("no surface temperatures on {day}")));
    }
    empirical_quantile(&temps, q)
}

/// The complete precursor vector measured `lag_days` before the window, or
/// `None` when the date is absent or any precursor field is missing.
pub fn extract_lagged_precursors(
    table: &ObservationTable,
    spec: &DesignSpec,
    cell_id: &str,
) -> Result<Option<PrecursorVector>> {
    spec.validate()?;
    if !table.contains_cell(cell_id) {
        return Err(Error::Lookup(format!("unknown cell_id {cell_id:?}")));
    }
    Ok(table
        .record(cell_id, spec.precursor_date())
        .and_then(|r| r.precursors.complete()))
}

/// Stacks the reported and faux tables into one within-subject design.
///
/// For each table independently, every cell whose response and lagged
/// precursors both resolve yields one row tagged with that table's condition.
/// Weights start at 1. The output is sorted by `(cell_id, condition)` with
/// `Reported` before `Faux`.
pub fn build_stacked_design(
    reported: &ObservationTable,
    faux: &ObservationTable,
    spec_reported: &DesignSpec,
    spec_faux: &DesignSpec,
) -> Result<Vec<DesignRow>> {
    spec_reported.validate()?;
    spec_faux.validate()?;

    let reported_ids = reported.cell_ids();
    let faux_ids = faux.cell_ids();
    if !reported_ids.is_empty()
        && !faux_ids.is_empty()
        && !reported_ids.iter().any(|id| faux_ids.binary_search(id).is_ok())
    {
        return Err(Error::Design(
            "reported and faux tables share no cell ids; within-subject pairing impossible"
                .to_string(),
        ));
    }

    let mut rows = Vec::new();
    for (table, spec, condition) in [
        (reported, spec_reported, ExposureCondition::Reported),
        (faux, spec_faux, ExposureCondition::Faux),
    ] {
        for cell_id in table.cell_ids() {
            let response = compute_cell_response(table, spec, cell_id)?;
            let precursors = extract_lagged_precursors(table, spec, cell_id)?;
            if let (Some(response_q95_k), Some(precursors)) = (response, precursors) {
                let location = table
                    .cell_records(cell_id)
                    .next()
                    .expect("cell id came from this table")
                    .location;
                rows.push(DesignRow {
                    cell_id: cell_id.to_string(),
                    condition,
                    location,
                    precursors,
                    response_q95_k,
                    weight: 1.0,
                });
            }
        }
    }
    rows.sort_by(|a, b| a.cell_id.cmp(&b.cell_id).then(a.condition.cmp(&b.condition)));
    Ok(rows)
}

/// Target composition for endogenous-sampling correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetShares {
    pub reported: f64,
    pub faux: f64,
}

impl TargetShares {
    fn share(&self, condition: ExposureCondition) -> f64 {
        match condition {
            ExposureCondition::Reported => self.reported,
            ExposureCondition::Faux => self.faux,
        }
    }
}

/// Reweights rows so the weighted condition shares equal the target shares
/// (Manski-Lerman share-ratio weights). Existing weights are replaced.
pub fn balance_weights(rows: &[DesignRow], targets: TargetShares) -> Result<Vec<DesignRow>> {
    if !(targets.reported > 0.0 && targets.faux > 0.0) {
        return Err(Error::domain(
            "target shares must be strictly positive".to_string(),
        ));
    }
    if (targets.reported + targets.faux - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "target shares sum to {}, expected 1",
            targets.reported + targets.faux
        )));
    }
    let n = rows.len();
    let n_reported = rows
        .iter()
        .filter(|r| r.condition == ExposureCondition::Reported)
        .count();
    let n_faux = n - n_reported;
    if n_reported == 0 || n_faux == 0 {
        return Err(Error::Weighting(
            "both conditions must be present to balance weights".to_string(),
        ));
    }

    let sample_share = |condition: ExposureCondition| match condition {
        ExposureCondition::Reported => n_reported as f64 / n as f64,
        ExposureCondition::Faux => n_faux as f64 / n as f64,
    };

    Ok(rows
        .iter()
        .map(|row| {
            let mut out = row.clone();
            out.weight = targets.share(row.condition) / sample_share(row.condition);
            out
        })
        .collect())
}

/// Writes rows in the design CSV schema.
pub fn write_design(rows: &[DesignRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, design_to_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn design_to_csv(rows: &[DesignRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(DESIGN_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.cell_id,
            r.condition,
            r.location.lat_deg,
            r.location.lon_deg,
            r.precursors.elevation_m,
            r.precursors.temp_l8_k,
            r.precursors.h2o_l8,
            r.precursors.tropopause_m,
            r.response_q95_k,
            r.weight
        );
    }
    out
}

/// Reads rows written by [`write_design`].
pub fn read_design(path: impl AsRef<Path>) -> Result<Vec<DesignRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == DESIGN_HEADER => {}
        Some((_, h)) => {
            return Err(Error::parse(
                path,
                1,
                format!("unexpected header {h:?}, expected {DESIGN_HEADER:?}"),
            ))
        }
        None => return Err(Error::parse(path, 1, "empty file")),
    }
    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 10 fields, found {}", fields.len()),
            ));
        }
        let parse = |i: usize, name: &str| -> Result<f64> {
            fields[i].trim().parse::<f64>().map_err(|_| {
                Error::parse(path, line_no, format!("malformed {name}: {:?}", fields[i]))
            })
        };
        let condition = ExposureCondition::parse(fields[1].trim())
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        let location = GeoPoint::new(parse(2, "lat_deg")?, parse(3, "lon_deg")?)
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        let row = DesignRow {
            cell_id: fields[0].trim().to_string(),
            condition,
            location,
            precursors: PrecursorVector {
                elevation_m: parse(4, "elevation_m")?,
                temp_l8_k: parse(5, "temp_l8_k")?,
                h2o_l8: parse(6, "h2o_l8")?,
                tropopause_m: parse(7, "tropopause_m")?,
            },
            response_q95_k: parse(8, "response_q95_k")?,
            weight: parse(9, "weight")?,
        };
        if !(row.weight > 0.0) || !(row.response_q95_k > 0.0) {
            return Err(Error::parse(
                path,
                line_no,
                "weight and response_q95_k must be positive".to_string(),
            ));
        }
        row.precursors
            .validate()
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        rows.push(row);
    }
    Ok(rows)
}
