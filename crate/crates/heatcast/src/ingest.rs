//! Parsing, validation, and filtering of gridded daily observation files.
//!
//! The on-disk format is a plain CSV with the fixed header
//! `cell_id,lat_deg,lon_deg,date,elevation_m,temp_l8_k,h2o_l8,tropopause_m,surface_temp_k`.
//! Empty fields encode missing values. Dates are ISO-8601 `YYYY-MM-DD`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::types::{Field, GeoPoint, GridCellRecord, PrecursorReadings};

pub const OBSERVATIONS_HEADER: &str =
    "cell_id,lat_deg,lon_deg,date,elevation_m,temp_l8_k,h2o_l8,tropopause_m,surface_temp_k";

/// A validated, deduplicated observation table, sorted by `(cell_id, date)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationTable {
    rows: Vec<GridCellRecord>,
    pub source_path: String,
    /// Malformed rows dropped in lenient mode (always 0 in strict mode).
    pub n_rejected: usize,
}

impl ObservationTable {
    /// Builds a table from records, enforcing the unique-key and sort-order
    /// invariants. On duplicate `(cell_id, date)` keys the last record wins.
    pub fn from_records(records: Vec<GridCellRecord>, source_path: impl Into<String>) -> Self {
        let mut map: BTreeMap<(String, NaiveDate), GridCellRecord> = BTreeMap::new();
        for rec in records {
            map.insert((rec.cell_id.clone(), rec.date), rec);
        }
        ObservationTable {
            rows: map.into_values().collect(),
            source_path: source_path.into(),
            n_rejected: 0,
        }
    }

    pub fn rows(&self) -> &[GridCellRecord] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct cell ids, in sorted order.
    pub fn cell_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for rec in &self.rows {
            if ids.last().map_or(true, |last| *last != rec.cell_id) {
                ids.push(&rec.cell_id);
            }
        }
        ids
    }

    pub fn contains_cell(&self, cell_id: &str) -> bool {
        let start = self.rows.partition_point(|r| r.cell_id.as_str() < cell_id);
        self.rows.get(start).is_some_and(|r| r.cell_id == cell_id)
    }

    /// All records for one cell, in date order.
    pub fn cell_records<'a>(
        &'a self,
        cell_id: &'a str,
    ) -> impl Iterator<Item = &'a GridCellRecord> + 'a {
        let start = self.rows.partition_point(|r| r.cell_id.as_str() < cell_id);
        self.rows[start..]
            .iter()
            .take_while(move |r| r.cell_id == cell_id)
    }

    /// The record for one cell on one date, if present.
    pub fn record(&self, cell_id: &str, date: NaiveDate) -> Option<&GridCellRecord> {
        self.rows
            .binary_search_by(|r| {
                r.cell_id
                    .as_str()
                    .cmp(cell_id)
                    .then(r.date.cmp(&date))
            })
            .ok()
            .map(|i| &self.rows[i])
    }

    /// All records on one date, in cell-id order.
    pub fn day_records(&self, date: NaiveDate) -> impl Iterator<Item = &GridCellRecord> {
        self.rows.iter().filter(move |r| r.date == date)
    }
}

/// Parses an observations CSV.
///
/// In strict mode any malformed line, out-of-range value, or duplicate
/// `(cell_id, date)` key aborts with the 1-based line number. In lenient mode
/// malformed lines are counted and dropped, and duplicates resolve last-wins.
pub fn parse_observations(path: impl AsRef<Path>, strict: bool) -> Result<ObservationTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_observations_str(&text, path, strict)
}

fn parse_observations_str(text: &str, path: &Path, strict: bool) -> Result<ObservationTable> {
    let mut lines = text.lines().enumerate();
    let header = match lines.next() {
        Some((_, h)) => h.trim_end_matches('\r'),
        None => return Err(Error::parse(path, 1, "empty file (missing header)")),
    };
    if header != OBSERVATIONS_HEADER {
        return Err(Error::parse(
            path,
            1,
            format!("unexpected header {header:?}, expected {OBSERVATIONS_HEADER:?}"),
        ));
    }

    let mut map: BTreeMap<(String, NaiveDate), (GridCellRecord, usize)> = BTreeMap::new();
    let mut n_rejected = 0usize;
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(rec) => {
                let key = (rec.cell_id.clone(), rec.date);
                if let Some((_, prev_line)) = map.get(&key) {
                    if strict {
                        return Err(Error::parse(
                            path,
                            line_no,
                            format!(
                                "duplicate key ({}, {}) first seen on line {}",
                                rec.cell_id, rec.date, prev_line
                            ),
                        ));
                    }
                }
                map.insert(key, (rec, line_no));
            }
            Err(msg) => {
                if strict {
                    return Err(Error::parse(path, line_no, msg));
                }
                n_rejected += 1;
            }
        }
    }

    Ok(ObservationTable {
        rows: map.into_values().map(|(rec, _)| rec).collect(),
        source_path: path.display().to_string(),
        n_rejected,
    })
}

fn parse_line(line: &str) -> std::result::Result<GridCellRecord, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 9 {
        return Err(format!("expected 9 fields, found {}", fields.len()));
    }
    let cell_id = fields[0].trim();
    if cell_id.is_empty() {
        return Err("empty cell_id".to_string());
    }
    let lat = parse_required_f64(fields[1], "lat_deg")?;
    let lon = parse_required_f64(fields[2], "lon_deg")?;
    let location =
        GeoPoint::new(lat, lon).map_err(|e| format!("invalid centroid: {e}"))?;
    let date = NaiveDate::parse_from_str(fields[3].trim(), "%Y-%m-%d")
        .map_err(|e| format!("invalid date {:?}: {e}", fields[3]))?;

    let precursors = PrecursorReadings {
        elevation_m: parse_optional_f64(fields[4], "elevation_m")?,
        temp_l8_k: parse_optional_f64(fields[5], "temp_l8_k")?,
        h2o_l8: parse_optional_f64(fields[6], "h2o_l8")?,
        tropopause_m: parse_optional_f64(fields[7], "tropopause_m")?,
    };
    let surface_temp_k = parse_optional_f64(fields[8], "surface_temp_k")?;

    let record = GridCellRecord {
        cell_id: cell_id.to_string(),
        location,
        date,
        precursors,
        surface_temp_k,
    };
    record.validate().map_err(|e| e.to_string())?;
    Ok(record)
}

fn parse_required_f64(field: &str, name: &str) -> std::result::Result<f64, String> {
    let trimmed = field.trim();
    if trimmed.is_empty() {
        return Err(format!("missing required field {name}"));
    }
    trimmed
        .parse::<f64>()
        .map_err(|_| format!("malformed numeric field {name}: {trimmed:?}"))
}

fn parse_optional_f64(field: &str, name: &str) -> std::result::Result<Option<f64>, String> {
    let trimmed = field.trim();
    if trimmed.is_empty() {
        return Ok(None);
    }
    trimmed
        .parse::<f64>()
        .map(Some)
        .map_err(|_| format!("malformed numeric field {name}: {trimmed:?}"))
}

/// Serializes a table back to the observations CSV format. Parsing the output
/// reproduces the table exactly (floats are written shortest-round-trip).
pub fn write_observations(table: &ObservationTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, observations_to_csv(table)).map_err(|e| Error::io(path, e))
}

pub fn observations_to_csv(table: &ObservationTable) -> String {
    let mut out = String::with_capacity(64 * (table.len() + 1));
    out.push_str(OBSERVATIONS_HEADER);
    out.push('\n');
    for rec in table.rows() {
        let _ = write!(
            out,
            "{},{},{},{}",
            rec.cell_id, rec.location.lat_deg, rec.location.lon_deg, rec.date
        );
        for v in [
            rec.precursors.elevation_m,
            rec.precursors.temp_l8_k,
            rec.precursors.h2o_l8,
            rec.precursors.tropopause_m,
            rec.surface_temp_k,
        ] {
            match v {
                Some(x) => {
                    let _ = write!(out, ",{x}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// Keeps only rows where every field in `required` is present. Order is
/// preserved; an empty result is legal.
pub fn complete_case_filter(table: &ObservationTable, required: &[Field]) -> ObservationTable {
    let rows = table
        .rows
        .iter()
        .filter(|rec| required.iter().all(|f| f.is_present(rec)))
        .cloned()
        .collect();
    ObservationTable {
        rows,
        source_path: table.source_path.clone(),
        n_rejected: table.n_rejected,
    }
}
