//! End-to-end orchestration: roll a trained grid-cell model across days,
//! aggregate per-cell predictions into a daily mean-fitted series, and attach
//! conformal intervals in leave-future-out order.
//!
//! Forecasts are time-stamped by the precursor measurement date; the target
//! date (`precursor_date + lag_days`) is carried alongside so the off-by-lag
//! reading of the series is impossible to make silently.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::{Days, NaiveDate};

use crate::conformal::{alg1_daily_interval, DailySeries, PredictionInterval, MIN_SERIES_LEN};
use crate::error::{Error, Result};
use crate::forest::{ForestModel, ForestParams};
use crate::ingest::ObservationTable;

pub const FORECASTS_HEADER: &str =
    "precursor_date,target_date,fitted_q95_k,lower_k,upper_k,alpha,n_cells";

/// One day's forecast: the mean over cells of the model's fitted Q(.95).
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRecord {
    pub precursor_date: NaiveDate,
    pub target_date: NaiveDate,
    pub fitted_q95_k: f64,
    pub interval: Option<PredictionInterval>,
    pub n_cells: usize,
}

/// Output of [`roll_forecast`]: the records plus a count of requested dates
/// skipped because no cell had complete precursors.
#[derive(Debug, Clone, PartialEq)]
pub struct RollForecast {
    pub records: Vec<ForecastRecord>,
    pub n_skipped_dates: usize,
}

/// Steps the frozen model across `dates`, predicting each cell from that
/// date's precursors and recording the unweighted mean over contributing
/// cells. Dates with no complete-precursor cells are skipped and counted.
pub fn roll_forecast(
    model: &ForestModel,
    table: &ObservationTable,
    dates: &[NaiveDate],
    lag_days: u32,
) -> Result<RollForecast> {
    let mut records = Vec::with_capacity(dates.len());
    let mut n_skipped_dates = 0usize;
    for &precursor_date in dates {
        let mut sum = 0.0;
        let mut n_cells = 0usize;
        // day_records iterates in cell-id order, fixing the summation order
        for rec in table.day_records(precursor_date) {
            if let Some(p) = rec.precursors.complete() {
                sum += model.predict_mean(&p.features())?;
                n_cells += 1;
            }
        }
        if n_cells == 0 {
            n_skipped_dates += 1;
            continue;
        }
        records.push(ForecastRecord {
            precursor_date,
            target_date: precursor_date + Days::new(lag_days as u64),
            fitted_q95_k: sum / n_cells as f64,
            interval: None,
            n_cells,
        });
    }
    Ok(RollForecast {
        records,
        n_skipped_dates,
    })
}

/// Collates records into a daily series keyed by target date, sorted
/// ascending. Duplicate target dates are a domain error.
pub fn build_daily_series(records: &[ForecastRecord]) -> Result<DailySeries> {
    if records.is_empty() {
        return Err(Error::domain("no forecast records".to_string()));
    }
    let mut sorted: Vec<&ForecastRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.target_date);
    for pair in sorted.windows(2) {
        if pair[0].target_date == pair[1].target_date {
            return Err(Error::domain(format!(
                "duplicate target date {}",
                pair[0].target_date
            )));
        }
    }
    DailySeries::new(
        sorted.iter().map(|r| r.target_date).collect(),
        sorted.iter().map(|r| r.fitted_q95_k).collect(),
    )
}

/// Attaches an in-sample conformal interval to each record, treating each
/// day as the next unlabeled observation in leave-future-out order: the
/// interval for day `i` is trained on days `0..i` only. The first
/// [`MIN_SERIES_LEN`] days carry no interval.
pub fn attach_intervals(
    records: &[ForecastRecord],
    alpha: f64,
    forest_params: &ForestParams,
    qrf_params: &ForestParams,
) -> Result<Vec<ForecastRecord>> {
    let series = build_daily_series(records)?;
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::domain(format!(
            "series length {} below minimum {MIN_SERIES_LEN}",
            series.len()
        )));
    }
    let mut sorted: Vec<ForecastRecord> = records.to_vec();
    sorted.sort_by_key(|r| r.target_date);
    for (i, record) in sorted.iter_mut().enumerate() {
        record.interval = if i >= MIN_SERIES_LEN {
            Some(alg1_daily_interval(
                &series.prefix(i),
                record.target_date,
                alpha,
                forest_params,
                qrf_params,
            )?)
        } else {
            None
        };
    }
    Ok(sorted)
}

/// Writes records in the forecasts CSV schema; interval fields stay empty
/// when no interval is attached.
pub fn write_forecasts(records: &[ForecastRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, forecasts_to_csv(records)).map_err(|e| Error::io(path, e))
}

pub fn forecasts_to_csv(records: &[ForecastRecord]) -> String {
    let mut out = String::with_capacity(48 * (records.len() + 1));
    out.push_str(FORECASTS_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(
            out,
            "{},{},{}",
            r.precursor_date, r.target_date, r.fitted_q95_k
        );
        match &r.interval {
            Some(iv) => {
                let _ = write!(out, ",{},{},{}", iv.lower, iv.upper, iv.alpha);
            }
            None => out.push_str(",,,"),
        }
        let _ = writeln!(out, ",{}", r.n_cells);
    }
    out
}

/// Reads a forecasts CSV back into records (intervals are restored as plain
/// bounds with the in-sample method tag).
pub fn read_forecasts(path: impl AsRef<Path>) -> Result<Vec<ForecastRecord>> {
    use crate::conformal::IntervalMethod;

    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == FORECASTS_HEADER => {}
        Some((_, h)) => {
            return Err(Error::parse(
                path,
                1,
                format!("unexpected header {h:?}, expected {FORECASTS_HEADER:?}"),
            ))
        }
        None => return Err(Error::parse(path, 1, "empty file")),
    }
    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected 7 fields, found {}", fields.len()),
            ));
        }
        let date = |i: usize| -> Result<NaiveDate> {
            NaiveDate::parse_from_str(fields[i].trim(), "%Y-%m-%d")
                .map_err(|e| Error::parse(path, line_no, format!("bad date: {e}")))
        };
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(path, line_no, format!("bad number {:?}", fields[i])))
        };
        let fitted_q95_k = num(2)?;
        let interval = if fields[3].trim().is_empty() {
            None
        } else {
            let (lower, upper, alpha) = (num(3)?, num(4)?, num(5)?);
            Some(PredictionInterval {
                fitted: fitted_q95_k,
                lower,
                upper,
                alpha,
                method: IntervalMethod::Alg1InSample,
            })
        };
        records.push(ForecastRecord {
            precursor_date: date(0)?,
            target_date: date(1)?,
            fitted_q95_k,
            interval,
            n_cells: fields[6].trim().parse().map_err(|_| {
                Error::parse(path, line_no, format!("bad n_cells {:?}", fields[6]))
            })?,
        });
    }
    Ok(records)
}
