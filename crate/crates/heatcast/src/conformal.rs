//! Conformal prediction regions.
//!
//! Three constructions live here:
//!
//! * [`alg1_daily_interval`] — the in-sample recipe for a daily series: a
//!   random forest fitted with the day index as sole predictor supplies
//!   fitted values; its in-sample residuals, treated as exchangeable
//!   nonconformity scores, feed a quantile regression forest whose residual
//!   quantile bounds are added back onto the fitted value.
//! * [`split_cqr_interval`] — split conformalized quantile regression, the
//!   data-splitting reference variant. This one carries the distribution-free
//!   finite-sample coverage guarantee and serves as the validity oracle for
//!   the in-sample recipe.
//! * [`grid_cell_intervals`] — per-cell intervals on the top fraction of
//!   fitted values, using the in-sample recipe with precursors as the
//!   quantile-forest predictors.
//!
//! Alpha is the miscoverage probability everywhere: alpha = .25 targets .75
//! coverage. Quantile crossing from finite forests is corrected by swapping
//! the bounds, so `lower <= upper` always holds on output.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::design::DesignRow;
use crate::error::{Error, Result};
use crate::forest::{Dataset, ForestModel, ForestParams};

/// How an interval was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalMethod {
    /// In-sample residual recipe (no data splitting).
    Alg1InSample,
    /// Split conformalized quantile regression.
    SplitCqr,
}

impl IntervalMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            IntervalMethod::Alg1InSample => "alg1_in_sample",
            IntervalMethod::SplitCqr => "split_cqr",
        }
    }
}

impl std::fmt::Display for IntervalMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A fitted value with conformal bounds at miscoverage `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    pub fitted: f64,
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub method: IntervalMethod,
}

impl PredictionInterval {
    fn new(fitted: f64, lo: f64, hi: f64, alpha: f64, method: IntervalMethod) -> Self {
        let (lower, upper) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        PredictionInterval {
            fitted,
            lower,
            upper,
            alpha,
            method,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.width()
    }

    pub fn covers(&self, y: f64) -> bool {
        y >= self.lower && y <= self.upper
    }
}

/// A daily time series of mean fitted Q(.95) temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    days: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl DailySeries {
    /// Builds a series; days must be strictly increasing.
    pub fn new(days: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if days.len() != values.len() {
            return Err(Error::domain(format!(
                "{} days but {} values",
                days.len(),
                values.len()
            )));
        }
        if days.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("days must be strictly increasing".to_string()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite series value".to_string()));
        }
        Ok(DailySeries { days, values })
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn days(&self) -> &[NaiveDate] {
        &self.days
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The leading sub-series of length `len`.
    pub fn prefix(&self, len: usize) -> DailySeries {
        DailySeries {
            days: self.days[..len].to_vec(),
            values: self.values[..len].to_vec(),
        }
    }

    /// Day index relative to the first day, used as the forest predictor.
    fn day_index(&self, day: NaiveDate) -> f64 {
        (day - self.days[0]).num_days() as f64
    }
}

/// Minimum series length for the daily in-sample recipe.
pub const MIN_SERIES_LEN: usize = 10;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::domain(format!(
            "alpha {alpha} outside (0, 0.5]"
        )));
    }
    Ok(())
}

/// In-sample conformal interval for `new_day` from a daily series.
///
/// Trains a forest on (day index -> value), computes in-sample residuals,
/// trains a quantile forest on (day index -> residual), and returns
/// `fitted(new_day) + [q_{alpha/2}, q_{1-alpha/2}]` of the residual
/// distribution at `new_day`.
pub fn alg1_daily_interval(
    series: &DailySeries,
    new_day: NaiveDate,
    alpha: f64,
    forest_params: &ForestParams,
    qrf_params: &ForestParams,
) -> Result<PredictionInterval> {
    check_alpha(alpha)?;
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::domain(format!(
            "series length {} below minimum {MIN_SERIES_LEN}",
            series.len()
        )));
    }

    let mut mean_data = Dataset::new(vec!["day_index".to_string()]);
    for (day, value) in series.days.iter().zip(&series.values) {
        mean_data.push_row(&[series.day_index(*day)], *value, 1.0)?;
    }
    let mean_forest = ForestModel::train(&mean_data, forest_params)?;

    let mut residual_data = Dataset::new(vec!["day_index".to_string()]);
    for (day, value) in series.days.iter().zip(&series.values) {
        let t = series.day_index(*day);
        let fitted = mean_forest.predict_mean(&[t])?;
        residual_data.push_row(&[t], value - fitted, 1.0)?;
    }
    let residual_forest = ForestModel::train(&residual_data, qrf_params)?;

    let t_new = series.day_index(new_day);
    let fitted = mean_forest.predict_mean(&[t_new])?;
    let qs = residual_forest.predict_quantiles(&[t_new], &[alpha / 2.0, 1.0 - alpha / 2.0])?;
    Ok(PredictionInterval::new(
        fitted,
        fitted + qs[0],
        fitted + qs[1],
        alpha,
        IntervalMethod::Alg1InSample,
    ))
}

/// Split conformalized quantile regression.
///
/// A quantile forest on `train` gives the raw band `[q_lo(x), q_hi(x)]` at
/// probabilities `alpha/2` and `1 - alpha/2`; conformity scores on `calib`
/// are `E_i = max(q_lo(x_i) - y_i, y_i - q_hi(x_i))`, and the band is widened
/// by the `ceil((1 - alpha)(n_calib + 1))`-th smallest score.
pub fn split_cqr_interval(
    train: &Dataset,
    calib: &Dataset,
    x_new: &[f64],
    alpha: f64,
    qrf_params: &ForestParams,
) -> Result<PredictionInterval> {
    check_alpha(alpha)?;
    if calib.n_rows() == 0 {
        return Err(Error::domain("empty calibration set".to_string()));
    }
    let model = ForestModel::train(train, qrf_params)?;
    let probs = [alpha / 2.0, 1.0 - alpha / 2.0];

    let mut scores = Vec::with_capacity(calib.n_rows());
    for i in 0..calib.n_rows() {
        let qs = model.predict_quantiles(calib.row(i), &probs)?;
        let y = calib.response(i);
        scores.push((qs[0] - y).max(y - qs[1]));
    }
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = scores.len();
    let rank = ((1.0 - alpha) * (n as f64 + 1.0)).ceil() as usize;
    if rank > n {
        return Err(Error::domain(format!(
            "calibration set of {n} too small for alpha {alpha} \
             (needs at least {} points)",
            ((1.0 - alpha) / alpha).ceil() as usize
        )));
    }
    let correction = scores[rank - 1];

    let qs = model.predict_quantiles(x_new, &probs)?;
    let fitted = model.predict_mean(x_new)?;
    Ok(PredictionInterval::new(
        fitted,
        qs[0] - correction,
        qs[1] + correction,
        alpha,
        IntervalMethod::SplitCqr,
    ))
}

/// Per-row conformal intervals on the `top_fraction` of rows ranked by
/// fitted value, with precursors as the quantile-forest predictors.
///
/// Returns `(row index into `rows`, interval)` pairs ordered by the original
/// row index. The subset after ranking must hold at least 10 rows.
pub fn grid_cell_intervals(
    model: &ForestModel,
    rows: &[DesignRow],
    alpha: f64,
    top_fraction: f64,
    qrf_params: &ForestParams,
) -> Result<Vec<(usize, PredictionInterval)>> {
    check_alpha(alpha)?;
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::domain(format!(
            "top_fraction {top_fraction} outside (0, 1]"
        )));
    }

    let mut fitted = Vec::with_capacity(rows.len());
    for row in rows {
        fitted.push(model.predict_mean(&row.precursors.features())?);
    }

    let n_keep = ((top_fraction * rows.len() as f64).ceil() as usize).min(rows.len());
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| fitted[b].total_cmp(&fitted[a]).then(a.cmp(&b)));
    let mut subset: Vec<usize> = order[..n_keep].to_vec();
    subset.sort_unstable();

    if subset.len() < 10 {
        return Err(Error::domain(format!(
            "top-fraction subset of {} rows is below the minimum of 10",
            subset.len()
        )));
    }

    let mut residual_data =
        Dataset::new(model.feature_names().to_vec());
    for &i in &subset {
        residual_data.push_row(
            &rows[i].precursors.features(),
            rows[i].response_q95_k - fitted[i],
            1.0,
        )?;
    }
    let residual_forest = ForestModel::train(&residual_data, qrf_params)?;

    let probs = [alpha / 2.0, 1.0 - alpha / 2.0];
    subset
        .into_iter()
        .map(|i| {
            let qs = residual_forest.predict_quantiles(&rows[i].precursors.features(), &probs)?;
            Ok((
                i,
                PredictionInterval::new(
                    fitted[i],
                    fitted[i] + qs[0],
                    fitted[i] + qs[1],
                    alpha,
                    IntervalMethod::Alg1InSample,
                ),
            ))
        })
        .collect()
}
