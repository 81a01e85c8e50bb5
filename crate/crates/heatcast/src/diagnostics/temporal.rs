//! Temporal dependence: the sample autocorrelation function.

use crate::error::{Error, Result};

/// Autocorrelations `r_0..r_max_lag` with the standard biased-denominator
/// estimator: `r_k = sum_t (x_t - mean)(x_{t+k} - mean) / sum_t (x_t - mean)^2`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n < max_lag + 2 {
        return Err(Error::domain(format!(
            "series of length {n} too short for max_lag {max_lag}"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite value in series".to_string()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let z: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let den: f64 = z.iter().map(|zi| zi * zi).sum();
    if den == 0.0 {
        return Err(Error::domain("ACF undefined for a constant series".to_string()));
    }
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                return 1.0;
            }
            let num: f64 = (0..n - k).map(|t| z[t] * z[t + k]).sum();
            num / den
        })
        .collect())
}
