//! Empirical quantiles.
//!
//! Uses the type-7 (linear interpolation) estimator throughout: with `n`
//! sorted values and `h = (n - 1) q`, the quantile is
//! `x[floor(h)] + (h - floor(h)) * (x[floor(h) + 1] - x[floor(h)])` on
//! 0-indexed order statistics. Continuous in `q`, and the common default in
//! statistical software.

use crate::error::{Error, Result};

/// Type-7 empirical quantile of `values` at probability `q`.
///
/// `values` need not be sorted; they are copied and sorted internally, so the
/// result is invariant to input order.
pub fn empirical_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("quantile of an empty sequence".to_string()));
    }
    if !q.is_finite() || !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("quantile probability {q} outside [0, 1]")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite value in quantile input".to_string()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(quantile_sorted(&sorted, q))
}

/// Type-7 quantile of an already-sorted slice. Caller guarantees sortedness,
/// finiteness, non-emptiness, and `q` in `[0, 1]`.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let h = (n as f64 - 1.0) * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
