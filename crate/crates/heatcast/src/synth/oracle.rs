//! Independent brute-force oracles.
//!
//! Each oracle is a separate, simpler implementation of an operation the
//! main modules provide, sharing no code with the path it checks. They exist
//! to validate the main implementations on small instances and to power the
//! acceptance suite's Monte Carlo harnesses.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sort-based type-7 quantile on 1-indexed order statistics:
/// `h = (n - 1) q + 1`, result `x_(k) + (h - k)(x_(k+1) - x_(k))` with
/// `k = floor(h)`.
pub fn oracle_quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("oracle_quantile of empty input".to_string()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("probability {q} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let h = (n as f64 - 1.0) * q + 1.0;
    let k = h.floor() as usize; // 1-indexed
    let upper = sorted[k.min(n) - 1 + usize::from(k < n)];
    let lower = sorted[k - 1];
    Ok(lower + (h - k as f64) * (upper - lower))
}

/// Direct double-loop Moran's I over a full weight matrix.
pub fn oracle_morans_i(values: &[f64], weights: &[Vec<f64>]) -> Result<f64> {
    let n = values.len();
    if n < 2 || weights.len() != n {
        return Err(Error::domain("oracle_morans_i shape mismatch".to_string()));
    }
    let mut mean = 0.0;
    for v in values {
        mean += v;
    }
    mean /= n as f64;

    let mut den = 0.0;
    for v in values {
        den += (v - mean) * (v - mean);
    }
    if den == 0.0 {
        return Err(Error::domain("constant field".to_string()));
    }

    let mut cross = 0.0;
    let mut s0 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = weights[i][j];
            if w != 0.0 {
                cross += w * ((values[i] - mean) * (values[j] - mean));
                s0 += w;
            }
        }
    }
    if s0 == 0.0 {
        return Err(Error::domain("all weights zero".to_string()));
    }
    Ok((n as f64 * cross) / (s0 * den))
}

/// Weighted polynomial least squares on raw powers of x, solved through the
/// normal equations with Gaussian elimination. Returns the coefficients
/// `beta_0..beta_degree` (intercept first).
pub fn oracle_weighted_ls(x: &[f64], y: &[f64], w: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if y.len() != n || w.len() != n {
        return Err(Error::domain("oracle_weighted_ls length mismatch".to_string()));
    }
    let k = degree + 1;
    if n < k {
        return Err(Error::domain(format!(
            "need at least {k} points for degree {degree}"
        )));
    }
    // normal equations A beta = b with A = X' W X, b = X' W y
    let mut a = vec![vec![0.0f64; k]; k];
    let mut b = vec![0.0f64; k];
    for i in 0..n {
        let mut powers = vec![1.0f64; k];
        for d in 1..k {
            powers[d] = powers[d - 1] * x[i];
        }
        for r in 0..k {
            for c in 0..k {
                a[r][c] += w[i] * powers[r] * powers[c];
            }
            b[r] += w[i] * powers[r] * y[i];
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        if p.abs() < 1e-300 {
            return Err(Error::domain("singular normal equations".to_string()));
        }
        for row in (col + 1)..k {
            let f = a[row][col] / p;
            for c in col..k {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut beta = vec![0.0f64; k];
    for col in (0..k).rev() {
        let mut s = b[col];
        for c in (col + 1)..k {
            s -= a[col][c] * beta[c];
        }
        beta[col] = s / a[col][col];
    }
    Ok(beta)
}

/// Evaluates a polynomial with intercept-first coefficients.
pub fn eval_poly(beta: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in beta.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Runs `n_reps` independent replications of a coverage experiment and
/// returns the covered fraction. `rep` receives the replication index and
/// must derive all of its randomness from it, so the result is deterministic
/// at any thread count.
pub fn oracle_coverage<F>(n_reps: usize, rep: F) -> f64
where
    F: Fn(u64) -> bool + Sync,
{
    let covered: usize = (0..n_reps as u64)
        .into_par_iter()
        .map(|k| usize::from(rep(k)))
        .sum();
    covered as f64 / n_reps as f64
}
