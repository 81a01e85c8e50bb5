//! Loess: locally weighted polynomial regression with a tricube kernel.
//!
//! At each evaluation point the `ceil(span * n)` nearest x-neighbors receive
//! tricube weights scaled by the neighborhood radius, optionally multiplied
//! by per-point prior weights and by Tukey-bisquare robustness weights. The
//! local polynomial is fitted in coordinates centered on the evaluation
//! point, so the fitted value is the intercept of the local solve.

use crate::error::{Error, Result};

/// Smoothing parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LoessSpec {
    /// Fraction of points in each local neighborhood, in (0, 1].
    pub span: f64,
    /// Local polynomial degree, 1 or 2.
    pub degree: usize,
    /// Tukey-bisquare reweighting passes.
    pub robustness_iters: usize,
    /// Optional positive per-point weights multiplied into the kernel.
    pub prior_weights: Option<Vec<f64>>,
}

impl Default for LoessSpec {
    fn default() -> Self {
        LoessSpec {
            span: 0.75,
            degree: 2,
            robustness_iters: 0,
            prior_weights: None,
        }
    }
}

/// Fits the loess smoother and evaluates it at `eval_points`.
pub fn loess_fit(x: &[f64], y: &[f64], spec: &LoessSpec, eval_points: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::domain(format!(
            "x has {n} points but y has {}",
            y.len()
        )));
    }
    if !(spec.span > 0.0 && spec.span <= 1.0) {
        return Err(Error::domain(format!("span {} outside (0, 1]", spec.span)));
    }
    if spec.degree != 1 && spec.degree != 2 {
        return Err(Error::domain(format!("degree {} must be 1 or 2", spec.degree)));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite input to loess".to_string()));
    }
    let mut distinct = x.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < spec.degree + 1 {
        return Err(Error::domain(format!(
            "need at least {} distinct x values, got {}",
            spec.degree + 1,
            distinct.len()
        )));
    }
    let q = (spec.span * n as f64).ceil() as usize;
    let q = q.clamp(1, n);
    if q < spec.degree + 1 {
        return Err(Error::domain(format!(
            "span {} gives {q} neighbors, need at least {}",
            spec.span,
            spec.degree + 1
        )));
    }
    if let Some(pw) = &spec.prior_weights {
        if pw.len() != n {
            return Err(Error::domain(format!(
                "{} prior weights for {n} points",
                pw.len()
            )));
        }
        if pw.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::domain("prior weights must be positive".to_string()));
        }
    }

    let mut robust = vec![1.0f64; n];
    for _ in 0..spec.robustness_iters {
        let fitted: Vec<f64> = x
            .iter()
            .map(|&e| fit_at(x, y, spec, q, &robust, e))
            .collect();
        let mut abs_r: Vec<f64> = y.iter().zip(&fitted).map(|(yi, fi)| (yi - fi).abs()).collect();
        abs_r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = abs_r.len();
        let median = if m % 2 == 1 {
            abs_r[m / 2]
        } else {
            0.5 * (abs_r[m / 2 - 1] + abs_r[m / 2])
        };
        let s = 6.0 * median;
        if s == 0.0 {
            robust.iter_mut().for_each(|w| *w = 1.0);
            break;
        }
        for (w, (yi, fi)) in robust.iter_mut().zip(y.iter().zip(&fitted)) {
            let u = (yi - fi) / s;
            *w = if u.abs() < 1.0 {
                let t = 1.0 - u * u;
                t * t
            } else {
                0.0
            };
        }
    }

    Ok(eval_points
        .iter()
        .map(|&e| fit_at(x, y, spec, q, &robust, e))
        .collect())
}

fn fit_at(x: &[f64], y: &[f64], spec: &LoessSpec, q: usize, robust: &[f64], e: f64) -> f64 {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let da = (x[a] - e).abs();
        let db = (x[b] - e).abs();
        da.total_cmp(&db).then(x[a].total_cmp(&x[b])).then(a.cmp(&b))
    });
    let neighbors = &order[..q];
    let radius = (x[neighbors[q - 1]] - e).abs();

    let mut idx = Vec::with_capacity(q);
    let mut wts = Vec::with_capacity(q);
    for &i in neighbors {
        let kernel = if radius == 0.0 {
            1.0
        } else {
            let u = (x[i] - e).abs() / radius;
            if u < 1.0 {
                let t = 1.0 - u * u * u;
                t * t * t
            } else {
                0.0
            }
        };
        let prior = spec.prior_weights.as_ref().map_or(1.0, |pw| pw[i]);
        let w = kernel * prior * robust[i];
        if w > 0.0 {
            idx.push(i);
            wts.push(w);
        }
    }

    if idx.is_empty() {
        // every neighbor weighted out (e.g. all at the boundary radius):
        // plain mean of the raw neighborhood
        let sum: f64 = neighbors.iter().map(|&i| y[i]).sum();
        return sum / q as f64;
    }

    // local weighted mean, the fallback for degenerate designs
    let weighted_mean = || {
        let sw: f64 = wts.iter().sum();
        let swy: f64 = idx.iter().zip(&wts).map(|(&i, &w)| w * y[i]).sum();
        swy / sw
    };

    let mut distinct = idx.iter().map(|&i| x[i]).collect::<Vec<_>>();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < spec.degree + 1 {
        return weighted_mean();
    }

    // weighted least squares on powers of (x - e); fitted value = intercept
    let k = spec.degree + 1;
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (&i, &w) in idx.iter().zip(&wts) {
        let t = x[i] - e;
        let mut basis = [1.0, 0.0, 0.0];
        if k > 1 {
            basis[1] = t;
        }
        if k > 2 {
            basis[2] = t * t;
        }
        for r in 0..k {
            for c in 0..k {
                ata[r][c] += w * basis[r] * basis[c];
            }
            atb[r] += w * basis[r] * y[i];
        }
    }
    match solve_small(&mut ata, &mut atb, k) {
        Some(beta0) => beta0,
        None => weighted_mean(),
    }
}

/// Gaussian elimination with partial pivoting on a k x k system (k <= 3);
/// returns the first solution component, or `None` when singular.
fn solve_small(a: &mut [[f64; 3]; 3], b: &mut [f64; 3], k: usize) -> Option<f64> {
    let mut perm = [0usize, 1, 2];
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&r1, &r2| a[perm[r1]][col].abs().total_cmp(&a[perm[r2]][col].abs()))
            .unwrap();
        perm.swap(col, pivot_row);
        let p = a[perm[col]][col];
        if p.abs() < 1e-300 {
            return None;
        }
        for row in (col + 1)..k {
            let factor = a[perm[row]][col] / p;
            for c in col..k {
                a[perm[row]][c] -= factor * a[perm[col]][c];
            }
            b[perm[row]] -= factor * b[perm[col]];
        }
    }
    // back substitution
    let mut sol = [0.0f64; 3];
    for col in (0..k).rev() {
        let mut s = b[perm[col]];
        for c in (col + 1)..k {
            s -= a[perm[col]][c] * sol[c];
        }
        let p = a[perm[col]][col];
        if !s.is_finite() || p == 0.0 {
            return None;
        }
        sol[col] = s / p;
    }
    sol[0].is_finite().then_some(sol[0])
}
