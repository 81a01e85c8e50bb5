//! Spatial dependence: great-circle distances, Moran's I, and distance-band
//! correlograms with permutation tests.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seeding::mix_seed;
use crate::types::GeoPoint;

/// Mean Earth radius, kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Great-circle distance between two centroids, kilometers.
pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat_deg.to_radians();
    let lat2 = b.lat_deg.to_radians();
    let dlat = (b.lat_deg - a.lat_deg).to_radians();
    let dlon = (b.lon_deg - a.lon_deg).to_radians();
    let s1 = (dlat / 2.0).sin();
    let s2 = (dlon / 2.0).sin();
    let h = s1 * s1 + lat1.cos() * lat2.cos() * s2 * s2;
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Global Moran's I for a full pairwise weight matrix.
///
/// `I = (n * sum_ij(w_ij z_i z_j)) / (sum_ij(w_ij) * sum_i(z_i^2))` with `z`
/// the centered values. Diagonal weights must be zero.
pub fn morans_i(values: &[f64], weights: &[Vec<f64>]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::domain(format!("Moran's I needs n >= 2, got {n}")));
    }
    if weights.len() != n || weights.iter().any(|row| row.len() != n) {
        return Err(Error::domain(format!("weight matrix must be {n}x{n}")));
    }
    for (i, row) in weights.iter().enumerate() {
        if row[i] != 0.0 {
            return Err(Error::domain(format!("nonzero diagonal weight at {i}")));
        }
        if row.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::domain("weights must be finite and non-negative".to_string()));
        }
    }

    let mean = values.iter().sum::<f64>() / n as f64;
    let z: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let den: f64 = z.iter().map(|zi| zi * zi).sum();
    if den == 0.0 {
        return Err(Error::domain(
            "Moran's I undefined for a constant field".to_string(),
        ));
    }

    let mut cross = 0.0;
    let mut s0 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = weights[i][j];
            if w != 0.0 {
                cross += w * (z[i] * z[j]);
                s0 += w;
            }
        }
    }
    if s0 == 0.0 {
        return Err(Error::domain("all pairwise weights are zero".to_string()));
    }
    Ok((n as f64 * cross) / (s0 * den))
}

/// One distance band of a correlogram.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelogramBin {
    pub lo_km: f64,
    pub hi_km: f64,
    /// Absent when the band holds fewer than 2 pairs.
    pub morans_i: Option<f64>,
    /// Two-sided permutation p-value; absent with `morans_i`.
    pub p_value: Option<f64>,
    /// Unordered pair count in the band.
    pub n_pairs: usize,
}

/// Moran's I per distance band with binary in-band weights, plus a two-sided
/// permutation test per band.
///
/// Bands are `[k*bin_km, (k+1)*bin_km)` up to `max_km`; zero-distance pairs
/// (within-subject duplicates) land in the first band. All `n_perm` value
/// shuffles derive from `seed`, so p-values are reproducible at any thread
/// count.
pub fn correlogram(
    values: &[f64],
    locations: &[GeoPoint],
    bin_km: f64,
    max_km: f64,
    n_perm: usize,
    seed: u64,
) -> Result<Vec<CorrelogramBin>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::domain(format!("correlogram needs n >= 3, got {n}")));
    }
    if locations.len() != n {
        return Err(Error::domain(format!(
            "{} values but {} locations",
            n,
            locations.len()
        )));
    }
    if !(bin_km > 0.0) || !(max_km > 0.0) {
        return Err(Error::domain("bin_km and max_km must be positive".to_string()));
    }
    let n_bins = (max_km / bin_km).ceil() as usize;

    let mean = values.iter().sum::<f64>() / n as f64;
    let z: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let den: f64 = z.iter().map(|zi| zi * zi).sum();
    if den == 0.0 {
        return Err(Error::domain(
            "correlogram undefined for a constant field".to_string(),
        ));
    }

    // Observed statistic: full ordered double loop so each band's terms
    // accumulate in row-major order (matches the brute-force oracle exactly).
    let mut cross = vec![0.0f64; n_bins];
    let mut ordered_count = vec![0u64; n_bins];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = haversine_km(locations[i], locations[j]);
            if d >= max_km {
                continue;
            }
            let b = (d / bin_km).floor() as usize;
            if b >= n_bins {
                continue;
            }
            cross[b] += z[i] * z[j];
            ordered_count[b] += 1;
        }
    }

    let observed: Vec<Option<f64>> = (0..n_bins)
        .map(|b| {
            (ordered_count[b] >= 4).then(|| {
                (n as f64 * cross[b]) / (ordered_count[b] as f64 * den)
            })
        })
        .collect();

    // Unordered pair lists per band for the permutation loop.
    let mut pairs: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_bins];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = haversine_km(locations[i], locations[j]);
            if d >= max_km {
                continue;
            }
            let b = (d / bin_km).floor() as usize;
            if b < n_bins {
                pairs[b].push((i as u32, j as u32));
            }
        }
    }

    let exceed: Vec<u64> = if n_perm == 0 {
        vec![0; n_bins]
    } else {
        (0..n_perm)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, k as u64));
                let mut zp = z.clone();
                zp.shuffle(&mut rng);
                let mut hits = vec![0u64; n_bins];
                for (b, band_pairs) in pairs.iter().enumerate() {
                    let Some(obs) = observed[b] else { continue };
                    let mut half = 0.0;
                    for &(i, j) in band_pairs {
                        half += zp[i as usize] * zp[j as usize];
                    }
                    let i_perm =
                        (n as f64 * (2.0 * half)) / (ordered_count[b] as f64 * den);
                    if i_perm.abs() >= obs.abs() {
                        hits[b] = 1;
                    }
                }
                hits
            })
            .reduce(
                || vec![0u64; n_bins],
                |mut acc, hits| {
                    for (a, h) in acc.iter_mut().zip(hits) {
                        *a += h;
                    }
                    acc
                },
            )
    };

    Ok((0..n_bins)
        .map(|b| CorrelogramBin {
            lo_km: b as f64 * bin_km,
            hi_km: (b as f64 + 1.0) * bin_km,
            morans_i: observed[b],
            p_value: if n_perm == 0 {
                None
            } else {
                observed[b].map(|_| (1 + exceed[b]) as f64 / (n_perm + 1) as f64)
            },
            n_pairs: (ordered_count[b] / 2) as usize,
        })
        .collect())
}
