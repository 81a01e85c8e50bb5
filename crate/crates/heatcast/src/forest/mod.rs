//! Regression random forest and quantile regression forest, built from
//! scratch over CART trees.
//!
//! Training is reproducible by construction: rows are re-indexed into a
//! canonical content-sorted order before any random draw, each tree derives
//! its own RNG stream from `seed` and its tree index through a fixed 64-bit
//! mixing function, and aggregation always runs in tree-index order. The same
//! seed and data therefore give a bit-identical model at any thread count and
//! under any permutation of the input rows.
//!
//! Quantile prediction follows the leaf-weighting scheme of quantile
//! regression forests: a training row's weight at `x` is the average over
//! trees of `1/leaf_size` when the row shares the leaf that `x` reaches, and
//! conditional quantiles are read off the weighted left-continuous inverse
//! CDF of the training responses.

mod tree;

pub use tree::{Tree, TreeNode};

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::DesignRow;
use crate::error::{Error, Result};
use crate::types::PRECURSOR_NAMES;

/// Forest hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per split; `None` selects `max(p/3, 1)`.
    pub mtry: Option<usize>,
    /// Minimum in-bag rows (with bootstrap multiplicity) per leaf.
    pub min_leaf: u32,
    pub max_depth: Option<u32>,
    pub seed: u64,
    /// Sample-with-replacement of n rows per tree, weight-proportional when
    /// case weights differ from 1.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            mtry: None,
            min_leaf: 5,
            max_depth: None,
            seed: 0,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn with_seed(seed: u64) -> Self {
        ForestParams {
            seed,
            ..Default::default()
        }
    }

    fn resolve_mtry(&self, n_features: usize) -> Result<usize> {
        let mtry = self.mtry.unwrap_or((n_features / 3).max(1));
        if mtry == 0 || mtry > n_features {
            return Err(Error::Training(format!(
                "mtry {mtry} outside [1, {n_features}]"
            )));
        }
        Ok(mtry)
    }

    fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Training("n_trees must be at least 1".to_string()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Training("min_leaf must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// A generic weighted regression table: rows of features with a response and
/// a positive case weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    n_features: usize,
    x: Vec<f64>, // row-major
    y: Vec<f64>,
    w: Vec<f64>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>) -> Self {
        let n_features = feature_names.len();
        Dataset {
            feature_names,
            n_features,
            x: Vec::new(),
            y: Vec::new(),
            w: Vec::new(),
        }
    }

    pub fn push_row(&mut self, features: &[f64], y: f64, weight: f64) -> Result<()> {
        if features.len() != self.n_features {
            return Err(Error::domain(format!(
                "row has {} features, dataset expects {}",
                features.len(),
                self.n_features
            )));
        }
        if features.iter().any(|v| !v.is_finite()) || !y.is_finite() {
            return Err(Error::domain("non-finite training value".to_string()));
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::domain(format!("case weight {weight} must be positive")));
        }
        self.x.extend_from_slice(features);
        self.y.push(y);
        self.w.push(weight);
        Ok(())
    }

    /// Builds the four-precursor training table from stacked design rows.
    pub fn from_design_rows(rows: &[DesignRow]) -> Result<Self> {
        let mut data = Dataset::new(PRECURSOR_NAMES.iter().map(|s| s.to_string()).collect());
        for row in rows {
            data.push_row(&row.precursors.features(), row.response_q95_k, row.weight)?;
        }
        Ok(data)
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn response(&self, i: usize) -> f64 {
        self.y[i]
    }

    /// Content-sorted row order: indices sorted lexicographically by feature
    /// vector, then response, then weight. Bootstrap draws are keyed to this
    /// order, which is what makes training invariant to input row order.
    fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n_rows()).collect();
        order.sort_by(|&a, &b| {
            let ra = self.row(a);
            let rb = self.row(b);
            for k in 0..self.n_features {
                match ra[k].total_cmp(&rb[k]) {
                    std::cmp::Ordering::Equal => continue,
                    other => return other,
                }
            }
            self.y[a]
                .total_cmp(&self.y[b])
                .then(self.w[a].total_cmp(&self.w[b]))
        });
        order
    }
}

/// Out-of-bag fit summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OobEstimate {
    /// 1 - MSE_oob / Var(y); may be negative.
    pub fraction: f64,
    /// Rows never out-of-bag in any tree, excluded from the MSE.
    pub n_excluded: usize,
}

/// A trained ensemble supporting mean and quantile prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    params: ForestParams,
    feature_names: Vec<String>,
    n_rows: usize,
    trees: Vec<Tree>,
    /// Per tree, canonical indices of rows absent from its bootstrap sample.
    oob_membership: Vec<Vec<u32>>,
    /// Training responses in canonical row order.
    responses: Vec<f64>,
    /// Canonical row indices sorted by ascending response.
    response_order: Vec<u32>,
    feature_means: Vec<f64>,
    response_mean: f64,
    response_variance: f64,
    /// Mean prediction over trees where each row was out-of-bag.
    oob_predictions: Vec<Option<f64>>,
}

use crate::seeding::mix_seed;

impl ForestModel {
    /// Grows `params.n_trees` CART trees on (weight-proportional) bootstrap
    /// resamples of `data`. Deterministic given `params.seed`, for any thread
    /// count and any input row order.
    pub fn train(data: &Dataset, params: &ForestParams) -> Result<Self> {
        params.validate()?;
        let n = data.n_rows();
        let p = data.n_features();
        if n < 2 {
            return Err(Error::Training(format!(
                "need at least 2 training rows, got {n}"
            )));
        }
        if p == 0 {
            return Err(Error::Training("need at least 1 feature".to_string()));
        }
        let mtry = params.resolve_mtry(p)?;

        // Canonicalize rows by content.
        let order = data.canonical_order();
        let mut x = Vec::with_capacity(n * p);
        let mut y = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        for &i in &order {
            x.extend_from_slice(data.row(i));
            y.push(data.y[i]);
            w.push(data.w[i]);
        }

        // Normalized cumulative weights for weight-proportional draws.
        let total_w: f64 = {
            let mut s = 0.0;
            for &wi in &w {
                s += wi;
            }
            s
        };
        let cumulative: Vec<f64> = {
            let mut c = Vec::with_capacity(n);
            let mut run = 0.0;
            for &wi in &w {
                run += wi;
                c.push(run / total_w);
            }
            c
        };

        let ctx = tree::GrowContext {
            x: &x,
            y: &y,
            case_weights: &w,
            n_features: p,
            min_leaf: params.min_leaf,
            max_depth: params.max_depth,
            mtry,
        };

        let grown: Vec<(Tree, Vec<u32>)> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed, t as u64));
                let counts = if params.bootstrap {
                    let mut counts = vec![0u32; n];
                    for _ in 0..n {
                        let u: f64 = rng.gen();
                        let idx = cumulative.partition_point(|&c| c <= u);
                        counts[idx.min(n - 1)] += 1;
                    }
                    counts
                } else {
                    vec![1u32; n]
                };
                let oob: Vec<u32> = (0..n as u32)
                    .filter(|&i| counts[i as usize] == 0)
                    .collect();
                let tree = tree::grow_tree(&ctx, &counts, &mut rng);
                (tree, oob)
            })
            .collect();

        let mut trees = Vec::with_capacity(params.n_trees);
        let mut oob_membership = Vec::with_capacity(params.n_trees);
        for (tree, oob) in grown {
            trees.push(tree);
            oob_membership.push(oob);
        }

        // Out-of-bag predictions, accumulated in tree-index order.
        let mut oob_sum = vec![0.0f64; n];
        let mut oob_count = vec![0u32; n];
        for (tree, oob) in trees.iter().zip(&oob_membership) {
            for &i in oob {
                let xi = &x[i as usize * p..(i as usize + 1) * p];
                oob_sum[i as usize] += tree.predict(xi);
                oob_count[i as usize] += 1;
            }
        }
        let oob_predictions: Vec<Option<f64>> = (0..n)
            .map(|i| (oob_count[i] > 0).then(|| oob_sum[i] / oob_count[i] as f64))
            .collect();

        let feature_means: Vec<f64> = (0..p)
            .map(|f| {
                let mut s = 0.0;
                for i in 0..n {
                    s += x[i * p + f];
                }
                s / n as f64
            })
            .collect();
        let response_mean = y.iter().sum::<f64>() / n as f64;
        let response_variance =
            y.iter().map(|v| (v - response_mean) * (v - response_mean)).sum::<f64>() / n as f64;

        let mut response_order: Vec<u32> = (0..n as u32).collect();
        response_order.sort_by(|&a, &b| {
            y[a as usize]
                .total_cmp(&y[b as usize])
                .then(a.cmp(&b))
        });

        Ok(ForestModel {
            params: params.clone(),
            feature_names: data.feature_names.clone(),
            n_rows: n,
            trees,
            oob_membership,
            responses: y,
            response_order,
            feature_means,
            response_mean,
            response_variance,
            oob_predictions,
        })
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn response_mean(&self) -> f64 {
        self.response_mean
    }

    pub fn response_variance(&self) -> f64 {
        self.response_variance
    }

    fn check_arity(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_names.len() {
            return Err(Error::domain(format!(
                "feature vector has {} entries, model expects {}",
                x.len(),
                self.feature_names.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite feature value".to_string()));
        }
        Ok(())
    }

    /// Mean over trees of the leaf mean reached by `x`.
    pub fn predict_mean(&self, x: &[f64]) -> Result<f64> {
        self.check_arity(x)?;
        let mut sum = 0.0;
        for tree in &self.trees {
            sum += tree.predict(x);
        }
        Ok(sum / self.trees.len() as f64)
    }

    /// Conditional quantiles of the response at `x` for each probability in
    /// `probs`, via the weighted left-continuous inverse CDF over training
    /// responses.
    pub fn predict_quantiles(&self, x: &[f64], probs: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(x)?;
        for &p in probs {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::domain(format!("quantile probability {p} outside (0, 1)")));
            }
        }

        let mut weights = vec![0.0f64; self.n_rows];
        for tree in &self.trees {
            let (rows, _) = tree.leaf(x);
            let lw = 1.0 / rows.len() as f64;
            for &i in rows {
                weights[i as usize] += lw;
            }
        }
        let mut total = 0.0;
        for &i in &self.response_order {
            total += weights[i as usize];
        }

        Ok(probs
            .iter()
            .map(|&p| {
                let target = p * total;
                let mut cum = 0.0;
                let mut result = self.responses[*self.response_order.last().unwrap() as usize];
                for &i in &self.response_order {
                    cum += weights[i as usize];
                    if cum >= target {
                        result = self.responses[i as usize];
                        break;
                    }
                }
                result
            })
            .collect())
    }

    /// Out-of-bag variance explained: `1 - MSE_oob / Var(y)`.
    pub fn variance_explained(&self) -> Result<OobEstimate> {
        if self.response_variance == 0.0 {
            return Err(Error::domain(
                "variance explained undefined for a constant response".to_string(),
            ));
        }
        let mut sse = 0.0;
        let mut n_used = 0usize;
        let mut n_excluded = 0usize;
        for (i, pred) in self.oob_predictions.iter().enumerate() {
            match pred {
                Some(p) => {
                    let e = self.responses[i] - p;
                    sse += e * e;
                    n_used += 1;
                }
                None => n_excluded += 1,
            }
        }
        if n_used == 0 {
            return Err(Error::domain(
                "no out-of-bag predictions available (was bootstrap disabled?)".to_string(),
            ));
        }
        let mse = sse / n_used as f64;
        Ok(OobEstimate {
            fraction: 1.0 - mse / self.response_variance,
            n_excluded,
        })
    }

    /// Partial dependence in the at-means convention: the fitted mean along
    /// `feature` with every other predictor held at its training mean.
    pub fn partial_dependence(&self, feature: &str, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        let f = self
            .feature_names
            .iter()
            .position(|n| n == feature)
            .ok_or_else(|| Error::domain(format!("unknown feature {feature:?}")))?;
        if grid.is_empty() {
            return Err(Error::domain("empty partial dependence grid".to_string()));
        }
        let mut point = self.feature_means.clone();
        grid.iter()
            .map(|&v| {
                point[f] = v;
                Ok((v, self.predict_mean(&point)?))
            })
            .collect()
    }

    /// Per-tree out-of-bag row indices (canonical order).
    pub fn oob_membership(&self) -> &[Vec<u32>] {
        &self.oob_membership
    }
}

const MODEL_FORMAT: &str = "heatcast-forest";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelEnvelope {
    format: String,
    version: u32,
    model: ForestModel,
}

/// Saves a model as versioned JSON. Floats are written shortest-round-trip,
/// so a reloaded model predicts bit-identically.
pub fn save_model(model: &ForestModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let envelope = ModelEnvelope {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        model: model.clone(),
    };
    let text = serde_json::to_string(&envelope)
        .map_err(|e| Error::ModelFormat(format!("serialize failed: {e}")))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ForestModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let envelope: ModelEnvelope = serde_json::from_str(&text)
        .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
    if envelope.format != MODEL_FORMAT {
        return Err(Error::ModelFormat(format!(
            "unexpected format {:?}",
            envelope.format
        )));
    }
    if envelope.version != MODEL_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported version {} (this build reads {MODEL_VERSION})",
            envelope.version
        )));
    }
    Ok(envelope.model)
}
