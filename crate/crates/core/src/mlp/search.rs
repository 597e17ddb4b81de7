//! K-fold cross-validated grid search over hidden-layer widths and
//! activation.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::MlpConfig;
use super::network::Activation;
use super::train::{train_on, LossPoint};
use crate::dataset::{Dataset, SplitIndices};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub h1: Vec<usize>,
    pub h2: Vec<usize>,
    pub h3: Vec<usize>,
    pub activations: Vec<Activation>,
}

impl Default for SearchSpace {
    /// 1..=10 units per hidden layer and all three activations: 3000 configs.
    fn default() -> Self {
        let widths: Vec<usize> = (1..=10).collect();
        Self {
            h1: widths.clone(),
            h2: widths.clone(),
            h3: widths,
            activations: Activation::ALL.to_vec(),
        }
    }
}

impl SearchSpace {
    pub fn singleton(config: &MlpConfig) -> Self {
        let [a, b, c] = config.hidden_sizes;
        Self {
            h1: vec![a],
            h2: vec![b],
            h3: vec![c],
            activations: vec![config.hidden_activation],
        }
    }

    pub fn len(&self) -> usize {
        self.h1.len() * self.h2.len() * self.h3.len() * self.activations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Candidate configs in lexicographic (h1, h2, h3, activation) order,
    /// other hyperparameters copied from `base`.
    pub fn configs(&self, base: &MlpConfig) -> Vec<MlpConfig> {
        let mut out = Vec::with_capacity(self.len());
        for &a in &self.h1 {
            for &b in &self.h2 {
                for &c in &self.h3 {
                    for &act in &self.activations {
                        out.push(MlpConfig {
                            hidden_sizes: [a, b, c],
                            hidden_activation: act,
                            ..*base
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub hidden_sizes: [usize; 3],
    pub activation: Activation,
    /// Mean final-epoch validation MSE over folds; infinite if any fold diverged.
    pub mean_val_mse: f64,
    /// 1 = best.
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: MlpConfig,
    /// One row per candidate, in candidate order.
    pub table: Vec<ScoreRow>,
    /// Per-fold loss curves of the winning config.
    pub best_fold_curves: Vec<Vec<LossPoint>>,
}

impl SearchOutcome {
    /// Arithmetic mean of the winner's fold curves, epoch by epoch.
    pub fn mean_curve(&self) -> Vec<LossPoint> {
        mean_curve(&self.best_fold_curves)
    }

    /// `h1,h2,h3,activation,mean_val_mse,rank` CSV.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("h1,h2,h3,activation,mean_val_mse,rank\n");
        for r in &self.table {
            let [a, b, c] = r.hidden_sizes;
            let score = if r.mean_val_mse.is_finite() {
                r.mean_val_mse.to_string()
            } else {
                "inf".to_string()
            };
            out.push_str(&format!("{a},{b},{c},{},{score},{}\n", r.activation, r.rank));
        }
        out
    }
}

pub fn mean_curve(curves: &[Vec<LossPoint>]) -> Vec<LossPoint> {
    let Some(first) = curves.first() else {
        return Vec::new();
    };
    let k = curves.len() as f64;
    (0..first.len())
        .map(|e| LossPoint {
            epoch: first[e].epoch,
            train_mse: curves.iter().map(|c| c[e].train_mse).sum::<f64>() / k,
            val_mse: curves.iter().map(|c| c[e].val_mse).sum::<f64>() / k,
        })
        .collect()
}

/// Orders candidates: lower score, then fewer hidden units, then
/// lexicographic (h1, h2, h3, activation).
pub fn compare_candidates(a: (&MlpConfig, f64), b: (&MlpConfig, f64)) -> Ordering {
    let score = |s: f64| if s.is_nan() { f64::INFINITY } else { s };
    score(a.1)
        .total_cmp(&score(b.1))
        .then(a.0.total_neurons().cmp(&b.0.total_neurons()))
        .then(a.0.hidden_sizes.cmp(&b.0.hidden_sizes))
        .then(a.0.hidden_activation.cmp(&b.0.hidden_activation))
}

/// Scores every candidate by K-fold cross-validation on the non-test
/// records. Fold `f` trains with seed `derive_seed(base.seed, f)` for every
/// candidate, so a config's score does not depend on the rest of the grid.
pub fn grid_search<T: Scalar>(
    dataset: &Dataset<T>,
    split: &SplitIndices,
    space: &SearchSpace,
    base: &MlpConfig,
) -> Result<SearchOutcome> {
    if space.is_empty() {
        return Err(Error::config("grid_search", "search space is empty"));
    }
    base.validate()?;
    let folds: Vec<_> = (0..split.k)
        .map(|f| {
            let (fit, held) = split.fold(f);
            (dataset.subset(&fit), dataset.subset(&held))
        })
        .collect();
    let candidates = space.configs(base);
    let results = candidates
        .par_iter()
        .map(|cfg| {
            let mut curves = Vec::with_capacity(folds.len());
            for (f, (fit, held)) in folds.iter().enumerate() {
                let fold_cfg = MlpConfig {
                    seed: derive_seed(base.seed, f as u64),
                    ..*cfg
                };
                match train_on(fit, held, &fold_cfg) {
                    Ok(out) => curves.push(out.curve),
                    Err(Error::Divergence { .. }) => return Ok((f64::INFINITY, Vec::new())),
                    Err(e) => return Err(e),
                }
            }
            let score = curves
                .iter()
                .map(|c| c.last().map_or(f64::INFINITY, |p| p.val_mse))
                .sum::<f64>()
                / curves.len() as f64;
            Ok((score, curves))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        compare_candidates((&candidates[a], results[a].0), (&candidates[b], results[b].0))
    });
    let mut rank = vec![0; candidates.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    let best_idx = order[0];
    let table = candidates
        .iter()
        .zip(&results)
        .zip(&rank)
        .map(|((c, (score, _)), &rank)| ScoreRow {
            hidden_sizes: c.hidden_sizes,
            activation: c.hidden_activation,
            mean_val_mse: *score,
            rank,
        })
        .collect();
    Ok(SearchOutcome {
        best: candidates[best_idx],
        table,
        best_fold_curves: results[best_idx].1.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(h: [usize; 3], act: Activation) -> MlpConfig {
        MlpConfig {
            hidden_sizes: h,
            hidden_activation: act,
            ..Default::default()
        }
    }

    #[test]
    fn default_space_has_3000_configs() {
        let s = SearchSpace::default();
        assert_eq!(s.len(), 3000);
        let c = s.configs(&MlpConfig::default());
        assert_eq!(c[0].hidden_sizes, [1, 1, 1]);
        assert_eq!(c[0].hidden_activation, Activation::Relu);
        assert_eq!(c[1].hidden_activation, Activation::Sigmoid);
        assert_eq!(c[2999].hidden_sizes, [10, 10, 10]);
    }

    #[test]
    fn tie_breaks() {
        let small = cfg([2, 2, 2], Activation::Tanh);
        let large = cfg([1, 1, 9], Activation::Relu);
        assert_eq!(compare_candidates((&small, 0.1), (&large, 0.1)), Ordering::Less);
        let a = cfg([1, 2, 3], Activation::Tanh);
        let b = cfg([3, 2, 1], Activation::Relu);
        assert_eq!(compare_candidates((&a, 0.1), (&b, 0.1)), Ordering::Less);
        let r = cfg([1, 2, 3], Activation::Relu);
        assert_eq!(compare_candidates((&r, 0.1), (&a, 0.1)), Ordering::Less);
        assert_eq!(compare_candidates((&large, 0.05), (&small, 0.1)), Ordering::Less);
        assert_eq!(compare_candidates((&small, f64::NAN), (&large, 1e9)), Ordering::Greater);
    }

    #[test]
    fn mean_curve_averages_per_epoch() {
        let p = |e, t, v| LossPoint { epoch: e, train_mse: t, val_mse: v };
        let m = mean_curve(&[vec![p(1, 1.0, 2.0), p(2, 0.5, 1.0)], vec![p(1, 3.0, 4.0), p(2, 0.5, 0.0)]]);
        assert_eq!(m, vec![p(1, 2.0, 3.0), p(2, 0.5, 0.5)]);
    }
}
