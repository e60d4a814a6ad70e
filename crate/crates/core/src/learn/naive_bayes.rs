use serde::{Deserialize, Serialize};

use super::{check_label, uniform, Arity, GaussianEstimator, OnlineClassifier};
use crate::error::Result;

/// Added to every per-class variance so constant features stay usable.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with per-class, per-feature running moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    n_classes: usize,
    arity: Arity,
    class_weight: Vec<f64>,
    /// `stats[class][feature]`
    stats: Vec<Vec<GaussianEstimator>>,
}

impl GaussianNb {
    pub fn new(n_classes: usize) -> Self {
        GaussianNb {
            n_classes,
            arity: Arity::default(),
            class_weight: vec![0.0; n_classes],
            stats: vec![Vec::new(); n_classes],
        }
    }

    pub fn learn_weighted(&mut self, x: &[f64], y: usize, w: f64) -> Result<()> {
        check_label(y, self.n_classes)?;
        let d = self.arity.fix(x)?;
        if self.stats[y].is_empty() {
            self.stats[y] = vec![GaussianEstimator::default(); d];
        }
        self.class_weight[y] += w;
        for (g, v) in self.stats[y].iter_mut().zip(x) {
            g.update(*v, w);
        }
        Ok(())
    }

    /// Posterior from class weights and per-feature Gaussian statistics.
    pub(crate) fn posterior(
        class_weight: &[f64],
        stats: &[Vec<GaussianEstimator>],
        x: &[f64],
    ) -> Vec<f64> {
        let total: f64 = class_weight.iter().sum();
        if total <= 0.0 {
            return uniform(class_weight.len());
        }
        let log_joint: Vec<f64> = class_weight
            .iter()
            .zip(stats)
            .map(|(&w, per_feature)| {
                if w <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let prior = (w / total).ln();
                prior
                    + per_feature
                        .iter()
                        .zip(x)
                        .filter(|(g, _)| g.weight > 0.0)
                        .map(|(g, v)| g.log_pdf(*v, VARIANCE_FLOOR))
                        .sum::<f64>()
            })
            .collect();
        let top = log_joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = log_joint.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = exp.iter().sum();
        exp.into_iter().map(|e| e / z).collect()
    }
}

impl OnlineClassifier for GaussianNb {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.arity.check(x)?;
        Ok(Self::posterior(&self.class_weight, &self.stats, x))
    }

    fn learn_one(&mut self, x: &[f64], y: usize) -> Result<()> {
        self.learn_weighted(x, y, 1.0)
    }
}
