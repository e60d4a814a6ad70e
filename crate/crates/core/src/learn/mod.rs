//! Online classifiers behind a predict-then-learn contract.
//!
//! Every learner sees one labelled feature vector at a time. `predict_proba`
//! never changes state; `learn_one` folds a sample in. The first sample
//! learnt fixes the input arity.

mod boosting;
mod forest;
mod gaussian;
mod hoeffding;
mod naive_bayes;
mod stacking;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use boosting::{BoostingConfig, OzaBoost};
pub use forest::{ForestConfig, MaxFeatures, OnlineForest};
pub use gaussian::GaussianEstimator;
pub use hoeffding::{hoeffding_bound, HoeffdingTree, LeafPrediction, TreeConfig};
pub use naive_bayes::{GaussianNb, VARIANCE_FLOOR};
pub use stacking::{StackingConfig, StackingModel, StackingPrediction, STACKING_ESTIMATORS};

pub trait OnlineClassifier {
    fn n_classes(&self) -> usize;

    /// Class probabilities summing to one.
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn learn_one(&mut self, x: &[f64], y: usize) -> Result<()>;

    fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(x)?))
    }
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Scales non-negative weights to sum to one; all-zero input becomes uniform.
pub(crate) fn normalize(mut weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        weights.iter_mut().for_each(|w| *w /= total);
        weights
    } else {
        uniform(weights.len())
    }
}

/// Input width, fixed by the first learnt sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arity(Option<usize>);

impl Arity {
    pub fn check(&self, x: &[f64]) -> Result<()> {
        match self.0 {
            Some(n) if n != x.len() => Err(Error::validation(
                "x",
                format!("expected {n} features, got {}", x.len()),
            )),
            _ => Ok(()),
        }
    }

    pub fn fix(&mut self, x: &[f64]) -> Result<usize> {
        self.check(x)?;
        Ok(*self.0.get_or_insert(x.len()))
    }

    pub fn get(&self) -> Option<usize> {
        self.0
    }
}

pub(crate) fn check_label(y: usize, n_classes: usize) -> Result<()> {
    if y >= n_classes {
        return Err(Error::validation(
            "y",
            format!("label {y} outside 0..{n_classes}"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Nb,
    Dt,
    Rf,
    Bc,
    Stacking,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Nb,
        ClassifierKind::Dt,
        ClassifierKind::Rf,
        ClassifierKind::Bc,
        ClassifierKind::Stacking,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Nb => "nb",
            ClassifierKind::Dt => "dt",
            ClassifierKind::Rf => "rf",
            ClassifierKind::Bc => "bc",
            ClassifierKind::Stacking => "stacking",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::validation("classifier", format!("unknown classifier {s:?}")))
    }
}

/// Any single-target learner; serialisable as a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    NaiveBayes(GaussianNb),
    Tree(HoeffdingTree),
    Forest(OnlineForest),
    Boosting(OzaBoost),
}

impl Classifier {
    /// A binary learner of the given kind with default settings.
    pub fn binary(kind: ClassifierKind, seed: u64) -> Result<Self> {
        Ok(match kind {
            ClassifierKind::Nb => Classifier::NaiveBayes(GaussianNb::new(2)),
            ClassifierKind::Dt => Classifier::Tree(HoeffdingTree::new(2, TreeConfig::default())),
            ClassifierKind::Rf => Classifier::Forest(OnlineForest::new(2, ForestConfig::binary(seed))),
            ClassifierKind::Bc => {
                Classifier::Boosting(OzaBoost::new(2, BoostingConfig { seed, ..BoostingConfig::default() }))
            }
            ClassifierKind::Stacking => {
                return Err(Error::validation(
                    "classifier",
                    "stacking is a multi-target model; build a StackingModel",
                ))
            }
        })
    }

    fn inner(&self) -> &dyn OnlineClassifier {
        match self {
            Classifier::NaiveBayes(m) => m,
            Classifier::Tree(m) => m,
            Classifier::Forest(m) => m,
            Classifier::Boosting(m) => m,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn OnlineClassifier {
        match self {
            Classifier::NaiveBayes(m) => m,
            Classifier::Tree(m) => m,
            Classifier::Forest(m) => m,
            Classifier::Boosting(m) => m,
        }
    }
}

impl OnlineClassifier for Classifier {
    fn n_classes(&self) -> usize {
        self.inner().n_classes()
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner().predict_proba(x)
    }

    fn learn_one(&mut self, x: &[f64], y: usize) -> Result<()> {
        self.inner_mut().learn_one(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_on_ties() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.7, 0.1]), 1);
    }

    #[test]
    fn normalize_handles_zero() {
        assert_eq!(normalize(vec![0.0, 0.0]), vec![0.5, 0.5]);
        assert_eq!(normalize(vec![1.0, 3.0]), vec![0.25, 0.75]);
    }

    #[test]
    fn arity_is_fixed_once() {
        let mut a = Arity::default();
        a.check(&[1.0]).unwrap();
        a.fix(&[1.0, 2.0]).unwrap();
        assert!(a.check(&[1.0]).is_err());
        assert!(a.fix(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn kinds_parse() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.name().parse::<ClassifierKind>().unwrap(), k);
        }
        assert!("svm".parse::<ClassifierKind>().is_err());
        assert!(Classifier::binary(ClassifierKind::Stacking, 0).is_err());
    }
}
