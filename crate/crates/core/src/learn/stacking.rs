use serde::{Deserialize, Serialize};

use super::{argmax, ForestConfig, MaxFeatures, OnlineClassifier, OnlineForest, TreeConfig};
use crate::analysis::FeatureSet;
use crate::error::{Error, Result};
use crate::model::{ContributionType, JointClass, UserType};
use crate::rng::derive_seed;

pub const STACKING_ESTIMATORS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackingConfig {
    pub seed: u64,
    pub n_estimators: usize,
    /// Feed the contribution-type columns to the second level alongside
    /// the first-level probabilities.
    pub level2_raw_features: bool,
    pub tree: TreeConfig,
}

impl Default for StackingConfig {
    fn default() -> Self {
        StackingConfig {
            seed: 0,
            n_estimators: STACKING_ESTIMATORS,
            level2_raw_features: true,
            tree: TreeConfig::default(),
        }
    }
}

impl StackingConfig {
    fn forest(&self, salt: u64) -> ForestConfig {
        ForestConfig {
            n_estimators: self.n_estimators,
            max_features: MaxFeatures::All,
            bagging: true,
            seed: derive_seed(self.seed, salt),
            tree: self.tree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackingPrediction {
    /// `[P(human), P(bot)]`
    pub user: Vec<f64>,
    /// First-level `[P(benign), P(malign)]`.
    pub contribution_level1: Vec<f64>,
    /// Final `[P(benign), P(malign)]`.
    pub contribution: Vec<f64>,
    pub joint: JointClass,
    /// What the second level saw.
    pub meta_input: Vec<f64>,
}

/// Two-level stack of three forests: user type and contribution type at
/// the first level, a contribution-type forest over their outputs at the
/// second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackingModel {
    config: StackingConfig,
    layout: FeatureSet,
    user_columns: Vec<usize>,
    contribution_columns: Vec<usize>,
    user: OnlineForest,
    contribution: OnlineForest,
    meta: OnlineForest,
}

impl StackingModel {
    pub fn new(config: StackingConfig) -> Self {
        let user_set = FeatureSet::set3_target1();
        let contribution_set = FeatureSet::set3_target2();
        let layout = user_set.union(&contribution_set);
        StackingModel {
            user_columns: user_set.positions_in(&layout).expect("subset of union"),
            contribution_columns: contribution_set.positions_in(&layout).expect("subset of union"),
            layout,
            user: OnlineForest::new(2, config.forest(1)),
            contribution: OnlineForest::new(2, config.forest(2)),
            meta: OnlineForest::new(2, config.forest(3)),
            config,
        }
    }

    pub fn config(&self) -> &StackingConfig {
        &self.config
    }

    /// Column layout expected by `predict` and `learn`.
    pub fn input_features(&self) -> &FeatureSet {
        &self.layout
    }

    pub fn meta_arity(&self) -> usize {
        2 + if self.config.level2_raw_features {
            self.contribution_columns.len()
        } else {
            0
        }
    }

    pub fn forests(&self) -> [&OnlineForest; 3] {
        [&self.user, &self.contribution, &self.meta]
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.layout.len() {
            return Err(Error::validation(
                "x",
                format!(
                    "stacking expects the {} columns {}, got {} values",
                    self.layout.len(),
                    self.layout,
                    x.len()
                ),
            ));
        }
        Ok(())
    }

    fn pick(x: &[f64], columns: &[usize]) -> Vec<f64> {
        columns.iter().map(|&i| x[i]).collect()
    }

    pub fn predict(&self, x: &[f64]) -> Result<StackingPrediction> {
        self.check(x)?;
        let raw = Self::pick(x, &self.contribution_columns);
        let user = self.user.predict_proba(&Self::pick(x, &self.user_columns))?;
        let contribution_level1 = self.contribution.predict_proba(&raw)?;
        let mut meta_input = vec![user[1], contribution_level1[1]];
        if self.config.level2_raw_features {
            meta_input.extend_from_slice(&raw);
        }
        let contribution = self.meta.predict_proba(&meta_input)?;
        let joint = JointClass::new(
            UserType::from_label(argmax(&user)),
            ContributionType::from_label(argmax(&contribution)),
        );
        Ok(StackingPrediction {
            user,
            contribution_level1,
            contribution,
            joint,
            meta_input,
        })
    }

    pub fn learn(&mut self, x: &[f64], y_user: usize, y_contribution: usize) -> Result<()> {
        let prediction = self.predict(x)?;
        self.learn_after_predict(x, &prediction, y_user, y_contribution)
    }

    /// Learns from `x` reusing a prediction made on the current state, so
    /// the second level trains on first-level outputs that had not seen `x`.
    pub fn learn_after_predict(
        &mut self,
        x: &[f64],
        prediction: &StackingPrediction,
        y_user: usize,
        y_contribution: usize,
    ) -> Result<()> {
        self.check(x)?;
        if prediction.meta_input.len() != self.meta_arity() {
            return Err(Error::validation("prediction", "meta input has the wrong arity"));
        }
        self.user.learn_one(&Self::pick(x, &self.user_columns), y_user)?;
        self.contribution
            .learn_one(&Self::pick(x, &self.contribution_columns), y_contribution)?;
        self.meta.learn_one(&prediction.meta_input, y_contribution)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Feature;

    #[test]
    fn untrained_is_uniform() {
        let m = StackingModel::new(StackingConfig::default());
        let p = m.predict(&vec![0.3; m.input_features().len()]).unwrap();
        assert_eq!(p.user, vec![0.5, 0.5]);
        assert_eq!(p.contribution_level1, vec![0.5, 0.5]);
        assert_eq!(p.contribution, vec![0.5, 0.5]);
        assert_eq!(p.joint, JointClass::HumanBenign);
    }

    #[test]
    fn layout_and_arity() {
        let m = StackingModel::new(StackingConfig::default());
        assert_eq!(m.meta_arity(), 7);
        assert!(m.input_features().contains(Feature::ReviewsPerWeek));
        assert!(m.predict(&[0.0; 3]).is_err());
        let lean = StackingModel::new(StackingConfig {
            level2_raw_features: false,
            ..Default::default()
        });
        assert_eq!(lean.meta_arity(), 2);
    }

    #[test]
    fn one_sample_reaches_every_forest() {
        let mut m = StackingModel::new(StackingConfig::default());
        let x = vec![0.2; m.input_features().len()];
        m.learn(&x, 1, 1).unwrap();
        assert!(m.forests().iter().all(|f| f.n_seen() == 1));
    }

    #[test]
    fn consistent_training_yields_bot_malign() {
        let mut m = StackingModel::new(StackingConfig::default());
        let n = m.input_features().len();
        for i in 0..600 {
            let (x, yu, yc) = if i % 2 == 0 {
                (vec![1.0; n], 1, 1)
            } else {
                (vec![0.0; n], 0, 0)
            };
            m.learn(&x, yu, yc).unwrap();
        }
        let p = m.predict(&vec![1.0; n]).unwrap();
        assert!(p.user[1] > 0.99 && p.contribution_level1[1] > 0.99);
        assert_eq!(p.joint, JointClass::BotMalign);
        assert_eq!(m.predict(&vec![0.0; n]).unwrap().joint, JointClass::HumanBenign);
    }
}
