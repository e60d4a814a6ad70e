use rand::seq::index::sample;
use rand::Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use super::{check_label, uniform, Arity, HoeffdingTree, OnlineClassifier, TreeConfig};
use crate::error::Result;
use crate::rng::{derive_seed, substream, StreamRng};

const FEATURE_SALT: u64 = 0xfea7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    All,
}

impl MaxFeatures {
    pub fn count(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((d as f64).sqrt().round() as usize).clamp(1, d.max(1)),
            MaxFeatures::All => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_estimators: usize,
    pub max_features: MaxFeatures,
    /// Off means every tree sees every sample once.
    pub bagging: bool,
    pub seed: u64,
    pub tree: TreeConfig,
}

impl ForestConfig {
    pub fn binary(seed: u64) -> Self {
        ForestConfig {
            n_estimators: 10,
            max_features: MaxFeatures::Sqrt,
            bagging: true,
            seed,
            tree: TreeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Member {
    tree: HoeffdingTree,
    /// Columns of the input this tree sees; empty until the first sample.
    features: Vec<usize>,
    rng: StreamRng,
}

impl Member {
    fn project(&self, x: &[f64]) -> Vec<f64> {
        self.features.iter().map(|&i| x[i]).collect()
    }
}

/// Online bagging of Hoeffding trees; each tree keeps its own Poisson(1)
/// stream and a random feature subset chosen at its first sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineForest {
    n_classes: usize,
    config: ForestConfig,
    arity: Arity,
    members: Vec<Member>,
    n_seen: u64,
}

impl OnlineForest {
    pub fn new(n_classes: usize, config: ForestConfig) -> Self {
        let members = (0..config.n_estimators.max(1))
            .map(|i| Member {
                tree: HoeffdingTree::new(n_classes, config.tree),
                features: Vec::new(),
                rng: substream(config.seed, i as u64),
            })
            .collect();
        OnlineForest {
            n_classes,
            config,
            arity: Arity::default(),
            members,
            n_seen: 0,
        }
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn n_seen(&self) -> u64 {
        self.n_seen
    }

    pub fn trees(&self) -> impl Iterator<Item = &HoeffdingTree> {
        self.members.iter().map(|m| &m.tree)
    }

    pub fn feature_subsets(&self) -> impl Iterator<Item = &[usize]> {
        self.members.iter().map(|m| m.features.as_slice())
    }

    fn choose_features(&mut self, d: usize) {
        let k = self.config.max_features.count(d);
        let salt = derive_seed(self.config.seed, FEATURE_SALT);
        for (i, m) in self.members.iter_mut().enumerate() {
            m.features = if k == d {
                (0..d).collect()
            } else {
                let mut picked = sample(&mut substream(salt, i as u64), d, k).into_vec();
                picked.sort_unstable();
                picked
            };
        }
    }
}

impl OnlineClassifier for OnlineForest {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.arity.check(x)?;
        if self.arity.get().is_none() {
            return Ok(uniform(self.n_classes));
        }
        let mut acc = vec![0.0; self.n_classes];
        for m in &self.members {
            let p = m.tree.predict_proba(&m.project(x))?;
            acc.iter_mut().zip(p).for_each(|(a, v)| *a += v);
        }
        let k = self.members.len() as f64;
        Ok(acc.into_iter().map(|a| a / k).collect())
    }

    fn learn_one(&mut self, x: &[f64], y: usize) -> Result<()> {
        check_label(y, self.n_classes)?;
        let first = self.arity.get().is_none();
        let d = self.arity.fix(x)?;
        if first {
            self.choose_features(d);
        }
        let poisson = Poisson::new(1.0).expect("unit rate");
        for m in &mut self.members {
            let w = if self.config.bagging {
                m.rng.sample(poisson)
            } else {
                1.0
            };
            if w > 0.0 {
                let xs = m.project(x);
                m.tree.learn_weighted(&xs, y, w)?;
            }
        }
        self.n_seen += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_stream(n: usize) -> Vec<([f64; 3], usize)> {
        let mut rng = substream(11, 0);
        (0..n)
            .map(|_| {
                let x: [f64; 3] = [rng.random(), rng.random(), rng.random()];
                (x, usize::from(x[0] + 0.3 * x[1] > 0.6))
            })
            .collect()
    }

    #[test]
    fn single_member_without_bagging_is_a_tree() {
        let config = ForestConfig {
            n_estimators: 1,
            max_features: MaxFeatures::All,
            bagging: false,
            seed: 5,
            tree: TreeConfig::default(),
        };
        let mut forest = OnlineForest::new(2, config);
        let mut tree = HoeffdingTree::new(2, TreeConfig::default());
        for (x, y) in sample_stream(3000) {
            assert_eq!(forest.predict_proba(&x).unwrap(), tree.predict_proba(&x).unwrap());
            forest.learn_one(&x, y).unwrap();
            tree.learn_one(&x, y).unwrap();
        }
        assert_eq!(forest.trees().next().unwrap(), &tree);
    }

    #[test]
    fn feature_subsets_are_sqrt_sized_and_fixed() {
        let mut forest = OnlineForest::new(2, ForestConfig::binary(0));
        forest.learn_one(&[0.0; 9], 0).unwrap();
        let before: Vec<Vec<usize>> = forest.feature_subsets().map(<[usize]>::to_vec).collect();
        assert!(before.iter().all(|s| s.len() == 3));
        forest.learn_one(&[1.0; 9], 1).unwrap();
        let after: Vec<Vec<usize>> = forest.feature_subsets().map(<[usize]>::to_vec).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn seeded_replay() {
        let run = || {
            let mut f = OnlineForest::new(2, ForestConfig::binary(9));
            for (x, y) in sample_stream(1500) {
                f.learn_one(&x, y).unwrap();
            }
            f
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn poisson_draws_reproducible() {
        let poisson = Poisson::new(1.0).unwrap();
        let a: Vec<f64> = (0..20).map(|_| 0.0).scan(substream(4, 2), |r, _| Some(r.sample(poisson))).collect();
        let b: Vec<f64> = (0..20).map(|_| 0.0).scan(substream(4, 2), |r, _| Some(r.sample(poisson))).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn learns_linear_concept() {
        let mut f = OnlineForest::new(2, ForestConfig::binary(1));
        let stream = sample_stream(8000);
        let mut correct = 0;
        for (i, (x, y)) in stream.iter().enumerate() {
            if i >= 7000 && f.predict(x).unwrap() == *y {
                correct += 1;
            }
            f.learn_one(x, *y).unwrap();
        }
        assert!(correct > 900, "{correct}");
    }

    #[test]
    fn checkpoint_roundtrip() {
        let mut f = OnlineForest::new(2, ForestConfig::binary(2));
        for (x, y) in sample_stream(600) {
            f.learn_one(&x, y).unwrap();
        }
        let json = serde_json::to_string(&f).unwrap();
        let mut g: OnlineForest = serde_json::from_str(&json).unwrap();
        for (x, y) in sample_stream(300) {
            assert_eq!(f.predict_proba(&x).unwrap(), g.predict_proba(&x).unwrap());
            f.learn_one(&x, y).unwrap();
            g.learn_one(&x, y).unwrap();
        }
    }
}
