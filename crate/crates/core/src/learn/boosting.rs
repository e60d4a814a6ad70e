use rand::Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use super::{argmax, check_label, normalize, uniform, Arity, HoeffdingTree, OnlineClassifier, TreeConfig};
use crate::error::Result;
use crate::rng::{substream, StreamRng};

/// Poisson rates above this are clipped.
const MAX_LAMBDA: f64 = 1e6;
const MIN_ERROR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostingConfig {
    pub n_estimators: usize,
    pub seed: u64,
    pub tree: TreeConfig,
}

impl Default for BoostingConfig {
    fn default() -> Self {
        BoostingConfig {
            n_estimators: 10,
            seed: 0,
            tree: TreeConfig::default(),
        }
    }
}

/// Oza and Russell's online boosting over Hoeffding trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OzaBoost {
    n_classes: usize,
    config: BoostingConfig,
    arity: Arity,
    members: Vec<HoeffdingTree>,
    /// Poisson-weighted mass each member got right and wrong.
    sc: Vec<f64>,
    sw: Vec<f64>,
    rng: StreamRng,
}

impl OzaBoost {
    pub fn new(n_classes: usize, config: BoostingConfig) -> Self {
        let k = config.n_estimators.max(1);
        OzaBoost {
            n_classes,
            config,
            arity: Arity::default(),
            members: (0..k).map(|_| HoeffdingTree::new(n_classes, config.tree)).collect(),
            sc: vec![0.0; k],
            sw: vec![0.0; k],
            rng: substream(config.seed, 0),
        }
    }

    pub fn member_errors(&self) -> Vec<Option<f64>> {
        self.sc
            .iter()
            .zip(&self.sw)
            .map(|(c, w)| (c + w > 0.0).then(|| w / (c + w)))
            .collect()
    }
}

impl OnlineClassifier for OzaBoost {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.arity.check(x)?;
        if self.arity.get().is_none() {
            return Ok(uniform(self.n_classes));
        }
        let mut votes = vec![0.0; self.n_classes];
        for (m, err) in self.members.iter().zip(self.member_errors()) {
            let Some(err) = err else { continue };
            if err >= 0.5 {
                continue;
            }
            let err = err.max(MIN_ERROR);
            let beta = ((1.0 - err) / err).ln();
            let p = m.predict_proba(x)?;
            votes.iter_mut().zip(p).for_each(|(v, q)| *v += beta * q);
        }
        Ok(normalize(votes))
    }

    fn learn_one(&mut self, x: &[f64], y: usize) -> Result<()> {
        check_label(y, self.n_classes)?;
        self.arity.fix(x)?;
        let mut lambda: f64 = 1.0;
        for i in 0..self.members.len() {
            let k: f64 = self.rng.sample(Poisson::new(lambda).expect("positive finite rate"));
            if k > 0.0 {
                self.members[i].learn_weighted(x, y, k)?;
            }
            if argmax(&self.members[i].predict_proba(x)?) == y {
                self.sc[i] += lambda;
                let err = self.sw[i] / (self.sc[i] + self.sw[i]);
                lambda /= 2.0 * (1.0 - err);
            } else {
                self.sw[i] += lambda;
                let err = self.sw[i] / (self.sc[i] + self.sw[i]);
                lambda /= 2.0 * err;
            }
            lambda = lambda.clamp(MIN_ERROR, MAX_LAMBDA);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(n: usize, seed: u64) -> Vec<([f64; 2], usize)> {
        let mut rng = substream(seed, 7);
        (0..n)
            .map(|_| {
                let x: [f64; 2] = [rng.random(), rng.random()];
                (x, usize::from(x[0] > x[1]))
            })
            .collect()
    }

    #[test]
    fn untrained_uniform_and_sums_to_one() {
        let mut b = OzaBoost::new(2, BoostingConfig::default());
        assert_eq!(b.predict_proba(&[0.1, 0.2]).unwrap(), vec![0.5, 0.5]);
        for (x, y) in stream(1000, 1) {
            b.learn_one(&x, y).unwrap();
            let p = b.predict_proba(&x).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn beats_chance_on_diagonal() {
        let mut b = OzaBoost::new(2, BoostingConfig::default());
        let data = stream(6000, 2);
        let mut correct = 0;
        for (i, (x, y)) in data.iter().enumerate() {
            if i >= 5000 && b.predict(x).unwrap() == *y {
                correct += 1;
            }
            b.learn_one(x, *y).unwrap();
        }
        assert!(correct > 800, "{correct}");
    }

    #[test]
    fn replay_is_deterministic() {
        let run = || {
            let mut b = OzaBoost::new(2, BoostingConfig { seed: 3, ..Default::default() });
            for (x, y) in stream(800, 3) {
                b.learn_one(&x, y).unwrap();
            }
            b
        };
        assert_eq!(run(), run());
    }
}
