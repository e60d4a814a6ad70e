use serde::{Deserialize, Serialize};

use super::naive_bayes::GaussianNb;
use super::{argmax, check_label, normalize, uniform, Arity, GaussianEstimator, OnlineClassifier};
use crate::error::Result;

/// Confidence radius for the mean of a variable with the given range after
/// `n` observations.
pub fn hoeffding_bound(range: f64, delta: f64, n: f64) -> f64 {
    (range * range * (1.0 / delta).ln() / (2.0 * n)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafPrediction {
    MajorityClass,
    NaiveBayes,
    /// Whichever of the two has been right more often at this leaf.
    NbAdaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub grace_period: f64,
    pub delta: f64,
    pub tie_threshold: f64,
    pub split_points: usize,
    /// Smallest share of the leaf weight either branch may receive.
    pub min_branch_fraction: f64,
    pub leaf_prediction: LeafPrediction,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            grace_period: 200.0,
            delta: 1e-7,
            tie_threshold: 0.05,
            split_points: 10,
            min_branch_fraction: 0.01,
            leaf_prediction: LeafPrediction::NbAdaptive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Leaf {
    class_weight: Vec<f64>,
    /// `stats[class][feature]`, allocated lazily.
    stats: Vec<Vec<GaussianEstimator>>,
    weight_at_last_attempt: f64,
    mc_correct: f64,
    nb_correct: f64,
    depth: u32,
}

impl Leaf {
    fn new(class_weight: Vec<f64>, depth: u32) -> Self {
        let n = class_weight.len();
        let seen = class_weight.iter().sum();
        Leaf {
            class_weight,
            stats: vec![Vec::new(); n],
            weight_at_last_attempt: seen,
            mc_correct: 0.0,
            nb_correct: 0.0,
            depth,
        }
    }

    fn total(&self) -> f64 {
        self.class_weight.iter().sum()
    }

    fn majority(&self) -> Vec<f64> {
        normalize(self.class_weight.clone())
    }

    fn naive_bayes(&self, x: &[f64]) -> Vec<f64> {
        GaussianNb::posterior(&self.class_weight, &self.stats, x)
    }

    fn predict(&self, x: &[f64], mode: LeafPrediction) -> Vec<f64> {
        if self.total() <= 0.0 {
            return uniform(self.class_weight.len());
        }
        match mode {
            LeafPrediction::MajorityClass => self.majority(),
            LeafPrediction::NaiveBayes => self.naive_bayes(x),
            LeafPrediction::NbAdaptive if self.nb_correct > self.mc_correct => self.naive_bayes(x),
            LeafPrediction::NbAdaptive => self.majority(),
        }
    }

    fn observe(&mut self, x: &[f64], y: usize, w: f64) {
        if self.total() > 0.0 {
            if argmax(&self.majority()) == y {
                self.mc_correct += w;
            }
            if argmax(&self.naive_bayes(x)) == y {
                self.nb_correct += w;
            }
        }
        if self.stats[y].is_empty() {
            self.stats[y] = vec![GaussianEstimator::default(); x.len()];
        }
        self.class_weight[y] += w;
        for (g, v) in self.stats[y].iter_mut().zip(x) {
            g.update(*v, w);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(Leaf),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn entropy(dist: &[f64]) -> f64 {
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    dist.iter()
        .filter(|w| **w > 0.0)
        .map(|w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum()
}

/// Very fast decision tree over continuous features, with Gaussian
/// class-conditional estimators at each leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingTree {
    n_classes: usize,
    config: TreeConfig,
    arity: Arity,
    nodes: Vec<Node>,
    split_attempts: u64,
}

impl HoeffdingTree {
    pub fn new(n_classes: usize, config: TreeConfig) -> Self {
        HoeffdingTree {
            n_classes,
            config,
            arity: Arity::default(),
            nodes: vec![Node::Leaf(Leaf::new(vec![0.0; n_classes], 0))],
            split_attempts: 0,
        }
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    pub fn split_attempts(&self) -> u64 {
        self.split_attempts
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.len() - self.n_leaves()
    }

    pub fn depth(&self) -> u32 {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf(l) => Some(l.depth),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(_) => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn learn_weighted(&mut self, x: &[f64], y: usize, w: f64) -> Result<()> {
        check_label(y, self.n_classes)?;
        self.arity.fix(x)?;
        if w <= 0.0 {
            return Ok(());
        }
        let idx = self.leaf_index(x);
        let Node::Leaf(leaf) = &mut self.nodes[idx] else {
            unreachable!("routing ends at a leaf")
        };
        leaf.observe(x, y, w);
        let total = leaf.total();
        if total - leaf.weight_at_last_attempt >= self.config.grace_period {
            leaf.weight_at_last_attempt = total;
            let pure = leaf.class_weight.iter().filter(|c| **c > 0.0).count() < 2;
            if !pure {
                self.split_attempts += 1;
                self.attempt_split(idx);
            }
        }
        Ok(())
    }

    fn best_candidate(&self, leaf: &Leaf) -> (Option<Candidate>, f64) {
        let parent = entropy(&leaf.class_weight);
        let total = leaf.total();
        let d = leaf.stats.iter().map(Vec::len).max().unwrap_or(0);
        let mut best: Option<Candidate> = None;
        // the null split always competes with gain 0
        let mut second_gain = 0.0;
        for f in 0..d {
            let (lo, hi) = leaf
                .stats
                .iter()
                .filter(|s| !s.is_empty())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    (lo.min(s[f].min), hi.max(s[f].max))
                });
            if !(hi > lo) {
                continue;
            }
            let mut feature_best: Option<Candidate> = None;
            let k = self.config.split_points;
            for i in 1..=k {
                let t = lo + (hi - lo) * i as f64 / (k + 1) as f64;
                let left: Vec<f64> = leaf
                    .stats
                    .iter()
                    .zip(&leaf.class_weight)
                    .map(|(s, cw)| {
                        if s.is_empty() {
                            0.0
                        } else {
                            s[f].weight_at_most(t).min(*cw)
                        }
                    })
                    .collect();
                let right: Vec<f64> = leaf
                    .class_weight
                    .iter()
                    .zip(&left)
                    .map(|(c, l)| (c - l).max(0.0))
                    .collect();
                let wl: f64 = left.iter().sum();
                let wr: f64 = right.iter().sum();
                let min_branch = self.config.min_branch_fraction * total;
                if wl < min_branch || wr < min_branch {
                    continue;
                }
                let gain = parent - (wl * entropy(&left) + wr * entropy(&right)) / (wl + wr);
                if feature_best.is_none_or(|c| gain > c.gain) {
                    feature_best = Some(Candidate {
                        feature: f,
                        threshold: t,
                        gain,
                    });
                }
            }
            if let Some(c) = feature_best {
                match best {
                    Some(b) if c.gain <= b.gain => second_gain = f64::max(second_gain, c.gain),
                    Some(b) => {
                        second_gain = f64::max(second_gain, b.gain);
                        best = Some(c);
                    }
                    None => best = Some(c),
                }
            }
        }
        (best, second_gain)
    }

    fn attempt_split(&mut self, idx: usize) {
        let Node::Leaf(leaf) = &self.nodes[idx] else {
            return;
        };
        let (best, second_gain) = self.best_candidate(leaf);
        let Some(best) = best else { return };
        if best.gain <= 0.0 {
            return;
        }
        let range = (self.n_classes as f64).log2().max(1.0);
        let eps = hoeffding_bound(range, self.config.delta, leaf.total());
        if best.gain - second_gain <= eps && eps >= self.config.tie_threshold {
            return;
        }
        let left_dist: Vec<f64> = leaf
            .stats
            .iter()
            .zip(&leaf.class_weight)
            .map(|(s, cw)| {
                if s.is_empty() {
                    0.0
                } else {
                    s[best.feature].weight_at_most(best.threshold).min(*cw)
                }
            })
            .collect();
        let right_dist: Vec<f64> = leaf
            .class_weight
            .iter()
            .zip(&left_dist)
            .map(|(c, l)| (c - l).max(0.0))
            .collect();
        let depth = leaf.depth + 1;
        let left = self.nodes.len();
        self.nodes.push(Node::Leaf(Leaf::new(left_dist, depth)));
        self.nodes.push(Node::Leaf(Leaf::new(right_dist, depth)));
        self.nodes[idx] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right: left + 1,
        };
    }
}

impl OnlineClassifier for HoeffdingTree {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.arity.check(x)?;
        if self.arity.get().is_none() {
            return Ok(uniform(self.n_classes));
        }
        let Node::Leaf(leaf) = &self.nodes[self.leaf_index(x)] else {
            unreachable!("routing ends at a leaf")
        };
        Ok(leaf.predict(x, self.config.leaf_prediction))
    }

    fn learn_one(&mut self, x: &[f64], y: usize) -> Result<()> {
        self.learn_weighted(x, y, 1.0)
    }
}
