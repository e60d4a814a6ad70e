use serde::{Deserialize, Serialize};

use super::feature_set::FeatureSet;
use super::linear::{fit_l1_linear, standardize};
use crate::error::{Error, Result};
use crate::model::Feature;

pub const DEFAULT_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    pub feature: Feature,
    /// 1-based round in which the feature was removed.
    pub round: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeResult {
    pub selected: FeatureSet,
    /// Weights of the surviving features from the final fit, parallel to `selected`.
    pub final_weights: Vec<f64>,
    pub eliminated: Vec<Elimination>,
    pub rounds: usize,
}

/// Number of features removed in a round with `current` features left.
pub fn removal_count(current: usize, step_fraction: f64, target_count: usize) -> usize {
    let step = ((step_fraction * current as f64).floor() as usize).max(1);
    step.min(current - target_count)
}

/// Recursive feature elimination over an L1 logistic model.
///
/// Each round standardises the surviving columns, fits the model and drops
/// the lowest-|weight| features (ties drop the earlier column first) until
/// `target_count` remain.
pub fn rfe(
    x: &[Vec<f64>],
    y: &[usize],
    features: &[Feature],
    step_fraction: f64,
    target_count: usize,
    lambda: f64,
) -> Result<RfeResult> {
    if !(step_fraction > 0.0 && step_fraction < 1.0) {
        return Err(Error::validation("step", format!("{step_fraction} must lie in (0, 1)")));
    }
    if target_count == 0 || target_count > features.len() {
        return Err(Error::validation(
            "target_count",
            format!("{target_count} must lie in [1, {}]", features.len()),
        ));
    }
    if x.iter().any(|r| r.len() != features.len()) {
        return Err(Error::validation("X", "column count differs from feature list"));
    }

    let mut alive: Vec<usize> = (0..features.len()).collect();
    let mut eliminated = Vec::new();
    let mut rounds = 0;
    let project = |alive: &[usize]| -> Vec<Vec<f64>> {
        standardize(
            &x.iter()
                .map(|r| alive.iter().map(|&j| r[j]).collect())
                .collect::<Vec<_>>(),
        )
    };

    while alive.len() > target_count {
        rounds += 1;
        let model = fit_l1_linear(&project(&alive), y, lambda)?;
        let mut order: Vec<usize> = (0..alive.len()).collect();
        order.sort_by(|&a, &b| {
            model.weights[a]
                .abs()
                .total_cmp(&model.weights[b].abs())
                .then(a.cmp(&b))
        });
        let k = removal_count(alive.len(), step_fraction, target_count);
        let mut drop: Vec<usize> = order[..k].to_vec();
        for &pos in &drop {
            eliminated.push(Elimination {
                feature: features[alive[pos]],
                round: rounds,
                weight: model.weights[pos],
            });
        }
        drop.sort_unstable_by(|a, b| b.cmp(a));
        for pos in drop {
            alive.remove(pos);
        }
    }

    let final_weights = if rounds == 0 {
        Vec::new()
    } else {
        fit_l1_linear(&project(&alive), y, lambda)?.weights
    };
    let selected = FeatureSet::custom(alive.iter().map(|&j| features[j]).collect())?;
    // custom() sorts canonically; keep weights aligned with it
    let final_weights = if final_weights.is_empty() {
        final_weights
    } else {
        selected
            .features()
            .iter()
            .map(|f| {
                let pos = alive.iter().position(|&j| features[j] == *f).unwrap_or(0);
                final_weights[pos]
            })
            .collect()
    };
    Ok(RfeResult {
        selected,
        final_weights,
        eliminated,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removal_rule() {
        assert_eq!(removal_count(10, 0.05, 1), 1);
        assert_eq!(removal_count(31, 0.05, 1), 1);
        assert_eq!(removal_count(40, 0.05, 1), 2);
        assert_eq!(removal_count(40, 0.05, 39), 1);
        assert_eq!(removal_count(100, 0.5, 90), 10);
    }

    #[test]
    fn identity_when_target_is_all() {
        let x = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let r = rfe(&x, &[0, 1], &[Feature::Reviews, Feature::Pages], 0.05, 2, 0.01).unwrap();
        assert_eq!(r.rounds, 0);
        assert_eq!(r.selected.features(), &[Feature::Reviews, Feature::Pages]);
        assert!(r.eliminated.is_empty());
    }

    #[test]
    fn validation() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(rfe(&x, &[0, 1], &[Feature::Reviews], 0.05, 2, 0.01).is_err());
        assert!(rfe(&x, &[0, 1], &[Feature::Reviews], 1.5, 1, 0.01).is_err());
    }
}
