use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

/// Weighted running mean and variance (West's variant of Welford's update),
/// plus the observed range (meaningless while `weight` is zero).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianEstimator {
    pub weight: f64,
    pub mean: f64,
    pub m2: f64,
    pub min: f64,
    pub max: f64,
}

impl GaussianEstimator {
    pub fn update(&mut self, x: f64, w: f64) {
        if w <= 0.0 {
            return;
        }
        if self.weight == 0.0 {
            self.min = x;
            self.max = x;
        }
        self.weight += w;
        let delta = x - self.mean;
        self.mean += delta * w / self.weight;
        self.m2 += w * delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    /// Unbiased variance; zero until more than one unit of weight is seen.
    pub fn variance(&self) -> f64 {
        if self.weight > 1.0 {
            (self.m2 / (self.weight - 1.0)).max(0.0)
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Log density with a variance floor.
    pub fn log_pdf(&self, x: f64, floor: f64) -> f64 {
        let var = self.variance() + floor;
        -0.5 * ((x - self.mean).powi(2) / var + (2.0 * std::f64::consts::PI * var).ln())
    }

    /// Estimated weight of observations at or below `t`.
    pub fn weight_at_most(&self, t: f64) -> f64 {
        if self.weight == 0.0 {
            return 0.0;
        }
        let sd = self.std_dev();
        if sd == 0.0 {
            return if self.mean <= t { self.weight } else { 0.0 };
        }
        let z = (t - self.mean) / (sd * std::f64::consts::SQRT_2);
        self.weight * 0.5 * erfc(-z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_batch_moments() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0];
        let mut g = GaussianEstimator::default();
        xs.iter().for_each(|x| g.update(*x, 1.0));
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((g.mean - mean).abs() < 1e-12);
        assert!((g.variance() - var).abs() < 1e-12);
        assert_eq!((g.min, g.max), (1.0, 8.0));
    }

    #[test]
    fn weight_equals_repetition() {
        let mut a = GaussianEstimator::default();
        let mut b = GaussianEstimator::default();
        for (x, w) in [(1.0, 3.0), (2.0, 1.0), (5.0, 2.0)] {
            a.update(x, w);
            for _ in 0..w as usize {
                b.update(x, 1.0);
            }
        }
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.variance() - b.variance()).abs() < 1e-12);
    }

    #[test]
    fn cdf_split() {
        let mut g = GaussianEstimator::default();
        for x in [-1.0, 1.0] {
            g.update(x, 1.0);
        }
        assert!((g.weight_at_most(0.0) - 1.0).abs() < 1e-12);
        assert_eq!(GaussianEstimator::default().weight_at_most(0.0), 0.0);
    }
}
