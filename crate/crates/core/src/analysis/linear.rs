use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 0.01;
pub const MAX_ITERATIONS: usize = 10_000;
pub const TOLERANCE: f64 = 1e-8;

/// Sparse linear classifier fitted with an L1 penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub objective: f64,
    /// Penalised objective after each accepted step, starting at the initial point.
    pub objective_history: Vec<f64>,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Column-standardised copy of `x`. Constant columns become all zeros.
pub fn standardize(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(d) = x.first().map(Vec::len) else {
        return Vec::new();
    };
    let n = x.len() as f64;
    let mut out = x.to_vec();
    for j in 0..d {
        let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for row in out.iter_mut() {
            row[j] = if sd > 0.0 { (row[j] - mean) / sd } else { 0.0 };
        }
    }
    out
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

struct Problem<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    lambda: f64,
}

impl Problem<'_> {
    /// Mean logistic loss.
    fn loss(&self, w: &[f64], b: f64) -> f64 {
        let n = self.x.len() as f64;
        self.x
            .iter()
            .zip(self.y)
            .map(|(row, yi)| {
                let z = b + row.iter().zip(w).map(|(v, wj)| v * wj).sum::<f64>();
                softplus(z) - yi * z
            })
            .sum::<f64>()
            / n
    }

    fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let n = self.x.len() as f64;
        let mut gw = vec![0.0; w.len()];
        let mut gb = 0.0;
        for (row, yi) in self.x.iter().zip(self.y) {
            let z = b + row.iter().zip(w).map(|(v, wj)| v * wj).sum::<f64>();
            let r = sigmoid(z) - yi;
            gb += r;
            for (g, v) in gw.iter_mut().zip(row) {
                *g += r * v;
            }
        }
        gw.iter_mut().for_each(|g| *g /= n);
        (gw, gb / n)
    }

    fn penalty(&self, w: &[f64]) -> f64 {
        self.lambda * w.iter().map(|v| v.abs()).sum::<f64>()
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Minimises mean logistic loss plus `lambda * |w|_1` by proximal gradient
/// descent with backtracking. The bias is not penalised. Every accepted
/// step leaves the objective no larger than before.
pub fn fit_l1_linear(x: &[Vec<f64>], y: &[usize], lambda: f64) -> Result<LinearModel> {
    if x.len() != y.len() {
        return Err(Error::validation(
            "y",
            format!("{} labels for {} rows", y.len(), x.len()),
        ));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::validation("lambda", format!("{lambda} must be finite and >= 0")));
    }
    let d = x.first().map(Vec::len).unwrap_or(0);
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(Error::validation("X", format!("row {i} has {} columns, expected {d}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("X", format!("row {i} contains a non-finite value")));
        }
    }
    if let Some(bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::validation("y", format!("label {bad} is not binary")));
    }
    let yf: Vec<f64> = y.iter().map(|&l| l as f64).collect();
    let problem = Problem { x, y: &yf, lambda };

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut smooth = if x.is_empty() { 0.0 } else { problem.loss(&w, b) };
    let mut objective = smooth;
    let mut history = vec![objective];
    let mut step = 1.0;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS && !x.is_empty() {
        iterations += 1;
        let (gw, gb) = problem.gradient(&w, b);
        let accepted = loop {
            let zw: Vec<f64> = w
                .iter()
                .zip(&gw)
                .map(|(wj, g)| soft_threshold(wj - step * g, step * lambda))
                .collect();
            let zb = b - step * gb;
            let fz = problem.loss(&zw, zb);
            let mut lin = gb * (zb - b);
            let mut sq = (zb - b).powi(2);
            for ((z, wj), g) in zw.iter().zip(&w).zip(&gw) {
                lin += g * (z - wj);
                sq += (z - wj).powi(2);
            }
            let fz_total = fz + problem.penalty(&zw);
            if fz <= smooth + lin + sq / (2.0 * step) && fz_total <= objective {
                break Some((zw, zb, fz, fz_total));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((zw, zb, fz, total)) = accepted else {
            break;
        };
        let improvement = objective - total;
        w = zw;
        b = zb;
        smooth = fz;
        objective = total;
        history.push(objective);
        if improvement < TOLERANCE {
            break;
        }
        step *= 1.5;
    }

    Ok(LinearModel {
        weights: w,
        bias: b,
        lambda,
        iterations,
        objective,
        objective_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_sign_matches_direction() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let m = fit_l1_linear(&standardize(&x), &y, 1e-3).unwrap();
        assert!(m.weights[0] > 0.0);
        let y_rev: Vec<usize> = y.iter().map(|l| 1 - l).collect();
        let m = fit_l1_linear(&standardize(&x), &y_rev, 1e-3).unwrap();
        assert!(m.weights[0] < 0.0);
    }

    #[test]
    fn huge_lambda_zeroes_weights() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i % 7) as f64]).collect();
        let y: Vec<usize> = (0..30).map(|i| usize::from(i % 3 == 0)).collect();
        let m = fit_l1_linear(&standardize(&x), &y, 1e6).unwrap();
        assert!(m.weights.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn objective_never_increases() {
        let x: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i as f64).sin(), (i as f64 * 0.3).cos(), i as f64 / 50.0])
            .collect();
        let y: Vec<usize> = (0..50).map(|i| usize::from((i as f64).sin() > 0.2)).collect();
        let m = fit_l1_linear(&standardize(&x), &y, 0.01).unwrap();
        assert!(m.objective_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(m.iterations > 1);
    }

    #[test]
    fn rejects_non_finite() {
        let err = fit_l1_linear(&[vec![f64::NAN]], &[0], 0.1).unwrap_err();
        assert!(err.to_string().contains("non-finite"));
    }

    #[test]
    fn standardize_maps_constant_columns_to_zero() {
        let s = standardize(&[vec![1.0, 5.0], vec![3.0, 5.0]]);
        assert_eq!(s, vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
    }
}
