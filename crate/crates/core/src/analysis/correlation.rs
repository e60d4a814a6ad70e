use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DailyAggregate, Feature, Target};

/// Pearson correlation coefficient, clamped to [-1, 1].
///
/// Computed from centred sums so the result is exactly symmetric in its
/// arguments.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::validation(
            "pearson",
            format!("length mismatch: {} vs {}", x.len(), y.len()),
        ));
    }
    if x.len() < 2 {
        return Err(Error::validation("pearson", "need at least two observations"));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(Error::validation("pearson", format!("non-finite value {v}")));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedCorrelation("x"));
    }
    if syy == 0.0 {
        return Err(Error::UndefinedCorrelation("y"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub feature: Feature,
    pub r: f64,
    /// |r| strictly above the report threshold.
    pub reported: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub target: Target,
    pub threshold: f64,
    /// Every non-constant feature against the target, in canonical order.
    pub entries: Vec<CorrelationEntry>,
    /// Features whose correlation is undefined because they are constant.
    pub undefined: Vec<Feature>,
    /// Pairwise feature correlations in canonical order; `None` when either
    /// column is constant.
    pub feature_matrix: Vec<Vec<Option<f64>>>,
}

impl CorrelationReport {
    pub fn reported(&self) -> impl Iterator<Item = &CorrelationEntry> {
        self.entries.iter().filter(|e| e.reported)
    }

    pub fn get(&self, feature: Feature) -> Option<f64> {
        self.entries.iter().find(|e| e.feature == feature).map(|e| e.r)
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.15;

/// Correlates every feature column with a target and with each other.
pub fn correlation_report(
    aggregates: &[DailyAggregate],
    target: Target,
    threshold: f64,
) -> Result<CorrelationReport> {
    if aggregates.len() < 2 {
        return Err(Error::validation("aggregates", "need at least two aggregates"));
    }
    let columns: Vec<Vec<f64>> = Feature::ALL
        .iter()
        .map(|f| aggregates.iter().map(|a| a.get(*f)).collect())
        .collect();
    let labels: Vec<f64> = aggregates
        .iter()
        .map(|a| target.label_of(&a.labels()) as f64)
        .collect();
    correlation_report_columns(&Feature::ALL, &columns, &labels, target, threshold)
}

/// Same as [`correlation_report`] over explicit columns.
pub fn correlation_report_columns(
    features: &[Feature],
    columns: &[Vec<f64>],
    labels: &[f64],
    target: Target,
    threshold: f64,
) -> Result<CorrelationReport> {
    let mut entries = Vec::new();
    let mut undefined = Vec::new();
    for (f, col) in features.iter().zip(columns) {
        match pearson(col, labels) {
            Ok(r) => entries.push(CorrelationEntry {
                feature: *f,
                r,
                reported: r.abs() > threshold,
            }),
            Err(Error::UndefinedCorrelation("x")) => undefined.push(*f),
            Err(Error::UndefinedCorrelation(_)) => {
                // constant target: nothing is defined
                undefined.push(*f)
            }
            Err(e) => return Err(e),
        }
    }
    let feature_matrix = columns
        .iter()
        .map(|a| columns.iter().map(|b| pearson(a, b).ok()).collect())
        .collect();
    Ok(CorrelationReport {
        target,
        threshold,
        entries,
        undefined,
        feature_matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!(r, 0.8);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(Error::Validation { .. })));
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn report_flags_constant_and_perfect_columns() {
        let labels = vec![0.0, 1.0, 0.0, 1.0, 1.0];
        let columns = vec![labels.clone(), vec![3.0; 5], vec![0.1, 0.2, 0.1, 0.3, 0.1]];
        let feats = [Feature::Reviews, Feature::Pages, Feature::Reverts];
        let rep =
            correlation_report_columns(&feats, &columns, &labels, Target::UserType, DEFAULT_THRESHOLD)
                .unwrap();
        assert_eq!(rep.get(Feature::Reviews), Some(1.0));
        assert!(rep.entries[0].reported);
        assert_eq!(rep.undefined, vec![Feature::Pages]);
        assert!(rep.reported().all(|e| e.feature != Feature::Pages));
        assert_eq!(rep.feature_matrix[0][0], Some(1.0));
        assert_eq!(rep.feature_matrix[1][0], None);
        assert_eq!(rep.feature_matrix[0][2], rep.feature_matrix[2][0]);
    }
}
