//! Offline feature analysis: correlation with the targets and recursive
//! feature elimination over a sparse linear model.

mod correlation;
mod feature_set;
mod linear;
mod rfe;

pub use correlation::{
    correlation_report, correlation_report_columns, pearson, CorrelationEntry, CorrelationReport,
    DEFAULT_THRESHOLD,
};
pub use feature_set::{FeatureSet, FeatureSetId};
pub use linear::{fit_l1_linear, standardize, LinearModel, DEFAULT_LAMBDA, MAX_ITERATIONS};
pub use rfe::{removal_count, rfe, Elimination, RfeResult, DEFAULT_STEP};

use crate::model::{DailyAggregate, Target};

/// Rows of the given feature columns, one per aggregate.
pub fn design_matrix(aggregates: &[DailyAggregate], set: &FeatureSet) -> Vec<Vec<f64>> {
    aggregates
        .iter()
        .map(|a| set.features().iter().map(|f| a.get(*f)).collect())
        .collect()
}

pub fn target_labels(aggregates: &[DailyAggregate], target: Target) -> Vec<usize> {
    aggregates.iter().map(|a| target.label_of(&a.labels())).collect()
}
