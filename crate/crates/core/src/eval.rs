//! Prequential (test-then-train) evaluation and classification metrics.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::FeatureSet;
use crate::error::{Error, Result};
use crate::learn::{argmax, OnlineClassifier, StackingModel};
use crate::model::{DailyAggregate, JointClass, Target};
use crate::profile::ProfileStore;

pub const DEFAULT_WINDOW: usize = 1000;
/// Share of the stream, from the end, summarised separately.
pub const FINAL_FRACTION: f64 = 0.2;

pub fn class_names(target: Target) -> Vec<String> {
    match target {
        Target::UserType => vec!["human".into(), "bot".into()],
        Target::ContributionType => vec!["benign".into(), "malign".into()],
    }
}

pub fn joint_class_names() -> Vec<String> {
    JointClass::ALL.iter().map(|c| c.name().to_string()).collect()
}

/// Counts indexed `(true, predicted)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let n = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_counts(counts: Vec<Vec<u64>>) -> Self {
        let classes = (0..counts.len()).map(|i| i.to_string()).collect();
        ConfusionMatrix { classes, counts }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.correct(), self.total())
    }

    pub fn precision(&self, class: usize) -> f64 {
        let predicted: u64 = self.counts.iter().map(|row| row[class]).sum();
        ratio(self.counts[class][class], predicted)
    }

    pub fn recall(&self, class: usize) -> f64 {
        ratio(self.counts[class][class], self.counts[class].iter().sum())
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// F-measure of one class; zero when precision and recall are both zero.
pub fn f_measure(cm: &ConfusionMatrix, class: usize) -> f64 {
    harmonic(cm.precision(class), cm.recall(class))
}

/// Unweighted mean of per-class F, and F over pooled TP/FP/FN.
pub fn macro_micro(cm: &ConfusionMatrix) -> (f64, f64) {
    let n = cm.n_classes();
    if n == 0 {
        return (0.0, 0.0);
    }
    let macro_f = (0..n).map(|c| f_measure(cm, c)).sum::<f64>() / n as f64;
    let tp = cm.correct();
    // every miss is one false positive and one false negative
    let misses = cm.total() - tp;
    let p = ratio(tp, tp + misses);
    let r = ratio(tp, tp + misses);
    (macro_f, harmonic(p, r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_events: u64,
    pub accuracy: f64,
    pub macro_f: f64,
    pub micro_f: f64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
}

impl Summary {
    pub fn from_matrix(cm: ConfusionMatrix) -> Self {
        let (macro_f, micro_f) = macro_micro(&cm);
        let per_class = (0..cm.n_classes())
            .map(|c| ClassMetrics {
                class: cm.classes[c].clone(),
                precision: cm.precision(c),
                recall: cm.recall(c),
                f_measure: f_measure(&cm, c),
                support: cm.counts[c].iter().sum(),
            })
            .collect();
        Summary {
            n_events: cm.total(),
            accuracy: cm.accuracy(),
            macro_f,
            micro_f,
            per_class,
            confusion: cm,
        }
    }

    pub fn f_of(&self, class: usize) -> f64 {
        self.per_class.get(class).map_or(0.0, |c| c.f_measure)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPoint {
    /// One past the last event in the window.
    pub end: usize,
    pub accuracy: f64,
    pub macro_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub events_per_sec: f64,
    pub ms_per_event: f64,
}

impl Timing {
    pub fn new(latencies_us: &[u64]) -> Self {
        let total_us: u64 = latencies_us.iter().sum();
        let n = latencies_us.len() as f64;
        let total_seconds = total_us as f64 / 1e6;
        Timing {
            total_seconds,
            events_per_sec: if total_seconds > 0.0 { n / total_seconds } else { 0.0 },
            ms_per_event: if n > 0.0 { total_us as f64 / 1e3 / n } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Everything from the first event on.
    pub cumulative: Summary,
    /// The trailing `FINAL_FRACTION` of the stream.
    pub final_segment: Summary,
    pub window: usize,
    pub window_series: Vec<WindowPoint>,
    pub timing: Timing,
}

impl MetricsReport {
    /// Recomputes every metric from `(true, predicted)` pairs.
    pub fn from_pairs(
        classes: &[String],
        pairs: &[(usize, usize)],
        latencies_us: &[u64],
        window: usize,
    ) -> Self {
        let matrix = |slice: &[(usize, usize)]| {
            let mut cm = ConfusionMatrix::new(classes.to_vec());
            slice.iter().for_each(|(t, p)| cm.record(*t, *p));
            cm
        };
        let n = pairs.len();
        let tail = final_start(n);
        let window = window.max(1);
        let stride = (window / 4).max(1);
        let window_series = (1..=n)
            .filter(|end| end % stride == 0 || *end == n)
            .map(|end| {
                let cm = matrix(&pairs[end.saturating_sub(window)..end]);
                WindowPoint {
                    end,
                    accuracy: cm.accuracy(),
                    macro_f: macro_micro(&cm).0,
                }
            })
            .collect();
        MetricsReport {
            cumulative: Summary::from_matrix(matrix(pairs)),
            final_segment: Summary::from_matrix(matrix(&pairs[tail..])),
            window,
            window_series,
            timing: Timing::new(latencies_us),
        }
    }

    /// The report with wall-clock fields zeroed, for replay comparisons.
    pub fn without_timing(&self) -> Self {
        MetricsReport {
            timing: Timing::new(&[]),
            ..self.clone()
        }
    }
}

/// First index of the trailing segment.
pub fn final_start(n: usize) -> usize {
    n - ((n as f64 * FINAL_FRACTION).round() as usize).min(n)
}

/// Confusion matrix kept up to date one prediction at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementalMetrics {
    pub matrix: ConfusionMatrix,
}

impl IncrementalMetrics {
    pub fn new(classes: Vec<String>) -> Self {
        IncrementalMetrics {
            matrix: ConfusionMatrix::new(classes),
        }
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.matrix.record(truth, predicted);
    }

    pub fn summary(&self) -> Summary {
        Summary::from_matrix(self.matrix.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub index: usize,
    pub contributor_id: String,
    pub truth: usize,
    pub predicted: usize,
    pub probs: Vec<f64>,
    pub latency_us: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: MetricsReport,
    /// Cumulative metrics kept up to date during the run.
    pub incremental: Summary,
    pub log: Vec<PredictionRecord>,
}

fn elapsed_us(start: Instant) -> u64 {
    start.elapsed().as_micros() as u64
}

/// Test-then-train over a time-ordered stream: each aggregate updates its
/// contributor profile, the snapshot is classified, and only then learnt.
pub fn prequential_run<C: OnlineClassifier + ?Sized>(
    stream: &[DailyAggregate],
    store: &mut ProfileStore,
    classifier: &mut C,
    features: &FeatureSet,
    target: Target,
    window: usize,
) -> Result<RunOutcome> {
    let classes = class_names(target);
    let mut running = IncrementalMetrics::new(classes.clone());
    let mut log = Vec::with_capacity(stream.len());
    for (index, agg) in stream.iter().enumerate() {
        let start = Instant::now();
        let x = store.update_ref(agg).project(features);
        let truth = target.label_of(&agg.labels());
        let probs = classifier.predict_proba(&x).map_err(|e| e.at_sample(index))?;
        let predicted = argmax(&probs);
        classifier.learn_one(&x, truth).map_err(|e| e.at_sample(index))?;
        running.record(truth, predicted);
        log.push(PredictionRecord {
            index,
            contributor_id: agg.contributor_id.clone(),
            truth,
            predicted,
            probs,
            latency_us: elapsed_us(start),
        });
    }
    let pairs: Vec<(usize, usize)> = log.iter().map(|r| (r.truth, r.predicted)).collect();
    let latencies: Vec<u64> = log.iter().map(|r| r.latency_us).collect();
    Ok(RunOutcome {
        report: MetricsReport::from_pairs(&classes, &pairs, &latencies, window),
        incremental: running.summary(),
        log,
    })
}

pub fn write_prediction_log<W: Write>(log: &[PredictionRecord], n_classes: usize, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["index".to_string(), "contributor_id".into(), "true".into(), "predicted".into()];
    header.extend((0..n_classes).map(|c| format!("p{c}")));
    header.push("latency_us".into());
    w.write_record(&header)?;
    for r in log {
        let mut row = vec![
            r.index.to_string(),
            r.contributor_id.clone(),
            r.truth.to_string(),
            r.predicted.to_string(),
        ];
        row.extend(r.probs.iter().map(|p| p.to_string()));
        row.push(r.latency_us.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<prediction log>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackingRecord {
    pub index: usize,
    pub contributor_id: String,
    pub true_user: usize,
    pub predicted_user: usize,
    pub true_contribution: usize,
    pub predicted_contribution: usize,
    pub p_bot: f64,
    pub p_malign: f64,
    pub true_joint: JointClass,
    pub predicted_joint: JointClass,
    pub latency_us: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackingOutcome {
    pub user: MetricsReport,
    pub contribution: MetricsReport,
    pub joint: MetricsReport,
    pub log: Vec<StackingRecord>,
}

/// Prequential evaluation of the two-level model. Profiles are projected
/// onto the model's input layout.
pub fn prequential_stacking(
    stream: &[DailyAggregate],
    store: &mut ProfileStore,
    model: &mut StackingModel,
    window: usize,
) -> Result<StackingOutcome> {
    let layout = model.input_features().clone();
    let mut log = Vec::with_capacity(stream.len());
    for (index, agg) in stream.iter().enumerate() {
        let start = Instant::now();
        let x = store.update_ref(agg).project(&layout);
        let labels = agg.labels();
        let (yu, yc) = (labels.user_type.label(), labels.contribution_type.label());
        let p = model.predict(&x).map_err(|e| e.at_sample(index))?;
        model
            .learn_after_predict(&x, &p, yu, yc)
            .map_err(|e| e.at_sample(index))?;
        log.push(StackingRecord {
            index,
            contributor_id: agg.contributor_id.clone(),
            true_user: yu,
            predicted_user: argmax(&p.user),
            true_contribution: yc,
            predicted_contribution: argmax(&p.contribution),
            p_bot: p.user[1],
            p_malign: p.contribution[1],
            true_joint: labels.joint_class,
            predicted_joint: p.joint,
            latency_us: elapsed_us(start),
        });
    }
    let lat: Vec<u64> = log.iter().map(|r| r.latency_us).collect();
    let report = |classes: Vec<String>, pairs: Vec<(usize, usize)>| {
        MetricsReport::from_pairs(&classes, &pairs, &lat, window)
    };
    Ok(StackingOutcome {
        user: report(
            class_names(Target::UserType),
            log.iter().map(|r| (r.true_user, r.predicted_user)).collect(),
        ),
        contribution: report(
            class_names(Target::ContributionType),
            log.iter()
                .map(|r| (r.true_contribution, r.predicted_contribution))
                .collect(),
        ),
        joint: report(
            joint_class_names(),
            log.iter()
                .map(|r| (r.true_joint.label(), r.predicted_joint.label()))
                .collect(),
        ),
        log,
    })
}

pub fn write_stacking_log<W: Write>(log: &[StackingRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in log {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<prediction log>", e))?;
    Ok(())
}

/// One line of a results table: accuracy, macro-F, F of classes 0 and 1,
/// and processing time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub accuracy: f64,
    pub macro_f: f64,
    pub f0: f64,
    pub f1: f64,
    pub seconds: f64,
}

impl TableRow {
    pub fn from_report(label: impl Into<String>, report: &MetricsReport) -> Self {
        let s = &report.cumulative;
        TableRow {
            label: label.into(),
            accuracy: s.accuracy,
            macro_f: s.macro_f,
            f0: s.f_of(0),
            f1: s.f_of(1),
            seconds: report.timing.total_seconds,
        }
    }
}

/// Percentages with two decimals, one row per run.
pub fn render_table(rows: &[TableRow]) -> String {
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(5);
    let mut out = format!(
        "{:<width$}  {:>8}  {:>8}  {:>8}  {:>8}  {:>9}\n",
        "Model", "Accuracy", "Macro-F", "F#0", "F#1", "Time (s)"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>8.2}  {:>8.2}  {:>8.2}  {:>8.2}  {:>9.2}",
            r.label,
            100.0 * r.accuracy,
            100.0 * r.macro_f,
            100.0 * r.f0,
            100.0 * r.f1,
            r.seconds
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn half_right_matrix() {
        let cm = ConfusionMatrix::from_counts(vec![vec![1, 1], vec![1, 1]]);
        assert!(close(f_measure(&cm, 0), 0.5));
        let (ma, mi) = macro_micro(&cm);
        assert!(close(ma, 0.5) && close(mi, 0.5));
    }

    #[test]
    fn diagonal_is_perfect() {
        let cm = ConfusionMatrix::from_counts(vec![vec![3, 0, 0], vec![0, 2, 0], vec![0, 0, 5]]);
        assert!((0..3).all(|c| f_measure(&cm, c) == 1.0));
        assert_eq!(macro_micro(&cm), (1.0, 1.0));
    }

    #[test]
    fn imbalanced_oracle() {
        let cm = ConfusionMatrix::from_counts(vec![vec![98, 0], vec![2, 0]]);
        let p0 = 98.0 / 100.0;
        let f0 = 2.0 * p0 / (p0 + 1.0);
        assert_eq!(f_measure(&cm, 1), 0.0);
        let (ma, mi) = macro_micro(&cm);
        assert!(close(ma, f0 / 2.0));
        assert!((ma - 0.4949).abs() < 1e-4);
        assert!(close(mi, 0.98));
    }

    #[test]
    fn empty_matrix_is_zero() {
        let cm = ConfusionMatrix::new(class_names(Target::UserType));
        assert_eq!(cm.accuracy(), 0.0);
        assert_eq!(macro_micro(&cm), (0.0, 0.0));
        let r = MetricsReport::from_pairs(&cm.classes, &[], &[], 10);
        assert_eq!(r.cumulative.n_events, 0);
        assert!(r.window_series.is_empty());
    }

    #[test]
    fn constant_predictor_on_alternating_labels() {
        let pairs: Vec<(usize, usize)> = (0..100).map(|i| (i % 2, 0)).collect();
        let r = MetricsReport::from_pairs(&class_names(Target::UserType), &pairs, &[], 10);
        assert_eq!(r.cumulative.accuracy, 0.5);
        assert_eq!(r.final_segment.n_events, 20);
        assert_eq!(r.cumulative.micro_f, r.cumulative.accuracy);
    }

    #[test]
    fn window_series_covers_stream() {
        let pairs: Vec<(usize, usize)> = (0..10).map(|i| (0, usize::from(i < 5))).collect();
        let r = MetricsReport::from_pairs(&class_names(Target::UserType), &pairs, &[], 4);
        assert_eq!(r.window_series.last().unwrap().end, 10);
        assert_eq!(r.window_series.last().unwrap().accuracy, 1.0);
        assert_eq!(r.window_series[3].accuracy, 0.0);
    }

    #[test]
    fn final_segment_bounds() {
        assert_eq!(final_start(0), 0);
        assert_eq!(final_start(10), 8);
        assert_eq!(final_start(20_000), 16_000);
    }

    #[test]
    fn table_layout() {
        let t = render_table(&[TableRow {
            label: "RF".into(),
            accuracy: 0.9144,
            macro_f: 0.8746,
            f0: 0.9,
            f1: 0.8,
            seconds: 1.5,
        }]);
        assert!(t.contains("91.44") && t.contains("87.46"));
        assert_eq!(t.lines().count(), 2);
    }
}
