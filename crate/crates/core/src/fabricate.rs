//! Synthetic bot samples drawn from per-cluster quartile statistics.
//!
//! Bot aggregates are clustered with k-means, each cluster is summarised by
//! the five-number summary of every feature, and new samples are drawn
//! uniformly inside the four inter-quartile intervals: one quarter of the
//! requested count per interval.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Duration, NaiveDate};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::standardize;
use crate::error::{Error, Result};
use crate::ingest::sort_stream;
use crate::model::{renormalize_probabilities, DailyAggregate, Feature, FeatureRow, N_FEATURES};
use crate::rng::{derive_seed, substream};

pub const MAX_LLOYD_ITERATIONS: usize = 300;

/// Five-number summary plus mean of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

impl Quartiles {
    /// Interval bounds in generation order.
    pub fn intervals(&self) -> [(f64, f64); 4] {
        [
            (self.min, self.q1),
            (self.q1, self.median),
            (self.median, self.q3),
            (self.q3, self.max),
        ]
    }

    pub fn is_degenerate(&self) -> bool {
        self.min == self.max
    }
}

/// Quantile by linear interpolation between the closest order statistics
/// of an ascending slice.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn quartile_stats(samples: &[f64]) -> Result<Quartiles> {
    if samples.is_empty() {
        return Err(Error::validation("samples", "cannot summarise an empty sample"));
    }
    if let Some(v) = samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::validation("samples", format!("non-finite value {v}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(Quartiles {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
        mean: sorted.iter().sum::<f64>() / n as f64,
        count: n,
    })
}

/// Per-column quartile statistics of a sample matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileStats {
    pub columns: Vec<Quartiles>,
    pub count: usize,
}

impl QuartileStats {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::validation("samples", "cannot summarise an empty sample"))?;
        let columns = (0..d)
            .map(|j| {
                let col: Vec<f64> = rows.iter().map(|r| r.as_ref()[j]).collect();
                quartile_stats(&col)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuartileStats {
            columns,
            count: rows.len(),
        })
    }

    pub fn dims(&self) -> usize {
        self.columns.len()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub cluster_sizes: Vec<usize>,
    /// Statistics of each cluster's members, in the fitted coordinates;
    /// `None` for a cluster left empty by coincident samples.
    pub cluster_stats: Vec<Option<QuartileStats>>,
    pub iterations: usize,
    /// Sum of squared distances after seeding and after every Lloyd step.
    pub distortion_history: Vec<f64>,
}

impl KMeansModel {
    /// Statistics of each cluster computed on other coordinates of the same
    /// samples (for example the raw values behind standardised ones).
    pub fn cluster_stats_of<R: AsRef<[f64]>>(&self, rows: &[R]) -> Result<Vec<Option<QuartileStats>>> {
        (0..self.k)
            .map(|c| {
                let members: Vec<&[f64]> = rows
                    .iter()
                    .zip(&self.assignments)
                    .filter(|(_, a)| **a == c)
                    .map(|(r, _)| r.as_ref())
                    .collect();
                if members.is_empty() {
                    Ok(None)
                } else {
                    QuartileStats::from_rows(&members).map(Some)
                }
            })
            .collect()
    }

    pub fn mean_distance<R: AsRef<[f64]>>(&self, rows: &[R]) -> f64 {
        mean_distance(rows, &self.centroids)
    }
}

fn mean_distance<R: AsRef<[f64]>>(rows: &[R], centroids: &[Vec<f64>]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter()
        .map(|r| nearest(r.as_ref(), centroids).1.sqrt())
        .sum::<f64>()
        / rows.len() as f64
}

fn check_samples<R: AsRef<[f64]>>(samples: &[R], k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::validation("k", "need at least one cluster"));
    }
    if samples.len() < k {
        return Err(Error::validation(
            "k",
            format!("{k} clusters requested for {} samples", samples.len()),
        ));
    }
    let d = samples[0].as_ref().len();
    for r in samples {
        let r = r.as_ref();
        if r.len() != d || r.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("samples", "rows must be finite and equally sized"));
        }
    }
    Ok(d)
}

/// k-means++ seeding: the first centroid is uniform, the rest are drawn
/// with probability proportional to squared distance from the chosen set.
fn seed_centroids<R: AsRef<[f64]>>(samples: &[R], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = substream(seed, 0);
    let n = samples.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = samples
        .iter()
        .map(|s| sq_dist(s.as_ref(), samples[chosen[0]].as_ref()))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && target < *d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            if d2[pick] == 0.0 {
                // rounding pushed us past the end
                pick = (0..n).rev().find(|&i| d2[i] > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            // all remaining points coincide with a centroid
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (d, s) in d2.iter_mut().zip(samples) {
            *d = d.min(sq_dist(s.as_ref(), samples[next].as_ref()));
        }
    }
    chosen.into_iter().map(|i| samples[i].as_ref().to_vec()).collect()
}

/// Lloyd iterations from the given centroids until assignments settle.
fn lloyd<R: AsRef<[f64]>>(samples: &[R], mut centroids: Vec<Vec<f64>>) -> KMeansModel {
    let k = centroids.len();
    let d = centroids[0].len();
    let mut assignments: Vec<usize> = samples.iter().map(|s| nearest(s.as_ref(), &centroids).0).collect();
    let sse = |centroids: &[Vec<f64>], assignments: &[usize]| -> f64 {
        samples
            .iter()
            .zip(assignments)
            .map(|(s, &a)| sq_dist(s.as_ref(), &centroids[a]))
            .sum()
    };
    let mut history = vec![sse(&centroids, &assignments)];
    let mut iterations = 0;
    while iterations < MAX_LLOYD_ITERATIONS {
        iterations += 1;
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (s, &a) in samples.iter().zip(&assignments) {
            counts[a] += 1;
            for (acc, v) in sums[a].iter_mut().zip(s.as_ref()) {
                *acc += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|v| v / counts[c] as f64).collect();
            }
        }
        // an empty cluster moves to the sample farthest from its own centroid
        for c in 0..k {
            if counts[c] == 0 {
                let far = samples
                    .iter()
                    .zip(&assignments)
                    .enumerate()
                    .max_by(|(_, (a, &ca)), (_, (b, &cb))| {
                        sq_dist(a.as_ref(), &centroids[ca]).total_cmp(&sq_dist(b.as_ref(), &centroids[cb]))
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                centroids[c] = samples[far].as_ref().to_vec();
                assignments[far] = c;
            }
        }
        let next: Vec<usize> = samples.iter().map(|s| nearest(s.as_ref(), &centroids).0).collect();
        let changed = next != assignments;
        assignments = next;
        history.push(sse(&centroids, &assignments));
        if !changed {
            break;
        }
    }
    let mut cluster_sizes = vec![0; k];
    for &a in &assignments {
        cluster_sizes[a] += 1;
    }
    KMeansModel {
        k,
        centroids,
        assignments,
        cluster_sizes,
        cluster_stats: Vec::new(),
        iterations,
        distortion_history: history,
    }
}

fn with_stats<R: AsRef<[f64]>>(mut model: KMeansModel, samples: &[R]) -> Result<KMeansModel> {
    model.cluster_stats = model.cluster_stats_of(samples)?;
    Ok(model)
}

/// Fits `k` clusters with k-means++ seeding and Lloyd iterations.
pub fn kmeans_fit<R: AsRef<[f64]>>(samples: &[R], k: usize, seed: u64) -> Result<KMeansModel> {
    check_samples(samples, k)?;
    let model = lloyd(samples, seed_centroids(samples, k, seed));
    with_stats(model, samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub mean_distance: f64,
}

/// Mean distance of samples to their centroid for each `k` in ascending order.
///
/// Each `k` starts from the previous solution plus the farthest samples, and
/// keeps whichever of the seeded or the Lloyd-refined configuration has the
/// smaller mean distance. Adding a centroid never moves a sample farther
/// from its nearest one, so the curve is non-increasing.
pub fn k_selection_curve<R: AsRef<[f64]>>(
    samples: &[R],
    k_values: &[usize],
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    let mut ks = k_values.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut curve = Vec::with_capacity(ks.len());
    let mut previous: Option<Vec<Vec<f64>>> = None;
    for k in ks {
        check_samples(samples, k)?;
        let init = match previous.take() {
            None => seed_centroids(samples, k, seed),
            Some(mut centroids) => {
                while centroids.len() < k {
                    let far = samples
                        .iter()
                        .map(|s| nearest(s.as_ref(), &centroids).1)
                        .enumerate()
                        .max_by(|a, b| a.1.total_cmp(&b.1))
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    centroids.push(samples[far].as_ref().to_vec());
                }
                centroids
            }
        };
        let seeded = mean_distance(samples, &init);
        let refined = lloyd(samples, init.clone());
        let refined_distance = mean_distance(samples, &refined.centroids);
        let (distance, centroids) = if refined_distance <= seeded {
            (refined_distance, refined.centroids)
        } else {
            (seeded, init)
        };
        curve.push(CurvePoint {
            k,
            mean_distance: distance,
        });
        previous = Some(centroids);
    }
    Ok(curve)
}

/// The `k` with the largest relative drop in mean distance from its predecessor.
pub fn elbow(curve: &[CurvePoint]) -> Option<usize> {
    curve
        .windows(2)
        .filter(|w| w[0].mean_distance > 0.0)
        .map(|w| (w[1].k, (w[0].mean_distance - w[1].mean_distance) / w[0].mean_distance))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticBatch {
    pub samples: Vec<Vec<f64>>,
    /// Interval (0..4) each sample was drawn from, parallel to `samples`.
    pub intervals: Vec<u8>,
    pub interval_counts: [usize; 4],
    pub seed: u64,
    pub source: QuartileStats,
}

/// Splits `count` into four interval sizes, remainder to the earliest intervals.
pub fn interval_counts(count: usize) -> [usize; 4] {
    let base = count / 4;
    let rem = count % 4;
    std::array::from_fn(|i| base + usize::from(i < rem))
}

/// Draws `count` samples. Every feature of a sample is drawn independently
/// and uniformly inside that feature's bounds for the sample's interval.
/// Interval `i` uses RNG lane `i`, so the output is fixed by the seed.
pub fn generate_synthetic(stats: &QuartileStats, count: usize, seed: u64) -> Result<SyntheticBatch> {
    if count == 0 {
        return Err(Error::validation("count", "must generate at least one sample"));
    }
    for (j, q) in stats.columns.iter().enumerate() {
        if !(q.min <= q.q1 && q.q1 <= q.median && q.median <= q.q3 && q.q3 <= q.max) {
            return Err(Error::validation("stats", format!("column {j} is not monotone")));
        }
    }
    let counts = interval_counts(count);
    let mut samples = Vec::with_capacity(count);
    let mut intervals = Vec::with_capacity(count);
    for (interval, &n) in counts.iter().enumerate() {
        let mut rng = substream(seed, interval as u64);
        for _ in 0..n {
            let row = stats
                .columns
                .iter()
                .map(|q| {
                    let (lo, hi) = q.intervals()[interval];
                    if lo == hi {
                        lo
                    } else {
                        (lo + (hi - lo) * rng.random::<f64>()).min(hi)
                    }
                })
                .collect();
            samples.push(row);
            intervals.push(interval as u8);
        }
    }
    Ok(SyntheticBatch {
        samples,
        intervals,
        interval_counts: counts,
        seed,
        source: stats.clone(),
    })
}

/// How many synthetic samples close a contributor gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapFill {
    /// The largest multiple of four not above the gap, so every interval
    /// receives the same number of samples.
    #[default]
    WholeQuartiles,
    /// Exactly the gap.
    Exact,
}

impl GapFill {
    pub fn count(self, gap: usize) -> usize {
        match self {
            GapFill::WholeQuartiles => gap / 4 * 4,
            GapFill::Exact => gap,
        }
    }
}

/// Splits `total` proportionally to `weights` by largest remainder.
pub fn proportional_split(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut out: Vec<usize> = weights.iter().map(|w| total * w / sum).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(total * weights[i] % sum), i));
    let assigned: usize = out.iter().sum();
    for &i in order.iter().take(total - assigned) {
        out[i] += 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContributorCounts {
    pub bots: usize,
    pub humans: usize,
}

pub fn contributor_counts(aggregates: &[DailyAggregate]) -> ContributorCounts {
    let mut per: BTreeMap<&str, bool> = BTreeMap::new();
    for a in aggregates {
        *per.entry(&a.contributor_id).or_default() |= a.is_bot;
    }
    let bots = per.values().filter(|b| **b).count();
    ContributorCounts {
        bots,
        humans: per.len() - bots,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceOutcome {
    /// Real and synthetic aggregates ordered by day then contributor id.
    pub aggregates: Vec<DailyAggregate>,
    pub counts: ContributorCounts,
    pub n_synthetic: usize,
    pub per_cluster: Vec<usize>,
    /// Raw-feature statistics of every bot cluster.
    pub cluster_stats: Vec<Option<QuartileStats>>,
    /// Statistics of all real bot aggregates.
    pub original_stats: Option<QuartileStats>,
    /// Statistics of the generated aggregates after renormalisation.
    pub synthetic_stats: Option<QuartileStats>,
}

pub const BOT_CLUSTERS: usize = 2;

/// Synthetic bot aggregates and the cluster model behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBots {
    /// Generation order: cluster by cluster.
    pub aggregates: Vec<DailyAggregate>,
    pub per_cluster: Vec<usize>,
    pub cluster_stats: Vec<Option<QuartileStats>>,
}

/// Fits `BOT_CLUSTERS` clusters to the standardised real bot aggregates
/// and draws `count` synthetic aggregates, split across clusters by size.
/// Days are uniform over the span of `real`.
pub fn synthesize_bots(real: &[DailyAggregate], count: usize, seed: u64) -> Result<SyntheticBots> {
    let bot_rows: Vec<FeatureRow> = real
        .iter()
        .filter(|a| a.is_bot && !a.synthetic)
        .map(|a| a.features)
        .collect();
    if bot_rows.is_empty() {
        return Err(Error::NoBots);
    }
    let scaled = standardize(&bot_rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    let k = BOT_CLUSTERS.min(bot_rows.len());
    let model = kmeans_fit(&scaled, k, derive_seed(seed, 1))?;
    let cluster_stats = model.cluster_stats_of(&bot_rows)?;
    let per_cluster = proportional_split(count, &model.cluster_sizes);

    let first = real.iter().map(|a| a.day).min().unwrap_or_default();
    let last = real.iter().map(|a| a.day).max().unwrap_or_default();
    let span = (last - first).num_days();
    let mut day_rng = substream(derive_seed(seed, 2), 0);

    let mut aggregates = Vec::with_capacity(count);
    for (c, (&n, stats)) in per_cluster.iter().zip(&cluster_stats).enumerate() {
        let Some(stats) = stats.as_ref().filter(|_| n > 0) else {
            continue;
        };
        let batch = generate_synthetic(stats, n, derive_seed(seed, 100 + c as u64))?;
        for (i, sample) in batch.samples.into_iter().enumerate() {
            let mut features: FeatureRow = [0.0; N_FEATURES];
            features.copy_from_slice(&sample);
            renormalize_probabilities(&mut features);
            let day: NaiveDate = first + Duration::days(day_rng.random_range(0..=span));
            aggregates.push(DailyAggregate::new(
                format!("synthetic-{c}-{i:07}"),
                day,
                true,
                features,
                true,
            )?);
        }
    }
    Ok(SyntheticBots {
        aggregates,
        per_cluster,
        cluster_stats,
    })
}

/// Adds synthetic bot aggregates until bots and humans are (nearly) equal in
/// number of contributors. Each synthetic aggregate is its own contributor.
pub fn balance_dataset(real: &[DailyAggregate], seed: u64, rule: GapFill) -> Result<BalanceOutcome> {
    let counts = contributor_counts(real);
    if counts.bots == 0 {
        return Err(Error::NoBots);
    }
    let n_synthetic = rule.count(counts.humans.saturating_sub(counts.bots));
    let bot_rows: Vec<FeatureRow> = real
        .iter()
        .filter(|a| a.is_bot && !a.synthetic)
        .map(|a| a.features)
        .collect();
    let original_stats = QuartileStats::from_rows(&bot_rows).ok();
    let mut aggregates = real.to_vec();
    if n_synthetic == 0 {
        sort_stream(&mut aggregates);
        return Ok(BalanceOutcome {
            aggregates,
            counts,
            n_synthetic: 0,
            per_cluster: Vec::new(),
            cluster_stats: Vec::new(),
            original_stats,
            synthetic_stats: None,
        });
    }
    let synthetic = synthesize_bots(real, n_synthetic, seed)?;
    let synthetic_stats = QuartileStats::from_rows(
        &synthetic.aggregates.iter().map(|a| a.features).collect::<Vec<_>>(),
    )
    .ok();
    aggregates.extend(synthetic.aggregates);
    sort_stream(&mut aggregates);
    Ok(BalanceOutcome {
        aggregates,
        counts,
        n_synthetic,
        per_cluster: synthetic.per_cluster,
        cluster_stats: synthetic.cluster_stats,
        original_stats,
        synthetic_stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Mean,
    Min,
    Q1,
    Q2,
    Q3,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [
        Statistic::Mean,
        Statistic::Min,
        Statistic::Q1,
        Statistic::Q2,
        Statistic::Q3,
    ];

    pub fn of(self, q: &Quartiles) -> f64 {
        match self {
            Statistic::Mean => q.mean,
            Statistic::Min => q.min,
            Statistic::Q1 => q.q1,
            Statistic::Q2 => q.median,
            Statistic::Q3 => q.q3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Min => "min",
            Statistic::Q1 => "Q1",
            Statistic::Q2 => "Q2",
            Statistic::Q3 => "Q3",
        }
    }
}

/// Relative change of a statistic, or `None` when the original is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Change(pub Option<f64>);

impl fmt::Display for Change {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(pct) => write!(f, "{pct:.2}"),
            None => f.write_str("n/a (zero base)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub feature: Feature,
    pub statistic: Statistic,
    pub original: f64,
    pub synthetic: f64,
    pub change: Change,
}

pub fn percent_change(original: f64, synthetic: f64) -> Change {
    if original == 0.0 {
        Change(None)
    } else {
        Change(Some(100.0 * (synthetic - original) / original))
    }
}

/// Percentage change of each statistic from the original to the synthetic data.
pub fn compare_stats(
    features: &[Feature],
    original: &QuartileStats,
    synthetic: &QuartileStats,
) -> Result<Vec<ComparisonRow>> {
    if original.dims() != synthetic.dims() || original.dims() != features.len() {
        return Err(Error::validation("stats", "feature lists differ"));
    }
    let mut rows = Vec::with_capacity(features.len() * 5);
    for (f, (o, s)) in features.iter().zip(original.columns.iter().zip(&synthetic.columns)) {
        for stat in Statistic::ALL {
            let (a, b) = (stat.of(o), stat.of(s));
            rows.push(ComparisonRow {
                feature: *f,
                statistic: stat,
                original: a,
                synthetic: b,
                change: percent_change(a, b),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_of_one_to_five() {
        let q = quartile_stats(&[5.0, 1.0, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!((q.min, q.q1, q.median, q.q3, q.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        assert_eq!(q.mean, 3.0);
    }

    #[test]
    fn quartiles_interpolate() {
        // positions 0.75, 1.5, 2.25 over [1, 2, 3, 4]
        let q = quartile_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.75, 2.5, 3.25));
    }

    #[test]
    fn degenerate_quartiles() {
        let q = quartile_stats(&[7.0]).unwrap();
        assert_eq!((q.min, q.q1, q.median, q.q3, q.max), (7.0, 7.0, 7.0, 7.0, 7.0));
        let q = quartile_stats(&[2.5; 9]).unwrap();
        assert!(q.is_degenerate() && q.median == 2.5);
        assert!(quartile_stats(&[]).is_err());
    }

    #[test]
    fn interval_split() {
        assert_eq!(interval_counts(46_532), [11_633; 4]);
        assert_eq!(interval_counts(5), [2, 1, 1, 1]);
        assert_eq!(interval_counts(3), [1, 1, 1, 0]);
    }

    #[test]
    fn gap_fill_rules() {
        assert_eq!(GapFill::Exact.count(6), 6);
        assert_eq!(GapFill::WholeQuartiles.count(6), 4);
        assert_eq!(GapFill::WholeQuartiles.count(46_952 - 417), 46_532);
    }

    #[test]
    fn proportional_split_sums() {
        assert_eq!(proportional_split(10, &[1, 1]), vec![5, 5]);
        assert_eq!(proportional_split(7, &[3, 1]), vec![5, 2]);
        assert_eq!(proportional_split(5, &[0, 0]), vec![0, 0]);
        assert_eq!(proportional_split(1, &[1, 1]), vec![1, 0]);
    }

    #[test]
    fn degenerate_stats_emit_constant() {
        let stats = QuartileStats::from_rows(&[vec![3.0, 1.0], vec![3.0, 2.0]]).unwrap();
        let batch = generate_synthetic(&stats, 9, 1).unwrap();
        assert!(batch.samples.iter().all(|s| s[0] == 3.0));
        assert!(batch.samples.iter().all(|s| (1.0..=2.0).contains(&s[1])));
    }

    #[test]
    fn kmeans_single_cluster_is_mean() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 4.0], vec![4.0, 2.0]];
        let m = kmeans_fit(&pts, 1, 3).unwrap();
        assert_eq!(m.centroids[0], vec![2.0, 2.0]);
    }

    #[test]
    fn kmeans_k_equals_n_has_zero_distortion() {
        let pts = vec![vec![0.0], vec![1.0], vec![5.0], vec![9.0]];
        let m = kmeans_fit(&pts, 4, 0).unwrap();
        assert_eq!(*m.distortion_history.last().unwrap(), 0.0);
        assert_eq!(m.cluster_sizes, vec![1; 4]);
    }

    #[test]
    fn kmeans_rejects_bad_k() {
        assert!(kmeans_fit(&[vec![1.0]], 2, 0).is_err());
        assert!(kmeans_fit(&[vec![1.0]], 0, 0).is_err());
    }

    #[test]
    fn empty_cluster_is_reseeded() {
        // duplicate points force coincident seeds for k=3
        let pts = vec![vec![0.0], vec![0.0], vec![0.0], vec![10.0]];
        let m = kmeans_fit(&pts, 3, 0).unwrap();
        assert_eq!(m.cluster_sizes.iter().sum::<usize>(), 4);
        assert!(m.centroids.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn change_formatting() {
        assert_eq!(percent_change(2.0, 1.5).to_string(), "-25.00");
        assert_eq!(percent_change(0.0, 1.5).to_string(), "n/a (zero base)");
        assert_eq!(percent_change(3.0, 3.0).0, Some(0.0));
    }
}
