//! Incrementally maintained contributor profiles.
//!
//! A profile keeps running sums of the count features (#3, #5, #9, #11-#14),
//! running means of the averaged features (#4, #6, #15-#18), and derives
//! the weekly rates #7, #8 and the revert frequency #10 after every update.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::analysis::FeatureSet;
use crate::error::{Error, Result};
use crate::model::{DailyAggregate, Feature, FeatureRow, FeatureVector, N_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accumulation {
    Sum,
    Mean,
    Derived,
}

pub fn accumulation(feature: Feature) -> Accumulation {
    use Feature::*;
    match feature {
        Reviews | Pages | Reverts | LinksRatio | RepeatedLinksRatio | CharsInserted
        | CharsDeleted => Accumulation::Sum,
        ReviewsPerWeek | PagesPerWeek | RevertFrequency => Accumulation::Derived,
        _ => Accumulation::Mean,
    }
}

/// Whole weeks covered by a contribution span, at least one.
pub fn weeks_between(first: NaiveDate, last: NaiveDate) -> f64 {
    let days = (last - first).num_days() + 1;
    ((days as f64) / 7.0).ceil().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributorProfile {
    pub contributor_id: String,
    pub is_bot: bool,
    pub first_seen: NaiveDate,
    pub last_seen: NaiveDate,
    /// Current value of every feature column in canonical order.
    pub values: FeatureRow,
    /// Observations folded into the running means.
    pub mean_count: u64,
    pub n_updates: u64,
}

impl ContributorProfile {
    fn new(agg: &DailyAggregate) -> Self {
        ContributorProfile {
            contributor_id: agg.contributor_id.clone(),
            is_bot: agg.is_bot,
            first_seen: agg.day,
            last_seen: agg.day,
            values: [0.0; N_FEATURES],
            mean_count: 0,
            n_updates: 0,
        }
    }

    pub fn get(&self, feature: Feature) -> f64 {
        self.values[feature.index()]
    }

    pub fn weeks(&self) -> f64 {
        weeks_between(self.first_seen, self.last_seen)
    }

    fn fold(&mut self, agg: &DailyAggregate) {
        self.is_bot |= agg.is_bot;
        self.first_seen = self.first_seen.min(agg.day);
        self.last_seen = self.last_seen.max(agg.day);
        self.n_updates += 1;
        self.mean_count += 1;
        let n = self.mean_count as f64;
        for f in Feature::ALL {
            let x = agg.get(f);
            let slot = &mut self.values[f.index()];
            match accumulation(f) {
                Accumulation::Sum => *slot += x,
                Accumulation::Mean => *slot += (x - *slot) / n,
                Accumulation::Derived => {}
            }
        }
        let weeks = self.weeks();
        let reviews = self.get(Feature::Reviews);
        self.values[Feature::ReviewsPerWeek.index()] = reviews / weeks;
        self.values[Feature::PagesPerWeek.index()] = self.get(Feature::Pages) / weeks;
        // independently generated synthetic aggregates can report more
        // reverts than reviews
        self.values[Feature::RevertFrequency.index()] = if reviews > 0.0 {
            (self.get(Feature::Reverts) / reviews).min(1.0)
        } else {
            0.0
        };
    }

    /// Values of `set` in canonical order.
    pub fn to_feature_vector(&self, set: &FeatureSet) -> Result<FeatureVector> {
        let values = set.features().iter().map(|f| self.get(*f)).collect();
        FeatureVector::new(set.features().to_vec(), values)
    }

    /// Values of `set` without the identifier list, for the hot path.
    pub fn project(&self, set: &FeatureSet) -> Vec<f64> {
        set.features().iter().map(|f| self.get(*f)).collect()
    }
}

/// One profile per contributor id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileStore {
    profiles: BTreeMap<String, ContributorProfile>,
}

impl ProfileStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds an aggregate into its contributor's profile, creating it on
    /// first sight, and returns a snapshot of the updated profile.
    pub fn update(&mut self, agg: &DailyAggregate) -> ContributorProfile {
        self.update_ref(agg).clone()
    }

    /// As [`ProfileStore::update`] but borrows the stored profile.
    pub fn update_ref(&mut self, agg: &DailyAggregate) -> &ContributorProfile {
        let profile = self
            .profiles
            .entry(agg.contributor_id.clone())
            .or_insert_with(|| ContributorProfile::new(agg));
        profile.fold(agg);
        profile
    }

    pub fn get(&self, contributor_id: &str) -> Option<&ContributorProfile> {
        self.profiles.get(contributor_id)
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ContributorProfile> {
        self.profiles.values()
    }

    /// Writes one JSON object per profile, ordered by contributor id.
    pub fn export_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for p in self.profiles.values() {
            serde_json::to_writer(&mut writer, p)?;
            writer.write_all(b"\n").map_err(|e| Error::io("<profiles>", e))?;
        }
        Ok(())
    }

    pub fn import_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut store = ProfileStore::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<profiles>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let p: ContributorProfile =
                serde_json::from_str(&line).map_err(|e| Error::from(e).at_line(i as u64 + 1))?;
            if store.profiles.contains_key(&p.contributor_id) {
                return Err(Error::validation(
                    "contributor_id",
                    format!("duplicate profile {:?}", p.contributor_id),
                )
                .at_line(i as u64 + 1));
            }
            store.profiles.insert(p.contributor_id.clone(), p);
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ContributionType;

    fn agg(id: &str, day: u32, reviews: f64, reverts: f64, goodfaith: f64) -> DailyAggregate {
        let mut f = [0.0; N_FEATURES];
        f[Feature::Reviews.index()] = reviews;
        f[Feature::Pages.index()] = 1.0;
        f[Feature::Reverts.index()] = reverts;
        f[Feature::GoodfaithTrue.index()] = goodfaith;
        f[Feature::ArticleOk.index()] = 0.9;
        DailyAggregate {
            contributor_id: id.into(),
            day: NaiveDate::from_ymd_opt(2020, 1, day).unwrap(),
            is_bot: false,
            features: f,
            contribution_type: ContributionType::Positive,
            synthetic: false,
        }
    }

    #[test]
    fn first_update_rate_is_daily_count() {
        let mut store = ProfileStore::new();
        let p = store.update(&agg("a", 14, 14.0, 0.0, 0.5));
        assert_eq!(p.get(Feature::ReviewsPerWeek), 14.0);
        assert_eq!(p.weeks(), 1.0);
    }

    #[test]
    fn revert_frequency_is_ratio_of_sums() {
        let mut store = ProfileStore::new();
        store.update(&agg("a", 1, 4.0, 1.0, 0.5));
        let p = store.update(&agg("a", 2, 6.0, 1.0, 0.5));
        assert_eq!(p.get(Feature::Reviews), 10.0);
        assert_eq!(p.get(Feature::RevertFrequency), 0.2);
    }

    #[test]
    fn running_mean_of_two() {
        let mut store = ProfileStore::new();
        store.update(&agg("a", 1, 1.0, 0.0, 0.2));
        let p = store.update(&agg("a", 2, 1.0, 0.0, 0.4));
        assert!((p.get(Feature::GoodfaithTrue) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn weeks_span_calendar() {
        let d = |day| NaiveDate::from_ymd_opt(2020, 1, day).unwrap();
        assert_eq!(weeks_between(d(1), d(1)), 1.0);
        assert_eq!(weeks_between(d(1), d(7)), 1.0);
        assert_eq!(weeks_between(d(1), d(8)), 2.0);
        let mut store = ProfileStore::new();
        store.update(&agg("a", 1, 7.0, 0.0, 0.5));
        let p = store.update(&agg("a", 8, 7.0, 0.0, 0.5));
        assert_eq!(p.get(Feature::ReviewsPerWeek), 7.0);
    }

    #[test]
    fn revert_frequency_capped() {
        let mut store = ProfileStore::new();
        let p = store.update(&agg("a", 1, 1.0, 3.0, 0.5));
        assert_eq!(p.get(Feature::RevertFrequency), 1.0);
    }

    #[test]
    fn feature_vectors() {
        let mut store = ProfileStore::new();
        let p = store.update(&agg("a", 1, 3.0, 1.0, 0.5));
        assert_eq!(p.to_feature_vector(&FeatureSet::set3_target2()).unwrap().len(), 5);
        assert_eq!(p.to_feature_vector(&FeatureSet::set1()).unwrap().len(), 12);
        let empty = FeatureSet::custom(vec![]).unwrap();
        assert!(p.to_feature_vector(&empty).unwrap().is_empty());
    }

    #[test]
    fn jsonl_checkpoint_roundtrip() {
        let mut store = ProfileStore::new();
        store.update(&agg("b", 1, 3.0, 1.0, 0.5));
        store.update(&agg("a", 2, 2.0, 0.0, 0.1));
        let mut buf = Vec::new();
        store.export_jsonl(&mut buf).unwrap();
        let restored = ProfileStore::import_jsonl(buf.as_slice()).unwrap();
        assert_eq!(restored, store);
        let dup = [buf.clone(), buf].concat();
        assert!(ProfileStore::import_jsonl(dup.as_slice()).is_err());
    }
}
