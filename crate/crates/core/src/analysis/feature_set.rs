use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_canonical, Feature, Target};

/// Named column subsets used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSetId {
    /// Activity features #3 to #14.
    Set1,
    /// Every profile feature.
    Set2,
    /// Selected features for the user-type target.
    Set3Target1,
    /// Selected features for the contribution-type target.
    Set3Target2,
    Custom,
}

impl FeatureSetId {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSetId::Set1 => "set1",
            FeatureSetId::Set2 => "set2",
            FeatureSetId::Set3Target1 => "set3-target1",
            FeatureSetId::Set3Target2 => "set3-target2",
            FeatureSetId::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub id: FeatureSetId,
    features: Vec<Feature>,
}

impl FeatureSet {
    pub fn set1() -> Self {
        FeatureSet {
            id: FeatureSetId::Set1,
            features: Feature::ALL[..12].to_vec(),
        }
    }

    pub fn set2() -> Self {
        FeatureSet {
            id: FeatureSetId::Set2,
            features: Feature::ALL.to_vec(),
        }
    }

    pub fn set3_target1() -> Self {
        use Feature::*;
        FeatureSet {
            id: FeatureSetId::Set3Target1,
            features: vec![
                RevisionsPerPage,
                ReviewsPerWeek,
                PagesPerWeek,
                Reverts,
                RevertFrequency,
                RepeatedLinksRatio,
                GoodfaithTrue,
                ItemE,
                Wp10B,
                Wp10Stub,
            ],
        }
    }

    pub fn set3_target2() -> Self {
        use Feature::*;
        FeatureSet {
            id: FeatureSetId::Set3Target2,
            features: vec![Wp10B, Wp10C, Wp10Fa, Wp10Start, Wp10Stub],
        }
    }

    /// The selected set for a target.
    pub fn set3(target: Target) -> Self {
        match target {
            Target::UserType => Self::set3_target1(),
            Target::ContributionType => Self::set3_target2(),
        }
    }

    /// A user-defined set; identifiers are sorted into canonical order.
    pub fn custom(mut features: Vec<Feature>) -> Result<Self> {
        features.sort();
        check_canonical(&features)?;
        Ok(FeatureSet {
            id: FeatureSetId::Custom,
            features,
        })
    }

    /// Resolves a preset name. `set3` needs the target to pick its variant.
    pub fn from_name(name: &str, target: Target) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "set1" | "1" => Ok(Self::set1()),
            "set2" | "2" => Ok(Self::set2()),
            "set3" | "3" => Ok(Self::set3(target)),
            "set3-target1" => Ok(Self::set3_target1()),
            "set3-target2" => Ok(Self::set3_target2()),
            other => {
                let ids = other
                    .split(',')
                    .map(|s| s.parse::<Feature>())
                    .collect::<Result<Vec<_>>>()
                    .map_err(|_| {
                        Error::validation("feature_set", format!("unknown feature set {name:?}"))
                    })?;
                Self::custom(ids)
            }
        }
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn contains(&self, f: Feature) -> bool {
        self.features.binary_search(&f).is_ok()
    }

    /// Canonically ordered union of two sets.
    pub fn union(&self, other: &FeatureSet) -> FeatureSet {
        let mut features = self.features.clone();
        features.extend(other.features.iter().copied());
        features.sort();
        features.dedup();
        FeatureSet {
            id: FeatureSetId::Custom,
            features,
        }
    }

    /// Column positions of this set's features inside `outer`.
    pub fn positions_in(&self, outer: &FeatureSet) -> Result<Vec<usize>> {
        self.features
            .iter()
            .map(|f| {
                outer.features.binary_search(f).map_err(|_| {
                    Error::validation("feature_set", format!("missing column {}", f.id()))
                })
            })
            .collect()
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    /// Parses a preset name; bare `set3` resolves to the user-type variant.
    fn from_str(s: &str) -> Result<Self> {
        Self::from_name(s, Target::UserType)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_sizes() {
        assert_eq!(FeatureSet::set1().len(), 12);
        assert_eq!(FeatureSet::set2().len(), 31);
        assert_eq!(FeatureSet::set3_target1().len(), 10);
        assert_eq!(FeatureSet::set3_target2().len(), 5);
        assert!(!FeatureSet::set3_target2().contains(Feature::Wp10Ga));
    }

    #[test]
    fn presets_are_canonical_subsets_of_set2() {
        let all = FeatureSet::set2();
        for set in [FeatureSet::set1(), FeatureSet::set3_target1(), FeatureSet::set3_target2()] {
            check_canonical(set.features()).unwrap();
            assert!(set.features().iter().all(|f| all.contains(*f)));
        }
    }

    #[test]
    fn union_and_positions() {
        let u = FeatureSet::set3_target1().union(&FeatureSet::set3_target2());
        assert_eq!(u.len(), 13);
        let pos = FeatureSet::set3_target2().positions_in(&u).unwrap();
        assert_eq!(pos.len(), 5);
        for (p, f) in pos.iter().zip(FeatureSet::set3_target2().features()) {
            assert_eq!(u.features()[*p], *f);
        }
        assert!(FeatureSet::set1().positions_in(&FeatureSet::set3_target2()).is_err());
    }

    #[test]
    fn names_parse() {
        assert_eq!(FeatureSet::from_name("set3", Target::ContributionType).unwrap().len(), 5);
        assert_eq!(FeatureSet::from_name("7,3", Target::UserType).unwrap().features(), &[Feature::Reviews, Feature::ReviewsPerWeek]);
        assert!(FeatureSet::from_name("set9", Target::UserType).is_err());
    }
}
