//! Domain types shared by every stage of the pipeline.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for sum-to-one checks on probability groups.
pub const PROBABILITY_TOLERANCE: f64 = 1e-6;

/// Number of flattened feature columns (#3 to #18 with sub-components).
pub const N_FEATURES: usize = 31;

/// One column of the contributor feature catalogue, numbered #3 to #18.
/// Multi-probability features are flattened into one column per component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    Reviews,
    AvgReviewLength,
    Pages,
    RevisionsPerPage,
    ReviewsPerWeek,
    PagesPerWeek,
    Reverts,
    RevertFrequency,
    LinksRatio,
    RepeatedLinksRatio,
    CharsInserted,
    CharsDeleted,
    DamagingTrue,
    DamagingFalse,
    GoodfaithTrue,
    GoodfaithFalse,
    ItemA,
    ItemB,
    ItemC,
    ItemD,
    ItemE,
    ArticleOk,
    ArticleAttack,
    ArticleSpam,
    ArticleVandalism,
    Wp10B,
    Wp10C,
    Wp10Fa,
    Wp10Ga,
    Wp10Start,
    Wp10Stub,
}

impl Feature {
    /// Canonical column order.
    pub const ALL: [Feature; N_FEATURES] = [
        Feature::Reviews,
        Feature::AvgReviewLength,
        Feature::Pages,
        Feature::RevisionsPerPage,
        Feature::ReviewsPerWeek,
        Feature::PagesPerWeek,
        Feature::Reverts,
        Feature::RevertFrequency,
        Feature::LinksRatio,
        Feature::RepeatedLinksRatio,
        Feature::CharsInserted,
        Feature::CharsDeleted,
        Feature::DamagingTrue,
        Feature::DamagingFalse,
        Feature::GoodfaithTrue,
        Feature::GoodfaithFalse,
        Feature::ItemA,
        Feature::ItemB,
        Feature::ItemC,
        Feature::ItemD,
        Feature::ItemE,
        Feature::ArticleOk,
        Feature::ArticleAttack,
        Feature::ArticleSpam,
        Feature::ArticleVandalism,
        Feature::Wp10B,
        Feature::Wp10C,
        Feature::Wp10Fa,
        Feature::Wp10Ga,
        Feature::Wp10Start,
        Feature::Wp10Stub,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn id(self) -> &'static str {
        use Feature::*;
        match self {
            Reviews => "3",
            AvgReviewLength => "4",
            Pages => "5",
            RevisionsPerPage => "6",
            ReviewsPerWeek => "7",
            PagesPerWeek => "8",
            Reverts => "9",
            RevertFrequency => "10",
            LinksRatio => "11",
            RepeatedLinksRatio => "12",
            CharsInserted => "13",
            CharsDeleted => "14",
            DamagingTrue => "15.damaging_true",
            DamagingFalse => "15.damaging_false",
            GoodfaithTrue => "15.goodfaith_true",
            GoodfaithFalse => "15.goodfaith_false",
            ItemA => "16.A",
            ItemB => "16.B",
            ItemC => "16.C",
            ItemD => "16.D",
            ItemE => "16.E",
            ArticleOk => "17.OK",
            ArticleAttack => "17.attack",
            ArticleSpam => "17.spam",
            ArticleVandalism => "17.vandalism",
            Wp10B => "18.B",
            Wp10C => "18.C",
            Wp10Fa => "18.FA",
            Wp10Ga => "18.GA",
            Wp10Start => "18.start",
            Wp10Stub => "18.stub",
        }
    }

    /// Whether the column holds a probability in [0, 1].
    pub fn is_probability(self) -> bool {
        self.index() >= Feature::DamagingTrue.index()
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().trim_start_matches('#');
        Feature::ALL
            .iter()
            .copied()
            .find(|f| f.id().eq_ignore_ascii_case(wanted))
            .ok_or_else(|| Error::validation("feature", format!("unknown feature identifier {s:?}")))
    }
}

/// Column ranges of the probability groups that must each sum to one.
pub const PROBABILITY_GROUPS: [(&str, std::ops::Range<usize>); 5] = [
    ("damaging", 12..14),
    ("goodfaith", 14..16),
    ("item_quality", 16..21),
    ("article_quality", 21..25),
    ("wp10", 25..31),
];

/// Flattened values of all feature columns, indexed by [`Feature::index`].
pub type FeatureRow = [f64; N_FEATURES];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UserType {
    Human = 0,
    Bot = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContributionType {
    Positive = 0,
    Negative = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JointClass {
    HumanBenign = 0,
    HumanMalign = 1,
    BotBenign = 2,
    BotMalign = 3,
}

impl UserType {
    pub fn label(self) -> usize {
        self as usize
    }

    pub fn from_label(label: usize) -> Self {
        if label == 0 {
            UserType::Human
        } else {
            UserType::Bot
        }
    }
}

impl ContributionType {
    pub fn label(self) -> usize {
        self as usize
    }

    pub fn from_label(label: usize) -> Self {
        if label == 0 {
            ContributionType::Positive
        } else {
            ContributionType::Negative
        }
    }
}

impl JointClass {
    pub const ALL: [JointClass; 4] = [
        JointClass::HumanBenign,
        JointClass::HumanMalign,
        JointClass::BotBenign,
        JointClass::BotMalign,
    ];

    pub fn new(user: UserType, contribution: ContributionType) -> Self {
        match (user, contribution) {
            (UserType::Human, ContributionType::Positive) => JointClass::HumanBenign,
            (UserType::Human, ContributionType::Negative) => JointClass::HumanMalign,
            (UserType::Bot, ContributionType::Positive) => JointClass::BotBenign,
            (UserType::Bot, ContributionType::Negative) => JointClass::BotMalign,
        }
    }

    pub fn user_type(self) -> UserType {
        match self {
            JointClass::HumanBenign | JointClass::HumanMalign => UserType::Human,
            JointClass::BotBenign | JointClass::BotMalign => UserType::Bot,
        }
    }

    pub fn contribution_type(self) -> ContributionType {
        match self {
            JointClass::HumanBenign | JointClass::BotBenign => ContributionType::Positive,
            JointClass::HumanMalign | JointClass::BotMalign => ContributionType::Negative,
        }
    }

    pub fn label(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            JointClass::HumanBenign => "human-benign",
            JointClass::HumanMalign => "human-malign",
            JointClass::BotBenign => "bot-benign",
            JointClass::BotMalign => "bot-malign",
        }
    }
}

impl FromStr for JointClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        JointClass::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::validation("archetype", format!("unknown joint class {s:?}")))
    }
}

impl fmt::Display for JointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Labels a contribution from its OK probability: positive only when strictly above one half.
pub fn derive_contribution_type(ok_probability: f64) -> Result<ContributionType> {
    if !ok_probability.is_finite() || !(0.0..=1.0).contains(&ok_probability) {
        return Err(Error::validation(
            "art_ok",
            format!("probability {ok_probability} outside [0, 1]"),
        ));
    }
    Ok(if ok_probability > 0.5 {
        ContributionType::Positive
    } else {
        ContributionType::Negative
    })
}

pub fn derive_user_type(is_bot: bool) -> UserType {
    if is_bot {
        UserType::Bot
    } else {
        UserType::Human
    }
}

/// Precomputed ORES scores attached to one edit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OresScores {
    /// damaging_true, damaging_false, goodfaith_true, goodfaith_false
    pub edit_quality: [f64; 4],
    /// A..E
    pub item_quality: [f64; 5],
    /// OK, attack, spam, vandalism
    pub article_quality: [f64; 4],
    /// B, C, FA, GA, start, stub
    pub wp10: [f64; 6],
}

impl OresScores {
    pub fn ok_probability(&self) -> f64 {
        self.article_quality[0]
    }

    /// Writes the 19 probability columns into `row` starting at #15.
    pub fn write_into(&self, row: &mut FeatureRow) {
        let start = Feature::DamagingTrue.index();
        let values = self
            .edit_quality
            .iter()
            .chain(&self.item_quality)
            .chain(&self.article_quality)
            .chain(&self.wp10);
        for (slot, v) in row[start..].iter_mut().zip(values) {
            *slot = *v;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut row = [0.0; N_FEATURES];
        self.write_into(&mut row);
        validate_probabilities(&row)
    }
}

/// Checks every probability column is in [0, 1] and every group sums to one.
pub fn validate_probabilities(row: &FeatureRow) -> Result<()> {
    for f in Feature::ALL.iter().filter(|f| f.is_probability()) {
        let p = row[f.index()];
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::validation(f.id(), format!("probability {p} outside [0, 1]")));
        }
    }
    for (name, range) in PROBABILITY_GROUPS {
        let sum: f64 = row[range].iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::validation(
                name,
                format!("probability group sum {sum} differs from 1"),
            ));
        }
    }
    Ok(())
}

/// Rescales each probability group so it sums to one. Groups summing to
/// zero are replaced by the uniform distribution.
pub fn renormalize_probabilities(row: &mut FeatureRow) {
    for (_, range) in PROBABILITY_GROUPS {
        let len = range.len() as f64;
        let group = &mut row[range];
        let sum: f64 = group.iter().sum();
        if sum > 0.0 {
            group.iter_mut().for_each(|p| *p /= sum);
        } else {
            group.iter_mut().for_each(|p| *p = 1.0 / len);
        }
    }
}

/// One raw contribution record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditEvent {
    pub contributor_id: String,
    pub is_bot: bool,
    pub page_id: String,
    pub day: NaiveDate,
    pub review_length: f64,
    pub links: f64,
    pub repeated_links: f64,
    pub chars_inserted: f64,
    pub chars_deleted: f64,
    pub was_reverted: bool,
    pub ores: OresScores,
}

impl EditEvent {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("review_length", self.review_length),
            ("links", self.links),
            ("repeated_links", self.repeated_links),
            ("chars_inserted", self.chars_inserted),
            ("chars_deleted", self.chars_deleted),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::validation(name, format!("count {v} must be finite and >= 0")));
            }
        }
        self.ores.validate()
    }

    pub fn user_type(&self) -> UserType {
        derive_user_type(self.is_bot)
    }

    pub fn joint_class(&self) -> Result<JointClass> {
        Ok(JointClass::new(
            self.user_type(),
            derive_contribution_type(self.ores.ok_probability())?,
        ))
    }
}

/// Per-contributor, per-day aggregation of the feature catalogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyAggregate {
    pub contributor_id: String,
    pub day: NaiveDate,
    pub is_bot: bool,
    pub features: FeatureRow,
    pub contribution_type: ContributionType,
    /// Set for samples produced by the synthetic data model.
    #[serde(default)]
    pub synthetic: bool,
}

impl DailyAggregate {
    /// Builds an aggregate and derives its contribution label from the OK column.
    pub fn new(
        contributor_id: String,
        day: NaiveDate,
        is_bot: bool,
        features: FeatureRow,
        synthetic: bool,
    ) -> Result<Self> {
        let contribution_type = derive_contribution_type(features[Feature::ArticleOk.index()])?;
        Ok(DailyAggregate {
            contributor_id,
            day,
            is_bot,
            features,
            contribution_type,
            synthetic,
        })
    }

    pub fn get(&self, feature: Feature) -> f64 {
        self.features[feature.index()]
    }

    pub fn user_type(&self) -> UserType {
        derive_user_type(self.is_bot)
    }

    pub fn labels(&self) -> TargetLabels {
        TargetLabels::new(self.user_type(), self.contribution_type)
    }

    pub fn validate(&self) -> Result<()> {
        for f in Feature::ALL {
            let v = self.get(f);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::validation(f.id(), format!("value {v} must be finite and >= 0")));
            }
        }
        if self.get(Feature::Reviews) < 1.0 {
            return Err(Error::validation("3", "an aggregate needs at least one review"));
        }
        validate_probabilities(&self.features)?;
        let expected = derive_contribution_type(self.get(Feature::ArticleOk))?;
        if expected != self.contribution_type {
            return Err(Error::validation(
                "contribution_type",
                "label disagrees with the OK probability",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetLabels {
    pub user_type: UserType,
    pub contribution_type: ContributionType,
    pub joint_class: JointClass,
}

impl TargetLabels {
    pub fn new(user_type: UserType, contribution_type: ContributionType) -> Self {
        TargetLabels {
            user_type,
            contribution_type,
            joint_class: JointClass::new(user_type, contribution_type),
        }
    }
}

/// Prediction target selector used by the analysis and evaluation stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    UserType,
    ContributionType,
}

impl Target {
    pub fn label_of(self, labels: &TargetLabels) -> usize {
        match self {
            Target::UserType => labels.user_type.label(),
            Target::ContributionType => labels.contribution_type.label(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::UserType => "user_type",
            Target::ContributionType => "contribution_type",
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "user" | "user_type" | "user-type" | "1" => Ok(Target::UserType),
            "contribution" | "contribution_type" | "contribution-type" | "2" => {
                Ok(Target::ContributionType)
            }
            other => Err(Error::validation("target", format!("unknown target {other:?}"))),
        }
    }
}

/// Ordered feature values with their parallel identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub ids: Vec<Feature>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(ids: Vec<Feature>, values: Vec<f64>) -> Result<Self> {
        if ids.len() != values.len() {
            return Err(Error::validation(
                "feature_vector",
                format!("{} identifiers for {} values", ids.len(), values.len()),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::validation("feature_vector", format!("non-finite value {v}")));
        }
        check_canonical(&ids)?;
        Ok(FeatureVector { ids, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Identifiers must be unique and in canonical order.
pub fn check_canonical(ids: &[Feature]) -> Result<()> {
    if ids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation(
            "feature_set",
            "identifiers must be unique and in canonical order",
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contribution_type_threshold_is_strict() {
        assert_eq!(derive_contribution_type(0.9).unwrap(), ContributionType::Positive);
        assert_eq!(derive_contribution_type(0.1).unwrap(), ContributionType::Negative);
        assert_eq!(derive_contribution_type(0.5).unwrap(), ContributionType::Negative);
        assert_eq!(
            derive_contribution_type(0.500_000_1).unwrap(),
            ContributionType::Positive
        );
    }

    #[test]
    fn contribution_type_rejects_out_of_range() {
        for bad in [-0.1, 1.5, f64::NAN] {
            let err = derive_contribution_type(bad).unwrap_err();
            assert!(err.to_string().contains("art_ok"), "{err}");
        }
    }

    #[test]
    fn user_type_encoding() {
        assert_eq!(derive_user_type(false).label(), 0);
        assert_eq!(derive_user_type(true).label(), 1);
        for b in [false, true] {
            assert_eq!(derive_user_type(b).label() == 1, b);
        }
    }

    #[test]
    fn joint_class_is_cross_product() {
        for user in [UserType::Human, UserType::Bot] {
            for contribution in [ContributionType::Positive, ContributionType::Negative] {
                let joint = JointClass::new(user, contribution);
                assert_eq!(joint.user_type(), user);
                assert_eq!(joint.contribution_type(), contribution);
            }
        }
    }

    #[test]
    fn feature_ids_roundtrip_and_are_canonical() {
        for f in Feature::ALL {
            assert_eq!(f.id().parse::<Feature>().unwrap(), f);
            assert_eq!(Feature::ALL[f.index()], f);
        }
        check_canonical(&Feature::ALL).unwrap();
        assert!("#7".parse::<Feature>().is_ok());
        assert!("19".parse::<Feature>().is_err());
    }

    #[test]
    fn probability_groups_cover_probability_columns() {
        let covered: usize = PROBABILITY_GROUPS.iter().map(|(_, r)| r.len()).sum();
        let probs = Feature::ALL.iter().filter(|f| f.is_probability()).count();
        assert_eq!(covered, probs);
        assert_eq!(covered, 19);
    }

    #[test]
    fn renormalize_restores_sums() {
        let mut row = [0.3; N_FEATURES];
        renormalize_probabilities(&mut row);
        validate_probabilities(&row).unwrap();
        let mut zero = [0.0; N_FEATURES];
        renormalize_probabilities(&mut zero);
        assert!((zero[Feature::Wp10B.index()] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn feature_vector_rejects_duplicates_and_nan() {
        assert!(FeatureVector::new(vec![Feature::Reviews, Feature::Reviews], vec![1.0, 2.0]).is_err());
        assert!(FeatureVector::new(vec![Feature::Pages, Feature::Reviews], vec![1.0, 2.0]).is_err());
        assert!(FeatureVector::new(vec![Feature::Reviews], vec![f64::NAN]).is_err());
        assert!(FeatureVector::new(vec![], vec![]).unwrap().is_empty());
    }
}
