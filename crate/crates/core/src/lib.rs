//! Stream mining of wiki contributors.
//!
//! The pipeline ingests edit events, aggregates them per contributor and
//! day, optionally balances the bot class with synthetic samples, keeps an
//! incrementally updated profile per contributor and classifies each
//! profile snapshot with online learners under prequential evaluation.

pub mod analysis;
pub mod error;
pub mod eval;
pub mod fabricate;
pub mod ingest;
pub mod learn;
pub mod model;
pub mod profile;
pub mod rng;
pub mod sim;

pub use analysis::FeatureSet;
pub use error::{Error, Result};
pub use model::{
    ContributionType, DailyAggregate, EditEvent, Feature, FeatureVector, JointClass, Target,
    TargetLabels, UserType,
};

/// Version tag written into every machine-readable output.
pub const SCHEMA_VERSION: u32 = 1;
