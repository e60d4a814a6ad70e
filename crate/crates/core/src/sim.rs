//! Labelled edit-event streams from four contributor archetypes.
//!
//! Bots edit far more often than humans; malign contributors draw ORES
//! scores with a low OK probability and get reverted more. Each contributor
//! also carries a stub-level latent in its wp10 scores which on its own
//! only partly separates benign from malign (bot-benign sits between the
//! two human archetypes), so knowing the user type helps.

use std::io::Write;

use chrono::{Days, NaiveDate};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ContributionType, EditEvent, JointClass, OresScores, UserType};
use crate::rng::{substream, StreamRng};

/// Global pool bots pick pages from.
const PAGE_POOL: u64 = 20_000;
const STUB_SPREAD: f64 = 0.05;
const STUB_EVENT_NOISE: f64 = 0.03;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub human_benign: usize,
    pub human_malign: usize,
    pub bot_benign: usize,
    pub bot_malign: usize,
    pub start_date: NaiveDate,
    pub span_days: u32,
    /// Distinct active days per contributor, capped at the span.
    pub active_days: u32,
    pub seed: u64,
    /// Chance that an edit's scores come from the opposite contribution class.
    pub noise: f64,
    /// Mean edits per active day.
    pub bot_rate: f64,
    pub human_rate: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            human_benign: 10,
            human_malign: 10,
            bot_benign: 10,
            bot_malign: 10,
            start_date: NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date"),
            span_days: 30,
            active_days: 5,
            seed: 0,
            noise: 0.0,
            bot_rate: 50.0,
            human_rate: 2.0,
        }
    }
}

impl SimConfig {
    pub fn counts(&self) -> [usize; 4] {
        [self.human_benign, self.human_malign, self.bot_benign, self.bot_malign]
    }

    pub fn population(&self) -> usize {
        self.counts().iter().sum()
    }

    /// Daily aggregates the configuration yields.
    pub fn n_aggregates(&self) -> usize {
        self.population() * self.active_days.min(self.span_days) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.population() == 0 {
            return Err(Error::validation("counts", "total population is zero"));
        }
        if self.span_days == 0 {
            return Err(Error::validation("span_days", "must be at least 1"));
        }
        if self.active_days == 0 {
            return Err(Error::validation("active_days", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::validation("noise", "must lie in [0, 1]"));
        }
        for (name, rate) in [("bot_rate", self.bot_rate), ("human_rate", self.human_rate)] {
            if !rate.is_finite() || rate < 1.0 {
                return Err(Error::validation(name, "must be at least 1 edit per day"));
            }
        }
        Ok(())
    }

    fn rate(&self, user: UserType) -> f64 {
        match user {
            UserType::Human => self.human_rate,
            UserType::Bot => self.bot_rate,
        }
    }
}

/// Behaviour parameters of one joint class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Archetype {
    pub class: JointClass,
    /// Log-normal location of review length.
    pub review_length_mu: f64,
    /// Dirichlet concentration over item quality A..E.
    pub item_quality: [f64; 5],
    /// Centre of the contributor's wp10 stub probability.
    pub stub_level: f64,
}

impl Archetype {
    pub fn of(class: JointClass) -> Self {
        let bot = class.user_type() == UserType::Bot;
        Archetype {
            class,
            review_length_mu: if bot { 150f64.ln() } else { 500f64.ln() },
            item_quality: if bot {
                [1.0, 1.0, 2.0, 3.0, 3.0]
            } else {
                [2.0, 3.0, 3.0, 1.0, 1.0]
            },
            stub_level: match class {
                JointClass::HumanBenign => 0.15,
                JointClass::HumanMalign => 0.40,
                JointClass::BotBenign => 0.30,
                JointClass::BotMalign => 0.55,
            },
        }
    }
}

/// Score and edit-shape parameters of one contribution class.
struct EditProfile {
    ok: (f64, f64),
    ok_offset: f64,
    ok_scale: f64,
    damaging: (f64, f64),
    goodfaith: (f64, f64),
    revert: f64,
    links: f64,
    repeated_share: f64,
    inserted_mu: f64,
    deleted_mu: f64,
}

impl EditProfile {
    fn of(c: ContributionType) -> Self {
        match c {
            ContributionType::Positive => EditProfile {
                ok: (4.0, 2.0),
                ok_offset: 0.55,
                ok_scale: 0.45,
                damaging: (2.0, 8.0),
                goodfaith: (9.0, 1.5),
                revert: 0.03,
                links: 3.0,
                repeated_share: 0.15,
                inserted_mu: 400f64.ln(),
                deleted_mu: 80f64.ln(),
            },
            ContributionType::Negative => EditProfile {
                ok: (2.0, 4.0),
                ok_offset: 0.0,
                ok_scale: 0.45,
                damaging: (8.0, 2.0),
                goodfaith: (2.0, 5.0),
                revert: 0.35,
                links: 1.5,
                repeated_share: 0.6,
                inserted_mu: 150f64.ln(),
                deleted_mu: 300f64.ln(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    /// Ordered by day, then contributor.
    pub events: Vec<EditEvent>,
    pub labels: Vec<(String, JointClass)>,
}

impl SimOutput {
    pub fn write_labels_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["contributor_id", "archetype"])?;
        for (id, class) in &self.labels {
            w.write_record([id.as_str(), class.name()])?;
        }
        w.flush().map_err(|e| Error::io("<labels>", e))?;
        Ok(())
    }
}

fn dirichlet(rng: &mut StreamRng, alpha: &[f64], out: &mut [f64], mass: f64) {
    let draws: Vec<f64> = alpha
        .iter()
        .map(|a| Gamma::new(*a, 1.0).expect("positive shape").sample(rng))
        .collect();
    let total: f64 = draws.iter().sum();
    for (o, d) in out.iter_mut().zip(&draws) {
        *o = if total > 0.0 {
            mass * d / total
        } else {
            mass / alpha.len() as f64
        };
    }
}

fn beta(rng: &mut StreamRng, (a, b): (f64, f64)) -> f64 {
    Beta::new(a, b).expect("positive shapes").sample(rng)
}

struct Contributor {
    id: String,
    archetype: Archetype,
    stub: f64,
    /// Pages a human returns to; empty for bots.
    home_pages: Vec<u64>,
}

fn simulate_contributor(config: &SimConfig, index: usize, class: JointClass) -> Vec<EditEvent> {
    let mut rng = substream(config.seed, index as u64);
    let archetype = Archetype::of(class);
    let user = class.user_type();
    let stub = (archetype.stub_level + STUB_SPREAD * Normal::new(0.0, 1.0).expect("unit").sample(&mut rng))
        .clamp(0.02, 0.9);
    let home_pages = if user == UserType::Human {
        let n = 1 + Poisson::new(2.0).expect("rate").sample(&mut rng) as usize;
        (0..n).map(|_| rng.random_range(0..PAGE_POOL)).collect()
    } else {
        Vec::new()
    };
    let who = Contributor {
        id: format!("u{index:06}"),
        archetype,
        stub,
        home_pages,
    };

    let active = config.active_days.min(config.span_days) as usize;
    let mut days = sample(&mut rng, config.span_days as usize, active).into_vec();
    days.sort_unstable();
    let extra = config.rate(user) - 1.0;
    let mut events = Vec::new();
    for d in days {
        let day = config.start_date + Days::new(d as u64);
        let n = 1 + if extra > 0.0 {
            Poisson::new(extra).expect("rate").sample(&mut rng) as usize
        } else {
            0
        };
        for _ in 0..n {
            events.push(edit(&mut rng, config, &who, day));
        }
    }
    events
}

fn edit(rng: &mut StreamRng, config: &SimConfig, who: &Contributor, day: NaiveDate) -> EditEvent {
    let class = who.archetype.class;
    let mut contribution = class.contribution_type();
    if rng.random::<f64>() < config.noise {
        contribution = ContributionType::from_label(1 - contribution.label());
    }
    let p = EditProfile::of(contribution);
    let page = if who.home_pages.is_empty() {
        rng.random_range(0..PAGE_POOL)
    } else {
        who.home_pages[rng.random_range(0..who.home_pages.len())]
    };
    let review_length = LogNormal::new(who.archetype.review_length_mu, 0.6)
        .expect("valid")
        .sample(rng)
        .round()
        .max(1.0);
    let links = Poisson::new(p.links).expect("rate").sample(rng);
    let repeated_links = Binomial::new(links as u64, p.repeated_share)
        .expect("valid")
        .sample(rng) as f64;
    let chars_inserted = LogNormal::new(p.inserted_mu, 0.8).expect("valid").sample(rng).round();
    let chars_deleted = LogNormal::new(p.deleted_mu, 0.8).expect("valid").sample(rng).round();
    let was_reverted = rng.random::<f64>() < p.revert;

    let mut ores = OresScores {
        edit_quality: [0.0; 4],
        item_quality: [0.0; 5],
        article_quality: [0.0; 4],
        wp10: [0.0; 6],
    };
    let damaging = beta(rng, p.damaging);
    let goodfaith = beta(rng, p.goodfaith);
    ores.edit_quality = [damaging, 1.0 - damaging, goodfaith, 1.0 - goodfaith];
    dirichlet(rng, &who.archetype.item_quality, &mut ores.item_quality, 1.0);
    let ok = p.ok_offset + p.ok_scale * beta(rng, p.ok);
    ores.article_quality[0] = ok;
    dirichlet(rng, &[1.0, 1.0, 2.0], &mut ores.article_quality[1..], 1.0 - ok);
    let stub = (who.stub + STUB_EVENT_NOISE * Normal::new(0.0, 1.0).expect("unit").sample(rng)).clamp(0.01, 0.95);
    // B, C, FA, GA, start, stub
    ores.wp10[5] = stub;
    dirichlet(rng, &[2.0, 2.0, 0.5, 0.5, 2.0], &mut ores.wp10[..5], 1.0 - stub);

    EditEvent {
        contributor_id: who.id.clone(),
        is_bot: class.user_type() == UserType::Bot,
        page_id: format!("p{page}"),
        day,
        review_length,
        links,
        repeated_links,
        chars_inserted,
        chars_deleted,
        was_reverted,
        ores,
    }
}

/// Simulates every contributor on its own random substream and merges the
/// streams by day.
pub fn simulate(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let mut labels = Vec::with_capacity(config.population());
    let mut events = Vec::new();
    let mut index = 0;
    for (class, count) in JointClass::ALL.iter().zip(config.counts()) {
        for _ in 0..count {
            let stream = simulate_contributor(config, index, *class);
            labels.push((format!("u{index:06}"), *class));
            events.extend(stream);
            index += 1;
        }
    }
    // stable: within a day, contributors keep index order
    events.sort_by(|a, b| (a.day, &a.contributor_id).cmp(&(b.day, &b.contributor_id)));
    Ok(SimOutput { events, labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::pearson;
    use crate::ingest::{aggregate_daily, write_events_csv};
    use crate::model::Feature;

    fn small(seed: u64, noise: f64) -> SimConfig {
        SimConfig {
            seed,
            noise,
            ..SimConfig::default()
        }
    }

    #[test]
    fn population_and_classes() {
        let out = simulate(&small(0, 0.1)).unwrap();
        assert_eq!(out.labels.len(), 40);
        for class in JointClass::ALL {
            assert_eq!(out.labels.iter().filter(|(_, c)| *c == class).count(), 10);
        }
        out.events.iter().for_each(|e| e.validate().unwrap());
        let aggs = aggregate_daily(&out.events).unwrap();
        assert_eq!(aggs.len(), small(0, 0.1).n_aggregates());
    }

    #[test]
    fn byte_identical_replay() {
        let bytes = |seed| {
            let out = simulate(&small(seed, 0.2)).unwrap();
            let mut buf = Vec::new();
            write_events_csv(&mut buf, &out.events).unwrap();
            out.write_labels_csv(&mut buf).unwrap();
            buf
        };
        assert_eq!(bytes(4), bytes(4));
        assert_ne!(bytes(4), bytes(5));
    }

    #[test]
    fn empty_population_rejected() {
        let config = SimConfig {
            human_benign: 0,
            human_malign: 0,
            bot_benign: 0,
            bot_malign: 0,
            ..SimConfig::default()
        };
        assert!(simulate(&config).unwrap_err().is_validation());
    }

    #[test]
    fn rate_separates_bots() {
        let out = simulate(&small(1, 0.0)).unwrap();
        let aggs = aggregate_daily(&out.events).unwrap();
        let x: Vec<f64> = aggs.iter().map(|a| a.get(Feature::ReviewsPerWeek)).collect();
        let y: Vec<f64> = aggs.iter().map(|a| a.user_type().label() as f64).collect();
        assert!(pearson(&x, &y).unwrap().abs() > 0.9);
    }

    #[test]
    fn noiseless_joint_class_is_threshold_separable() {
        let out = simulate(&small(2, 0.0)).unwrap();
        let truth: std::collections::HashMap<_, _> = out.labels.iter().cloned().collect();
        for a in aggregate_daily(&out.events).unwrap() {
            let user = UserType::from_label(usize::from(a.get(Feature::ReviewsPerWeek) > 15.0));
            let contribution = ContributionType::from_label(usize::from(a.get(Feature::ArticleOk) <= 0.5));
            assert_eq!(JointClass::new(user, contribution), truth[&a.contributor_id]);
        }
    }

    #[test]
    fn archetype_ok_means() {
        let mut rng = substream(0, 0);
        let mean = |c, rng: &mut StreamRng| {
            let p = EditProfile::of(c);
            (0..4000).map(|_| p.ok_offset + p.ok_scale * beta(rng, p.ok)).sum::<f64>() / 4000.0
        };
        assert!(mean(ContributionType::Positive, &mut rng) > 0.5);
        assert!(mean(ContributionType::Negative, &mut rng) < 0.5);
    }
}
