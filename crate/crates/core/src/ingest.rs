//! Edit-event files in, time-ordered daily aggregates out.
//!
//! Event files carry one edit per row. The CSV header is
//!
//! ```text
//! contributor_id,is_bot,page_id,timestamp,review_length,links,repeated_links,
//! chars_inserted,chars_deleted,was_reverted,dmg_t,dmg_f,gf_t,gf_f,
//! item_a,item_b,item_c,item_d,item_e,art_ok,art_attack,art_spam,art_vandalism,
//! wp10_b,wp10_c,wp10_fa,wp10_ga,wp10_start,wp10_stub
//! ```
//!
//! JSONL files use one object per line with the same keys. Aggregate files
//! (the output of balancing and fabrication) use [`AGGREGATE_FIXED_COLUMNS`]
//! followed by one column per feature identifier.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{
    ContributionType, DailyAggregate, EditEvent, Feature, FeatureRow, JointClass, OresScores,
    N_FEATURES,
};

pub const EVENT_COLUMNS: [&str; 29] = [
    "contributor_id",
    "is_bot",
    "page_id",
    "timestamp",
    "review_length",
    "links",
    "repeated_links",
    "chars_inserted",
    "chars_deleted",
    "was_reverted",
    "dmg_t",
    "dmg_f",
    "gf_t",
    "gf_f",
    "item_a",
    "item_b",
    "item_c",
    "item_d",
    "item_e",
    "art_ok",
    "art_attack",
    "art_spam",
    "art_vandalism",
    "wp10_b",
    "wp10_c",
    "wp10_fa",
    "wp10_ga",
    "wp10_start",
    "wp10_stub",
];

pub const AGGREGATE_FIXED_COLUMNS: [&str; 3] = ["contributor_id", "day", "is_bot"];
pub const AGGREGATE_TRAILING_COLUMNS: [&str; 2] = ["contribution_type", "synthetic"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ext == "csv" => Ok(Format::Csv),
            Some(ext) if ext == "jsonl" || ext == "ndjson" || ext == "json" => Ok(Format::Jsonl),
            _ => Err(Error::validation(
                "input",
                format!("{}: cannot infer format (expected .csv or .jsonl)", path.display()),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    #[default]
    AsIs,
    SortByDay,
}

#[derive(Debug, Clone)]
pub struct StreamSource {
    pub path: PathBuf,
    pub format: Format,
    pub ordering: Ordering,
}

impl StreamSource {
    pub fn new(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let format = Format::from_path(&path)?;
        Ok(StreamSource {
            path,
            format,
            ordering: Ordering::AsIs,
        })
    }

    pub fn sorted(mut self) -> Self {
        self.ordering = Ordering::SortByDay;
        self
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Flat on-disk form of an [`EditEvent`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct EventRecord {
    contributor_id: String,
    #[serde(deserialize_with = "de_flag", serialize_with = "ser_flag")]
    is_bot: bool,
    page_id: String,
    timestamp: String,
    review_length: f64,
    links: f64,
    repeated_links: f64,
    chars_inserted: f64,
    chars_deleted: f64,
    #[serde(deserialize_with = "de_flag", serialize_with = "ser_flag")]
    was_reverted: bool,
    dmg_t: f64,
    dmg_f: f64,
    gf_t: f64,
    gf_f: f64,
    item_a: f64,
    item_b: f64,
    item_c: f64,
    item_d: f64,
    item_e: f64,
    art_ok: f64,
    art_attack: f64,
    art_spam: f64,
    art_vandalism: f64,
    wp10_b: f64,
    wp10_c: f64,
    wp10_fa: f64,
    wp10_ga: f64,
    wp10_start: f64,
    wp10_stub: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FlagRepr {
    Bool(bool),
    Int(i64),
    Text(String),
}

fn de_flag<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    use serde::de::Error as _;
    match FlagRepr::deserialize(d)? {
        FlagRepr::Bool(b) => Ok(b),
        FlagRepr::Int(0) => Ok(false),
        FlagRepr::Int(1) => Ok(true),
        FlagRepr::Text(s) => match s.trim() {
            "0" | "false" => Ok(false),
            "1" | "true" => Ok(true),
            other => Err(D::Error::custom(format!("expected 0 or 1, got {other:?}"))),
        },
        FlagRepr::Int(other) => Err(D::Error::custom(format!("expected 0 or 1, got {other}"))),
    }
}

fn ser_flag<S: Serializer>(v: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*v))
}

pub fn parse_timestamp(raw: &str) -> Result<NaiveDate> {
    let raw = raw.trim();
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Ok(d);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Ok(dt.naive_utc().date());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(dt.date());
        }
    }
    Err(Error::validation(
        "timestamp",
        format!("{raw:?} is not an ISO-8601 date or datetime"),
    ))
}

impl EventRecord {
    fn into_event(self) -> Result<EditEvent> {
        let day = parse_timestamp(&self.timestamp)?;
        let event = EditEvent {
            contributor_id: self.contributor_id,
            is_bot: self.is_bot,
            page_id: self.page_id,
            day,
            review_length: self.review_length,
            links: self.links,
            repeated_links: self.repeated_links,
            chars_inserted: self.chars_inserted,
            chars_deleted: self.chars_deleted,
            was_reverted: self.was_reverted,
            ores: OresScores {
                edit_quality: [self.dmg_t, self.dmg_f, self.gf_t, self.gf_f],
                item_quality: [self.item_a, self.item_b, self.item_c, self.item_d, self.item_e],
                article_quality: [self.art_ok, self.art_attack, self.art_spam, self.art_vandalism],
                wp10: [
                    self.wp10_b,
                    self.wp10_c,
                    self.wp10_fa,
                    self.wp10_ga,
                    self.wp10_start,
                    self.wp10_stub,
                ],
            },
        };
        event.validate()?;
        Ok(event)
    }

    fn from_event(e: &EditEvent) -> Self {
        let [dmg_t, dmg_f, gf_t, gf_f] = e.ores.edit_quality;
        let [item_a, item_b, item_c, item_d, item_e] = e.ores.item_quality;
        let [art_ok, art_attack, art_spam, art_vandalism] = e.ores.article_quality;
        let [wp10_b, wp10_c, wp10_fa, wp10_ga, wp10_start, wp10_stub] = e.ores.wp10;
        EventRecord {
            contributor_id: e.contributor_id.clone(),
            is_bot: e.is_bot,
            page_id: e.page_id.clone(),
            timestamp: e.day.format("%Y-%m-%d").to_string(),
            review_length: e.review_length,
            links: e.links,
            repeated_links: e.repeated_links,
            chars_inserted: e.chars_inserted,
            chars_deleted: e.chars_deleted,
            was_reverted: e.was_reverted,
            dmg_t,
            dmg_f,
            gf_t,
            gf_f,
            item_a,
            item_b,
            item_c,
            item_d,
            item_e,
            art_ok,
            art_attack,
            art_spam,
            art_vandalism,
            wp10_b,
            wp10_c,
            wp10_fa,
            wp10_ga,
            wp10_start,
            wp10_stub,
        }
    }
}

/// Reads and validates CSV event rows. Errors carry the 1-based file line.
pub fn read_events_csv<R: Read>(reader: R) -> Result<Vec<EditEvent>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if let Some(missing) = EVENT_COLUMNS.iter().find(|c| !headers.iter().any(|h| h == **c)) {
        return Err(Error::validation("header", format!("missing column {missing:?}")).at_line(1));
    }
    let mut events = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let record: EventRecord = row
            .deserialize(Some(&headers))
            .map_err(|e| Error::from(e).at_line(line))?;
        events.push(record.into_event().map_err(|e| e.at_line(line))?);
    }
    Ok(events)
}

/// Reads and validates JSONL event objects; blank lines are skipped.
pub fn read_events_jsonl<R: BufRead>(reader: R) -> Result<Vec<EditEvent>> {
    let mut events = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i as u64 + 1;
        let line = line.map_err(|e| Error::io("<jsonl>", e).at_line(lineno))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: EventRecord =
            serde_json::from_str(&line).map_err(|e| Error::from(e).at_line(lineno))?;
        events.push(record.into_event().map_err(|e| e.at_line(lineno))?);
    }
    Ok(events)
}

pub fn parse_events(source: &StreamSource) -> Result<Vec<EditEvent>> {
    let file = open(&source.path)?;
    let mut events = match source.format {
        Format::Csv => read_events_csv(BufReader::new(file)),
        Format::Jsonl => read_events_jsonl(BufReader::new(file)),
    }
    .map_err(|e| match e {
        Error::Io { source: io, .. } => Error::io(&source.path, io),
        other => other,
    })?;
    if source.ordering == Ordering::SortByDay {
        events.sort_by_key(|e| e.day);
    }
    Ok(events)
}

pub fn write_events_csv<W: Write>(writer: W, events: &[EditEvent]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for e in events {
        wtr.serialize(EventRecord::from_event(e))?;
    }
    if events.is_empty() {
        wtr.write_record(EVENT_COLUMNS)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_events_jsonl<W: Write>(mut writer: W, events: &[EditEvent]) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut writer, &EventRecord::from_event(e))?;
        writer.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
    }
    Ok(())
}

#[derive(Default)]
struct DayAccumulator {
    is_bot: bool,
    events: usize,
    review_length: f64,
    pages: BTreeSet<String>,
    reverts: usize,
    links: f64,
    repeated_links: f64,
    inserted: f64,
    deleted: f64,
    probabilities: [f64; 19],
}

/// Collapses events to one aggregate per (contributor, day), ordered by day
/// then contributor id.
pub fn aggregate_daily(events: &[EditEvent]) -> Result<Vec<DailyAggregate>> {
    let mut groups: BTreeMap<(NaiveDate, &str), DayAccumulator> = BTreeMap::new();
    for e in events {
        let acc = groups.entry((e.day, e.contributor_id.as_str())).or_default();
        acc.is_bot |= e.is_bot;
        acc.events += 1;
        acc.review_length += e.review_length;
        if !acc.pages.contains(&e.page_id) {
            acc.pages.insert(e.page_id.clone());
        }
        acc.reverts += usize::from(e.was_reverted);
        acc.links += e.links;
        acc.repeated_links += e.repeated_links;
        acc.inserted += e.chars_inserted;
        acc.deleted += e.chars_deleted;
        let mut row = [0.0; N_FEATURES];
        e.ores.write_into(&mut row);
        let start = Feature::DamagingTrue.index();
        for (sum, p) in acc.probabilities.iter_mut().zip(&row[start..]) {
            *sum += p;
        }
    }

    groups
        .into_iter()
        .map(|((day, id), acc)| {
            let n = acc.events as f64;
            let pages = acc.pages.len() as f64;
            let ratio = |num: f64| if acc.review_length > 0.0 { num / acc.review_length } else { 0.0 };
            let mut f: FeatureRow = [0.0; N_FEATURES];
            f[Feature::Reviews.index()] = n;
            f[Feature::AvgReviewLength.index()] = acc.review_length / n;
            f[Feature::Pages.index()] = pages;
            f[Feature::RevisionsPerPage.index()] = n / pages;
            // a single day spans one week
            f[Feature::ReviewsPerWeek.index()] = n;
            f[Feature::PagesPerWeek.index()] = pages;
            f[Feature::Reverts.index()] = acc.reverts as f64;
            f[Feature::RevertFrequency.index()] = acc.reverts as f64 / n;
            f[Feature::LinksRatio.index()] = ratio(acc.links);
            f[Feature::RepeatedLinksRatio.index()] = ratio(acc.repeated_links);
            f[Feature::CharsInserted.index()] = acc.inserted;
            f[Feature::CharsDeleted.index()] = acc.deleted;
            let start = Feature::DamagingTrue.index();
            for (slot, sum) in f[start..].iter_mut().zip(acc.probabilities) {
                *slot = sum / n;
            }
            DailyAggregate::new(id.to_string(), day, acc.is_bot, f, false)
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_pages: Option<usize>,
    pub n_contributors: usize,
    pub n_events: usize,
    pub n_aggregates: usize,
    pub n_bots: usize,
    pub n_humans: usize,
    pub n_synthetic: usize,
    /// Contributors per joint class, in [`JointClass::ALL`] order.
    pub joint_histogram: [usize; 4],
}

/// Per-contributor class counts. A contributor's contribution class is the
/// majority of its daily labels; ties count as malign.
pub fn summarize(aggregates: &[DailyAggregate]) -> DatasetSummary {
    #[derive(Default)]
    struct Tally {
        bot: bool,
        benign: usize,
        malign: usize,
    }
    let mut per: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut summary = DatasetSummary {
        n_aggregates: aggregates.len(),
        ..DatasetSummary::default()
    };
    let mut events = 0.0;
    for a in aggregates {
        let t = per.entry(&a.contributor_id).or_default();
        t.bot |= a.is_bot;
        match a.contribution_type {
            ContributionType::Positive => t.benign += 1,
            ContributionType::Negative => t.malign += 1,
        }
        events += a.get(Feature::Reviews);
        summary.n_synthetic += usize::from(a.synthetic);
    }
    summary.n_events = events.round() as usize;
    summary.n_contributors = per.len();
    for t in per.values() {
        let user = crate::model::derive_user_type(t.bot);
        let contribution = if t.benign > t.malign {
            ContributionType::Positive
        } else {
            ContributionType::Negative
        };
        if t.bot {
            summary.n_bots += 1;
        } else {
            summary.n_humans += 1;
        }
        summary.joint_histogram[JointClass::new(user, contribution).label()] += 1;
    }
    summary
}

/// Adds the distinct page count, which only raw events carry.
pub fn summarize_events(events: &[EditEvent], aggregates: &[DailyAggregate]) -> DatasetSummary {
    let mut summary = summarize(aggregates);
    let pages: BTreeSet<&str> = events.iter().map(|e| e.page_id.as_str()).collect();
    summary.n_pages = Some(pages.len());
    summary.n_events = events.len();
    summary
}

pub fn aggregate_header() -> Vec<String> {
    AGGREGATE_FIXED_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(Feature::ALL.iter().map(|f| f.id().to_string()))
        .chain(AGGREGATE_TRAILING_COLUMNS.iter().map(|s| s.to_string()))
        .collect()
}

pub fn write_aggregates_csv<W: Write>(writer: W, aggregates: &[DailyAggregate]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(aggregate_header())?;
    for a in aggregates {
        let mut row = Vec::with_capacity(N_FEATURES + 5);
        row.push(a.contributor_id.clone());
        row.push(a.day.format("%Y-%m-%d").to_string());
        row.push(u8::from(a.is_bot).to_string());
        row.extend(a.features.iter().map(|v| v.to_string()));
        row.push(a.contribution_type.label().to_string());
        row.push(u8::from(a.synthetic).to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn read_aggregates_csv<R: Read>(reader: R) -> Result<Vec<DailyAggregate>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::validation("header", format!("missing column {name:?}")).at_line(1))
    };
    let id_col = column("contributor_id")?;
    let day_col = column("day")?;
    let bot_col = column("is_bot")?;
    let synthetic_col = headers.iter().position(|h| h == "synthetic");
    let feature_cols = Feature::ALL
        .iter()
        .map(|f| column(f.id()))
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let parse = || -> Result<DailyAggregate> {
            let flag = |col: usize, name: &str| match row.get(col).map(str::trim) {
                Some("0") | Some("false") | Some("") | None => Ok(false),
                Some("1") | Some("true") => Ok(true),
                Some(other) => Err(Error::validation(name, format!("expected 0 or 1, got {other:?}"))),
            };
            let mut features = [0.0; N_FEATURES];
            for (slot, (&col, f)) in features.iter_mut().zip(feature_cols.iter().zip(Feature::ALL)) {
                let raw = row.get(col).unwrap_or("");
                *slot = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::validation(f.id(), format!("not a number: {raw:?}")))?;
            }
            let day = NaiveDate::parse_from_str(row.get(day_col).unwrap_or("").trim(), "%Y-%m-%d")
                .map_err(|e| Error::validation("day", e.to_string()))?;
            let synthetic = match synthetic_col {
                Some(c) => flag(c, "synthetic")?,
                None => false,
            };
            let agg = DailyAggregate::new(
                row.get(id_col).unwrap_or("").to_string(),
                day,
                flag(bot_col, "is_bot")?,
                features,
                synthetic,
            )?;
            agg.validate()?;
            Ok(agg)
        };
        out.push(parse().map_err(|e| e.at_line(line))?);
    }
    Ok(out)
}

/// Loads a stream of aggregates from either an event file (aggregated on
/// load) or an aggregate CSV (recognised by its `day` column). The result
/// is ordered by day then contributor id.
pub fn load_aggregates(path: &Path) -> Result<Vec<DailyAggregate>> {
    let format = Format::from_path(path)?;
    if format == Format::Csv {
        let mut first = String::new();
        BufReader::new(open(path)?)
            .read_line(&mut first)
            .map_err(|e| Error::io(path, e))?;
        if first.trim_end().split(',').any(|h| h == "day") {
            let mut aggregates = read_aggregates_csv(BufReader::new(open(path)?))?;
            sort_stream(&mut aggregates);
            return Ok(aggregates);
        }
    }
    aggregate_daily(&parse_events(&StreamSource::new(path)?)?)
}

pub fn sort_stream(aggregates: &mut [DailyAggregate]) {
    aggregates.sort_by(|a, b| (a.day, &a.contributor_id).cmp(&(b.day, &b.contributor_id)));
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "contributor_id,is_bot,page_id,timestamp,review_length,links,repeated_links,chars_inserted,chars_deleted,was_reverted,dmg_t,dmg_f,gf_t,gf_f,item_a,item_b,item_c,item_d,item_e,art_ok,art_attack,art_spam,art_vandalism,wp10_b,wp10_c,wp10_fa,wp10_ga,wp10_start,wp10_stub";

    fn row(id: &str, bot: u8, page: &str, ts: &str, len: u32, reverted: u8, ok: f64) -> String {
        let rest = (1.0 - ok) / 3.0;
        format!(
            "{id},{bot},{page},{ts},{len},2,1,100,5,{reverted},0.2,0.8,0.9,0.1,0.1,0.1,0.2,0.2,0.4,{ok},{rest},{rest},{rest},0.2,0.2,0.1,0.1,0.2,0.2"
        )
    }

    fn csv_of(rows: &[String]) -> String {
        let mut s = HEADER.to_string();
        for r in rows {
            s.push('\n');
            s.push_str(r);
        }
        s
    }

    #[test]
    fn parses_well_formed_rows() {
        let text = csv_of(&[
            row("alice", 0, "p1", "2020-01-14", 10, 0, 0.9),
            row("alice", 0, "p2", "2020-01-14T10:00:00Z", 30, 1, 0.8),
            row("botty", 1, "p1", "2020-01-15 08:30:00", 5, 0, 0.2),
        ]);
        let events = read_events_csv(text.as_bytes()).unwrap();
        assert_eq!(events.len(), 3);
        assert!(events[2].is_bot);
        assert_eq!(events[1].day, NaiveDate::from_ymd_opt(2020, 1, 14).unwrap());
    }

    #[test]
    fn rejects_probability_group_violation_with_line() {
        let bad = row("x", 0, "p", "2020-01-14", 1, 0, 0.9).replacen("0.2,0.8", "0.7,0.7", 1);
        let text = csv_of(&[row("a", 0, "p", "2020-01-14", 1, 0, 0.9), bad]);
        let err = read_events_csv(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("probability group sum"), "{err}");
    }

    #[test]
    fn rejects_missing_scores() {
        let text = csv_of(&[row("a", 0, "p", "2020-01-14", 1, 0, 0.9).replacen(",0.2,0.2,0.1,0.1,0.2,0.2", ",,0.2,0.1,0.1,0.2,0.2", 1)]);
        let err = read_events_csv(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn empty_file_is_empty_stream() {
        assert!(read_events_csv(HEADER.as_bytes()).unwrap().is_empty());
        assert!(read_events_jsonl("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn bad_flag_names_field() {
        let text = csv_of(&[row("a", 0, "p", "2020-01-14", 1, 0, 0.9).replacen(",0,p,", ",2,p,", 1)]);
        let err = read_events_csv(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("expected 0 or 1"), "{err}");
    }

    #[test]
    fn aggregates_mean_length_and_counts() {
        let text = csv_of(&[
            row("alice", 0, "p1", "2020-01-14", 10, 0, 0.9),
            row("alice", 0, "p2", "2020-01-14", 30, 1, 0.7),
            row("bob", 0, "p1", "2020-01-14", 8, 0, 0.2),
        ]);
        let aggs = aggregate_daily(&read_events_csv(text.as_bytes()).unwrap()).unwrap();
        assert_eq!(aggs.len(), 2);
        let alice = &aggs[0];
        assert_eq!(alice.contributor_id, "alice");
        assert_eq!(alice.get(Feature::Reviews), 2.0);
        assert_eq!(alice.get(Feature::AvgReviewLength), 20.0);
        assert_eq!(alice.get(Feature::Reverts), 1.0);
        assert_eq!(alice.get(Feature::RevertFrequency), 0.5);
        assert_eq!(alice.get(Feature::Pages), 2.0);
        assert_eq!(alice.get(Feature::RevisionsPerPage), 1.0);
        assert!((alice.get(Feature::LinksRatio) - 4.0 / 40.0).abs() < 1e-12);
        assert!((alice.get(Feature::ArticleOk) - 0.8).abs() < 1e-12);
        assert_eq!(alice.contribution_type, ContributionType::Positive);
        assert_eq!(aggs[1].contribution_type, ContributionType::Negative);
        alice.validate().unwrap();
    }

    #[test]
    fn summary_counts_and_empty() {
        let text = csv_of(&[
            row("h1", 0, "p1", "2020-01-14", 10, 0, 0.9),
            row("h2", 0, "p1", "2020-01-14", 10, 0, 0.1),
            row("b1", 1, "p2", "2020-01-14", 10, 0, 0.9),
            row("b1", 1, "p2", "2020-01-15", 10, 0, 0.1),
        ]);
        let events = read_events_csv(text.as_bytes()).unwrap();
        let aggs = aggregate_daily(&events).unwrap();
        let s = summarize_events(&events, &aggs);
        assert_eq!((s.n_bots, s.n_humans, s.n_contributors), (1, 2, 3));
        assert_eq!(s.n_pages, Some(2));
        assert_eq!(s.n_events, 4);
        // b1 has one benign and one malign day: tie goes to malign
        assert_eq!(s.joint_histogram, [1, 1, 0, 1]);
        assert_eq!(summarize(&[]), DatasetSummary::default());
    }

    #[test]
    fn csv_and_jsonl_roundtrip() {
        let text = csv_of(&[
            row("alice", 0, "p1", "2020-01-14", 10, 0, 0.9),
            row("bot", 1, "p2", "2020-01-16", 12, 1, 0.3),
        ]);
        let events = read_events_csv(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_events_jsonl(&mut buf, &events).unwrap();
        assert_eq!(read_events_jsonl(buf.as_slice()).unwrap(), events);
        let mut buf = Vec::new();
        write_events_csv(&mut buf, &events).unwrap();
        assert_eq!(read_events_csv(buf.as_slice()).unwrap(), events);

        let aggs = aggregate_daily(&events).unwrap();
        let mut buf = Vec::new();
        write_aggregates_csv(&mut buf, &aggs).unwrap();
        assert_eq!(read_aggregates_csv(buf.as_slice()).unwrap(), aggs);
    }
}
