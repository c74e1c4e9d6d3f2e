//! Corpus ingestion and cleansing.
//!
//! Reads raw tweets from JSONL, applies the geo/relevance cleansing rules,
//! and loads the ground-truth protest events and election statistics used
//! as event-specific features.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{RegionCode, RegionSet};

/// One message from the corpus. Retweets are full records of their own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    pub created_at: DateTime<Utc>,
    /// Geo-tagged region, absent when the author hid their location.
    #[serde(rename = "state", default)]
    pub region: Option<RegionCode>,
    pub text: String,
    pub is_retweet: bool,
}

impl TweetRecord {
    /// Calendar day of the record after shifting into the run timezone.
    pub fn day(&self, tz_offset_hours: i32) -> NaiveDate {
        bucket_date(self.created_at, tz_offset_hours)
    }
}

/// Day bucketing: normalize a UTC instant into the configured fixed-offset
/// timezone, then take the calendar date.
pub fn bucket_date(ts: DateTime<Utc>, tz_offset_hours: i32) -> NaiveDate {
    let offset =
        FixedOffset::east_opt(tz_offset_hours * 3600).expect("offset within +/-24h");
    ts.with_timezone(&offset).date_naive()
}

/// An observed protest: one region on one date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProtestEvent {
    pub date: NaiveDate,
    pub region: RegionCode,
}

/// Per-region election statistics feeding the event-specific features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectionStats {
    pub region: RegionCode,
    /// Winning candidate's share of the region vote, in [0,1].
    pub candidate_vote_pct: f64,
    /// Largest county-level vote lead for the opposition candidate.
    pub max_opposition_county_lead: u64,
}

/// Counters reported by [`ingest`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    /// Non-empty lines seen.
    pub lines: usize,
    /// Records loaded into the corpus.
    pub loaded: usize,
    /// Lines that failed to parse into a valid record.
    pub skipped_malformed: usize,
    /// Well-formed records dropped because their id was already present.
    pub skipped_duplicate: usize,
}

/// Read a JSONL corpus. Malformed lines are counted and skipped; a file
/// where more than half the lines are malformed is rejected outright since
/// that signals the wrong input format.
pub fn ingest(path: &Path, region_set: &RegionSet) -> Result<(Vec<TweetRecord>, IngestStats)> {
    let file = File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let reader = BufReader::new(file);

    let mut records = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut stats = IngestStats::default();

    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        stats.lines += 1;
        let record: TweetRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                log::debug!("skipping malformed line: {e}");
                stats.skipped_malformed += 1;
                continue;
            }
        };
        if record.id.is_empty()
            || record.region.is_some_and(|r| !region_set.contains(r))
        {
            stats.skipped_malformed += 1;
            continue;
        }
        if !seen_ids.insert(record.id.clone()) {
            stats.skipped_duplicate += 1;
            continue;
        }
        stats.loaded += 1;
        records.push(record);
    }

    if stats.lines > 0 && stats.skipped_malformed * 2 > stats.lines {
        return Err(Error::Format(format!(
            "{} of {} lines malformed; input does not look like a tweet corpus",
            stats.skipped_malformed, stats.lines
        )));
    }
    Ok((records, stats))
}

/// Write records back out as JSONL, one object per line, input order.
pub fn write_jsonl(records: &[TweetRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, record)
            .map_err(|e| Error::Internal(format!("serializing record: {e}")))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Deny-list relevance rule. A record is irrelevant when, after setting the
/// campaign hashtags aside, its text is URL-only, carries too many unrelated
/// hashtags, or contains a configured spam phrase.
#[derive(Debug, Clone)]
pub struct RelevanceRule {
    /// Hashtags that define the collection topic (lowercase, with '#').
    pub campaign_hashtags: HashSet<String>,
    /// Lowercase substrings that mark advertisement bodies.
    pub spam_phrases: Vec<String>,
    /// A record with at least this many non-campaign hashtags is dropped.
    pub max_unrelated_hashtags: usize,
}

impl Default for RelevanceRule {
    fn default() -> Self {
        RelevanceRule {
            campaign_hashtags: ["#notmypresident", "#muslimban", "#travelban"]
                .into_iter()
                .map(String::from)
                .collect(),
            spam_phrases: [
                "buy followers",
                "click here",
                "promo code",
                "free gift card",
                "limited time offer",
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            max_unrelated_hashtags: 3,
        }
    }
}

impl RelevanceRule {
    pub fn is_relevant(&self, text: &str) -> bool {
        let lower = text.to_lowercase();
        if self.spam_phrases.iter().any(|p| lower.contains(p)) {
            return false;
        }

        let mut unrelated_hashtags = 0usize;
        let mut non_campaign_words = 0usize;
        for word in lower.split_whitespace() {
            let word = word.trim_matches(|c: char| {
                c != '#' && !c.is_alphanumeric()
            });
            if word.is_empty() {
                continue;
            }
            if word.starts_with('#') {
                if self.campaign_hashtags.contains(word) {
                    continue;
                }
                unrelated_hashtags += 1;
                non_campaign_words += 1;
            } else if !is_url(word) {
                non_campaign_words += 1;
            }
        }
        if unrelated_hashtags >= self.max_unrelated_hashtags {
            return false;
        }
        // URL-only body once campaign hashtags are removed
        if non_campaign_words == 0 {
            return false;
        }
        true
    }
}

fn is_url(word: &str) -> bool {
    word.starts_with("http://") || word.starts_with("https://") || word.starts_with("www.")
}

/// Drop records without a geo tag or failing the relevance rule. Retweets
/// are retained as independent records.
pub fn cleanse(records: &[TweetRecord], rule: &RelevanceRule) -> Vec<TweetRecord> {
    records
        .iter()
        .filter(|r| r.region.is_some() && rule.is_relevant(&r.text))
        .cloned()
        .collect()
}

/// Load `protests.csv` (header `date,state`). Duplicate (date, region) pairs
/// are rejected.
pub fn load_ground_truth(path: &Path) -> Result<BTreeSet<ProtestEvent>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut events = BTreeSet::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if row.len() != 2 {
            return Err(Error::Format(format!(
                "protests row needs 2 fields, got {}",
                row.len()
            )));
        }
        let date = row[0]
            .parse::<NaiveDate>()
            .map_err(|e| Error::Format(format!("bad date {:?}: {e}", &row[0])))?;
        let region: RegionCode = row[1].parse()?;
        let event = ProtestEvent { date, region };
        if !events.insert(event) {
            return Err(Error::Schema(format!(
                "duplicate protest event ({date}, {region})"
            )));
        }
    }
    Ok(events)
}

/// Load `votes.csv` (header `state,candidate_vote_pct,max_opposition_county_lead`).
/// Every region in `region_set` must appear exactly once.
pub fn load_election(
    path: &Path,
    region_set: &RegionSet,
) -> Result<BTreeMap<RegionCode, ElectionStats>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut stats = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if row.len() != 3 {
            return Err(Error::Format(format!(
                "votes row needs 3 fields, got {}",
                row.len()
            )));
        }
        let region: RegionCode = row[0].parse()?;
        let pct = row[1]
            .parse::<f64>()
            .map_err(|e| Error::Format(format!("bad vote pct {:?}: {e}", &row[1])))?;
        if !(0.0..=1.0).contains(&pct) {
            return Err(Error::Invalid(format!(
                "vote pct for {region} is {pct}, outside [0,1]"
            )));
        }
        let lead = row[2]
            .parse::<u64>()
            .map_err(|e| Error::Format(format!("bad lead count {:?}: {e}", &row[2])))?;
        let entry = ElectionStats {
            region,
            candidate_vote_pct: pct,
            max_opposition_county_lead: lead,
        };
        if stats.insert(region, entry).is_some() {
            return Err(Error::Schema(format!("duplicate votes row for {region}")));
        }
    }
    for region in region_set.iter() {
        if !stats.contains_key(&region) {
            return Err(Error::Schema(format!(
                "votes file is missing region {region}"
            )));
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn tweet(id: &str, region: Option<&str>, text: &str) -> TweetRecord {
        TweetRecord {
            id: id.to_string(),
            created_at: "2016-11-12T10:00:00Z".parse().unwrap(),
            region: region.map(|r| r.parse().unwrap()),
            text: text.to_string(),
            is_retweet: false,
        }
    }

    #[test]
    fn ingest_empty_file() {
        let f = write_temp("");
        let (records, stats) = ingest(f.path(), &RegionSet::us_states()).unwrap();
        assert!(records.is_empty());
        assert_eq!(stats.skipped_malformed, 0);
    }

    #[test]
    fn ingest_well_formed_lines() {
        let f = write_temp(concat!(
            "{\"id\":\"1\",\"created_at\":\"2016-11-12T10:00:00Z\",\"state\":\"NY\",\"text\":\"a\",\"is_retweet\":false}\n",
            "{\"id\":\"2\",\"created_at\":\"2016-11-12T11:00:00Z\",\"state\":null,\"text\":\"b\",\"is_retweet\":false}\n",
            "{\"id\":\"3\",\"created_at\":\"2016-11-12T12:00:00Z\",\"state\":\"CA\",\"text\":\"c\",\"is_retweet\":true}\n",
        ));
        let (records, stats) = ingest(f.path(), &RegionSet::us_states()).unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(stats.loaded, 3);
        assert_eq!(stats.skipped_malformed, 0);
    }

    #[test]
    fn ingest_skips_invalid_timestamp() {
        let f = write_temp(concat!(
            "{\"id\":\"1\",\"created_at\":\"2016-11-12T10:00:00Z\",\"state\":\"NY\",\"text\":\"a\",\"is_retweet\":false}\n",
            "{\"id\":\"2\",\"created_at\":\"not-a-time\",\"state\":\"NY\",\"text\":\"b\",\"is_retweet\":false}\n",
            "{\"id\":\"3\",\"created_at\":\"2016-11-12T12:00:00Z\",\"state\":\"CA\",\"text\":\"c\",\"is_retweet\":false}\n",
        ));
        let (records, stats) = ingest(f.path(), &RegionSet::us_states()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(stats.skipped_malformed, 1);
    }

    #[test]
    fn ingest_rejects_duplicate_ids() {
        let f = write_temp(concat!(
            "{\"id\":\"1\",\"created_at\":\"2016-11-12T10:00:00Z\",\"state\":\"NY\",\"text\":\"a\",\"is_retweet\":false}\n",
            "{\"id\":\"1\",\"created_at\":\"2016-11-12T11:00:00Z\",\"state\":\"NY\",\"text\":\"b\",\"is_retweet\":false}\n",
        ));
        let (records, stats) = ingest(f.path(), &RegionSet::us_states()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(stats.skipped_duplicate, 1);
    }

    #[test]
    fn ingest_rejects_mostly_malformed_input() {
        let f = write_temp("not json\nstill not json\n{\"id\":\"1\",\"created_at\":\"2016-11-12T10:00:00Z\",\"state\":\"NY\",\"text\":\"a\",\"is_retweet\":false}\n");
        let err = ingest(f.path(), &RegionSet::us_states()).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn ingest_missing_file_is_fatal() {
        let err = ingest(Path::new("/definitely/not/here.jsonl"), &RegionSet::us_states());
        assert!(err.is_err());
    }

    #[test]
    fn cleanse_drops_records_without_region() {
        let records = vec![
            tweet("1", Some("NY"), "protest tomorrow #NotMyPresident"),
            tweet("2", Some("CA"), "rally downtown #NotMyPresident"),
            tweet("3", None, "protest tomorrow #NotMyPresident"),
        ];
        let kept = cleanse(&records, &RelevanceRule::default());
        assert_eq!(kept.len(), 2);
        assert!(kept.iter().all(|r| r.region.is_some()));
    }

    #[test]
    fn cleanse_drops_ad_bodies() {
        // only spam markers plus the trending hashtag
        let records = vec![tweet(
            "1",
            Some("NY"),
            "buy followers now, promo code SAVE #NotMyPresident",
        )];
        assert!(cleanse(&records, &RelevanceRule::default()).is_empty());
    }

    #[test]
    fn cleanse_drops_url_only_bodies() {
        let records = vec![tweet("1", Some("NY"), "https://spam.example #NotMyPresident")];
        assert!(cleanse(&records, &RelevanceRule::default()).is_empty());
    }

    #[test]
    fn cleanse_drops_hashtag_stuffing() {
        let records = vec![tweet(
            "1",
            Some("NY"),
            "great stuff #deals #shopping #crypto #NotMyPresident",
        )];
        assert!(cleanse(&records, &RelevanceRule::default()).is_empty());
    }

    #[test]
    fn cleanse_keeps_retweets_independently() {
        let mut original = tweet("1", Some("NY"), "march on city hall #NotMyPresident");
        original.is_retweet = false;
        let mut retweet = original.clone();
        retweet.id = "2".to_string();
        retweet.is_retweet = true;
        let kept = cleanse(&[original, retweet], &RelevanceRule::default());
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn cleanse_is_idempotent_and_shrinking() {
        let records = vec![
            tweet("1", Some("NY"), "protest tomorrow #NotMyPresident"),
            tweet("2", None, "protest tomorrow"),
            tweet("3", Some("CA"), "buy followers #NotMyPresident"),
        ];
        let rule = RelevanceRule::default();
        let once = cleanse(&records, &rule);
        let twice = cleanse(&once, &rule);
        assert_eq!(once, twice);
        assert!(once.len() <= records.len());
    }

    #[test]
    fn jsonl_round_trip_is_fixed_point() {
        let records = vec![
            tweet("1", Some("NY"), "protest tomorrow #NotMyPresident"),
            tweet("2", None, "watching the news"),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.jsonl");
        write_jsonl(&records, &path).unwrap();
        let (reread, stats) = ingest(&path, &RegionSet::us_states()).unwrap();
        assert_eq!(records, reread);
        assert_eq!(stats.skipped_malformed, 0);

        let path2 = dir.path().join("out2.jsonl");
        write_jsonl(&reread, &path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn ground_truth_parses_and_rejects_duplicates() {
        let f = write_temp("date,state\n2016-11-11,NY\n2016-11-11,CA\n");
        let events = load_ground_truth(f.path()).unwrap();
        assert_eq!(events.len(), 2);

        let dup = write_temp("date,state\n2016-11-11,NY\n2016-11-11,NY\n");
        assert!(load_ground_truth(dup.path()).is_err());
    }

    #[test]
    fn election_stats_parse() {
        let mut body = String::from("state,candidate_vote_pct,max_opposition_county_lead\n");
        for code in crate::region::US_STATES {
            body.push_str(&format!("{code},0.52,150000\n"));
        }
        let f = write_temp(&body);
        let stats = load_election(f.path(), &RegionSet::us_states()).unwrap();
        assert_eq!(stats.len(), 50);
        let tx = stats[&"TX".parse().unwrap()];
        assert_eq!(tx.candidate_vote_pct, 0.52);
        assert_eq!(tx.max_opposition_county_lead, 150000);
    }

    #[test]
    fn election_missing_region_is_fatal() {
        let mut body = String::from("state,candidate_vote_pct,max_opposition_county_lead\n");
        for code in crate::region::US_STATES.iter().skip(1) {
            body.push_str(&format!("{code},0.5,0\n"));
        }
        let f = write_temp(&body);
        let err = load_election(f.path(), &RegionSet::us_states()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn election_vote_pct_out_of_range_is_fatal() {
        let f = write_temp("state,candidate_vote_pct,max_opposition_county_lead\nNY,1.2,0\n");
        let err = load_election(f.path(), &RegionSet::us_states()).unwrap_err();
        assert!(matches!(err, Error::Invalid(_)));
    }

    #[test]
    fn day_bucketing_respects_offset() {
        let ts: DateTime<Utc> = "2016-11-12T01:30:00Z".parse().unwrap();
        assert_eq!(bucket_date(ts, 0), NaiveDate::from_ymd_opt(2016, 11, 12).unwrap());
        // two hours west of UTC it is still the 11th
        assert_eq!(bucket_date(ts, -2), NaiveDate::from_ymd_opt(2016, 11, 11).unwrap());
    }
}
