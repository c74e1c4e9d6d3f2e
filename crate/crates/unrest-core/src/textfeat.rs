//! Per-tweet text analysis: tokenization, time/date/place mention
//! extraction, violent-word counting, and lexicon-based sentiment.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::corpus::TweetRecord;
use crate::error::{Error, Result};
use crate::region::RegionCode;

/// Lowercased token stream of one tweet. Hashtags survive as single
/// `#`-prefixed tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedTweet {
    pub tokens: Vec<String>,
    pub hashtags: Vec<String>,
}

/// Split on whitespace and punctuation, lowercase everything, keep
/// `#`-prefixed tokens intact.
pub fn tokenize(text: &str) -> TokenizedTweet {
    let mut tokens = Vec::new();
    let mut hashtags = Vec::new();
    for word in text.split_whitespace() {
        if let Some(rest) = word.strip_prefix('#') {
            let tag: String = rest
                .chars()
                .take_while(|c| c.is_alphanumeric() || *c == '_')
                .flat_map(|c| c.to_lowercase())
                .collect();
            if !tag.is_empty() {
                let tag = format!("#{tag}");
                tokens.push(tag.clone());
                hashtags.push(tag);
            }
            continue;
        }
        let mut current = String::new();
        for c in word.chars() {
            if c.is_alphanumeric() {
                current.extend(c.to_lowercase());
            } else if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    TokenizedTweet { tokens, hashtags }
}

/// How the date of a mention was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MentionSource {
    ExplicitDate,
    Weekday,
    RelativeWord,
    /// Reserved for hits attributed purely from the record's geo tag;
    /// the extractor itself always reports the date-resolution source.
    TweetGeo,
}

/// A (future date, region) pair announcing a planned protest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MentionHit {
    pub target_date: NaiveDate,
    pub target_region: RegionCode,
    pub source: MentionSource,
}

/// Place-name lookup mapping city names to regions. Multi-token names are
/// matched greedily, longest first; hashtag forms (`#losangeles`) match the
/// name with spaces removed.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    // phrases sharing a first token, longest first
    by_first_token: HashMap<String, Vec<usize>>,
    phrases: Vec<(Vec<String>, Vec<RegionCode>)>,
    concat: HashMap<String, Vec<RegionCode>>,
}

impl Gazetteer {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, RegionCode)>) -> Self {
        let mut grouped: BTreeMap<String, BTreeSet<RegionCode>> = BTreeMap::new();
        for (place, region) in entries {
            let place = place.trim().to_lowercase();
            if place.is_empty() {
                continue;
            }
            grouped.entry(place).or_default().insert(region);
        }
        let mut phrases: Vec<(Vec<String>, Vec<RegionCode>)> = grouped
            .into_iter()
            .map(|(place, regions)| {
                let toks: Vec<String> = place.split_whitespace().map(String::from).collect();
                (toks, regions.into_iter().collect())
            })
            .collect();
        phrases.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));

        let mut by_first_token: HashMap<String, Vec<usize>> = HashMap::new();
        let mut concat = HashMap::new();
        for (idx, (toks, regions)) in phrases.iter().enumerate() {
            by_first_token
                .entry(toks[0].clone())
                .or_default()
                .push(idx);
            concat.insert(toks.concat(), regions.clone());
        }
        Gazetteer {
            by_first_token,
            phrases,
            concat,
        }
    }

    /// Load `gazetteer.csv` (header `place,state`).
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| Error::Format(format!("gazetteer: {e}")))?;
            if row.len() != 2 {
                return Err(Error::Format(format!(
                    "gazetteer row needs 2 fields, got {}",
                    row.len()
                )));
            }
            entries.push((row[0].to_string(), row[1].parse()?));
        }
        Ok(Self::from_entries(entries))
    }

    /// Built-in city list covering the default region universe.
    pub fn builtin() -> Self {
        Self::from_csv_str(include_str!("../data/gazetteer.csv")).expect("builtin gazetteer")
    }

    /// Every region matched anywhere in the token stream, deduplicated.
    /// Each raw match resolves through `geo`: unambiguous names stand on
    /// their own, ambiguous ones count only when the tweet's geo region is
    /// among the candidates.
    fn resolve_places(&self, tokens: &[String], geo: Option<RegionCode>) -> BTreeSet<RegionCode> {
        let mut places = BTreeSet::new();
        let mut resolve = |candidates: &[RegionCode]| match candidates {
            [only] => {
                places.insert(*only);
            }
            many => {
                if let Some(g) = geo {
                    if many.contains(&g) {
                        places.insert(g);
                    }
                }
            }
        };

        let mut i = 0;
        while i < tokens.len() {
            if let Some(tag) = tokens[i].strip_prefix('#') {
                if let Some(regions) = self.concat.get(tag) {
                    resolve(regions);
                }
                i += 1;
                continue;
            }
            let mut matched = 0;
            if let Some(candidates) = self.by_first_token.get(&tokens[i]) {
                for &idx in candidates {
                    let (phrase, regions) = &self.phrases[idx];
                    if tokens[i..].len() >= phrase.len()
                        && tokens[i..i + phrase.len()] == phrase[..]
                    {
                        resolve(regions);
                        matched = phrase.len();
                        break;
                    }
                }
            }
            i += matched.max(1);
        }
        places
    }
}

const MONTHS: [(&str, u32); 24] = [
    ("january", 1), ("february", 2), ("march", 3), ("april", 4), ("may", 5), ("june", 6),
    ("july", 7), ("august", 8), ("september", 9), ("october", 10), ("november", 11),
    ("december", 12), ("jan", 1), ("feb", 2), ("mar", 3), ("apr", 4), ("jun", 6), ("jul", 7),
    ("aug", 8), ("sep", 9), ("sept", 9), ("oct", 10), ("nov", 11), ("dec", 12),
];

const WEEKDAYS: [(&str, chrono::Weekday); 7] = [
    ("monday", chrono::Weekday::Mon),
    ("tuesday", chrono::Weekday::Tue),
    ("wednesday", chrono::Weekday::Wed),
    ("thursday", chrono::Weekday::Thu),
    ("friday", chrono::Weekday::Fri),
    ("saturday", chrono::Weekday::Sat),
    ("sunday", chrono::Weekday::Sun),
];

fn month_number(token: &str) -> Option<u32> {
    MONTHS.iter().find(|(name, _)| *name == token).map(|&(_, m)| m)
}

fn weekday_of(token: &str) -> Option<chrono::Weekday> {
    WEEKDAYS
        .iter()
        .find(|(name, _)| *name == token)
        .map(|&(_, w)| w)
}

/// Parse a day-of-month token such as `14`, `14th`, `1st`, `2nd`, `3rd`.
fn day_number(token: &str) -> Option<u32> {
    let digits: String = token.chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() {
        return None;
    }
    let suffix = &token[digits.len()..];
    if !matches!(suffix, "" | "st" | "nd" | "rd" | "th") {
        return None;
    }
    let day: u32 = digits.parse().ok()?;
    (1..=31).contains(&day).then_some(day)
}

/// The next date strictly after `from` that falls on `weekday`; always in
/// `(from, from + 7]`.
pub fn next_weekday(from: NaiveDate, weekday: chrono::Weekday) -> NaiveDate {
    let today = from.weekday().num_days_from_monday() as i64;
    let target = weekday.num_days_from_monday() as i64;
    let ahead = (target - today - 1).rem_euclid(7) + 1;
    from + Days::new(ahead as u64)
}

/// First occurrence of `month`-`day` strictly after `from`.
fn next_month_day(from: NaiveDate, month: u32, day: u32) -> Option<NaiveDate> {
    for year in [from.year(), from.year() + 1] {
        if let Some(date) = NaiveDate::from_ymd_opt(year, month, day) {
            if date > from {
                return Some(date);
            }
        }
    }
    None
}

/// Extract time/date/place mentions from one record. Dates resolve from
/// explicit month-day phrases, weekday names (strictly-next occurrence),
/// and the relative words "tomorrow"/"today"/"tonight"; only "today" and
/// "tonight" may land on the tweet's own day. The place is the gazetteer
/// match when present, otherwise the record's geo region. Hits farther out
/// than `horizon_days` are dropped.
pub fn extract_mentions(
    tweet: &TweetRecord,
    gazetteer: &Gazetteer,
    horizon_days: u32,
    tz_offset_hours: i32,
) -> Vec<MentionHit> {
    let tokenized = tokenize(&tweet.text);
    extract_mentions_from_tokens(
        &tokenized.tokens,
        tweet.day(tz_offset_hours),
        tweet.region,
        gazetteer,
        horizon_days,
    )
}

/// Token-level core of [`extract_mentions`], for pipelines that already
/// tokenized the record.
pub fn extract_mentions_from_tokens(
    tokens: &[String],
    tweet_day: NaiveDate,
    geo: Option<RegionCode>,
    gazetteer: &Gazetteer,
    horizon_days: u32,
) -> Vec<MentionHit> {
    // dates in scan order, first source wins for a given date
    let mut dates: BTreeMap<NaiveDate, MentionSource> = BTreeMap::new();
    let mut add = |date: NaiveDate, source: MentionSource| {
        dates.entry(date).or_insert(source);
    };

    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i].as_str();
        if let Some(month) = month_number(tok) {
            if let Some(day) = tokens.get(i + 1).and_then(|t| day_number(t)) {
                if let Some(date) = next_month_day(tweet_day, month, day) {
                    add(date, MentionSource::ExplicitDate);
                    i += 2;
                    continue;
                }
            }
        }
        if let Some(weekday) = weekday_of(tok) {
            add(next_weekday(tweet_day, weekday), MentionSource::Weekday);
        } else if tok == "tomorrow" {
            add(tweet_day + Days::new(1), MentionSource::RelativeWord);
        } else if tok == "today" || tok == "tonight" {
            add(tweet_day, MentionSource::RelativeWord);
        }
        i += 1;
    }
    if dates.is_empty() {
        return Vec::new();
    }

    let mut places = gazetteer.resolve_places(tokens, geo);
    if places.is_empty() {
        match geo {
            Some(region) => {
                places.insert(region);
            }
            None => return Vec::new(),
        }
    }

    let limit = tweet_day + Days::new(horizon_days as u64);
    let mut hits = Vec::new();
    for (&date, &source) in &dates {
        if date > limit {
            continue;
        }
        for &region in &places {
            hits.push(MentionHit {
                target_date: date,
                target_region: region,
                source,
            });
        }
    }
    hits
}

/// Lexicon of violence-related terms, one lowercase term per line.
pub fn load_violent_lexicon(path: &Path) -> Result<HashSet<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_violent_lexicon(&text))
}

pub fn parse_violent_lexicon(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

pub fn default_violent_lexicon() -> HashSet<String> {
    parse_violent_lexicon(include_str!("../data/violent_lexicon.txt"))
}

/// Reduce a token to its lexicon lookup form: drop the hashtag marker and
/// common inflection suffixes.
fn lemma_candidates(token: &str) -> impl Iterator<Item = &str> {
    let base = token.strip_prefix('#').unwrap_or(token);
    let stripped = [
        Some(base),
        base.len().gt(&3).then(|| base.strip_suffix('s')).flatten(),
        base.len().gt(&4).then(|| base.strip_suffix("es")).flatten(),
        base.len().gt(&4).then(|| base.strip_suffix("ed")).flatten(),
        base.len().gt(&5).then(|| base.strip_suffix("ing")).flatten(),
    ];
    stripped.into_iter().flatten()
}

/// Count token occurrences (with multiplicity) whose lemma is in the lexicon.
pub fn violent_word_count(tweet: &TokenizedTweet, lexicon: &HashSet<String>) -> u32 {
    if lexicon.is_empty() {
        return 0;
    }
    tweet
        .tokens
        .iter()
        .filter(|t| lemma_candidates(t).any(|c| lexicon.contains(c)))
        .count() as u32
}

/// Term polarity in [-1, 1]; negative sentiment is polarity < 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub polarity: f64,
    pub is_negative: bool,
}

impl SentimentScore {
    pub fn neutral() -> Self {
        SentimentScore {
            polarity: 0.0,
            is_negative: false,
        }
    }
}

/// Load `sentiment_lexicon.csv` (header `term,polarity`, polarity in [-1,1]).
pub fn load_sentiment_lexicon(path: &Path) -> Result<HashMap<String, f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_sentiment_lexicon(&text)
}

pub fn parse_sentiment_lexicon(text: &str) -> Result<HashMap<String, f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut lexicon = HashMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Format(format!("sentiment lexicon: {e}")))?;
        let term = row[0].trim().to_lowercase();
        let polarity: f64 = row[1]
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("bad polarity {:?}: {e}", &row[1])))?;
        if !(-1.0..=1.0).contains(&polarity) {
            return Err(Error::Invalid(format!(
                "polarity for {term:?} is {polarity}, outside [-1,1]"
            )));
        }
        lexicon.insert(term, polarity);
    }
    Ok(lexicon)
}

pub fn default_sentiment_lexicon() -> HashMap<String, f64> {
    parse_sentiment_lexicon(include_str!("../data/sentiment_lexicon.csv"))
        .expect("builtin sentiment lexicon")
}

/// Mean polarity over matched tokens; a tweet with no lexicon matches is
/// neutral.
pub fn sentiment(tweet: &TokenizedTweet, lexicon: &HashMap<String, f64>) -> SentimentScore {
    let mut total = 0.0;
    let mut matched = 0usize;
    for token in &tweet.tokens {
        let base = token.strip_prefix('#').unwrap_or(token);
        if let Some(&polarity) = lexicon.get(base) {
            total += polarity;
            matched += 1;
        }
    }
    if matched == 0 {
        return SentimentScore::neutral();
    }
    let polarity = total / matched as f64;
    SentimentScore {
        polarity,
        is_negative: polarity < 0.0,
    }
}
