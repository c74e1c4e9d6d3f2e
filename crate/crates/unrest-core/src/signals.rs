//! Early-signal detection: keyword thresholding over tumbling time windows
//! and coordination-hashtag ranking inside fired windows.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Duration, Utc};

use crate::corpus::TweetRecord;
use crate::error::{Error, Result};
use crate::textfeat::tokenize;

/// One tumbling window of the scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignalTrigger {
    pub window_start: DateTime<Utc>,
    pub window_end: DateTime<Utc>,
    pub keyword_count: u64,
    pub threshold: u64,
    pub fired: bool,
}

/// Hashtags ranked by how many of the window's signal tweets carry them.
#[derive(Debug, Clone, PartialEq)]
pub struct HashtagRanking {
    /// (hashtag, signal tweets containing it, share of the window's signal
    /// tweets), counts descending, ties lexicographic.
    pub entries: Vec<(String, u64, f64)>,
}

fn matches_keywords(record: &TweetRecord, keywords: &HashSet<String>) -> bool {
    tokenize(&record.text)
        .tokens
        .iter()
        .any(|t| keywords.contains(t.strip_prefix('#').unwrap_or(t)))
}

/// Commonly used protest signal terms.
pub fn default_keywords() -> HashSet<String> {
    ["protest", "rally", "demonstration", "walkout"]
        .into_iter()
        .map(String::from)
        .collect()
}

/// Tumbling-window scan anchored at the first record's timestamp. Every
/// window covering the corpus span is reported, fired or not; a window
/// fires when its keyword-tweet count reaches the threshold.
pub fn scan_signals(
    corpus: &[TweetRecord],
    keywords: &HashSet<String>,
    window: Duration,
    threshold: u64,
) -> Result<Vec<SignalTrigger>> {
    if keywords.is_empty() {
        return Err(Error::Invalid("signal scan needs at least one keyword".into()));
    }
    if window <= Duration::zero() {
        return Err(Error::Invalid("signal window must be positive".into()));
    }
    let Some(anchor) = corpus.iter().map(|r| r.created_at).min() else {
        return Ok(Vec::new());
    };
    let last = corpus.iter().map(|r| r.created_at).max().expect("nonempty");

    let window_index = |ts: DateTime<Utc>| -> i64 {
        let elapsed = ts.signed_duration_since(anchor).num_seconds();
        elapsed.div_euclid(window.num_seconds())
    };

    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for record in corpus {
        if matches_keywords(record, keywords) {
            *counts.entry(window_index(record.created_at)).or_default() += 1;
        }
    }

    let mut triggers = Vec::new();
    for idx in 0..=window_index(last) {
        let count = counts.get(&idx).copied().unwrap_or(0);
        let window_start = anchor + window * idx as i32;
        triggers.push(SignalTrigger {
            window_start,
            window_end: window_start + window,
            keyword_count: count,
            threshold,
            fired: count >= threshold,
        });
    }
    Ok(triggers)
}

/// Rank hashtags among the keyword-bearing tweets inside one window.
/// A tweet counts once per distinct hashtag it carries; the share is
/// against the window's signal-tweet total.
pub fn trending_hashtags(
    corpus: &[TweetRecord],
    window: &SignalTrigger,
    keywords: &HashSet<String>,
    top_k: usize,
) -> HashtagRanking {
    let mut signal_tweets = 0u64;
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for record in corpus {
        if record.created_at < window.window_start || record.created_at >= window.window_end {
            continue;
        }
        if !matches_keywords(record, keywords) {
            continue;
        }
        signal_tweets += 1;
        let tags: HashSet<String> = tokenize(&record.text).hashtags.into_iter().collect();
        for tag in tags {
            *counts.entry(tag).or_default() += 1;
        }
    }

    let mut entries: Vec<(String, u64, f64)> = counts
        .into_iter()
        .map(|(tag, count)| {
            let share = if signal_tweets == 0 {
                0.0
            } else {
                count as f64 / signal_tweets as f64
            };
            (tag, count, share)
        })
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(top_k);
    HashtagRanking { entries }
}

/// `signals.csv`: one row per window.
pub fn write_signals_csv(triggers: &[SignalTrigger], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "window_start,window_end,count,fired")?;
    for t in triggers {
        writeln!(
            out,
            "{},{},{},{}",
            t.window_start.to_rfc3339(),
            t.window_end.to_rfc3339(),
            t.keyword_count,
            t.fired
        )?;
    }
    out.flush()?;
    Ok(())
}

/// `hashtags.csv`: the ranking for one fired window.
pub fn write_hashtags_csv(ranking: &HashtagRanking, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "hashtag,count,share")?;
    for (tag, count, share) in &ranking.entries {
        writeln!(out, "{tag},{count},{share:.6}")?;
    }
    out.flush()?;
    Ok(())
}
