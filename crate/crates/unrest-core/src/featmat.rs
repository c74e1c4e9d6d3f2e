//! The (region x day) feature matrix: seven predictors per cell plus the
//! ground-truth label, with Pearson-correlation pruning support.
//!
//! All tweet-derived features are lagged one day: the row for day `d`
//! summarizes day `d-1` activity, except F1 which accumulates mention hits
//! targeting `(region, d)` from any earlier day.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Days, NaiveDate};

use crate::corpus::{ElectionStats, ProtestEvent, TweetRecord};
use crate::error::{Error, Result};
use crate::region::{RegionCode, RegionSet};
use crate::textfeat::{
    extract_mentions_from_tokens, sentiment, tokenize, violent_word_count, Gazetteer, MentionHit,
    SentimentScore,
};

pub const FEATURE_COUNT: usize = 7;

/// One of the seven predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureId {
    /// Mention count targeting this (region, day).
    F1,
    /// Corpus-wide negative-sentiment tweet count, previous day.
    F2,
    /// Candidate vote percentage for the region.
    F3,
    /// Average polarity of the region's negative tweets, previous day.
    F4,
    /// Average violent words per tweet for the region, previous day.
    F5,
    /// The region's tweet count (or hourly pace), previous day.
    F6,
    /// County lead-vote flag for the region.
    F7,
}

impl FeatureId {
    pub const ALL: [FeatureId; FEATURE_COUNT] = [
        FeatureId::F1,
        FeatureId::F2,
        FeatureId::F3,
        FeatureId::F4,
        FeatureId::F5,
        FeatureId::F6,
        FeatureId::F7,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<FeatureId> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.index() + 1)
    }
}

impl FromStr for FeatureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_lowercase();
        let idx = lower
            .strip_prefix('f')
            .and_then(|n| n.parse::<usize>().ok())
            .and_then(|n| n.checked_sub(1));
        idx.and_then(FeatureId::from_index)
            .ok_or_else(|| Error::Invalid(format!("unknown feature {s:?}, expected f1..f7")))
    }
}

/// Subset of the seven predictors, used to mask model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureMask(u8);

impl FeatureMask {
    pub const EMPTY: FeatureMask = FeatureMask(0);

    pub fn all() -> Self {
        FeatureMask((1 << FEATURE_COUNT) - 1)
    }

    /// Tweet-derived predictors only (drops the event-specific F3 and F7).
    pub fn tweet_only() -> Self {
        Self::from_ids([
            FeatureId::F1,
            FeatureId::F2,
            FeatureId::F4,
            FeatureId::F5,
            FeatureId::F6,
        ])
    }

    pub fn from_ids(ids: impl IntoIterator<Item = FeatureId>) -> Self {
        let mut bits = 0u8;
        for id in ids {
            bits |= 1 << id.index();
        }
        FeatureMask(bits)
    }

    pub fn from_bits(bits: u8) -> Self {
        FeatureMask(bits & ((1 << FEATURE_COUNT) - 1))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn single(id: FeatureId) -> Self {
        FeatureMask(1 << id.index())
    }

    pub fn contains(self, id: FeatureId) -> bool {
        self.0 & (1 << id.index()) != 0
    }

    pub fn with(self, id: FeatureId) -> Self {
        FeatureMask(self.0 | (1 << id.index()))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn ids(self) -> impl Iterator<Item = FeatureId> {
        FeatureId::ALL.into_iter().filter(move |id| self.contains(*id))
    }

    pub fn indices(self) -> Vec<usize> {
        self.ids().map(FeatureId::index).collect()
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.ids().map(|id| id.to_string()).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for FeatureMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        if trimmed.eq_ignore_ascii_case("all") {
            return Ok(FeatureMask::all());
        }
        let mut mask = FeatureMask::EMPTY;
        for part in trimmed.split(',') {
            mask = mask.with(part.parse()?);
        }
        Ok(mask)
    }
}

/// One (region, date) cell: the seven predictors and the label.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub region: RegionCode,
    pub date: NaiveDate,
    pub features: [f64; FEATURE_COUNT],
    pub label: u8,
}

impl FeatureRow {
    pub fn feature(&self, id: FeatureId) -> f64 {
        self.features[id.index()]
    }
}

/// Dense (date, region)-ordered feature matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    /// Wrap rows, enforcing canonical ordering and per-date density.
    pub fn new(mut rows: Vec<FeatureRow>) -> Result<Self> {
        rows.sort_by_key(|r| (r.date, r.region));
        let matrix = FeatureMatrix { rows };
        matrix.validate()?;
        Ok(matrix)
    }

    fn validate(&self) -> Result<()> {
        let regions = self.regions();
        let mut per_date: BTreeMap<NaiveDate, Vec<RegionCode>> = BTreeMap::new();
        for row in &self.rows {
            per_date.entry(row.date).or_default().push(row.region);
        }
        for (date, mut seen) in per_date {
            seen.sort();
            seen.dedup();
            if seen != regions {
                return Err(Error::Schema(format!(
                    "matrix is not dense: {date} does not cover every region exactly once"
                )));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct dates, ascending.
    pub fn dates(&self) -> Vec<NaiveDate> {
        let set: BTreeSet<NaiveDate> = self.rows.iter().map(|r| r.date).collect();
        set.into_iter().collect()
    }

    /// Distinct regions, ascending.
    pub fn regions(&self) -> Vec<RegionCode> {
        let set: BTreeSet<RegionCode> = self.rows.iter().map(|r| r.region).collect();
        set.into_iter().collect()
    }

    /// Masked feature rows and labels for every row matching `filter`.
    pub fn project<F: Fn(&FeatureRow) -> bool>(
        &self,
        mask: FeatureMask,
        filter: F,
    ) -> (Vec<Vec<f64>>, Vec<u8>) {
        let indices = mask.indices();
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for row in self.rows.iter().filter(|r| filter(r)) {
            features.push(indices.iter().map(|&i| row.features[i]).collect());
            labels.push(row.label);
        }
        (features, labels)
    }

    /// One full feature column over all rows, canonical order.
    pub fn column(&self, id: FeatureId) -> Vec<f64> {
        self.rows.iter().map(|r| r.feature(id)).collect()
    }

    /// Ground truth implied by the labels.
    pub fn truth(&self) -> BTreeSet<ProtestEvent> {
        self.rows
            .iter()
            .filter(|r| r.label == 1)
            .map(|r| ProtestEvent {
                date: r.date,
                region: r.region,
            })
            .collect()
    }

    /// Write `features.csv`: canonical ordering, reals at six decimals.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "date,state,f1,f2,f3,f4,f5,f6,f7,label")?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{}",
                row.date,
                row.region,
                row.features[0] as i64,
                row.features[1] as i64,
                row.features[2],
                row.features[3],
                row.features[4],
                row.features[5],
                row.features[6] as i64,
                row.label
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Format(format!("features: {e}")))?;
            if record.len() != 2 + FEATURE_COUNT + 1 {
                return Err(Error::Format(format!(
                    "features row needs {} fields, got {}",
                    2 + FEATURE_COUNT + 1,
                    record.len()
                )));
            }
            let date = record[0]
                .parse::<NaiveDate>()
                .map_err(|e| Error::Format(format!("bad date {:?}: {e}", &record[0])))?;
            let region: RegionCode = record[1].parse()?;
            let mut features = [0.0; FEATURE_COUNT];
            for (i, slot) in features.iter_mut().enumerate() {
                *slot = record[2 + i]
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad value {:?}: {e}", &record[2 + i])))?;
            }
            let label = match &record[2 + FEATURE_COUNT] {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::Format(format!("bad label {other:?}, expected 0 or 1")))
                }
            };
            rows.push(FeatureRow {
                region,
                date,
                features,
                label,
            });
        }
        FeatureMatrix::new(rows)
    }
}

/// Per-record analysis results feeding the matrix build.
#[derive(Debug, Clone)]
pub struct TweetAnalysis {
    pub day: NaiveDate,
    pub region: RegionCode,
    pub mentions: Vec<MentionHit>,
    pub sentiment: SentimentScore,
    pub violent_words: u32,
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub horizon_days: u32,
    pub tz_offset_hours: i32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            horizon_days: 7,
            tz_offset_hours: 0,
        }
    }
}

/// Run the per-tweet extractors over a cleansed corpus. Each record is
/// tokenized once and scored for mentions, sentiment, and violent words.
pub fn analyze_corpus(
    records: &[TweetRecord],
    gazetteer: &Gazetteer,
    violent_lexicon: &std::collections::HashSet<String>,
    sentiment_lexicon: &HashMap<String, f64>,
    cfg: &AnalysisConfig,
) -> Result<Vec<TweetAnalysis>> {
    records
        .iter()
        .map(|record| {
            let region = record.region.ok_or_else(|| {
                Error::Invalid(format!(
                    "record {} has no region; corpus must be cleansed first",
                    record.id
                ))
            })?;
            let day = record.day(cfg.tz_offset_hours);
            let tokenized = tokenize(&record.text);
            let mentions = extract_mentions_from_tokens(
                &tokenized.tokens,
                day,
                record.region,
                gazetteer,
                cfg.horizon_days,
            );
            Ok(TweetAnalysis {
                day,
                region,
                mentions,
                sentiment: sentiment(&tokenized, sentiment_lexicon),
                violent_words: violent_word_count(&tokenized, violent_lexicon),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    /// Opposition county lead (votes) at or above which F7 is 1.
    pub lead_threshold: u64,
    /// Report F6 as hourly pace instead of a raw daily count; for runs
    /// whose day windows are not all equal.
    pub hourly_pace: bool,
    pub window_hours: f64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            lead_threshold: 100_000,
            hourly_pace: false,
            window_hours: 24.0,
        }
    }
}

/// 1 iff some county in the region favored the opposition by at least
/// `threshold` votes (inclusive).
pub fn lead_flag(stats: &ElectionStats, threshold: u64) -> u8 {
    u8::from(stats.max_opposition_county_lead >= threshold)
}

#[derive(Default, Clone, Copy)]
struct DayRegionAgg {
    tweets: u64,
    negative: u64,
    negative_polarity_sum: f64,
    violent_sum: u64,
}

/// Assemble the dense feature matrix over `date_range` (inclusive).
pub fn build_matrix(
    analyses: &[TweetAnalysis],
    election: &BTreeMap<RegionCode, ElectionStats>,
    protests: &BTreeSet<ProtestEvent>,
    region_set: &RegionSet,
    date_range: (NaiveDate, NaiveDate),
    cfg: &BuildConfig,
) -> Result<FeatureMatrix> {
    let (start, end) = date_range;
    if start > end {
        return Err(Error::Invalid(format!("empty date range {start}..{end}")));
    }
    for region in region_set.iter() {
        if !election.contains_key(&region) {
            return Err(Error::Schema(format!(
                "election stats missing for region {region}"
            )));
        }
    }

    let mut per_cell: HashMap<(RegionCode, NaiveDate), DayRegionAgg> = HashMap::new();
    let mut global_negative: HashMap<NaiveDate, u64> = HashMap::new();
    let mut mention_counts: HashMap<(RegionCode, NaiveDate), u64> = HashMap::new();
    for analysis in analyses {
        let agg = per_cell.entry((analysis.region, analysis.day)).or_default();
        agg.tweets += 1;
        agg.violent_sum += analysis.violent_words as u64;
        if analysis.sentiment.is_negative {
            agg.negative += 1;
            agg.negative_polarity_sum += analysis.sentiment.polarity;
            *global_negative.entry(analysis.day).or_default() += 1;
        }
        for hit in &analysis.mentions {
            // only mentions from strictly earlier days inform a row
            if analysis.day < hit.target_date {
                *mention_counts
                    .entry((hit.target_region, hit.target_date))
                    .or_default() += 1;
            }
        }
    }

    let mut rows = Vec::with_capacity(region_set.len());
    let mut date = start;
    while date <= end {
        let prev = date - Days::new(1);
        let global_neg_prev = global_negative.get(&prev).copied().unwrap_or(0);
        for region in region_set.iter() {
            let stats = &election[&region];
            let agg = per_cell
                .get(&(region, prev))
                .copied()
                .unwrap_or_default();
            let f1 = mention_counts
                .get(&(region, date))
                .copied()
                .unwrap_or(0) as f64;
            let f4 = if agg.negative > 0 {
                agg.negative_polarity_sum / agg.negative as f64
            } else {
                0.0
            };
            let f5 = if agg.tweets > 0 {
                agg.violent_sum as f64 / agg.tweets as f64
            } else {
                0.0
            };
            let f6 = if cfg.hourly_pace {
                agg.tweets as f64 / cfg.window_hours
            } else {
                agg.tweets as f64
            };
            let label = u8::from(protests.contains(&ProtestEvent { date, region }));
            rows.push(FeatureRow {
                region,
                date,
                features: [
                    f1,
                    global_neg_prev as f64,
                    stats.candidate_vote_pct,
                    f4,
                    f5,
                    f6,
                    lead_flag(stats, cfg.lead_threshold) as f64,
                ],
                label,
            });
        }
        date = date + Days::new(1);
    }
    FeatureMatrix::new(rows)
}

/// Pearson correlation coefficient; 0 by convention when either input is
/// constant. Inputs must be equal-length with at least two entries.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Schema(format!(
            "pearson length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Invalid("pearson needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// Pairwise Pearson coefficients over the seven feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub values: [[f64; FEATURE_COUNT]; FEATURE_COUNT],
}

pub fn correlation_matrix(matrix: &FeatureMatrix) -> Result<CorrelationMatrix> {
    let columns: Vec<Vec<f64>> = FeatureId::ALL.iter().map(|&id| matrix.column(id)).collect();
    let mut values = [[0.0; FEATURE_COUNT]; FEATURE_COUNT];
    for i in 0..FEATURE_COUNT {
        values[i][i] = 1.0;
        for j in (i + 1)..FEATURE_COUNT {
            let r = pearson(&columns[i], &columns[j])?;
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { values })
}

/// Drop the lower-significance member of every column pair correlated
/// beyond `corr_threshold`. `ranks[i]` is column i's significance rank,
/// 1 being the most significant. Returns retained column indices.
pub fn prune_correlated(
    columns: &[Vec<f64>],
    corr_threshold: f64,
    ranks: &[usize],
) -> Result<Vec<usize>> {
    if columns.len() != ranks.len() {
        return Err(Error::Schema(format!(
            "{} columns but {} ranks",
            columns.len(),
            ranks.len()
        )));
    }
    let mut order: Vec<usize> = (0..columns.len()).collect();
    order.sort_by_key(|&i| (ranks[i], i));

    let mut retained: Vec<usize> = Vec::new();
    for &candidate in &order {
        let mut keep = true;
        for &kept in &retained {
            if pearson(&columns[candidate], &columns[kept])?.abs() > corr_threshold {
                keep = false;
                break;
            }
        }
        if keep {
            retained.push(candidate);
        }
    }
    retained.sort_unstable();
    Ok(retained)
}

/// [`prune_correlated`] over a feature matrix, returning the surviving mask.
pub fn prune_matrix_features(
    matrix: &FeatureMatrix,
    corr_threshold: f64,
    ranks: &[usize; FEATURE_COUNT],
) -> Result<FeatureMask> {
    let columns: Vec<Vec<f64>> = FeatureId::ALL.iter().map(|&id| matrix.column(id)).collect();
    let retained = prune_correlated(&columns, corr_threshold, ranks)?;
    Ok(FeatureMask::from_ids(
        retained.into_iter().filter_map(FeatureId::from_index),
    ))
}
