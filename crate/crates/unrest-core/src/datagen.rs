//! Seeded synthetic corpus and ground-truth generator. Tweets are drawn
//! from templates that embed real mention phrasings, sentiment terms, and
//! violent words, so the extraction pipeline can recover the planted
//! signal; protest labels are Bernoulli draws from a logistic model over
//! the same quantities the feature matrix later reconstructs.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Days, NaiveDate, TimeZone, Utc};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{write_jsonl, ElectionStats, ProtestEvent, TweetRecord};
use crate::error::{Error, Result};
use crate::region::{RegionCode, US_STATES};

/// Weights of the latent protest-probability model. Tweet-derived terms
/// apply to z-scores over all (region, day) cells: lagged tweet volume,
/// mention volume targeting the cell, and the lagged average polarity of
/// negative tweets (so an angrier region needs a negative weight to
/// protest more). vote_pct applies to the raw share; a negative value
/// plants the protests-where-they-lost signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenWeights {
    pub bias: f64,
    pub tweet_volume: f64,
    pub mentions: f64,
    pub negativity: f64,
    pub vote_pct: f64,
    pub lead_flag: f64,
}

impl GenWeights {
    pub fn zero() -> Self {
        GenWeights {
            bias: 0.0,
            tweet_volume: 0.0,
            mentions: 0.0,
            negativity: 0.0,
            vote_pct: 0.0,
            lead_flag: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    pub regions: usize,
    /// Days carrying labels and matrix rows.
    pub days: u32,
    /// Extra days of pre-event chatter before `start_date`, so the first
    /// labeled day has real lagged features.
    #[serde(default = "default_warmup_days")]
    pub warmup_days: u32,
    pub start_date: NaiveDate,
    /// Expected corpus-wide tweets per day.
    pub base_daily_tweets: usize,
    pub protest_logit_weights: GenWeights,
    pub mention_rate: f64,
    pub negative_rate: f64,
    pub violent_rate: f64,
    pub retweet_rate: f64,
    /// Fraction of tweets emitted without a geo tag (cleansing fodder).
    pub no_geo_rate: f64,
    /// Fraction of advertisement tweets (relevance-rule fodder).
    pub spam_rate: f64,
    /// Per-region vote shares; drawn uniformly in [0.25, 0.75] when absent.
    pub vote_pcts: Option<Vec<f64>>,
    /// Per-region lead flags; drawn Bernoulli(0.35) when absent.
    pub lead_flags: Option<Vec<u8>>,
    pub lead_threshold: u64,
}

fn default_warmup_days() -> u32 {
    1
}

impl GenConfig {
    /// Strong planted signal at desk scale: 50 regions x 7 days, roughly
    /// fifty thousand tweets. Three warmup days put every labeled day in
    /// the same mention-accumulation steady state.
    pub fn strong_signal(seed: u64) -> Self {
        GenConfig {
            seed,
            regions: 50,
            days: 7,
            warmup_days: 3,
            start_date: NaiveDate::from_ymd_opt(2016, 11, 10).unwrap(),
            base_daily_tweets: 5000,
            protest_logit_weights: GenWeights {
                bias: -2.3,
                tweet_volume: 1.8,
                mentions: 4.0,
                negativity: -2.2,
                vote_pct: -4.5,
                lead_flag: 1.8,
            },
            mention_rate: 0.14,
            negative_rate: 0.25,
            violent_rate: 0.10,
            retweet_rate: 0.30,
            no_geo_rate: 0.05,
            spam_rate: 0.03,
            vote_pcts: None,
            lead_flags: None,
            lead_threshold: 100_000,
        }
    }

    /// Protest probability dominated by the event-specific features, for
    /// measuring the lift of F3/F7 over the tweet-derived predictors.
    pub fn event_driven(seed: u64) -> Self {
        GenConfig {
            base_daily_tweets: 4000,
            protest_logit_weights: GenWeights {
                bias: 0.2,
                tweet_volume: 0.4,
                mentions: 0.8,
                negativity: -0.2,
                vote_pct: -6.0,
                lead_flag: 1.5,
            },
            ..GenConfig::strong_signal(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.regions == 0 || self.regions > US_STATES.len() {
            return Err(Error::Invalid(format!(
                "regions must be 1..={}, got {}",
                US_STATES.len(),
                self.regions
            )));
        }
        if self.days < 2 {
            return Err(Error::Invalid("need at least 2 days".into()));
        }
        for (name, rate) in [
            ("mention_rate", self.mention_rate),
            ("negative_rate", self.negative_rate),
            ("violent_rate", self.violent_rate),
            ("retweet_rate", self.retweet_rate),
            ("no_geo_rate", self.no_geo_rate),
            ("spam_rate", self.spam_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Invalid(format!("{name} must be in [0,1], got {rate}")));
            }
        }
        for (name, v) in [
            ("vote_pcts", self.vote_pcts.as_ref().map(Vec::len)),
            (
                "lead_flags",
                self.lead_flags.as_ref().map(Vec::len),
            ),
        ] {
            if let Some(len) = v {
                if len != self.regions {
                    return Err(Error::Invalid(format!(
                        "{name} has {len} entries for {} regions",
                        self.regions
                    )));
                }
            }
        }
        if let Some(pcts) = &self.vote_pcts {
            if pcts.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Invalid("vote_pcts must lie in [0,1]".into()));
            }
        }
        Ok(())
    }
}

/// Everything one simulation produces.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedData {
    pub tweets: Vec<TweetRecord>,
    pub protests: BTreeSet<ProtestEvent>,
    pub election: Vec<ElectionStats>,
    /// Latent per-cell protest probabilities, for diagnostics; the files
    /// never carry these.
    pub latent: BTreeMap<(NaiveDate, RegionCode), f64>,
}

impl GeneratedData {
    /// Write `tweets.jsonl`, `protests.csv`, and `votes.csv` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<GeneratedPaths> {
        std::fs::create_dir_all(dir)?;
        let paths = GeneratedPaths {
            tweets: dir.join("tweets.jsonl"),
            protests: dir.join("protests.csv"),
            votes: dir.join("votes.csv"),
        };
        write_jsonl(&self.tweets, &paths.tweets)?;

        let mut protests = String::from("date,state\n");
        for event in &self.protests {
            protests.push_str(&format!("{},{}\n", event.date, event.region));
        }
        std::fs::write(&paths.protests, protests)?;

        let mut votes = String::from("state,candidate_vote_pct,max_opposition_county_lead\n");
        for stats in &self.election {
            votes.push_str(&format!(
                "{},{:.6},{}\n",
                stats.region, stats.candidate_vote_pct, stats.max_opposition_county_lead
            ));
        }
        std::fs::write(&paths.votes, votes)?;
        Ok(paths)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedPaths {
    pub tweets: PathBuf,
    pub protests: PathBuf,
    pub votes: PathBuf,
}

const CAMPAIGN_TAG: &str = "#NotMyPresident";

// split by polarity so regional anger levels move the realized average
const STRONG_NEGATIVE_WORDS: [(&str, f64); 6] = [
    ("furious", -0.9),
    ("hate", -0.9),
    ("outraged", -0.8),
    ("devastated", -0.8),
    ("appalled", -0.8),
    ("livid", -0.8),
];
const MILD_NEGATIVE_WORDS: [(&str, f64); 6] = [
    ("worried", -0.4),
    ("sad", -0.4),
    ("upset", -0.5),
    ("disappointed", -0.5),
    ("scared", -0.5),
    ("unfair", -0.5),
];
const VIOLENT_WORDS: [&str; 6] = ["riot", "burn", "smash", "clash", "fight", "torch"];

struct Templates {
    mention: Vec<String>,
    filler: Vec<String>,
    spam: Vec<String>,
}

fn load_templates() -> Templates {
    let mut templates = Templates {
        mention: Vec::new(),
        filler: Vec::new(),
        spam: Vec::new(),
    };
    for line in include_str!("../data/tweet_templates.txt").lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((class, body)) = line.split_once('|') else {
            continue;
        };
        let body = body.to_string();
        match class {
            "mention" => templates.mention.push(body),
            "filler" => templates.filler.push(body),
            "spam" => templates.spam.push(body),
            _ => {}
        }
    }
    templates
}

/// Primary city per region, first gazetteer entry wins.
fn city_map() -> BTreeMap<RegionCode, String> {
    let mut map = BTreeMap::new();
    for line in include_str!("../data/gazetteer.csv").lines().skip(1) {
        if let Some((city, state)) = line.rsplit_once(',') {
            if let Ok(region) = state.trim().parse::<RegionCode>() {
                map.entry(region).or_insert_with(|| city.trim().to_string());
            }
        }
    }
    map
}

fn ordinal(day: u32) -> String {
    let suffix = match (day % 10, day % 100) {
        (1, 11) | (2, 12) | (3, 13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{day}{suffix}")
}

fn month_name(month: u32) -> &'static str {
    [
        "january", "february", "march", "april", "may", "june", "july", "august", "september",
        "october", "november", "december",
    ][(month - 1) as usize]
}

fn weekday_name(date: NaiveDate) -> &'static str {
    [
        "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
    ][date.weekday().num_days_from_monday() as usize]
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn zscores(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-12 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / std).collect()
}

/// Generate the corpus, ground truth, and election stats for one config.
/// Identical configs produce identical output, byte for byte.
pub fn generate(config: &GenConfig) -> Result<GeneratedData> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let templates = load_templates();
    let cities = city_map();

    let regions: Vec<RegionCode> = US_STATES
        .iter()
        .take(config.regions)
        .map(|s| s.parse().expect("valid builtin code"))
        .collect();
    let warmup = config.warmup_days as usize;
    let label_days = config.days as usize;
    let total_days = warmup + label_days;
    let gen_dates: Vec<NaiveDate> = (0..total_days)
        .map(|g| config.start_date - Days::new(warmup as u64) + Days::new(g as u64))
        .collect();

    let vote_pcts: Vec<f64> = match &config.vote_pcts {
        Some(v) => v.clone(),
        None => (0..config.regions).map(|_| rng.gen_range(0.25..0.75)).collect(),
    };
    let lead_flags: Vec<u8> = match &config.lead_flags {
        Some(v) => v.clone(),
        None => (0..config.regions)
            .map(|_| u8::from(rng.gen_bool(0.35)))
            .collect(),
    };
    let election: Vec<ElectionStats> = regions
        .iter()
        .enumerate()
        .map(|(i, &region)| {
            let lead = if lead_flags[i] == 1 {
                rng.gen_range(config.lead_threshold..config.lead_threshold * 3)
            } else {
                rng.gen_range(0..config.lead_threshold)
            };
            ElectionStats {
                region,
                candidate_vote_pct: vote_pcts[i],
                max_opposition_county_lead: lead,
            }
        })
        .collect();

    let activity: Vec<f64> = (0..config.regions).map(|_| rng.gen_range(0.5..1.5)).collect();
    // regional anger level: probability a negative word is drawn from the
    // strong-polarity pool, which moves the realized average polarity
    let anger: Vec<f64> = (0..config.regions).map(|_| rng.gen_range(0.15..0.95)).collect();
    // mild day-level drift: cross-region spread carries the signal, and a
    // large common day component would swing base rates between the
    // progressive refits
    let day_factor: Vec<f64> = (0..total_days).map(|_| rng.gen_range(0.9..1.1)).collect();

    // per-(region, generation day) tallies mirrored by the featurizer
    let mut volume = vec![vec![0u64; total_days]; config.regions];
    let mut negatives = vec![vec![0u64; total_days]; config.regions];
    let mut negative_polarity = vec![vec![0.0f64; total_days]; config.regions];
    let mut mentions_for = vec![vec![0u64; total_days]; config.regions];

    let mut tweets = Vec::new();
    let mut counter = 0u64;
    let per_region_base = config.base_daily_tweets as f64 / config.regions as f64;

    for (d, &date) in gen_dates.iter().enumerate() {
        for (r, &region) in regions.iter().enumerate() {
            let n = (per_region_base * activity[r] * day_factor[d] * rng.gen_range(0.8..1.2))
                .round()
                .max(1.0) as usize;
            for _ in 0..n {
                counter += 1;
                let seconds = rng.gen_range(0..86_400);
                let created_at = Utc
                    .from_utc_datetime(&date.and_hms_opt(0, 0, 0).expect("midnight"))
                    + chrono::Duration::seconds(seconds);
                let id = format!("t{counter:07}");
                let city = cities
                    .get(&region)
                    .cloned()
                    .unwrap_or_else(|| "downtown".to_string());

                if rng.gen_bool(config.spam_rate) {
                    let template = &templates.spam[rng.gen_range(0..templates.spam.len())];
                    tweets.push(TweetRecord {
                        id,
                        created_at,
                        region: Some(region),
                        text: template.replace("{tag}", CAMPAIGN_TAG),
                        is_retweet: false,
                    });
                    continue;
                }

                let no_geo = rng.gen_bool(config.no_geo_rate);

                // mention tweets plant the (region, future day) signal the
                // extractor later recovers
                let mut target: Option<usize> = None;
                if rng.gen_bool(config.mention_rate) && d + 1 < total_days {
                    let max_ahead = (total_days - 1 - d).min(3);
                    let roll: f64 = rng.gen();
                    let ahead = if roll < 0.7 || max_ahead == 1 {
                        1
                    } else if roll < 0.9 || max_ahead == 2 {
                        2
                    } else {
                        3
                    };
                    target = Some(d + ahead);
                }

                let mut text = match target {
                    Some(t) => {
                        let target_date = gen_dates[t];
                        let kind: f64 = rng.gen();
                        let when = if t == d + 1 && kind < 0.4 {
                            "tomorrow".to_string()
                        } else if kind < 0.75 {
                            format!("on {}", weekday_name(target_date))
                        } else {
                            format!(
                                "{} {}",
                                month_name(target_date.month()),
                                ordinal(target_date.day())
                            )
                        };
                        let template = &templates.mention[rng.gen_range(0..templates.mention.len())];
                        template
                            .replace("{city}", &city)
                            .replace("{citytag}", &format!("#{}", city.replace(' ', "")))
                            .replace("{when}", &when)
                    }
                    None => {
                        let template = &templates.filler[rng.gen_range(0..templates.filler.len())];
                        template.replace("{city}", &city)
                    }
                };
                text = text.replace("{tag}", CAMPAIGN_TAG);

                let negative = rng.gen_bool(config.negative_rate);
                let mut tweet_polarity = 0.0;
                if negative {
                    let word_count = rng.gen_range(1..=3);
                    for _ in 0..word_count {
                        let (word, polarity) = if rng.gen_bool(anger[r]) {
                            STRONG_NEGATIVE_WORDS[rng.gen_range(0..STRONG_NEGATIVE_WORDS.len())]
                        } else {
                            MILD_NEGATIVE_WORDS[rng.gen_range(0..MILD_NEGATIVE_WORDS.len())]
                        };
                        text.push(' ');
                        text.push_str(word);
                        tweet_polarity += polarity;
                    }
                    tweet_polarity /= word_count as f64;
                }
                if rng.gen_bool(config.violent_rate) {
                    for _ in 0..rng.gen_range(1..=2) {
                        text.push(' ');
                        text.push_str(VIOLENT_WORDS[rng.gen_range(0..VIOLENT_WORDS.len())]);
                    }
                }
                let is_retweet = rng.gen_bool(config.retweet_rate);

                if !no_geo {
                    volume[r][d] += 1;
                    if negative {
                        negatives[r][d] += 1;
                        negative_polarity[r][d] += tweet_polarity;
                    }
                    if let Some(t) = target {
                        mentions_for[r][t] += 1;
                    }
                }
                tweets.push(TweetRecord {
                    id,
                    created_at,
                    region: (!no_geo).then_some(region),
                    text,
                    is_retweet,
                });
            }
        }
    }

    // labels only for the matrix days: logistic over the same lagged
    // quantities the featurizer reconstructs, z-scored across all labeled
    // (region, day) cells to match the standardize-then-fit convention
    let weights = &config.protest_logit_weights;
    let cell = |r: usize, m: usize| r * label_days + m;
    let mut lagged_volume = vec![0.0; config.regions * label_days];
    let mut mention_volume = vec![0.0; config.regions * label_days];
    let mut negativity = vec![0.0; config.regions * label_days];
    for r in 0..config.regions {
        for m in 0..label_days {
            let g = m + warmup;
            mention_volume[cell(r, m)] = mentions_for[r][g] as f64;
            if g > 0 {
                lagged_volume[cell(r, m)] = volume[r][g - 1] as f64;
                if negatives[r][g - 1] > 0 {
                    // the same quantity the featurizer reports as F4
                    negativity[cell(r, m)] =
                        negative_polarity[r][g - 1] / negatives[r][g - 1] as f64;
                }
            }
        }
    }
    let z_volume = zscores(&lagged_volume);
    let z_mentions = zscores(&mention_volume);
    let z_negativity = zscores(&negativity);

    let mut protests = BTreeSet::new();
    let mut latent = BTreeMap::new();
    for m in 0..label_days {
        let date = gen_dates[m + warmup];
        for (r, &region) in regions.iter().enumerate() {
            let score = weights.bias
                + weights.tweet_volume * z_volume[cell(r, m)]
                + weights.mentions * z_mentions[cell(r, m)]
                + weights.negativity * z_negativity[cell(r, m)]
                + weights.vote_pct * vote_pcts[r]
                + weights.lead_flag * f64::from(lead_flags[r]);
            let probability = sigmoid(score);
            latent.insert((date, region), probability);
            if rng.gen_bool(probability) {
                protests.insert(ProtestEvent { date, region });
            }
        }
    }

    Ok(GeneratedData {
        tweets,
        protests,
        election,
        latent,
    })
}

/// Synthetic tabular fixture: `features` columns of standard normals with
/// the `informative` column shifted by `separation` for positive rows.
/// Labels are Bernoulli(0.3).
pub fn planted_matrix(
    seed: u64,
    rows: usize,
    features: usize,
    informative: usize,
    separation: f64,
) -> (Vec<Vec<f64>>, Vec<u8>) {
    assert!(informative < features);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = move |rng: &mut ChaCha8Rng| -> f64 {
        // Box-Muller from two uniforms
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut matrix = Vec::with_capacity(rows);
    let mut labels = Vec::with_capacity(rows);
    for _ in 0..rows {
        let y = u8::from(rng.gen_bool(0.3));
        let mut row: Vec<f64> = (0..features).map(|_| normal(&mut rng)).collect();
        row[informative] += separation * f64::from(y);
        matrix.push(row);
        labels.push(y);
    }
    (matrix, labels)
}
