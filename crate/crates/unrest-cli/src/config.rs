//! Run configuration: one optional TOML file plus flag overrides, with
//! flags winning.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;

use unrest_core::corpus::RelevanceRule;
use unrest_core::error::{Error, Result};
use unrest_core::featmat::{AnalysisConfig, BuildConfig, FeatureMask};
use unrest_core::models::{ClassifierKind, ModelConfig};
use unrest_core::region::RegionSet;
use unrest_core::selection::SelectionConfig;
use unrest_core::textfeat::{
    default_sentiment_lexicon, default_violent_lexicon, load_sentiment_lexicon,
    load_violent_lexicon, Gazetteer,
};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub corpus: Option<PathBuf>,
    pub protests: Option<PathBuf>,
    pub votes: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
    pub test_matrix: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub violent_lexicon: Option<PathBuf>,
    pub sentiment_lexicon: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub classifier: Option<String>,
    pub features: Option<String>,
    pub folds: Option<usize>,
    pub regions: Option<usize>,
    pub horizon_days: Option<u32>,
    pub tz_offset_hours: Option<i32>,
    pub lead_threshold: Option<u64>,
    pub corr_threshold: Option<f64>,
    pub hourly_pace: Option<bool>,
    pub signal_window_hours: Option<f64>,
    pub signal_threshold: Option<u64>,
    pub keywords: Option<Vec<String>>,
    pub start_date: Option<NaiveDate>,
    pub end_date: Option<NaiveDate>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// Flag-level overrides shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub classifier: Option<String>,
    pub features: Option<String>,
    pub folds: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub corpus: Option<PathBuf>,
    pub protests: Option<PathBuf>,
    pub votes: Option<PathBuf>,
    pub matrix: Option<PathBuf>,
    pub test_matrix: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub violent_lexicon: Option<PathBuf>,
    pub sentiment_lexicon: Option<PathBuf>,
    pub out: PathBuf,

    pub seed: u64,
    pub classifier: ClassifierKind,
    pub features: FeatureMask,
    pub folds: usize,
    pub regions: usize,
    pub horizon_days: u32,
    pub tz_offset_hours: i32,
    pub lead_threshold: u64,
    pub corr_threshold: f64,
    pub hourly_pace: bool,
    pub signal_window_hours: f64,
    pub signal_threshold: u64,
    pub keywords: Option<Vec<String>>,
    pub start_date: Option<NaiveDate>,
    pub end_date: Option<NaiveDate>,
}

impl Settings {
    pub fn resolve(file: FileConfig, flags: &Overrides) -> Result<Self> {
        let classifier: ClassifierKind = flags
            .classifier
            .clone()
            .or(file.run.classifier)
            .map_or(Ok(ClassifierKind::Logit), |s| s.parse())?;
        let features: FeatureMask = flags
            .features
            .clone()
            .or(file.run.features)
            .map_or(Ok(FeatureMask::all()), |s| s.parse())?;
        Ok(Settings {
            corpus: file.paths.corpus,
            protests: file.paths.protests,
            votes: file.paths.votes,
            matrix: file.paths.matrix,
            test_matrix: file.paths.test_matrix,
            gazetteer: file.paths.gazetteer,
            violent_lexicon: file.paths.violent_lexicon,
            sentiment_lexicon: file.paths.sentiment_lexicon,
            out: flags
                .out
                .clone()
                .or(file.paths.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            seed: flags.seed.or(file.run.seed).unwrap_or(42),
            classifier,
            features,
            folds: flags.folds.or(file.run.folds).unwrap_or(10),
            regions: file.run.regions.unwrap_or(50),
            horizon_days: file.run.horizon_days.unwrap_or(7),
            tz_offset_hours: file.run.tz_offset_hours.unwrap_or(0),
            lead_threshold: file.run.lead_threshold.unwrap_or(100_000),
            corr_threshold: file.run.corr_threshold.unwrap_or(0.8),
            hourly_pace: file.run.hourly_pace.unwrap_or(false),
            signal_window_hours: file.run.signal_window_hours.unwrap_or(1.0),
            signal_threshold: file.run.signal_threshold.unwrap_or(10),
            keywords: file.run.keywords,
            start_date: file.run.start_date,
            end_date: file.run.end_date,
        })
    }

    pub fn region_set(&self) -> RegionSet {
        RegionSet::us_states_subset(self.regions)
    }

    pub fn relevance_rule(&self) -> RelevanceRule {
        RelevanceRule::default()
    }

    pub fn analysis_config(&self) -> AnalysisConfig {
        AnalysisConfig {
            horizon_days: self.horizon_days,
            tz_offset_hours: self.tz_offset_hours,
        }
    }

    pub fn build_config(&self) -> BuildConfig {
        BuildConfig {
            lead_threshold: self.lead_threshold,
            hourly_pace: self.hourly_pace,
            window_hours: 24.0,
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        let mut cfg = ModelConfig::default();
        cfg.svm.seed = self.seed;
        cfg
    }

    pub fn selection_config(&self) -> SelectionConfig {
        SelectionConfig {
            folds: self.folds,
            seed: self.seed,
            models: self.model_config(),
            ..SelectionConfig::default()
        }
    }

    pub fn gazetteer(&self) -> Result<Gazetteer> {
        match &self.gazetteer {
            Some(path) => Gazetteer::from_csv_path(path),
            None => Ok(Gazetteer::builtin()),
        }
    }

    pub fn violent_lexicon(&self) -> Result<HashSet<String>> {
        match &self.violent_lexicon {
            Some(path) => load_violent_lexicon(path),
            None => Ok(default_violent_lexicon()),
        }
    }

    pub fn sentiment_lexicon(&self) -> Result<std::collections::HashMap<String, f64>> {
        match &self.sentiment_lexicon {
            Some(path) => load_sentiment_lexicon(path),
            None => Ok(default_sentiment_lexicon()),
        }
    }

    pub fn keywords_set(&self) -> HashSet<String> {
        match &self.keywords {
            Some(list) => list.iter().map(|k| k.to_lowercase()).collect(),
            None => unrest_core::signals::default_keywords(),
        }
    }

    pub fn require(&self, field: Option<&PathBuf>, what: &str, flag: &str) -> Result<PathBuf> {
        field.cloned().ok_or_else(|| {
            Error::Invalid(format!(
                "{what} not set; pass {flag} or add it to the config file"
            ))
        })
    }
}
