//! Implementations of the CLI subcommands. Every command reads its
//! declared inputs, writes its artifacts under the output directory, and
//! leaves its inputs untouched.

use std::collections::BTreeSet;
use std::path::PathBuf;

use chrono::{Duration, NaiveDate};

use unrest_core::corpus::{self, ProtestEvent};
use unrest_core::datagen::{generate, GenConfig};
use unrest_core::error::{Error, Result};
use unrest_core::evaluation::{
    format_report_grid, progressive_run, single_feature_baselines, transfer_run, write_roc_csv,
    RunOutcome, RunReport,
};
use unrest_core::featmat::{
    analyze_corpus, build_matrix, prune_matrix_features, FeatureId, FeatureMask, FeatureMatrix,
    FEATURE_COUNT,
};
use unrest_core::models::fit_with_cutoff;
use unrest_core::selection::{fold_inclusion, wrapper_select, SelectionReport};
use unrest_core::signals::{scan_signals, trending_hashtags, write_hashtags_csv, write_signals_csv};

use crate::config::Settings;

fn ensure_out(settings: &Settings) -> Result<()> {
    std::fs::create_dir_all(&settings.out)?;
    Ok(())
}

pub fn simulate(settings: &Settings, preset: &str, gen_config: Option<PathBuf>, days: Option<u32>) -> Result<()> {
    ensure_out(settings)?;
    let mut config = match gen_config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)?;
            serde_json::from_str::<GenConfig>(&text)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?
        }
        None => {
            let mut config = match preset {
                "strong" => GenConfig::strong_signal(settings.seed),
                "event" => GenConfig::event_driven(settings.seed),
                other => {
                    return Err(Error::Invalid(format!(
                        "unknown preset {other:?}, expected strong|event"
                    )))
                }
            };
            config.regions = settings.regions;
            config
        }
    };
    config.seed = settings.seed;
    if let Some(days) = days {
        config.days = days;
    }

    let data = generate(&config)?;
    let paths = data.write_files(&settings.out)?;
    log::info!("seed {} produced {} tweets", config.seed, data.tweets.len());
    let last_day = config.start_date + chrono::Days::new(config.days as u64 - 1);
    println!(
        "simulate: seed={} regions={} days={}..{} (+{} warmup) tweets={} protests={}",
        config.seed,
        config.regions,
        config.start_date,
        last_day,
        config.warmup_days,
        data.tweets.len(),
        data.protests.len()
    );
    println!(
        "wrote {} {} {}",
        paths.tweets.display(),
        paths.protests.display(),
        paths.votes.display()
    );
    Ok(())
}

pub fn ingest(settings: &Settings) -> Result<()> {
    ensure_out(settings)?;
    let corpus_path = settings.require(settings.corpus.as_ref(), "corpus path", "--corpus")?;
    let region_set = settings.region_set();
    let (records, stats) = corpus::ingest(&corpus_path, &region_set)?;
    let cleansed = corpus::cleanse(&records, &settings.relevance_rule());
    let out_path = settings.out.join("cleansed.jsonl");
    corpus::write_jsonl(&cleansed, &out_path)?;
    println!(
        "ingest: lines={} loaded={} malformed={} duplicates={} cleansed={}",
        stats.lines, stats.loaded, stats.skipped_malformed, stats.skipped_duplicate,
        cleansed.len()
    );
    println!("wrote {}", out_path.display());
    Ok(())
}

fn load_matrix(settings: &Settings) -> Result<FeatureMatrix> {
    let path = settings.require(settings.matrix.as_ref(), "feature matrix", "--matrix")?;
    FeatureMatrix::read_csv(&path)
}

fn truth_for(settings: &Settings, matrix: &FeatureMatrix) -> Result<BTreeSet<ProtestEvent>> {
    match &settings.protests {
        Some(path) => corpus::load_ground_truth(path),
        None => Ok(matrix.truth()),
    }
}

fn range_for(
    settings: &Settings,
    matrix: &FeatureMatrix,
) -> Result<(NaiveDate, NaiveDate)> {
    let dates = matrix.dates();
    if dates.len() < 2 {
        return Err(Error::Invalid(
            "matrix needs at least two days: one to train on, one to predict".into(),
        ));
    }
    // default: predict from the second day so the first day trains
    let start = settings.start_date.unwrap_or(dates[1]);
    let end = settings.end_date.unwrap_or(*dates.last().expect("nonempty"));
    Ok((start, end))
}

pub fn featurize(settings: &Settings) -> Result<()> {
    ensure_out(settings)?;
    let corpus_path = settings.require(settings.corpus.as_ref(), "corpus path", "--corpus")?;
    let protests_path = settings.require(settings.protests.as_ref(), "protests path", "--protests")?;
    let votes_path = settings.require(settings.votes.as_ref(), "votes path", "--votes")?;

    let region_set = settings.region_set();
    let (records, stats) = corpus::ingest(&corpus_path, &region_set)?;
    let cleansed = corpus::cleanse(&records, &settings.relevance_rule());
    if cleansed.is_empty() {
        return Err(Error::Invalid("no records survive cleansing".into()));
    }
    log::info!(
        "featurize: {} records loaded, {} after cleansing ({} malformed lines skipped)",
        stats.loaded,
        cleansed.len(),
        stats.skipped_malformed
    );

    let protests = corpus::load_ground_truth(&protests_path)?;
    let election = corpus::load_election(&votes_path, &region_set)?;
    let analyses = analyze_corpus(
        &cleansed,
        &settings.gazetteer()?,
        &settings.violent_lexicon()?,
        &settings.sentiment_lexicon()?,
        &settings.analysis_config(),
    )?;

    let tz = settings.tz_offset_hours;
    let first = cleansed.iter().map(|r| r.day(tz)).min().expect("nonempty");
    let last = cleansed.iter().map(|r| r.day(tz)).max().expect("nonempty");
    let range = (
        settings.start_date.unwrap_or(first),
        settings.end_date.unwrap_or(last),
    );

    let matrix = build_matrix(
        &analyses,
        &election,
        &protests,
        &region_set,
        range,
        &settings.build_config(),
    )?;
    let out_path = settings.out.join("features.csv");
    matrix.write_csv(&out_path)?;
    println!(
        "featurize: {} rows ({} regions x {} days)",
        matrix.rows().len(),
        matrix.regions().len(),
        matrix.dates().len()
    );
    println!("wrote {}", out_path.display());
    Ok(())
}

pub fn select(settings: &Settings) -> Result<()> {
    ensure_out(settings)?;
    let matrix = load_matrix(settings)?;
    let (rows, labels) = matrix.project(FeatureMask::all(), |_| true);
    let cfg = settings.selection_config();
    let best = wrapper_select(&rows, &labels, settings.classifier, &cfg)?;
    let inclusion = fold_inclusion(&rows, &labels, settings.classifier, &cfg)?;
    let report = SelectionReport::new(settings.classifier, &cfg, &best, &inclusion);
    let out_path = settings.out.join("selection_report.json");
    report.save(&out_path)?;
    println!(
        "select: classifier={} best={} cv_accuracy={:.4}",
        settings.classifier, best.subset, best.cv_accuracy
    );
    for (id, pct) in FeatureId::ALL.iter().zip(&report.inclusion_pct) {
        println!("  {id}: {pct:.0}% of folds");
    }

    // drop correlated features, keeping the higher-inclusion one of a pair
    let mut order: Vec<usize> = (0..FEATURE_COUNT).collect();
    order.sort_by(|&a, &b| {
        inclusion.fractions[b]
            .total_cmp(&inclusion.fractions[a])
            .then(a.cmp(&b))
    });
    let mut ranks = [0usize; FEATURE_COUNT];
    for (rank, &feature) in order.iter().enumerate() {
        ranks[feature] = rank + 1;
    }
    let retained = prune_matrix_features(&matrix, settings.corr_threshold, &ranks)?;
    println!(
        "prune: |pearson| > {} retains {}",
        settings.corr_threshold, retained
    );
    println!("wrote {}", out_path.display());
    Ok(())
}

pub fn train(settings: &Settings) -> Result<()> {
    ensure_out(settings)?;
    let matrix = load_matrix(settings)?;
    let (rows, labels) = matrix.project(settings.features, |_| true);
    let model = fit_with_cutoff(settings.classifier, &rows, &labels, &settings.model_config())?;
    let out_path = settings.out.join("model.json");
    model.save(&out_path)?;
    println!(
        "train: classifier={} features={} rows={} cutoff={:.4} converged={}",
        settings.classifier,
        settings.features,
        rows.len(),
        model.cutoff,
        model.converged
    );
    println!("wrote {}", out_path.display());
    Ok(())
}

fn write_run_outputs(settings: &Settings, outcome: &RunOutcome, prefix: &str) -> Result<()> {
    let report = RunReport::new(settings.classifier, settings.features, settings.seed, outcome);
    let report_path = settings.out.join(format!("{prefix}report.json"));
    let roc_path = settings.out.join(format!("{prefix}roc.csv"));
    report.save(&report_path)?;
    write_roc_csv(&outcome.roc, &roc_path)?;
    println!("wrote {}", report_path.display());
    println!("wrote {}", roc_path.display());
    Ok(())
}

pub fn evaluate(settings: &Settings) -> Result<()> {
    ensure_out(settings)?;
    let matrix = load_matrix(settings)?;
    let truth = truth_for(settings, &matrix)?;
    let (start, end) = range_for(settings, &matrix)?;
    let outcome = progressive_run(
        &matrix,
        &truth,
        settings.classifier,
        settings.features,
        start,
        end,
        &settings.model_config(),
    )?;
    println!(
        "evaluate: classifier={} features={} seed={} auc={:.4}",
        settings.classifier, settings.features, settings.seed, outcome.roc.auc
    );
    print!("{}", format_report_grid(&outcome.reports));
    write_run_outputs(settings, &outcome, "")
}

pub fn baselines(settings: &Settings, features: Option<String>) -> Result<()> {
    ensure_out(settings)?;
    let matrix = load_matrix(settings)?;
    let truth = truth_for(settings, &matrix)?;
    let (start, end) = range_for(settings, &matrix)?;
    let ids: Vec<FeatureId> = match features {
        Some(list) => list.parse::<FeatureMask>()?.ids().collect(),
        None => vec![FeatureId::F1, FeatureId::F2, FeatureId::F3],
    };
    let results = single_feature_baselines(
        &matrix,
        &truth,
        &ids,
        settings.classifier,
        start,
        end,
        &settings.model_config(),
    )?;

    let mut reports = Vec::new();
    for (id, outcome) in &results {
        println!("baseline {id}: auc={:.4}", outcome.roc.auc);
        print!("{}", format_report_grid(&outcome.reports));
        reports.push(RunReport::new(
            settings.classifier,
            FeatureMask::single(*id),
            settings.seed,
            outcome,
        ));
    }
    let out_path = settings.out.join("baselines.json");
    let json = serde_json::to_string_pretty(&reports)
        .map_err(|e| Error::Internal(format!("serializing baselines: {e}")))?;
    std::fs::write(&out_path, json + "\n")?;
    println!("wrote {}", out_path.display());
    Ok(())
}

pub fn transfer(settings: &Settings) -> Result<()> {
    ensure_out(settings)?;
    let train_matrix = load_matrix(settings)?;
    let test_path = settings.require(
        settings.test_matrix.as_ref(),
        "test feature matrix",
        "--test-matrix",
    )?;
    let test_matrix = FeatureMatrix::read_csv(&test_path)?;
    let (outcome, model) = transfer_run(
        &train_matrix,
        &test_matrix,
        settings.classifier,
        settings.features,
        &settings.model_config(),
    )?;
    println!(
        "transfer: classifier={} features={} train_rows={} auc={:.4}",
        settings.classifier,
        settings.features,
        train_matrix.rows().len(),
        outcome.roc.auc
    );
    print!("{}", format_report_grid(&outcome.reports));
    model.save(&settings.out.join("transfer_model.json"))?;
    write_run_outputs(settings, &outcome, "transfer_")
}

pub fn watch(settings: &Settings) -> Result<()> {
    ensure_out(settings)?;
    let corpus_path = settings.require(settings.corpus.as_ref(), "corpus path", "--corpus")?;
    let region_set = settings.region_set();
    let (records, _) = corpus::ingest(&corpus_path, &region_set)?;
    let keywords = settings.keywords_set();
    let window = Duration::seconds((settings.signal_window_hours * 3600.0).round() as i64);
    let triggers = scan_signals(&records, &keywords, window, settings.signal_threshold)?;

    let signals_path = settings.out.join("signals.csv");
    write_signals_csv(&triggers, &signals_path)?;
    println!(
        "watch: {} windows scanned, {} fired",
        triggers.len(),
        triggers.iter().filter(|t| t.fired).count()
    );
    println!("wrote {}", signals_path.display());

    if let Some(first_fired) = triggers.iter().find(|t| t.fired) {
        let ranking = trending_hashtags(&records, first_fired, &keywords, 10);
        let hashtags_path = settings.out.join("hashtags.csv");
        write_hashtags_csv(&ranking, &hashtags_path)?;
        println!(
            "first fired window starts {}; top hashtag {:?}",
            first_fired.window_start,
            ranking.entries.first().map(|e| e.0.as_str()).unwrap_or("-")
        );
        println!("wrote {}", hashtags_path.display());
    } else {
        println!("no window fired; hashtags.csv not written");
    }
    Ok(())
}

pub fn roc_only(settings: &Settings) -> Result<()> {
    ensure_out(settings)?;
    let matrix = load_matrix(settings)?;
    let truth = truth_for(settings, &matrix)?;
    let (start, end) = range_for(settings, &matrix)?;
    let outcome = progressive_run(
        &matrix,
        &truth,
        settings.classifier,
        settings.features,
        start,
        end,
        &settings.model_config(),
    )?;
    let roc_path = settings.out.join("roc.csv");
    write_roc_csv(&outcome.roc, &roc_path)?;
    println!("roc: auc={:.6}", outcome.roc.auc);
    println!("wrote {}", roc_path.display());
    Ok(())
}
