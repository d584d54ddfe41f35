//! Command-line front end: corpus synthesis, feature extraction, training,
//! cross-validation reports, unlabeled-pool ranking, and analysis tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use botprof::error::AppError;
use botprof::io;
use botprof::pipeline;
use botprof::synth;
use botprof_core::classify::{ClassWeightMode, Family, HyperParams};
use botprof_core::eval::RankedPrediction;
use botprof_core::types::{ClassLabel, Corpus, TimeWindow};

#[derive(Parser)]
#[command(name = "botprof", version, about = "Social-media bot profiling pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CorpusArgs {
    /// Profile records, one JSON object per line.
    #[arg(long, env = "BOTPROF_PROFILES")]
    profiles: PathBuf,
    /// Tweet records.
    #[arg(long, env = "BOTPROF_TWEETS")]
    tweets: PathBuf,
    /// Follow snapshots (optional).
    #[arg(long, env = "BOTPROF_FOLLOWS")]
    follows: Option<PathBuf>,
    /// Class labels (optional).
    #[arg(long, env = "BOTPROF_LABELS")]
    labels: Option<PathBuf>,
}

impl CorpusArgs {
    fn load(&self) -> Result<Corpus, AppError> {
        io::load_corpus(
            &self.profiles,
            &self.tweets,
            self.follows.as_deref(),
            self.labels.as_deref(),
        )
    }
}

#[derive(Args)]
struct WindowArgs {
    /// Window start, UTC epoch milliseconds. Without it, durations anchor
    /// at the corpus end.
    #[arg(long, env = "BOTPROF_WINDOW_START")]
    window_start: Option<i64>,
    /// Window length: integer days, or e.g. `1w`, `2w`, `1m`, `2m`, `4m`.
    #[arg(long, env = "BOTPROF_WINDOW_DURATION")]
    window_duration: Option<String>,
}

/// `1w`/`2w`/`1m`-style duration spec to days.
fn parse_duration_days(spec: &str) -> Result<u32, AppError> {
    let spec = spec.trim();
    let usage =
        || AppError::Usage(format!("bad duration {spec:?}; use days, or Nd / Nw / Nm"));
    if let Ok(days) = spec.parse::<u32>() {
        return Ok(days);
    }
    let (head, unit) = spec.split_at(spec.len().saturating_sub(1));
    let n: u32 = head.parse().map_err(|_| usage())?;
    let factor = match unit {
        "d" => 1,
        "w" => 7,
        "m" => 30,
        _ => return Err(usage()),
    };
    Ok(n * factor)
}

impl WindowArgs {
    fn resolve(&self, corpus: &Corpus) -> Result<Option<TimeWindow>, AppError> {
        let Some(duration) = &self.window_duration else {
            if self.window_start.is_some() {
                return Err(AppError::Usage(
                    "--window-start requires --window-duration".to_string(),
                ));
            }
            return Ok(None);
        };
        let duration_ms = parse_duration_days(duration)? as i64 * pipeline::MS_PER_DAY;
        let window = match self.window_start {
            Some(start) => TimeWindow::new(start, start + duration_ms)?,
            None => {
                let end = corpus
                    .end_time()
                    .ok_or_else(|| AppError::data("corpus has no tweets to anchor a window"))?;
                TimeWindow::anchored_at_end(end, duration_ms)?
            }
        };
        Ok(Some(window))
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Classifier family.
    #[arg(long, env = "BOTPROF_FAMILY", default_value = "lr")]
    family: String,
    /// Smoothing for the naive Bayes family.
    #[arg(long)]
    alpha: Option<f64>,
    /// Tree count for the random forest family.
    #[arg(long)]
    trees: Option<usize>,
    /// Cost C for the linear families.
    #[arg(long)]
    cost: Option<f64>,
    /// Class weighting: balanced or uniform.
    #[arg(long, default_value = "balanced")]
    class_weight: String,
}

impl ModelArgs {
    fn family(&self) -> Result<Family, AppError> {
        Family::parse(&self.family)
            .ok_or_else(|| AppError::Usage(format!("unknown family {:?}", self.family)))
    }

    fn params(&self, seed: u64) -> Result<HyperParams, AppError> {
        let mut params = HyperParams {
            seed,
            ..HyperParams::default()
        };
        if let Some(alpha) = self.alpha {
            params.nb_alpha = alpha;
        }
        if let Some(trees) = self.trees {
            params.rf_trees = trees;
        }
        if let Some(cost) = self.cost {
            params.linear_cost_c = cost;
        }
        params.class_weight_mode = match self.class_weight.as_str() {
            "balanced" => ClassWeightMode::Balanced,
            "uniform" => ClassWeightMode::Uniform,
            other => {
                return Err(AppError::Usage(format!("unknown class weight {other:?}")))
            }
        };
        Ok(params)
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Root seed for all randomized steps.
    #[arg(long, env = "BOTPROF_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, env = "BOTPROF_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads; runs are sequential when 1.
    #[arg(long, env = "BOTPROF_WORKERS")]
    workers: Option<usize>,
}

impl CommonArgs {
    fn check(&self) -> Result<(), AppError> {
        if self.workers == Some(0) {
            return Err(AppError::Usage("--workers must be at least 1".to_string()));
        }
        fs::create_dir_all(&self.out)?;
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled corpus.
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        /// Accounts per class.
        #[arg(long, default_value_t = 100)]
        per_class: usize,
        /// Explicit class counts broadcast,consumption,spam,human
        /// (overrides --per-class).
        #[arg(long)]
        counts: Option<String>,
        /// Corpus span in days.
        #[arg(long, default_value_t = 120)]
        span_days: u32,
    },
    /// Extract the per-account feature dictionary.
    Extract {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Train one classifier on the full labeled corpus.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Pick the family's key parameter by grid search before training.
        #[arg(long)]
        grid: bool,
        /// Folds used by --grid.
        #[arg(long, env = "BOTPROF_FOLDS", default_value_t = 10)]
        folds: usize,
    },
    /// Cross-validate the four-classifier bank and write the report.
    Cv {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, env = "BOTPROF_FOLDS", default_value_t = 10)]
        folds: usize,
        /// Also sweep observation durations (comma-separated, e.g.
        /// `1w,2w,1m,2m,4m`) with the --family classifier.
        #[arg(long)]
        durations: Option<String>,
    },
    /// Rank an unlabeled pool with a trained model.
    Rank {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Model file from `train`.
        #[arg(long)]
        model: PathBuf,
        /// Rows kept per class ranking.
        #[arg(long, default_value_t = 50)]
        top: usize,
        /// Manual judgments (labels file) for top-K precision.
        #[arg(long)]
        judgments: Option<PathBuf>,
    },
    /// Write feature-importance, entropy-CDF, and heatmap tables.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Logistic-regression model file for weight inspection.
        #[arg(long)]
        model: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, anything else is a
            // usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), AppError> {
    match command {
        Command::Synth {
            common,
            per_class,
            counts,
            span_days,
        } => {
            common.check()?;
            let per_class = match counts {
                Some(spec) => parse_counts(&spec)?,
                None => {
                    if per_class == 0 {
                        return Err(AppError::Usage(
                            "--per-class must be at least 1".to_string(),
                        ));
                    }
                    [per_class; 4]
                }
            };
            let config = synth::GeneratorConfig {
                seed: common.seed,
                per_class,
                span_days,
                ..synth::GeneratorConfig::default()
            };
            synth::generate_to_dir(&config, &synth::default_signatures(), &common.out)?;
            println!(
                "wrote {} accounts to {}",
                per_class.iter().sum::<usize>(),
                common.out.display()
            );
            Ok(())
        }
        Command::Extract {
            common,
            corpus,
            window,
        } => {
            common.check()?;
            let corpus = corpus.load()?;
            let window = window.resolve(&corpus)?;
            let features = pipeline::extract_features(&corpus, window)?;
            let path = common.out.join("features.jsonl");
            io::write_features(&path, &features)?;
            println!("wrote features for {} accounts to {}", features.len(), path.display());
            Ok(())
        }
        Command::Train {
            common,
            corpus,
            window,
            model,
            grid,
            folds,
        } => {
            common.check()?;
            let family = model.family()?;
            let mut params = model.params(common.seed)?;
            let corpus = corpus.load()?;
            let window = window.resolve(&corpus)?;
            let dataset = pipeline::labeled_dataset(&corpus, window)?;
            if grid {
                let grid_values = pipeline::default_grid(family);
                let (best, scores) = pipeline::grid_search(
                    &dataset,
                    family,
                    &params,
                    &grid_values,
                    folds,
                    common.seed,
                )?;
                params = best;
                let rows: Vec<Vec<String>> = scores
                    .iter()
                    .map(|(v, f1)| vec![format!("{v}"), io::fmt4(*f1)])
                    .collect();
                io::write_csv(&common.out.join("grid.csv"), &["setting", "macro_f1"], &rows)?;
            }
            let (space, trained) = pipeline::train_full(&dataset, family, &params)?;
            let path = common.out.join("model.json");
            io::save_model(&path, &io::ModelFile::new(params, space, trained)?)?;
            println!("wrote {} model to {}", family.as_str(), path.display());
            Ok(())
        }
        Command::Cv {
            common,
            corpus,
            window,
            model,
            folds,
            durations,
        } => {
            common.check()?;
            let params = model.params(common.seed)?;
            let corpus = corpus.load()?;
            let resolved = window.resolve(&corpus)?;
            let dataset = pipeline::labeled_dataset(&corpus, resolved)?;
            let bank = pipeline::evaluate_bank(&dataset, &params, folds, common.seed)?;
            let rows = pipeline::bank_table(&bank)?;
            io::write_csv(
                &common.out.join("report.csv"),
                &pipeline::BANK_TABLE_HEADER,
                &rows,
            )?;
            let fold_rows: Vec<Vec<String>> = bank
                .iter()
                .flat_map(|report| {
                    report.folds.iter().map(move |fold| {
                        vec![
                            report.family.as_str().to_string(),
                            fold.fold.to_string(),
                            io::fmt4(fold.prf.macro_precision()),
                            io::fmt4(fold.prf.macro_recall()),
                            io::fmt4(fold.prf.macro_f1()),
                        ]
                    })
                })
                .collect();
            io::write_csv(
                &common.out.join("folds.csv"),
                &["family", "fold", "macro_precision", "macro_recall", "macro_f1"],
                &fold_rows,
            )?;
            if let Some(spec) = durations {
                validate_duration_spec(&spec)?;
                let family = model.family()?;
                let rows = pipeline::duration_sweep(&corpus, family, &params, folds, common.seed)?;
                io::write_csv(
                    &common.out.join("durations.csv"),
                    &pipeline::DURATION_TABLE_HEADER,
                    &pipeline::duration_table(&rows),
                )?;
            }
            println!("wrote CV report to {}", common.out.display());
            Ok(())
        }
        Command::Rank {
            common,
            corpus,
            window,
            model,
            top,
            judgments,
        } => {
            common.check()?;
            let file = io::load_model(&model)?;
            let corpus = corpus.load()?;
            let resolved = window.resolve(&corpus)?;
            let pool = pipeline::extract_features(&corpus, resolved)?;
            if pool.len() < top {
                return Err(AppError::data(format!(
                    "pool holds {} accounts, need at least {top}",
                    pool.len()
                )));
            }
            let rankings = pipeline::rank_pool(&file.space, &file.model, &pool)?;
            let mut rows = Vec::new();
            for (class, ranking) in rankings.iter().enumerate() {
                let label = ClassLabel::from_index(class).expect("class index in range");
                for (position, row) in ranking.iter().take(top).enumerate() {
                    rows.push(vec![
                        label.as_str().to_string(),
                        (position + 1).to_string(),
                        row.user_id.clone(),
                        io::fmt4(row.score),
                    ]);
                }
            }
            io::write_csv(
                &common.out.join("rankings.csv"),
                &["class", "rank", "user_id", "score"],
                &rows,
            )?;
            if let Some(path) = judgments {
                let judged = load_judgments(&path)?;
                let table = pipeline::precision_table(&rankings, &judged)?;
                io::write_csv(
                    &common.out.join("precision.csv"),
                    &precision_header(),
                    &table,
                )?;
            }
            println!("wrote rankings to {}", common.out.display());
            Ok(())
        }
        Command::Report {
            common,
            corpus,
            window,
            model,
        } => {
            common.check()?;
            let file = io::load_model(&model)?;
            let corpus = corpus.load()?;
            let resolved = window.resolve(&corpus)?;
            let features = pipeline::extract_features(&corpus, resolved)?;

            let linear = file.model.as_linear().ok_or_else(|| {
                AppError::data("feature importance needs a logistic-regression model")
            })?;
            let names = file.space.dim_names();
            let importance = botprof_core::eval::feature_importance(linear, &names, 15)?;
            let mut rows = Vec::new();
            for (class, entries) in importance.iter().enumerate() {
                let label = ClassLabel::from_index(class).expect("class index in range");
                for (rank, (name, weight)) in entries.iter().enumerate() {
                    rows.push(vec![
                        label.as_str().to_string(),
                        (rank + 1).to_string(),
                        name.clone(),
                        io::fmt4(*weight),
                    ]);
                }
            }
            io::write_csv(
                &common.out.join("importance.csv"),
                &["class", "rank", "feature", "weight"],
                &rows,
            )?;

            // Class assignment: labels when present, else model predictions.
            let classes = assign_classes(&corpus, &file, &features)?;
            let cdfs = pipeline::entropy_cdfs(&features, &classes);
            io::write_csv(
                &common.out.join("entropy_cdf.csv"),
                &pipeline::CDF_TABLE_HEADER,
                &cdfs.rows(),
            )?;
            let maps = pipeline::class_heatmaps(&corpus, &classes)?;
            let header_cells = pipeline::heatmap_header();
            let header_refs: Vec<&str> = header_cells.iter().map(|s| s.as_str()).collect();
            io::write_csv(
                &common.out.join("heatmap.csv"),
                &header_refs,
                &pipeline::weekday_heatmap_rows(&maps),
            )?;
            println!("wrote report tables to {}", common.out.display());
            Ok(())
        }
    }
}

fn parse_counts(spec: &str) -> Result<[usize; 4], AppError> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 4 {
        return Err(AppError::Usage(
            "--counts needs four comma-separated values".to_string(),
        ));
    }
    let mut counts = [0usize; 4];
    for (i, part) in parts.iter().enumerate() {
        counts[i] = part
            .trim()
            .parse()
            .map_err(|_| AppError::Usage(format!("bad count {part:?}")))?;
    }
    Ok(counts)
}

fn validate_duration_spec(spec: &str) -> Result<(), AppError> {
    for part in spec.split(',') {
        let days = parse_duration_days(part)?;
        if !pipeline::DURATIONS.iter().any(|(_, d)| *d == days) {
            return Err(AppError::Usage(format!(
                "unsupported duration {part:?}; supported: 1w,2w,1m,2m,4m"
            )));
        }
    }
    Ok(())
}

fn precision_header() -> Vec<&'static str> {
    vec![
        "class", "tp_10", "p_10", "tp_20", "p_20", "tp_30", "p_30", "tp_40", "p_40", "tp_50",
        "p_50",
    ]
}

fn load_judgments(path: &Path) -> Result<BTreeMap<String, usize>, AppError> {
    use botprof_core::types::LabeledAccount;
    use std::io::BufRead;
    let file = fs::File::open(path)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LabeledAccount = serde_json::from_str(&line).map_err(|e| AppError::DataAt {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.insert(record.user_id, record.label.index());
    }
    Ok(out)
}

fn assign_classes(
    corpus: &Corpus,
    file: &io::ModelFile,
    features: &BTreeMap<String, botprof_core::features::AccountFeatures>,
) -> Result<BTreeMap<String, usize>, AppError> {
    let labeled: BTreeMap<String, usize> = corpus
        .accounts
        .iter()
        .filter_map(|(id, a)| a.label.map(|l| (id.clone(), l.index())))
        .collect();
    if !labeled.is_empty() {
        return Ok(labeled);
    }
    let rankings = pipeline::rank_pool(&file.space, &file.model, features)?;
    // Highest-scoring class per account.
    let mut best: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for (class, ranking) in rankings.iter().enumerate() {
        for RankedPrediction { user_id, score, .. } in ranking {
            let entry = best.entry(user_id.clone()).or_insert((class, *score));
            if *score > entry.1 {
                *entry = (class, *score);
            }
        }
    }
    Ok(best.into_iter().map(|(id, (c, _))| (id, c)).collect())
}
