use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use artifact_audit::classifier::TrainConfig;
use artifact_audit::cli::{
    cmd_audit, cmd_score, cmd_split, cmd_train, init_thread_pool, AuditArgs, ScoreArgs, SplitArgs,
    TrainArgs,
};
use artifact_audit::features::FeatureConfig;

#[derive(Parser)]
#[command(
    name = "artifact-audit",
    version,
    about = "Audit sentence-pair inference datasets for annotation artifacts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the hypothesis-only classifier and evaluate it on a test set.
    Train {
        /// Training set (JSON lines).
        #[arg(long)]
        train: PathBuf,
        /// Test set to evaluate on.
        #[arg(long)]
        test: PathBuf,
        /// Optional dev set, evaluated alongside the test set.
        #[arg(long)]
        dev: Option<PathBuf>,
        /// Output directory for model.bin, metrics.json, config.json.
        #[arg(long)]
        out: PathBuf,
        /// Dataset name recorded in outputs (default: train file stem).
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Embedding width.
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        /// Initial learning rate (decays linearly to zero).
        #[arg(long, default_value_t = 0.1)]
        lr: f64,
        /// Hashed n-gram bucket count.
        #[arg(long, default_value_t = 2_000_000)]
        buckets: u32,
        /// Drop words seen fewer times than this in the training hypotheses.
        #[arg(long, default_value_t = 1)]
        min_count: u32,
        /// Add hashed character 4-gram features.
        #[arg(long)]
        char_ngrams: bool,
    },
    /// Compute PMI, length, and containment diagnostics over a training set.
    Audit {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Additive smoothing constant for the PMI table.
        #[arg(long, default_value_t = 100.0)]
        alpha: f64,
        /// Words per class in the report's PMI ranking.
        #[arg(long, default_value_t = 5)]
        top_k: usize,
        #[arg(long)]
        name: Option<String>,
    },
    /// Partition a test set into Hard/Easy with a trained model.
    Split {
        /// Saved audit model (model.bin from `train`).
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        name: Option<String>,
    },
    /// Score external prediction files on full/Hard/Easy.
    Score {
        /// Manifest produced by `split`.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Prediction files (JSON lines with id/label, or two-column TSV).
        #[arg(long, required = true, num_args = 1..)]
        predictions: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train {
            train,
            test,
            dev,
            out,
            name,
            seed,
            dim,
            epochs,
            lr,
            buckets,
            min_count,
            char_ngrams,
        } => {
            let config = TrainConfig {
                dim,
                epochs,
                lr0: lr,
                seed,
                feature_config: FeatureConfig {
                    use_word_bigrams: true,
                    use_char_4grams: char_ngrams,
                    min_word_count: min_count,
                    n_buckets: buckets,
                },
            };
            let args = TrainArgs {
                train,
                test,
                dev,
                out,
                name,
                config,
            };
            let outputs = cmd_train(&args).context("train failed")?;
            println!("model:   {}", outputs.model_path.display());
            println!("metrics: {}", outputs.metrics_path.display());
            println!("sha256:  {}", outputs.model_sha256);
            println!(
                "test accuracy: {:.4} ({}/{})",
                outputs.test_metrics.accuracy,
                outputs.test_metrics.n_correct,
                outputs.test_metrics.n_examples
            );
            if let Some(dev) = &outputs.dev_metrics {
                println!("dev accuracy:  {:.4}", dev.accuracy);
            }
        }
        Command::Audit {
            train,
            out,
            alpha,
            top_k,
            name,
        } => {
            let outputs = cmd_audit(&AuditArgs {
                train,
                out,
                alpha,
                top_k,
                name,
            })
            .context("audit failed")?;
            println!("pmi table:   {}", outputs.pmi_path.display());
            println!("length pmf:  {}", outputs.length_pmf_path.display());
            println!("containment: {}", outputs.containment_path.display());
            println!("report:      {}", outputs.report_path.display());
        }
        Command::Split {
            model,
            test,
            out,
            name,
        } => {
            let outputs = cmd_split(&SplitArgs {
                model,
                test,
                out,
                name,
            })
            .context("split failed")?;
            println!(
                "hard: {} ({} examples)",
                outputs.hard_path.display(),
                outputs.n_hard
            );
            println!(
                "easy: {} ({} examples)",
                outputs.easy_path.display(),
                outputs.n_easy
            );
            println!("manifest: {}", outputs.manifest_path.display());
        }
        Command::Score {
            manifest,
            test,
            predictions,
            out,
        } => {
            let outputs = cmd_score(&ScoreArgs {
                manifest,
                test,
                predictions,
                out,
            })
            .context("score failed")?;
            for r in &outputs.reports {
                let pct = |a: Option<f64>| {
                    a.map(|a| format!("{:.1}", 100.0 * a))
                        .unwrap_or_else(|| "-".into())
                };
                println!(
                    "{}: full {:.1} / hard {} / easy {}",
                    r.model_name,
                    100.0 * r.accuracy_full,
                    pct(r.accuracy_hard),
                    pct(r.accuracy_easy)
                );
            }
            println!("report: {}", outputs.report_json_path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    init_thread_pool();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
