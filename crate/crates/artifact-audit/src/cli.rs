//! Implementations behind the `artifact-audit` binary's subcommands.
//!
//! Every command writes a `config.json` describing the exact run
//! configuration next to its outputs; re-running with the same inputs and
//! configuration reproduces every output byte for byte (training is
//! deterministic and all floating-point report fields are formatted with
//! fixed precision).
//!
//! The `ARTIFACT_AUDIT_THREADS` environment variable caps internal
//! parallelism (prediction over test sets); training itself is
//! single-threaded by contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Once;

use serde::{Deserialize, Serialize};

use crate::artifacts::{containment_stats, length_stats, pmi_table, ContainmentStats, LengthStats, PmiTable};
use crate::classifier::{evaluate, train, Metrics, TrainConfig};
use crate::corpus::{load_dataset, majority_baseline, Label, Split};
use crate::model_io;
use crate::splits::{
    partition, render_reports_markdown, score_predictions, write_reports_json, write_splits,
    EvalReport, SplitManifest,
};
use crate::{Error, Result};

/// Cap the global thread pool from `ARTIFACT_AUDIT_THREADS`. Safe to call
/// more than once; only the first call can take effect.
pub fn init_thread_pool() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        if let Ok(value) = std::env::var("ARTIFACT_AUDIT_THREADS") {
            match value.parse::<usize>() {
                Ok(n) if n >= 1 => {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                }
                _ => log::warn!("ignoring invalid ARTIFACT_AUDIT_THREADS={value:?}"),
            }
        }
    });
}

/// Full description of one command invocation, serialized alongside every
/// output for provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditRunConfig {
    pub command: String,
    pub dataset_name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub train_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dev_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub test_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub manifest_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub prediction_paths: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub train_config: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub top_k: Option<usize>,
    pub out_dir: PathBuf,
    pub report_formats: Vec<String>,
}

impl AuditRunConfig {
    fn base(command: &str, dataset_name: String, out_dir: &Path) -> AuditRunConfig {
        AuditRunConfig {
            command: command.to_owned(),
            dataset_name,
            train_path: None,
            dev_path: None,
            test_path: None,
            model_path: None,
            manifest_path: None,
            prediction_paths: Vec::new(),
            train_config: None,
            alpha: None,
            top_k: None,
            out_dir: out_dir.to_owned(),
            report_formats: vec!["json".into(), "tsv".into(), "markdown".into()],
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("serializing run config: {e}")))?;
        json.push('\n');
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_owned())
}

/// Arguments for [`cmd_train`].
#[derive(Clone, Debug)]
pub struct TrainArgs {
    pub train: PathBuf,
    pub test: PathBuf,
    pub dev: Option<PathBuf>,
    pub out: PathBuf,
    pub name: Option<String>,
    pub config: TrainConfig,
}

/// Everything `train` wrote, plus the in-memory metrics.
#[derive(Clone, Debug)]
pub struct TrainOutputs {
    pub model_path: PathBuf,
    pub metrics_path: PathBuf,
    pub vocab_path: PathBuf,
    pub config_path: PathBuf,
    pub model_sha256: String,
    pub test_metrics: Metrics,
    pub dev_metrics: Option<Metrics>,
}

#[derive(Serialize, Deserialize)]
struct MetricsDoc {
    dataset_name: String,
    model_sha256: String,
    train_examples: usize,
    train_skipped: usize,
    test_examples: usize,
    test_skipped: usize,
    majority_baseline_test: f64,
    test: Metrics,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    dev: Option<Metrics>,
}

/// Train the audit classifier, evaluate it, and write `model.bin`,
/// `metrics.json`, and `config.json` under the output directory.
pub fn cmd_train(args: &TrainArgs) -> Result<TrainOutputs> {
    init_thread_pool();
    let name = args.name.clone().unwrap_or_else(|| stem_of(&args.train));
    let train_set = load_dataset(&args.train, name.clone(), Split::Train)?;
    let test_set = load_dataset(&args.test, name.clone(), Split::Test)?;
    if train_set.skipped > 0 {
        log::info!("{}: skipped {} no-consensus records", args.train.display(), train_set.skipped);
    }

    let model = train(&train_set, &args.config)?;
    let test_metrics = evaluate(&model, &test_set)?;
    let dev_metrics = match &args.dev {
        Some(dev) => {
            let dev_set = load_dataset(dev, name.clone(), Split::Dev)?;
            Some(evaluate(&model, &dev_set)?)
        }
        None => None,
    };

    ensure_out_dir(&args.out)?;
    let model_path = args.out.join("model.bin");
    model_io::save(&model, &model_path)?;
    let model_sha256 = model.sha256();

    // the word -> index table, standalone for audit reproducibility
    let vocab_path = args.out.join("vocab.tsv");
    let mut vocab_tsv = Vec::new();
    model
        .vocab()
        .write_tsv(&mut vocab_tsv)
        .map_err(|e| Error::io(&vocab_path, e))?;
    fs::write(&vocab_path, vocab_tsv).map_err(|e| Error::io(&vocab_path, e))?;

    let metrics_path = args.out.join("metrics.json");
    let doc = MetricsDoc {
        dataset_name: name.clone(),
        model_sha256: model_sha256.clone(),
        train_examples: train_set.len(),
        train_skipped: train_set.skipped,
        test_examples: test_set.len(),
        test_skipped: test_set.skipped,
        majority_baseline_test: majority_baseline(&test_set)?,
        test: test_metrics.clone(),
        dev: dev_metrics.clone(),
    };
    let mut json = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::InvalidConfig(format!("serializing metrics: {e}")))?;
    json.push('\n');
    fs::write(&metrics_path, json).map_err(|e| Error::io(&metrics_path, e))?;

    let mut run = AuditRunConfig::base("train", name, &args.out);
    run.train_path = Some(args.train.clone());
    run.dev_path = args.dev.clone();
    run.test_path = Some(args.test.clone());
    run.train_config = Some(args.config.clone());
    let config_path = args.out.join("config.json");
    run.save(&config_path)?;

    Ok(TrainOutputs {
        model_path,
        metrics_path,
        vocab_path,
        config_path,
        model_sha256,
        test_metrics,
        dev_metrics,
    })
}

/// Arguments for [`cmd_audit`].
#[derive(Clone, Debug)]
pub struct AuditArgs {
    pub train: PathBuf,
    pub out: PathBuf,
    pub alpha: f64,
    pub top_k: usize,
    pub name: Option<String>,
}

#[derive(Clone, Debug)]
pub struct AuditOutputs {
    pub pmi_path: PathBuf,
    pub length_pmf_path: PathBuf,
    pub containment_path: PathBuf,
    pub report_path: PathBuf,
    pub config_path: PathBuf,
}

/// Render the Markdown artifact report: top-k PMI words per class with
/// coverage, length summary, and containment rates.
pub fn render_audit_markdown(
    name: &str,
    table: &PmiTable,
    lengths: &LengthStats,
    containment: &ContainmentStats,
    top_k: usize,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("# Annotation artifact audit: {name}\n\n"));

    out.push_str(&format!(
        "## Top {top_k} words by PMI(word, class)\n\nCoverage is the percentage of the class's training hypotheses containing the word (alpha = {}).\n\n",
        table.alpha()
    ));
    let tops: Vec<_> = Label::ALL
        .iter()
        .map(|&l| table.top_k(l, top_k))
        .collect();
    out.push_str("| Entailment | % | Neutral | % | Contradiction | % |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for i in 0..top_k {
        let mut row = String::from("|");
        for top in &tops {
            match top.get(i) {
                Some(t) => {
                    row.push_str(&format!(" {} | {:.1} |", t.word, 100.0 * t.coverage));
                }
                None => row.push_str(" - | - |"),
            }
        }
        out.push_str(&row);
        out.push('\n');
    }

    out.push_str("\n## Hypothesis length\n\n| Class | n | Mean | Median |\n|---|---|---|---|\n");
    for label in Label::ALL {
        let c = lengths.class(label);
        out.push_str(&format!(
            "| {label} | {} | {:.2} | {} |\n",
            c.n(),
            c.mean(),
            c.median()
        ));
    }
    out.push_str(&format!(
        "\nShare of hypotheses with >= 12 tokens that are neutral: {:.3}\n",
        lengths.class_share_at_least(Label::Neutral, 12)
    ));
    out.push_str(&format!(
        "Share of entailed hypotheses with <= 7 tokens: {:.3}\n",
        lengths.class(Label::Entailment).frac_at_most(7)
    ));

    out.push_str("\n## Premise containment\n\nHypotheses whose tokens all appear in the premise (set semantics).\n\n");
    out.push_str("| Class | Contained | Total | % |\n|---|---|---|---|\n");
    for label in Label::ALL {
        let k = label.index();
        out.push_str(&format!(
            "| {label} | {} | {} | {:.2} |\n",
            containment.contained[k],
            containment.totals[k],
            100.0 * containment.fraction(label)
        ));
    }
    out
}

/// Compute the artifact diagnostics over a training set and write the PMI
/// TSV, length PMF TSV, containment JSON, and Markdown report.
pub fn cmd_audit(args: &AuditArgs) -> Result<AuditOutputs> {
    init_thread_pool();
    let name = args.name.clone().unwrap_or_else(|| stem_of(&args.train));
    let train_set = load_dataset(&args.train, name.clone(), Split::Train)?;

    let table = pmi_table(&train_set, args.alpha)?;
    let lengths = length_stats(&train_set)?;
    let containment = containment_stats(&train_set)?;

    ensure_out_dir(&args.out)?;
    let pmi_path = args.out.join("pmi.tsv");
    let mut buf = Vec::new();
    table
        .write_tsv(&mut buf)
        .map_err(|e| Error::io(&pmi_path, e))?;
    fs::write(&pmi_path, buf).map_err(|e| Error::io(&pmi_path, e))?;

    let length_pmf_path = args.out.join("length_pmf.tsv");
    let mut buf = Vec::new();
    lengths
        .write_pmf_tsv(&mut buf)
        .map_err(|e| Error::io(&length_pmf_path, e))?;
    fs::write(&length_pmf_path, buf).map_err(|e| Error::io(&length_pmf_path, e))?;

    let containment_path = args.out.join("containment.json");
    let mut buf = Vec::new();
    containment.write_json(&mut buf)?;
    fs::write(&containment_path, buf).map_err(|e| Error::io(&containment_path, e))?;

    let report_path = args.out.join("report.md");
    let report = render_audit_markdown(&name, &table, &lengths, &containment, args.top_k);
    fs::write(&report_path, report).map_err(|e| Error::io(&report_path, e))?;

    let mut run = AuditRunConfig::base("audit", name, &args.out);
    run.train_path = Some(args.train.clone());
    run.alpha = Some(args.alpha);
    run.top_k = Some(args.top_k);
    let config_path = args.out.join("config.json");
    run.save(&config_path)?;

    Ok(AuditOutputs {
        pmi_path,
        length_pmf_path,
        containment_path,
        report_path,
        config_path,
    })
}

/// Arguments for [`cmd_split`].
#[derive(Clone, Debug)]
pub struct SplitArgs {
    pub model: PathBuf,
    pub test: PathBuf,
    pub out: PathBuf,
    pub name: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SplitOutputs {
    pub hard_path: PathBuf,
    pub easy_path: PathBuf,
    pub manifest_path: PathBuf,
    pub config_path: PathBuf,
    pub n_hard: usize,
    pub n_easy: usize,
}

/// Partition a test set with a saved audit model and write `hard.jsonl`,
/// `easy.jsonl`, and the manifest.
pub fn cmd_split(args: &SplitArgs) -> Result<SplitOutputs> {
    init_thread_pool();
    let name = args.name.clone().unwrap_or_else(|| stem_of(&args.test));
    let model = model_io::load(&args.model)?;
    let test_set = load_dataset(&args.test, name.clone(), Split::Test)?;

    let manifest = partition(&model, &test_set)?;
    ensure_out_dir(&args.out)?;
    let counts = write_splits(&manifest, &test_set, &args.out)?;
    let manifest_path = args.out.join("manifest.json");
    manifest.save(&manifest_path)?;

    let mut run = AuditRunConfig::base("split", name, &args.out);
    run.model_path = Some(args.model.clone());
    run.test_path = Some(args.test.clone());
    let config_path = args.out.join("config.json");
    run.save(&config_path)?;

    Ok(SplitOutputs {
        hard_path: args.out.join("hard.jsonl"),
        easy_path: args.out.join("easy.jsonl"),
        manifest_path,
        config_path,
        n_hard: counts.n_hard,
        n_easy: counts.n_easy,
    })
}

/// Arguments for [`cmd_score`].
#[derive(Clone, Debug)]
pub struct ScoreArgs {
    pub manifest: PathBuf,
    pub test: PathBuf,
    pub predictions: Vec<PathBuf>,
    pub out: PathBuf,
}

#[derive(Clone, Debug)]
pub struct ScoreOutputs {
    pub report_json_path: PathBuf,
    pub report_md_path: PathBuf,
    pub config_path: PathBuf,
    pub reports: Vec<EvalReport>,
}

/// Score one or more prediction files against a frozen manifest and write
/// the JSON and Markdown reports.
pub fn cmd_score(args: &ScoreArgs) -> Result<ScoreOutputs> {
    init_thread_pool();
    let manifest = SplitManifest::load(&args.manifest)?;
    let test_set = load_dataset(&args.test, manifest.dataset_name.clone(), Split::Test)?;

    let mut reports = Vec::new();
    for pred in &args.predictions {
        reports.push(score_predictions(pred, &manifest, &test_set)?);
    }

    ensure_out_dir(&args.out)?;
    let report_json_path = args.out.join("report.json");
    write_reports_json(&reports, &report_json_path)?;
    let report_md_path = args.out.join("report.md");
    fs::write(&report_md_path, render_reports_markdown(&reports))
        .map_err(|e| Error::io(&report_md_path, e))?;

    let mut run = AuditRunConfig::base("score", manifest.dataset_name.clone(), &args.out);
    run.manifest_path = Some(args.manifest.clone());
    run.test_path = Some(args.test.clone());
    run.prediction_paths = args.predictions.clone();
    let config_path = args.out.join("config.json");
    run.save(&config_path)?;

    Ok(ScoreOutputs {
        report_json_path,
        report_md_path,
        config_path,
        reports,
    })
}
