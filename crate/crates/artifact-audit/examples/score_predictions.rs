//! Score external prediction files against a frozen Hard/Easy manifest.
//!
//! This demo trains the audit model, partitions the bundled test fixture,
//! fabricates two prediction files (a perfect model and a majority-class
//! model), and prints the full/Hard/Easy accuracies for each. With real
//! datasets the prediction files would come from your own NLI systems.

use std::fs;
use std::io::Write;

use artifact_audit::classifier::{train, TrainConfig};
use artifact_audit::corpus::{load_dataset, Split};
use artifact_audit::features::FeatureConfig;
use artifact_audit::splits::{partition, render_reports_markdown, score_predictions};

fn main() -> anyhow::Result<()> {
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let train_set = load_dataset(format!("{fixtures}/mini_train.jsonl"), "mini", Split::Train)?;
    let test_set = load_dataset(format!("{fixtures}/mini_test.jsonl"), "mini", Split::Test)?;

    let config = TrainConfig {
        dim: 16,
        epochs: 50,
        lr0: 0.3,
        feature_config: FeatureConfig {
            n_buckets: 4096,
            ..FeatureConfig::default()
        },
        ..TrainConfig::default()
    };
    let model = train(&train_set, &config)?;
    let manifest = partition(&model, &test_set)?;

    let dir = std::env::temp_dir().join("artifact-audit-score-demo");
    fs::create_dir_all(&dir)?;

    // a perfect model: every prediction equals gold
    let perfect = dir.join("perfect.tsv");
    let mut f = fs::File::create(&perfect)?;
    for ex in &test_set.examples {
        writeln!(f, "{}\t{}", ex.id, ex.label)?;
    }

    // a majority-class model: always entailment
    let majority = dir.join("majority.tsv");
    let mut f = fs::File::create(&majority)?;
    for ex in &test_set.examples {
        writeln!(f, "{}\tentailment", ex.id)?;
    }

    let reports = vec![
        score_predictions(&perfect, &manifest, &test_set)?,
        score_predictions(&majority, &manifest, &test_set)?,
    ];
    print!("{}", render_reports_markdown(&reports));
    Ok(())
}
