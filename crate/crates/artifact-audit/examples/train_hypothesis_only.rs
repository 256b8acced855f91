//! Train the premise-oblivious classifier and evaluate it.
//!
//! With no arguments this runs on the bundled mini corpus; pass your own
//! files to audit a real dataset:
//!
//! ```text
//! cargo run --release --example train_hypothesis_only -- train.jsonl test.jsonl
//! ```

use artifact_audit::classifier::{evaluate, train, TrainConfig};
use artifact_audit::corpus::{load_dataset, majority_baseline, Split};
use artifact_audit::features::FeatureConfig;

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let (train_path, test_path, config) = match args.as_slice() {
        [train, test] => (train.clone(), test.clone(), TrainConfig::default()),
        [] => (
            format!("{fixtures}/mini_train.jsonl"),
            format!("{fixtures}/mini_test.jsonl"),
            // fixture-scale settings; corpus-scale runs use the defaults
            TrainConfig {
                dim: 16,
                epochs: 50,
                lr0: 0.3,
                feature_config: FeatureConfig {
                    n_buckets: 4096,
                    ..FeatureConfig::default()
                },
                ..TrainConfig::default()
            },
        ),
        _ => anyhow::bail!("usage: train_hypothesis_only [TRAIN_JSONL TEST_JSONL]"),
    };

    let train_set = load_dataset(&train_path, "demo", Split::Train)?;
    let test_set = load_dataset(&test_path, "demo", Split::Test)?;
    println!(
        "train: {} examples ({} skipped), test: {} examples",
        train_set.len(),
        train_set.skipped,
        test_set.len()
    );

    let model = train(&train_set, &config)?;
    let majority = majority_baseline(&test_set)?;
    let metrics = evaluate(&model, &test_set)?;

    println!("majority baseline:        {:.1}%", 100.0 * majority);
    println!("hypothesis-only accuracy: {:.1}%", 100.0 * metrics.accuracy);
    println!();
    println!("per-label precision / recall:");
    for m in &metrics.per_label {
        println!(
            "  {:<13} {:.3} / {:.3}  (support {})",
            m.label.to_string(),
            m.precision,
            m.recall,
            m.support
        );
    }
    println!();
    println!("confusion (rows gold, columns predicted, E/N/C):");
    for row in metrics.confusion {
        println!("  {row:>6?}");
    }
    Ok(())
}
