//! Partition a test set into Hard/Easy with a freshly trained audit model
//! and write `hard.jsonl`, `easy.jsonl`, and the manifest.
//!
//! ```text
//! cargo run --example partition_hard_easy -- [OUT_DIR]
//! ```

use artifact_audit::classifier::{train, TrainConfig};
use artifact_audit::corpus::{load_dataset, Split};
use artifact_audit::features::FeatureConfig;
use artifact_audit::splits::{partition, write_splits, Bucket};

fn main() -> anyhow::Result<()> {
    let out_dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/partition-demo".to_owned());
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
    let counts = write_splits(&manifest, &test_set, &out_dir)?;
    manifest.save(format!("{out_dir}/manifest.json"))?;

    println!(
        "partitioned {} test examples: {} Easy, {} Hard (audit model {})",
        test_set.len(),
        counts.n_easy,
        counts.n_hard,
        &manifest.model_sha256[..12]
    );
    println!("the Hard examples stump the hypothesis-only model:");
    for entry in manifest.entries.iter().filter(|e| e.bucket == Bucket::Hard) {
        let ex = test_set
            .examples
            .iter()
            .find(|x| x.id == entry.id)
            .expect("manifest ids come from the test set");
        println!(
            "  [{}] {:?} (gold {}, predicted {})",
            entry.id,
            ex.hypothesis,
            entry.gold,
            entry.predicted.expect("partition records predictions")
        );
    }
    println!("wrote hard.jsonl / easy.jsonl / manifest.json under {out_dir}");
    Ok(())
}
