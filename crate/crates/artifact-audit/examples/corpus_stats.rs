//! Load a dataset, show the tokenizer's behavior, and print the baseline
//! statistics everything else builds on.

use artifact_audit::corpus::{load_dataset, majority_baseline, tokenize, Label, Split};
use artifact_audit::features::{build_vocab, FeatureConfig};

fn main() -> anyhow::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini_train.jsonl").to_owned()
    });
    let dataset = load_dataset(&path, "stats", Split::Train)?;

    println!(
        "{}: {} examples, {} skipped (no gold label)",
        path,
        dataset.len(),
        dataset.skipped
    );
    let counts = dataset.label_counts();
    for label in Label::ALL {
        println!("  {:<13} {}", label.to_string(), counts[label.index()]);
    }
    println!(
        "majority baseline: {:.1}%",
        100.0 * majority_baseline(&dataset)?
    );

    let vocab = build_vocab(&dataset, &FeatureConfig::default())?;
    println!("hypothesis vocabulary: {} distinct words", vocab.len());

    let sample = &dataset.examples[0];
    println!("\ntokenizer (lowercase, keep letters/digits/apostrophes):");
    println!("  raw:    {:?}", sample.hypothesis);
    println!("  tokens: {:?}", tokenize(&sample.hypothesis).tokens());
    Ok(())
}
