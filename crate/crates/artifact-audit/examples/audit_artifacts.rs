//! Run the lexical, length, and containment diagnostics over a training set
//! and print a compact report. Defaults to the bundled mini corpus:
//!
//! ```text
//! cargo run --example audit_artifacts -- [TRAIN_JSONL] [ALPHA]
//! ```

use artifact_audit::artifacts::{containment_stats, length_stats, pmi_table};
use artifact_audit::corpus::{load_dataset, Label, Split};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let train_path = args.first().cloned().unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini_train.jsonl").to_owned()
    });
    let alpha: f64 = match args.get(1) {
        Some(a) => a.parse()?,
        None => 100.0,
    };

    let train_set = load_dataset(&train_path, "audit", Split::Train)?;
    println!("{} examples, smoothing alpha = {alpha}\n", train_set.len());

    let table = pmi_table(&train_set, alpha)?;
    for label in Label::ALL {
        println!("top 5 {label} words by PMI (coverage of class):");
        for t in table.top_k(label, 5) {
            println!("  {:<14} pmi {:+.4}   {:>5.1}%", t.word, t.pmi, 100.0 * t.coverage);
        }
    }

    let lengths = length_stats(&train_set)?;
    println!("\nhypothesis length by class:");
    for label in Label::ALL {
        let c = lengths.class(label);
        println!(
            "  {:<13} median {:>2}  mean {:>5.2}  n {}",
            label.to_string(),
            c.median(),
            c.mean(),
            c.n()
        );
    }
    println!(
        "  P(neutral | length >= 12) = {:.3}",
        lengths.class_share_at_least(Label::Neutral, 12)
    );
    println!(
        "  P(length <= 7 | entailment) = {:.3}",
        lengths.class(Label::Entailment).frac_at_most(7)
    );

    let containment = containment_stats(&train_set)?;
    println!("\nhypotheses fully contained in their premise (bag of words):");
    for label in Label::ALL {
        println!(
            "  {:<13} {:>5.1}%  ({}/{})",
            label.to_string(),
            100.0 * containment.fraction(label),
            containment.contained[label.index()],
            containment.totals[label.index()]
        );
    }
    Ok(())
}
