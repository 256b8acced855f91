//! Shared test support: fixture paths, an independent brute-force PMI
//! oracle, and a synthetic corpus generator with planted artifacts.

// Each integration-test target compiles its own copy and uses a different
// subset of these helpers.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use artifact_audit::corpus::{Dataset, Example, Label, Split};
use artifact_audit::rng::Xoshiro256StarStar;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

/// Deliberately naive re-implementation of the toolkit's tokenizer, kept
/// separate so the oracle does not share code with the implementation under
/// test.
pub fn oracle_tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.to_lowercase().chars() {
        if c.is_alphanumeric() || c == '\'' {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Brute-force smoothed PMI over a small dataset: nested loops, no shared
/// code with `artifact_audit::artifacts`. Returns `(pmi, coverage)` per
/// (word, class) plus the class hypothesis totals.
pub struct OraclePmi {
    pub cells: BTreeMap<(String, usize), (f64, f64)>,
    pub class_totals: [u64; 3],
    pub vocab: BTreeSet<String>,
}

pub fn oracle_pmi(dataset: &Dataset, alpha: f64) -> OraclePmi {
    let mut vocab: BTreeSet<String> = BTreeSet::new();
    for ex in &dataset.examples {
        for tok in oracle_tokenize(&ex.hypothesis) {
            vocab.insert(tok);
        }
    }

    let mut class_totals = [0u64; 3];
    for ex in &dataset.examples {
        class_totals[ex.label.index()] += 1;
    }

    // presence counts by scanning every (word, example) pair
    let mut counts: BTreeMap<(String, usize), u64> = BTreeMap::new();
    for word in &vocab {
        for ex in &dataset.examples {
            let present = oracle_tokenize(&ex.hypothesis).iter().any(|t| t == word);
            if present {
                *counts
                    .entry((word.clone(), ex.label.index()))
                    .or_insert(0) += 1;
            }
        }
    }

    let count_of = |w: &str, k: usize| -> u64 {
        counts.get(&(w.to_owned(), k)).copied().unwrap_or(0)
    };

    let mut z = 0.0f64;
    for word in &vocab {
        for k in 0..3 {
            z += count_of(word, k) as f64 + alpha;
        }
    }

    let mut class_marginals = [0.0f64; 3];
    for word in &vocab {
        for (k, marginal) in class_marginals.iter_mut().enumerate() {
            *marginal += (count_of(word, k) as f64 + alpha) / z;
        }
    }

    let mut cells = BTreeMap::new();
    for word in &vocab {
        let word_marginal: f64 = (0..3)
            .map(|k| (count_of(word, k) as f64 + alpha) / z)
            .sum();
        for k in 0..3 {
            let joint = (count_of(word, k) as f64 + alpha) / z;
            let pmi = joint.ln() - word_marginal.ln() - class_marginals[k].ln();
            let coverage = if class_totals[k] == 0 {
                0.0
            } else {
                count_of(word, k) as f64 / class_totals[k] as f64
            };
            cells.insert((word.clone(), k), (pmi, coverage));
        }
    }

    OraclePmi {
        cells,
        class_totals,
        vocab,
    }
}

const SUBJECTS: &[&str] = &[
    "a man", "a woman", "two dogs", "three children", "an old musician",
    "a group of workers", "a young girl", "two friends", "a tall boy",
    "a street vendor", "a tired farmer", "several tourists",
];
const ACTIONS: &[&str] = &[
    "plays a guitar", "reads a thick book", "runs across the grass",
    "builds a wooden fence", "sells fresh fruit", "paints an old wall",
    "rides a bicycle", "carries heavy boxes", "photographs the crowd",
    "repairs a red car", "flies a bright kite", "washes the windows",
];
const PLACES: &[&str] = &[
    "on the beach", "in the park", "near the station", "by the river",
    "at the market", "on a busy street", "in the garden", "outside the cafe",
];
const GENERIC_E: &[&str] = &[
    "there are people outdoors",
    "someone is outside",
    "a person is outdoors",
    "people are outside in the open air",
    "an animal is outdoors",
];
const REASONS_N: &[&str] = &[
    "because they want to win the competition",
    "because it is their favorite thing to do",
    "to impress a sad friend from school",
    "because the first prize is a tall trophy",
    "to prepare for a popular contest next week",
];
// the planted markers (nobody, sleeping, no, cat, tv, nothing, never) recur
// across templates so they dominate the per-word statistics
const TEMPLATES_C: &[&str] = &[
    "nobody is near {place}",
    "nobody does a single thing",
    "there is no one {place}",
    "no person is sleeping {place}",
    "{subject} is sleeping indoors",
    "a cat is sleeping on the couch",
    "a cat watches tv indoors",
    "nothing happens and nobody moves",
    "{subject} never goes {place}",
];
// Vague hypotheses drawn from one shared pool for every class, so they
// carry no word-level class signal and keep the task imperfect.
const CONFUSERS: &[&str] = &[
    "the scene is busy today",
    "the day might end well",
    "someone thinks about dinner",
    "the weather could change soon",
];

/// Deterministic synthetic corpus with planted artifacts: short generic or
/// premise-contained entailments, long purpose-clause neutrals, negated or
/// sleeping/cat contradictions. A quarter of each class uses a markerless
/// hypothesis so the audit classifier cannot be perfect.
pub fn synthetic_corpus(n_premises: usize, seed: u64, name: &str, split: Split) -> Dataset {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    fn pick(rng: &mut Xoshiro256StarStar, pool: &[&str]) -> String {
        pool[rng.next_below(pool.len() as u64) as usize].to_owned()
    }

    let mut examples = Vec::new();
    for i in 0..n_premises {
        let subject = pick(&mut rng, SUBJECTS);
        let action = pick(&mut rng, ACTIONS);
        let place = pick(&mut rng, PLACES);
        let premise = format!("{subject} {action} {place}.");
        let confuse = rng.next_below(4) == 0;

        let hyp_e = if confuse {
            pick(&mut rng, CONFUSERS)
        } else if rng.next_below(2) == 0 {
            // premise-contained shortening
            format!("{subject} {action}.")
        } else {
            format!("{}.", pick(&mut rng, GENERIC_E))
        };
        let hyp_n = if confuse {
            pick(&mut rng, CONFUSERS)
        } else {
            format!("{subject} {action} {}.", pick(&mut rng, REASONS_N))
        };
        let hyp_c = if confuse {
            pick(&mut rng, CONFUSERS)
        } else {
            let template = pick(&mut rng, TEMPLATES_C);
            format!(
                "{}.",
                template
                    .replace("{subject}", &subject)
                    .replace("{place}", &place)
            )
        };

        examples.push(Example::new(format!("syn{i}e"), &premise, hyp_e, Label::Entailment));
        examples.push(Example::new(format!("syn{i}n"), &premise, hyp_n, Label::Neutral));
        examples.push(Example::new(
            format!("syn{i}c"),
            &premise,
            hyp_c,
            Label::Contradiction,
        ));
    }
    Dataset::new(name, split, examples)
}
