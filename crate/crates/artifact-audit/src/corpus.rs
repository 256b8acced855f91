//! Dataset ingestion, tokenization, and baseline statistics.
//!
//! Input files are JSON lines in the SNLI/MultiNLI distribution format: one
//! object per line with string fields `sentence1` (premise), `sentence2`
//! (hypothesis), `gold_label`, and optionally `pairID` and `genre`. Records
//! whose `gold_label` is `"-"` (annotators reached no consensus) are skipped
//! with a count, never stored.
//!
//! Tokenization is deliberately simple and fixed, because every downstream
//! statistic depends on it: lowercase the text, replace every character that
//! is not a letter, digit, or apostrophe with a space, split on whitespace.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The three inference labels, in fixed order: an entailed hypothesis is
/// definitely true given the premise, a neutral one might be true, a
/// contradicting one is definitely not true.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Entailment,
    Neutral,
    Contradiction,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Entailment, Label::Neutral, Label::Contradiction];

    /// Position in the fixed label order (entailment 0, neutral 1,
    /// contradiction 2). Used for every per-class array in this crate.
    pub fn index(self) -> usize {
        match self {
            Label::Entailment => 0,
            Label::Neutral => 1,
            Label::Contradiction => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Label> {
        Label::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
            Label::Contradiction => "contradiction",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = ();

    /// Only the canonical lowercase names parse; everything else (including
    /// `"-"`) is rejected here and handled by the caller.
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "entailment" => Ok(Label::Entailment),
            "neutral" => Ok(Label::Neutral),
            "contradiction" => Ok(Label::Contradiction),
            _ => Err(()),
        }
    }
}

/// One labeled premise/hypothesis pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    /// Source pair identifier, or `line:<n>` when the record had none.
    pub id: String,
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
    /// MultiNLI genre, absent for SNLI.
    pub genre: Option<String>,
    /// The original JSON line, preserved verbatim so Hard/Easy output files
    /// round-trip the source records exactly.
    pub raw: String,
}

impl Example {
    /// Build an example from parts, synthesizing a canonical raw line.
    /// Intended for fixtures and tests; file loading keeps the source line.
    pub fn new(
        id: impl Into<String>,
        premise: impl Into<String>,
        hypothesis: impl Into<String>,
        label: Label,
    ) -> Example {
        let id = id.into();
        let premise = premise.into();
        let hypothesis = hypothesis.into();
        let raw = serde_json::json!({
            "sentence1": premise,
            "sentence2": hypothesis,
            "gold_label": label.as_str(),
            "pairID": id,
        })
        .to_string();
        Example {
            id,
            premise,
            hypothesis,
            label,
            genre: None,
            raw,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

/// An ordered collection of examples. Order is the source-file order;
/// downstream training determinism depends on it.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub split: Split,
    pub examples: Vec<Example>,
    /// Number of records skipped because their gold label was `"-"`.
    pub skipped: usize,
}

impl Dataset {
    pub fn new(name: impl Into<String>, split: Split, examples: Vec<Example>) -> Dataset {
        Dataset {
            name: name.into(),
            split,
            examples,
            skipped: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Per-class example counts, indexed by [`Label::index`].
    pub fn label_counts(&self) -> [u64; 3] {
        let mut counts = [0u64; 3];
        for ex in &self.examples {
            counts[ex.label.index()] += 1;
        }
        counts
    }
}

/// A normalized token sequence: lowercase, whitespace-free, no empties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenSeq {
    tokens: Vec<String>,
}

impl TokenSeq {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.tokens.iter()
    }
}

/// Lowercase, keep letters/digits/apostrophes, split on everything else.
pub fn tokenize(text: &str) -> TokenSeq {
    let lowered = text.to_lowercase();
    let tokens = lowered
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect();
    TokenSeq { tokens }
}

/// Outcome of parsing one line: a usable record, or a skip marker for
/// no-consensus records.
#[derive(Clone, Debug)]
pub enum ParsedLine {
    Record(Box<Example>),
    SkippedNoGold,
}

#[derive(Deserialize)]
struct RawRecord {
    sentence1: Option<String>,
    sentence2: Option<String>,
    gold_label: Option<String>,
    #[serde(rename = "pairID")]
    pair_id: Option<String>,
    genre: Option<String>,
}

/// Parse one JSON line. `line_no` is 1-based and reported in every error.
///
/// A `gold_label` of `"-"` yields [`ParsedLine::SkippedNoGold`] before any
/// other validation, matching the community convention for no-consensus
/// records.
pub fn parse_record(line: &str, line_no: usize) -> Result<ParsedLine> {
    let err = |msg: String| Error::ParseLine { line: line_no, msg };

    let raw: RawRecord = serde_json::from_str(line)
        .map_err(|e| err(format!("malformed JSON record: {e}")))?;

    let gold = raw
        .gold_label
        .ok_or_else(|| err("missing field \"gold_label\"".into()))?;
    if gold == "-" {
        return Ok(ParsedLine::SkippedNoGold);
    }
    let label = gold
        .parse::<Label>()
        .map_err(|()| err(format!("unrecognized gold_label {gold:?}")))?;

    let premise = raw
        .sentence1
        .ok_or_else(|| err("missing field \"sentence1\"".into()))?;
    let hypothesis = raw
        .sentence2
        .ok_or_else(|| err("missing field \"sentence2\"".into()))?;
    if premise.trim().is_empty() {
        return Err(err("empty premise".into()));
    }
    if hypothesis.trim().is_empty() {
        return Err(err("empty hypothesis".into()));
    }

    let id = match raw.pair_id {
        Some(id) if !id.is_empty() => id,
        _ => format!("line:{line_no}"),
    };

    Ok(ParsedLine::Record(Box::new(Example {
        id,
        premise,
        hypothesis,
        label,
        genre: raw.genre,
        raw: line.to_owned(),
    })))
}

/// Load a JSON-lines dataset, keeping records in file order.
///
/// Skipped (`"-"`) records are counted on the returned dataset. Any malformed
/// record aborts the load with its line number. Ids must be unique.
pub fn load_dataset(
    path: impl AsRef<Path>,
    name: impl Into<String>,
    split: Split,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut examples = Vec::new();
    let mut skipped = 0usize;
    let mut seen_ids: HashSet<String> = HashSet::new();

    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        match parse_record(&line, i + 1)? {
            ParsedLine::Record(ex) => {
                if !seen_ids.insert(ex.id.clone()) {
                    return Err(Error::DuplicateId { id: ex.id.clone() });
                }
                examples.push(*ex);
            }
            ParsedLine::SkippedNoGold => skipped += 1,
        }
    }

    Ok(Dataset {
        name: name.into(),
        split,
        examples,
        skipped,
    })
}

/// Accuracy of always predicting the most frequent label.
///
/// Ties are irrelevant: the accuracy is the maximum class count over the
/// total either way.
pub fn majority_baseline(dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let counts = dataset.label_counts();
    let max = counts.iter().copied().max().unwrap_or(0);
    Ok(max as f64 / dataset.len() as f64)
}
