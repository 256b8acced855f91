//! Corpus diagnostics: PMI word/class association, hypothesis-length
//! distributions, and premise-containment rates.
//!
//! All counts here are presence-based (document-frequency style): a word
//! repeated inside one hypothesis counts once. Coverage and PMI share that
//! counting scheme so the reported proportions describe the same quantity
//! the association scores are computed from.
//!
//! PMI uses additive smoothing over the full `vocabulary x class` grid:
//! with `c(w,k)` the presence counts, the smoothed joint is
//! `p(w,k) = (c(w,k) + alpha) / Z` where `Z` sums `c + alpha` over every
//! cell; marginals are row/column sums of that joint, and
//! `pmi(w,k) = ln p(w,k) - ln p(w,.) - ln p(.,k)` (natural log; rankings are
//! base-invariant).

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Dataset, Label};
use crate::{Error, Result};

/// Smoothed PMI and coverage for every (word, class) pair of a training set.
#[derive(Clone, Debug)]
pub struct PmiTable {
    alpha: f64,
    /// Sorted alphabetically; all iteration and output follows this order.
    words: Vec<String>,
    /// Presence counts `c(w,k)`, parallel to `words`.
    counts: Vec<[u64; 3]>,
    /// Number of hypotheses per class.
    class_totals: [u64; 3],
    pmi: Vec<[f64; 3]>,
    coverage: Vec<[f64; 3]>,
}

/// One row of a top-k ranking.
#[derive(Clone, Debug, PartialEq)]
pub struct TopWord {
    pub word: String,
    pub pmi: f64,
    /// Fraction of the class's training hypotheses containing the word.
    pub coverage: f64,
}

/// Build the smoothed PMI table from a training set's hypotheses.
pub fn pmi_table(train: &Dataset, alpha: f64) -> Result<PmiTable> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "smoothing alpha must be >= 0, got {alpha}"
        )));
    }

    let mut counts: BTreeMap<String, [u64; 3]> = BTreeMap::new();
    let mut class_totals = [0u64; 3];
    let mut seen = HashSet::new();
    for ex in &train.examples {
        let k = ex.label.index();
        class_totals[k] += 1;
        seen.clear();
        for tok in tokenize(&ex.hypothesis).iter() {
            if seen.insert(tok.clone()) {
                counts.entry(tok.clone()).or_insert([0; 3])[k] += 1;
            }
        }
    }

    let words: Vec<String> = counts.keys().cloned().collect();
    let counts: Vec<[u64; 3]> = counts.into_values().collect();

    let z: f64 = counts
        .iter()
        .flatten()
        .map(|&c| c as f64 + alpha)
        .sum();
    let joint =
        |c: u64| -> f64 { (c as f64 + alpha) / z };

    let mut class_marginals = [0.0f64; 3];
    for row in &counts {
        for k in 0..3 {
            class_marginals[k] += joint(row[k]);
        }
    }

    let mut pmi = Vec::with_capacity(counts.len());
    let mut coverage = Vec::with_capacity(counts.len());
    for row in &counts {
        let word_marginal: f64 = row.iter().map(|&c| joint(c)).sum();
        let mut p = [0.0f64; 3];
        let mut cov = [0.0f64; 3];
        for k in 0..3 {
            p[k] = joint(row[k]).ln() - word_marginal.ln() - class_marginals[k].ln();
            cov[k] = if class_totals[k] == 0 {
                0.0
            } else {
                row[k] as f64 / class_totals[k] as f64
            };
        }
        pmi.push(p);
        coverage.push(cov);
    }

    Ok(PmiTable {
        alpha,
        words,
        counts,
        class_totals,
        pmi,
        coverage,
    })
}

impl PmiTable {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Vocabulary size (all distinct hypothesis tokens, no count filter).
    pub fn vocab_len(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn class_totals(&self) -> [u64; 3] {
        self.class_totals
    }

    fn word_index(&self, word: &str) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }

    pub fn pmi(&self, word: &str, class: Label) -> Option<f64> {
        self.word_index(word).map(|i| self.pmi[i][class.index()])
    }

    pub fn coverage(&self, word: &str, class: Label) -> Option<f64> {
        self.word_index(word)
            .map(|i| self.coverage[i][class.index()])
    }

    pub fn presence_count(&self, word: &str, class: Label) -> Option<u64> {
        self.word_index(word)
            .map(|i| self.counts[i][class.index()])
    }

    /// Smoothed joint probability `p(word, class)`; the full grid sums to 1.
    pub fn smoothed_joint(&self, word: &str, class: Label) -> Option<f64> {
        let z: f64 = self
            .counts
            .iter()
            .flatten()
            .map(|&c| c as f64 + self.alpha)
            .sum();
        self.word_index(word)
            .map(|i| (self.counts[i][class.index()] as f64 + self.alpha) / z)
    }

    /// Top `k` words for a class, descending by PMI, ties alphabetical.
    pub fn top_k(&self, class: Label, k: usize) -> Vec<TopWord> {
        let ki = class.index();
        let mut order: Vec<usize> = (0..self.words.len()).collect();
        order.sort_by(|&a, &b| {
            self.pmi[b][ki]
                .total_cmp(&self.pmi[a][ki])
                .then_with(|| self.words[a].cmp(&self.words[b]))
        });
        order
            .into_iter()
            .take(k)
            .map(|i| TopWord {
                word: self.words[i].clone(),
                pmi: self.pmi[i][ki],
                coverage: self.coverage[i][ki],
            })
            .collect()
    }

    /// TSV with columns `word`, `class`, `pmi`, `coverage`; words
    /// alphabetical, classes in fixed label order.
    pub fn write_tsv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "word\tclass\tpmi\tcoverage")?;
        for (i, word) in self.words.iter().enumerate() {
            for label in Label::ALL {
                let k = label.index();
                writeln!(
                    w,
                    "{word}\t{label}\t{:.6}\t{:.6}",
                    self.pmi[i][k], self.coverage[i][k]
                )?;
            }
        }
        Ok(())
    }
}

/// Hypothesis-length distribution for one class.
#[derive(Clone, Debug)]
pub struct ClassLengthStats {
    counts: BTreeMap<u32, u64>,
    n: u64,
    mean: f64,
    median: u32,
}

impl ClassLengthStats {
    fn from_counts(counts: BTreeMap<u32, u64>) -> ClassLengthStats {
        let n: u64 = counts.values().sum();
        let mean = if n == 0 {
            0.0
        } else {
            counts
                .iter()
                .map(|(&len, &c)| len as f64 * c as f64)
                .sum::<f64>()
                / n as f64
        };
        let mut stats = ClassLengthStats {
            counts,
            n,
            mean,
            median: 0,
        };
        stats.median = stats.quantile(0.5);
        stats
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Lower median: the smallest length whose cumulative count reaches
    /// `ceil(n/2)`.
    pub fn median(&self) -> u32 {
        self.median
    }

    /// Probability mass at one length.
    pub fn prob(&self, len: u32) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        *self.counts.get(&len).unwrap_or(&0) as f64 / self.n as f64
    }

    /// `(length, probability)` pairs in ascending length order.
    pub fn pmf(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.counts
            .iter()
            .map(|(&len, &c)| (len, c as f64 / self.n as f64))
    }

    /// Smallest length whose CDF reaches `q` (so `quantile(0.5)` is the
    /// lower median). `q` outside `(0, 1]` is clamped into it.
    pub fn quantile(&self, q: f64) -> u32 {
        let q = q.clamp(0.0, 1.0);
        // small slack so exact ranks survive the float multiply
        let rank = ((q * self.n as f64) - 1e-9).ceil().max(1.0) as u64;
        let mut cum = 0u64;
        for (&len, &c) in &self.counts {
            cum += c;
            if cum >= rank {
                return len;
            }
        }
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// Fraction of this class's hypotheses with at most `len` tokens.
    pub fn frac_at_most(&self, len: u32) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let cum: u64 = self
            .counts
            .range(..=len)
            .map(|(_, &c)| c)
            .sum();
        cum as f64 / self.n as f64
    }
}

/// Per-class hypothesis-length PMFs plus the class distribution conditioned
/// on length.
#[derive(Clone, Debug)]
pub struct LengthStats {
    per_class: [ClassLengthStats; 3],
    /// For each observed length, per-class counts.
    by_length: BTreeMap<u32, [u64; 3]>,
    total: u64,
}

/// Token counts are produced by [`crate::corpus::tokenize`] over the
/// hypotheses.
pub fn length_stats(dataset: &Dataset) -> Result<LengthStats> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut class_counts: [BTreeMap<u32, u64>; 3] = Default::default();
    let mut by_length: BTreeMap<u32, [u64; 3]> = BTreeMap::new();
    for ex in &dataset.examples {
        let len = tokenize(&ex.hypothesis).len() as u32;
        let k = ex.label.index();
        *class_counts[k].entry(len).or_insert(0) += 1;
        by_length.entry(len).or_insert([0; 3])[k] += 1;
    }
    Ok(LengthStats {
        per_class: class_counts.map(ClassLengthStats::from_counts),
        by_length,
        total: dataset.len() as u64,
    })
}

impl LengthStats {
    pub fn class(&self, label: Label) -> &ClassLengthStats {
        &self.per_class[label.index()]
    }

    /// All observed lengths, ascending.
    pub fn lengths(&self) -> impl Iterator<Item = u32> + '_ {
        self.by_length.keys().copied()
    }

    /// `P(class | length = len)`, or `None` for unobserved lengths.
    pub fn class_given_length(&self, len: u32) -> Option<[f64; 3]> {
        self.by_length.get(&len).map(|counts| {
            let total: u64 = counts.iter().sum();
            counts.map(|c| c as f64 / total as f64)
        })
    }

    /// Fraction of hypotheses with `length >= len` whose class is `label`.
    pub fn class_share_at_least(&self, label: Label, len: u32) -> f64 {
        let mut class = 0u64;
        let mut total = 0u64;
        for (_, counts) in self.by_length.range(len..) {
            class += counts[label.index()];
            total += counts.iter().sum::<u64>();
        }
        if total == 0 {
            0.0
        } else {
            class as f64 / total as f64
        }
    }

    /// `P(class)` over the dataset the stats were built from.
    pub fn class_prob(&self, label: Label) -> f64 {
        self.per_class[label.index()].n as f64 / self.total as f64
    }

    /// TSV with columns `class`, `length`, `probability`; classes in fixed
    /// label order, lengths ascending. Suitable for external plotting.
    pub fn write_pmf_tsv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "class\tlength\tprobability")?;
        for label in Label::ALL {
            for (len, p) in self.class(label).pmf() {
                writeln!(w, "{label}\t{len}\t{p:.6}")?;
            }
        }
        Ok(())
    }
}

/// Whether containment compares token sets or full multisets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContainmentMode {
    /// Every distinct hypothesis token appears among the premise tokens.
    Set,
    /// Token multiplicities must be covered too.
    Multiset,
}

/// Per-class premise-containment rates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContainmentStats {
    pub mode: ContainmentMode,
    /// Contained-hypothesis counts per class, fixed label order.
    pub contained: [u64; 3],
    pub totals: [u64; 3],
}

impl ContainmentStats {
    pub fn fraction(&self, label: Label) -> f64 {
        let k = label.index();
        if self.totals[k] == 0 {
            0.0
        } else {
            self.contained[k] as f64 / self.totals[k] as f64
        }
    }

    pub fn write_json(&self, mut w: impl Write) -> Result<()> {
        #[derive(Serialize)]
        struct ClassEntry {
            contained: u64,
            total: u64,
            fraction: f64,
        }
        #[derive(Serialize)]
        struct Doc {
            mode: ContainmentMode,
            classes: BTreeMap<&'static str, ClassEntry>,
        }
        let mut classes = BTreeMap::new();
        for label in Label::ALL {
            let k = label.index();
            classes.insert(
                label.as_str(),
                ClassEntry {
                    contained: self.contained[k],
                    total: self.totals[k],
                    fraction: self.fraction(label),
                },
            );
        }
        let doc = Doc {
            mode: self.mode,
            classes,
        };
        serde_json::to_writer_pretty(&mut w, &doc)
            .map_err(|e| Error::InvalidConfig(format!("serializing containment: {e}")))?;
        writeln!(w).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

fn multiset(tokens: &crate::corpus::TokenSeq) -> BTreeMap<&str, u64> {
    let mut m = BTreeMap::new();
    for t in tokens.iter() {
        *m.entry(t.as_str()).or_insert(0) += 1;
    }
    m
}

/// Fraction of each class's hypotheses whose tokens all appear in the
/// premise (set semantics; a hypothesis with no tokens is vacuously
/// contained).
pub fn containment_stats(dataset: &Dataset) -> Result<ContainmentStats> {
    containment_stats_with(dataset, ContainmentMode::Set)
}

pub fn containment_stats_with(dataset: &Dataset, mode: ContainmentMode) -> Result<ContainmentStats> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut contained = [0u64; 3];
    let mut totals = [0u64; 3];
    for ex in &dataset.examples {
        let k = ex.label.index();
        totals[k] += 1;
        let hyp = tokenize(&ex.hypothesis);
        let prem = tokenize(&ex.premise);
        let is_contained = match mode {
            ContainmentMode::Set => {
                let prem_set: HashSet<&str> = prem.iter().map(String::as_str).collect();
                hyp.iter().all(|t| prem_set.contains(t.as_str()))
            }
            ContainmentMode::Multiset => {
                let prem_counts = multiset(&prem);
                multiset(&hyp)
                    .iter()
                    .all(|(t, c)| prem_counts.get(t).is_some_and(|pc| pc >= c))
            }
        };
        if is_contained {
            contained[k] += 1;
        }
    }
    Ok(ContainmentStats {
        mode,
        contained,
        totals,
    })
}
