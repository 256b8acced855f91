//! Sparse feature extraction for hypotheses.
//!
//! Words get exact dictionary indices in `[0, vocab.len())`, built from the
//! training hypotheses with a minimum-count filter. Word bigrams and
//! character 4-grams are hashed (FNV-1a 32-bit, then modulo the bucket
//! count) into `[vocab.len(), vocab.len() + n_buckets)`. FNV-1a is the same
//! n-gram hash fastText uses; it is bit-exact across platforms without a
//! crypto dependency.
//!
//! Feature-kind collisions are prevented at the string level: bigrams are
//! joined with `_`, character 4-grams carry the `#c4:` prefix and the token
//! is padded with `<` and `>` sentinels before windowing.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Dataset, TokenSeq};
use crate::{Error, Result};

pub const DEFAULT_N_BUCKETS: u32 = 2_000_000;

/// Feature extraction settings. The defaults match the SNLI configuration;
/// [`FeatureConfig::multinli`] enables character 4-grams and the min-count
/// filter of 10.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub use_word_bigrams: bool,
    pub use_char_4grams: bool,
    pub min_word_count: u32,
    pub n_buckets: u32,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            use_word_bigrams: true,
            use_char_4grams: false,
            min_word_count: 1,
            n_buckets: DEFAULT_N_BUCKETS,
        }
    }
}

impl FeatureConfig {
    pub fn multinli() -> Self {
        FeatureConfig {
            use_char_4grams: true,
            min_word_count: 10,
            ..FeatureConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_buckets == 0 {
            return Err(Error::InvalidConfig("n_buckets must be >= 1".into()));
        }
        if self.min_word_count == 0 {
            return Err(Error::InvalidConfig("min_word_count must be >= 1".into()));
        }
        Ok(())
    }
}

fn fnv1a_32(bytes: &[u8]) -> u32 {
    const OFFSET_BASIS: u32 = 2_166_136_261;
    const PRIME: u32 = 16_777_619;
    let mut hash = OFFSET_BASIS;
    for &b in bytes {
        hash ^= u32::from(b);
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

/// Bucket for a feature string: FNV-1a 32-bit over its UTF-8 bytes, modulo
/// `n_buckets`. Bit-exact across platforms.
pub fn hash_feature(s: &str, n_buckets: u32) -> u32 {
    fnv1a_32(s.as_bytes()) % n_buckets
}

/// Word dictionary built from training hypotheses: dense indices in
/// first-seen order, restricted to words with count >= `min_word_count`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    fn push(&mut self, word: String) {
        let id = self.words.len() as u32;
        self.index.insert(word.clone(), id);
        self.words.push(word);
    }

    /// Two-column TSV (`word\tindex`), one row per word in index order.
    pub fn write_tsv(&self, mut w: impl Write) -> std::io::Result<()> {
        for (i, word) in self.words.iter().enumerate() {
            writeln!(w, "{word}\t{i}")?;
        }
        Ok(())
    }

    pub fn read_tsv(r: impl BufRead) -> Result<Vocab> {
        let mut vocab = Vocab::default();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::ModelFormat(format!("vocab tsv: {e}")))?;
            let (word, idx) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::ModelFormat(format!("vocab tsv line {}: no tab", i + 1)))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::ModelFormat(format!("vocab tsv line {}: bad index", i + 1)))?;
            if idx != i {
                return Err(Error::ModelFormat(format!(
                    "vocab tsv line {}: index {idx} out of order",
                    i + 1
                )));
            }
            if vocab.index.contains_key(word) {
                return Err(Error::ModelFormat(format!(
                    "vocab tsv line {}: duplicate word {word:?}",
                    i + 1
                )));
            }
            vocab.push(word.to_owned());
        }
        Ok(vocab)
    }
}

/// Count word occurrences over tokenized training hypotheses and keep words
/// meeting the min-count threshold, in first-seen order.
pub fn build_vocab(train: &Dataset, config: &FeatureConfig) -> Result<Vocab> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut first_seen: Vec<String> = Vec::new();
    for ex in &train.examples {
        for tok in tokenize(&ex.hypothesis).iter() {
            match counts.get_mut(tok) {
                Some(c) => *c += 1,
                None => {
                    counts.insert(tok.clone(), 1);
                    first_seen.push(tok.clone());
                }
            }
        }
    }

    let mut vocab = Vocab::default();
    for word in first_seen {
        if counts[&word] >= u64::from(config.min_word_count) {
            vocab.push(word);
        }
    }
    Ok(vocab)
}

/// Sparse feature indices of one hypothesis. Duplicates are kept: each
/// occurrence contributes to the embedding average.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureIds {
    ids: Vec<u32>,
}

impl FeatureIds {
    pub fn from_ids(ids: Vec<u32>) -> FeatureIds {
        FeatureIds { ids }
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Extract feature ids: one per in-vocabulary token, then hashed bigrams over
/// adjacent token pairs, then hashed character 4-grams per token.
/// Out-of-vocabulary words contribute no word feature but still participate
/// in bigrams and character grams.
pub fn featurize(hyp: &TokenSeq, vocab: &Vocab, config: &FeatureConfig) -> FeatureIds {
    let offset = vocab.len() as u32;
    let tokens = hyp.tokens();
    let mut ids = Vec::new();

    for tok in tokens {
        if let Some(id) = vocab.id(tok) {
            ids.push(id);
        }
    }

    if config.use_word_bigrams {
        for pair in tokens.windows(2) {
            let bigram = format!("{}_{}", pair[0], pair[1]);
            ids.push(offset + hash_feature(&bigram, config.n_buckets));
        }
    }

    if config.use_char_4grams {
        let mut padded = Vec::new();
        let mut gram = String::new();
        for tok in tokens {
            padded.clear();
            padded.push('<');
            padded.extend(tok.chars());
            padded.push('>');
            for window in padded.windows(4) {
                gram.clear();
                gram.push_str("#c4:");
                gram.extend(window.iter());
                ids.push(offset + hash_feature(&gram, config.n_buckets));
            }
        }
    }

    FeatureIds { ids }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Example, Label, Split};
    use proptest::prelude::*;

    fn dataset_from_hyps(hyps: &[&str]) -> Dataset {
        let examples = hyps
            .iter()
            .enumerate()
            .map(|(i, h)| Example::new(format!("e{i}"), "premise text", *h, Label::Entailment))
            .collect();
        Dataset::new("toy", Split::Train, examples)
    }

    #[test]
    fn vocab_min_count_filter() {
        let ds = dataset_from_hyps(&["a b", "a c"]);
        let cfg = FeatureConfig {
            min_word_count: 2,
            ..FeatureConfig::default()
        };
        let vocab = build_vocab(&ds, &cfg).unwrap();
        assert_eq!(vocab.words(), ["a"]);

        let cfg = FeatureConfig::default();
        let vocab = build_vocab(&ds, &cfg).unwrap();
        assert_eq!(vocab.words(), ["a", "b", "c"]); // first-seen order
        assert_eq!(vocab.id("b"), Some(1));
    }

    #[test]
    fn vocab_rejects_empty_train() {
        let ds = Dataset::new("empty", Split::Train, vec![]);
        assert!(matches!(
            build_vocab(&ds, &FeatureConfig::default()),
            Err(Error::EmptyDataset)
        ));
    }

    // Golden values computed once with an independent FNV-1a implementation.
    #[test]
    fn fnv1a_reference_values() {
        let big = u32::MAX; // modulus larger than any 32-bit hash below
        assert_eq!(hash_feature("", big), 2_166_136_261);
        assert_eq!(hash_feature("a", big), 3_826_002_220);
        assert_eq!(hash_feature("a_b", big), 463_759_473);
        assert_eq!(hash_feature("#c4:<dog", big), 4_051_697_579);
        assert_eq!(hash_feature("outdoors", big), 437_042_508);
    }

    #[test]
    fn hash_respects_modulus() {
        assert_eq!(hash_feature("", 1000), 2_166_136_261 % 1000);
        for s in ["", "a", "anything at all", "めずらしい"] {
            assert_eq!(hash_feature(s, 1), 0);
        }
    }

    #[test]
    fn featurize_words_and_bigrams() {
        let ds = dataset_from_hyps(&["a b"]);
        let cfg = FeatureConfig {
            n_buckets: 64,
            ..FeatureConfig::default()
        };
        let vocab = build_vocab(&ds, &cfg).unwrap();

        let feats = featurize(&tokenize("a b"), &vocab, &cfg);
        let expected_bigram = vocab.len() as u32 + hash_feature("a_b", 64);
        assert_eq!(feats.ids(), [0, 1, expected_bigram]);

        // single token: no bigram
        let feats = featurize(&tokenize("a"), &vocab, &cfg);
        assert_eq!(feats.ids(), [0]);

        // empty input: empty output
        assert!(featurize(&tokenize(""), &vocab, &cfg).is_empty());
    }

    #[test]
    fn featurize_char_4grams_use_sentinels() {
        let ds = dataset_from_hyps(&["dog"]);
        let cfg = FeatureConfig {
            n_buckets: 128,
            use_char_4grams: true,
            ..FeatureConfig::default()
        };
        let vocab = build_vocab(&ds, &cfg).unwrap();
        let feats = featurize(&tokenize("dog"), &vocab, &cfg);
        // word id, then grams of "<dog>": "<dog" and "dog>"
        let off = vocab.len() as u32;
        assert_eq!(
            feats.ids(),
            [
                0,
                off + hash_feature("#c4:<dog", 128),
                off + hash_feature("#c4:dog>", 128),
            ]
        );
    }

    #[test]
    fn oov_words_still_form_bigrams() {
        let ds = dataset_from_hyps(&["a b"]);
        let cfg = FeatureConfig {
            n_buckets: 64,
            ..FeatureConfig::default()
        };
        let vocab = build_vocab(&ds, &cfg).unwrap();
        // "z" is out of vocabulary: no word feature, but two bigrams appear
        let feats = featurize(&tokenize("a z b"), &vocab, &cfg);
        let off = vocab.len() as u32;
        assert_eq!(
            feats.ids(),
            [
                0,
                1,
                off + hash_feature("a_z", 64),
                off + hash_feature("z_b", 64),
            ]
        );
    }

    proptest! {
        #[test]
        fn feature_count_formula_holds(
            words in proptest::collection::vec("[a-e]{1,6}", 0..12),
            bigrams in any::<bool>(),
            char4 in any::<bool>(),
        ) {
            let text = words.join(" ");
            let corpus = dataset_from_hyps(&["a b c d e"]);
            let cfg = FeatureConfig {
                n_buckets: 32,
                use_word_bigrams: bigrams,
                use_char_4grams: char4,
                ..FeatureConfig::default()
            };
            let vocab = build_vocab(&corpus, &cfg).unwrap();
            let toks = tokenize(&text);
            let feats = featurize(&toks, &vocab, &cfg);

            let n_words = toks.iter().filter(|t| vocab.id(t).is_some()).count();
            let n_bigrams = if bigrams { toks.len().saturating_sub(1) } else { 0 };
            let n_char4 = if char4 {
                toks.iter()
                    .map(|t| (t.chars().count() + 2).saturating_sub(3))
                    .sum::<usize>()
            } else {
                0
            };
            prop_assert_eq!(feats.len(), n_words + n_bigrams + n_char4);

            let max = vocab.len() as u32 + cfg.n_buckets;
            prop_assert!(feats.ids().iter().all(|&id| id < max));

            // determinism
            prop_assert_eq!(feats, featurize(&toks, &vocab, &cfg));
        }
    }

    #[test]
    fn vocab_tsv_round_trip() {
        let ds = dataset_from_hyps(&["outside the dog runs", "the dog sleeps"]);
        let vocab = build_vocab(&ds, &FeatureConfig::default()).unwrap();
        let mut buf = Vec::new();
        vocab.write_tsv(&mut buf).unwrap();
        let back = Vocab::read_tsv(&buf[..]).unwrap();
        assert_eq!(vocab, back);
    }
}
