//! Versioned binary model files.
//!
//! Layout, all integers and float bit patterns little-endian:
//!
//! | offset | size | field |
//! |--------|------|-------|
//! | 0      | 8    | magic `"AUDITMDL"` |
//! | 8      | 4    | format version, u32 (currently 1) |
//! | 12     | 4    | dim, u32 |
//! | 16     | 4    | epochs, u32 |
//! | 20     | 4    | min_word_count, u32 |
//! | 24     | 4    | flags, u32: bit 0 word bigrams, bit 1 char 4-grams |
//! | 28     | 4    | n_buckets, u32 |
//! | 32     | 8    | seed, u64 |
//! | 40     | 8    | lr0, f64 bits |
//! | 48     | 8    | vocab_size, u64 |
//! | 56     | ...  | embedding matrix, `(vocab_size + n_buckets) * dim` f32 |
//! | ...    | ...  | output matrix, `dim * 3` f32 |
//! | ...    | 8    | vocab blob length, u64 |
//! | ...    | len  | vocab TSV, UTF-8 (`word\tindex\n` per row) |
//!
//! Trailing bytes are rejected, so a file that loads successfully
//! re-serializes to exactly the same bytes. Manifests record the SHA-256 of
//! this canonical serialization.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::classifier::{Model, TrainConfig};
use crate::features::{FeatureConfig, Vocab};
use crate::{Error, Result};

pub const MAGIC: [u8; 8] = *b"AUDITMDL";
pub const VERSION: u32 = 1;

const FLAG_WORD_BIGRAMS: u32 = 1;
const FLAG_CHAR_4GRAMS: u32 = 1 << 1;

/// Canonical byte serialization of a model.
pub fn to_bytes(model: &Model) -> Vec<u8> {
    let config = model.config();
    let fc = &config.feature_config;

    let mut vocab_blob = Vec::new();
    model
        .vocab()
        .write_tsv(&mut vocab_blob)
        .expect("writing to a Vec cannot fail");

    let mut flags = 0u32;
    if fc.use_word_bigrams {
        flags |= FLAG_WORD_BIGRAMS;
    }
    if fc.use_char_4grams {
        flags |= FLAG_CHAR_4GRAMS;
    }

    let mut bytes = Vec::with_capacity(
        56 + 4 * (model.embedding().len() + model.output_weights().len()) + 8 + vocab_blob.len(),
    );
    bytes.extend_from_slice(&MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(config.dim as u32).to_le_bytes());
    bytes.extend_from_slice(&(config.epochs as u32).to_le_bytes());
    bytes.extend_from_slice(&fc.min_word_count.to_le_bytes());
    bytes.extend_from_slice(&flags.to_le_bytes());
    bytes.extend_from_slice(&fc.n_buckets.to_le_bytes());
    bytes.extend_from_slice(&config.seed.to_le_bytes());
    bytes.extend_from_slice(&config.lr0.to_le_bytes());
    bytes.extend_from_slice(&(model.vocab().len() as u64).to_le_bytes());
    for v in model.embedding() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for v in model.output_weights() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend_from_slice(&(vocab_blob.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&vocab_blob);
    bytes
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::ModelFormat(format!("truncated while reading {what}")))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f32_vec(&mut self, count: usize, what: &str) -> Result<Vec<f32>> {
        let raw = self.take(count * 4, what)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Model> {
    let mut cur = Cursor { bytes, pos: 0 };

    if cur.take(8, "magic")? != MAGIC {
        return Err(Error::ModelFormat("bad magic, not a model file".into()));
    }
    let version = cur.u32("version")?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format version {version} (expected {VERSION})"
        )));
    }

    let dim = cur.u32("dim")? as usize;
    let epochs = cur.u32("epochs")? as usize;
    let min_word_count = cur.u32("min_word_count")?;
    let flags = cur.u32("flags")?;
    let n_buckets = cur.u32("n_buckets")?;
    let seed = cur.u64("seed")?;
    let lr0 = cur.f64("lr0")?;
    let vocab_size = cur.u64("vocab_size")? as usize;

    let rows = vocab_size
        .checked_add(n_buckets as usize)
        .ok_or_else(|| Error::ModelFormat("vocab_size + n_buckets overflows".into()))?;
    let embedding_len = rows
        .checked_mul(dim)
        .ok_or_else(|| Error::ModelFormat("embedding size overflows".into()))?;

    let embedding = cur.f32_vec(embedding_len, "embedding matrix")?;
    let output = cur.f32_vec(dim * 3, "output matrix")?;

    let vocab_blob_len = cur.u64("vocab blob length")? as usize;
    let vocab_blob = cur.take(vocab_blob_len, "vocab blob")?;
    if cur.pos != bytes.len() {
        return Err(Error::ModelFormat(format!(
            "{} trailing bytes after vocab blob",
            bytes.len() - cur.pos
        )));
    }
    let vocab = Vocab::read_tsv(vocab_blob)?;
    if vocab.len() != vocab_size {
        return Err(Error::ModelFormat(format!(
            "vocab blob has {} words, header says {vocab_size}",
            vocab.len()
        )));
    }

    let config = TrainConfig {
        dim,
        epochs,
        lr0,
        seed,
        feature_config: FeatureConfig {
            use_word_bigrams: flags & FLAG_WORD_BIGRAMS != 0,
            use_char_4grams: flags & FLAG_CHAR_4GRAMS != 0,
            min_word_count,
            n_buckets,
        },
    };
    Model::from_parts(config, vocab, embedding, output)
}

pub fn save(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}

/// Hex SHA-256, used for model provenance in split manifests.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

impl Model {
    /// SHA-256 of the canonical serialization; equals the hash of a saved
    /// model file.
    pub fn sha256(&self) -> String {
        sha256_hex(&to_bytes(self))
    }
}
