//! Hard/Easy partitioning and re-evaluation of external predictions.
//!
//! A test example is Easy when the audit classifier predicts its gold label
//! and Hard otherwise. The manifest records per-example buckets together
//! with the SHA-256 of the audit model that produced them, because bucket
//! membership depends on training randomness: a manifest is only meaningful
//! relative to one specific model file.
//!
//! Predictions for external models are ingested from files (JSON lines with
//! `id`/`label` fields, or two-column TSV) and scored on the full test set
//! and both buckets. Easy accuracy below full accuracy is flagged in the
//! report but never treated as an error: the Hard-below-Easy pattern is an
//! empirical tendency, not an identity.

use std::collections::HashMap;
use std::fs;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{predict_labels, Model};
use crate::corpus::{Dataset, Label};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Hard,
    Easy,
}

/// One test example's partition outcome. `predicted` is absent only for
/// manifests ingested from externally published Hard-id lists; when present,
/// `bucket == Easy` exactly when `predicted == gold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub gold: Label,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted: Option<Label>,
    pub bucket: Bucket,
}

/// Per-example Hard/Easy assignment with provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub dataset_name: String,
    /// SHA-256 of the audit model's canonical serialization, or a caller
    /// provided tag for ingested manifests.
    pub model_sha256: String,
    pub entries: Vec<ManifestEntry>,
}

impl SplitManifest {
    pub fn n_easy(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.bucket == Bucket::Easy)
            .count()
    }

    pub fn n_hard(&self) -> usize {
        self.entries.len() - self.n_easy()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::ManifestMismatch(format!("serialize: {e}")))?;
        json.push('\n');
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SplitManifest> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let manifest: SplitManifest = serde_json::from_slice(&bytes)
            .map_err(|e| Error::ManifestMismatch(format!("{}: {e}", path.display())))?;
        manifest.validate()?;
        Ok(manifest)
    }

    /// Internal consistency: unique ids, bucket rule wherever a prediction
    /// is recorded.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::DuplicateId { id: e.id.clone() });
            }
            if let Some(pred) = e.predicted {
                let expect = if pred == e.gold {
                    Bucket::Easy
                } else {
                    Bucket::Hard
                };
                if e.bucket != expect {
                    return Err(Error::ManifestMismatch(format!(
                        "entry {:?} has bucket {:?} but predicted {pred} vs gold {}",
                        e.id, e.bucket, e.gold
                    )));
                }
            }
        }
        Ok(())
    }

    /// Check that entries cover exactly the test set, in order.
    pub fn check_against(&self, test: &Dataset) -> Result<()> {
        if self.entries.len() != test.len() {
            return Err(Error::ManifestMismatch(format!(
                "manifest has {} entries, test set has {}",
                self.entries.len(),
                test.len()
            )));
        }
        for (entry, ex) in self.entries.iter().zip(&test.examples) {
            if entry.id != ex.id {
                return Err(Error::ManifestMismatch(format!(
                    "manifest id {:?} does not match test id {:?}",
                    entry.id, ex.id
                )));
            }
            if entry.gold != ex.label {
                return Err(Error::ManifestMismatch(format!(
                    "manifest gold {} for {:?} does not match test label {}",
                    entry.gold, entry.id, ex.label
                )));
            }
        }
        Ok(())
    }

    /// Build a manifest from an externally published list of Hard ids
    /// (everything else becomes Easy). Predictions are unknown, so
    /// `predicted` stays empty. Unknown ids in the list are an error.
    pub fn from_hard_ids<I, S>(test: &Dataset, hard_ids: I, provenance: &str) -> Result<SplitManifest>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut hard: std::collections::HashSet<String> = std::collections::HashSet::new();
        for id in hard_ids {
            if !hard.insert(id.as_ref().to_owned()) {
                return Err(Error::DuplicateId {
                    id: id.as_ref().to_owned(),
                });
            }
        }
        let known: std::collections::HashSet<&str> =
            test.examples.iter().map(|e| e.id.as_str()).collect();
        for id in &hard {
            if !known.contains(id.as_str()) {
                return Err(Error::ManifestMismatch(format!(
                    "hard id {id:?} not present in test set"
                )));
            }
        }
        let entries = test
            .examples
            .iter()
            .map(|ex| ManifestEntry {
                id: ex.id.clone(),
                gold: ex.label,
                predicted: None,
                bucket: if hard.contains(&ex.id) {
                    Bucket::Hard
                } else {
                    Bucket::Easy
                },
            })
            .collect();
        Ok(SplitManifest {
            dataset_name: test.name.clone(),
            model_sha256: provenance.to_owned(),
            entries,
        })
    }
}

/// Partition a test set by the audit model's correctness. Deterministic for
/// a given `(model, test)`; the manifest records the model's hash.
pub fn partition(model: &Model, test: &Dataset) -> Result<SplitManifest> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let predictions = predict_labels(model, test)?;
    let entries = test
        .examples
        .iter()
        .zip(predictions)
        .map(|(ex, pred)| ManifestEntry {
            id: ex.id.clone(),
            gold: ex.label,
            predicted: Some(pred),
            bucket: if pred == ex.label {
                Bucket::Easy
            } else {
                Bucket::Hard
            },
        })
        .collect();
    Ok(SplitManifest {
        dataset_name: test.name.clone(),
        model_sha256: model.sha256(),
        entries,
    })
}

/// Counts returned by [`write_splits`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitCounts {
    pub n_hard: usize,
    pub n_easy: usize,
}

/// Write `hard.jsonl` and `easy.jsonl` under `out_dir`, each record the
/// original input line verbatim, partitioned by bucket. The manifest must
/// match the test set exactly. An empty bucket produces a valid empty file
/// and a warning.
pub fn write_splits(
    manifest: &SplitManifest,
    test: &Dataset,
    out_dir: impl AsRef<Path>,
) -> Result<SplitCounts> {
    manifest.check_against(test)?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let hard_path = out_dir.join("hard.jsonl");
    let easy_path = out_dir.join("easy.jsonl");
    let mut hard = BufWriter::new(File::create(&hard_path).map_err(|e| Error::io(&hard_path, e))?);
    let mut easy = BufWriter::new(File::create(&easy_path).map_err(|e| Error::io(&easy_path, e))?);

    let mut counts = SplitCounts {
        n_hard: 0,
        n_easy: 0,
    };
    for (entry, ex) in manifest.entries.iter().zip(&test.examples) {
        let (file, path) = match entry.bucket {
            Bucket::Hard => {
                counts.n_hard += 1;
                (&mut hard, &hard_path)
            }
            Bucket::Easy => {
                counts.n_easy += 1;
                (&mut easy, &easy_path)
            }
        };
        writeln!(file, "{}", ex.raw).map_err(|e| Error::io(path, e))?;
    }
    hard.flush().map_err(|e| Error::io(&hard_path, e))?;
    easy.flush().map_err(|e| Error::io(&easy_path, e))?;

    if counts.n_hard == 0 {
        log::warn!("hard bucket is empty; wrote an empty {}", hard_path.display());
    }
    if counts.n_easy == 0 {
        log::warn!("easy bucket is empty; wrote an empty {}", easy_path.display());
    }
    Ok(counts)
}

/// Accuracy of one external model on the full test set and both buckets.
/// Bucket accuracies are absent when the bucket is empty. The count identity
/// `correct_full == correct_hard + correct_easy` holds by construction and
/// is re-checked by the test suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_name: String,
    pub n_full: usize,
    pub n_hard: usize,
    pub n_easy: usize,
    pub correct_full: usize,
    pub correct_hard: usize,
    pub correct_easy: usize,
    pub accuracy_full: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub accuracy_hard: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub accuracy_easy: Option<f64>,
    /// True when the usual Easy >= Full >= Hard ordering is violated.
    /// Informational only.
    pub tendency_violated: bool,
}

fn parse_label_str(s: &str, path: &Path, what: &str) -> Result<Label> {
    s.parse::<Label>().map_err(|()| Error::Predictions {
        path: path.to_owned(),
        msg: format!("unparseable label {s:?} for {what}"),
    })
}

/// Read a predictions file: JSON lines `{"id": ..., "label": ...}` when the
/// first non-blank line starts with `{`, two-column TSV otherwise.
/// Duplicate ids are an error.
pub fn read_predictions(path: impl AsRef<Path>) -> Result<HashMap<String, Label>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    #[derive(Deserialize)]
    struct PredRecord {
        id: String,
        label: String,
    }

    let mut preds = HashMap::new();
    let mut format: Option<bool> = None; // Some(true) = jsonl
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() {
            continue;
        }
        let is_json = *format.get_or_insert_with(|| trimmed.trim_start().starts_with('{'));
        let (id, label) = if is_json {
            let rec: PredRecord =
                serde_json::from_str(trimmed).map_err(|e| Error::Predictions {
                    path: path.to_owned(),
                    msg: format!("line {}: {e}", i + 1),
                })?;
            let label = parse_label_str(&rec.label, path, &format!("id {:?}", rec.id))?;
            (rec.id, label)
        } else {
            let (id, label) = trimmed.split_once('\t').ok_or_else(|| Error::Predictions {
                path: path.to_owned(),
                msg: format!("line {}: expected two tab-separated columns", i + 1),
            })?;
            (
                id.to_owned(),
                parse_label_str(label.trim(), path, &format!("id {id:?}"))?,
            )
        };
        if preds.insert(id.clone(), label).is_some() {
            return Err(Error::Predictions {
                path: path.to_owned(),
                msg: format!("duplicate id {id:?}"),
            });
        }
    }
    Ok(preds)
}

/// Score one predictions file against a manifest. Every test id must appear
/// exactly once; unknown, duplicate, or missing ids are errors, never
/// silently dropped.
pub fn score_predictions(
    pred_path: impl AsRef<Path>,
    manifest: &SplitManifest,
    test: &Dataset,
) -> Result<EvalReport> {
    let pred_path = pred_path.as_ref();
    manifest.check_against(test)?;
    let mut preds = read_predictions(pred_path)?;

    let mut report = EvalReport {
        model_name: pred_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| pred_path.display().to_string()),
        n_full: manifest.entries.len(),
        n_hard: 0,
        n_easy: 0,
        correct_full: 0,
        correct_hard: 0,
        correct_easy: 0,
        accuracy_full: 0.0,
        accuracy_hard: None,
        accuracy_easy: None,
        tendency_violated: false,
    };

    for entry in &manifest.entries {
        let pred = preds.remove(&entry.id).ok_or_else(|| Error::Predictions {
            path: pred_path.to_owned(),
            msg: format!("missing id {:?}", entry.id),
        })?;
        let correct = pred == entry.gold;
        match entry.bucket {
            Bucket::Hard => {
                report.n_hard += 1;
                if correct {
                    report.correct_hard += 1;
                }
            }
            Bucket::Easy => {
                report.n_easy += 1;
                if correct {
                    report.correct_easy += 1;
                }
            }
        }
        if correct {
            report.correct_full += 1;
        }
    }
    if let Some(id) = preds.keys().next() {
        return Err(Error::Predictions {
            path: pred_path.to_owned(),
            msg: format!("{} unknown id(s), e.g. {id:?}", preds.len()),
        });
    }

    report.accuracy_full = report.correct_full as f64 / report.n_full as f64;
    if report.n_hard > 0 {
        report.accuracy_hard = Some(report.correct_hard as f64 / report.n_hard as f64);
    }
    if report.n_easy > 0 {
        report.accuracy_easy = Some(report.correct_easy as f64 / report.n_easy as f64);
    }
    report.tendency_violated = match (report.accuracy_easy, report.accuracy_hard) {
        (Some(e), Some(h)) => !(e >= report.accuracy_full && report.accuracy_full >= h),
        (Some(e), None) => e < report.accuracy_full,
        (None, Some(h)) => h > report.accuracy_full,
        (None, None) => false,
    };
    Ok(report)
}

/// Pretty JSON array of reports plus trailing newline.
pub fn write_reports_json(reports: &[EvalReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut json = serde_json::to_string_pretty(reports)
        .map_err(|e| Error::Predictions {
            path: path.to_owned(),
            msg: format!("serialize: {e}"),
        })?;
    json.push('\n');
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Markdown table of accuracies (percent, one decimal) per scored model.
pub fn render_reports_markdown(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    out.push_str("| Model | Full | Hard | Easy | n | n Hard | n Easy |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    let pct = |a: Option<f64>| match a {
        Some(a) => format!("{:.1}", 100.0 * a),
        None => "-".to_owned(),
    };
    for r in reports {
        out.push_str(&format!(
            "| {} | {:.1} | {} | {} | {} | {} | {} |\n",
            r.model_name,
            100.0 * r.accuracy_full,
            pct(r.accuracy_hard),
            pct(r.accuracy_easy),
            r.n_full,
            r.n_hard,
            r.n_easy,
        ));
    }
    for r in reports {
        if r.tendency_violated {
            out.push_str(&format!(
                "\nNote: {} does not follow the usual Easy >= Full >= Hard ordering.\n",
                r.model_name
            ));
        }
    }
    out
}
