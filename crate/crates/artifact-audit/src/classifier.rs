//! The premise-oblivious classifier.
//!
//! Architecture: each feature id selects a row of an embedding table; the
//! rows are averaged into a hidden vector, mapped by a linear output matrix
//! to three logits, and normalized with softmax. Training is plain SGD on
//! the negative log-likelihood of the gold label, one step per example, with
//! a linearly decaying learning rate `lr0 * (1 - t/T)` over `T = epochs *
//! n_examples` total steps.
//!
//! Everything is deterministic for a given `(dataset order, TrainConfig)`:
//! the embedding table is initialized uniformly in `[-1/dim, 1/dim)` from the
//! seeded generator in [`crate::rng`] (row-major fill), the output matrix
//! starts at zero, and each epoch visits the examples in a seeded shuffle
//! drawn from the same generator stream. Weights are stored as `f32`; all
//! reductions (averaging, logits, softmax, gradients) run in `f64`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Dataset, Label};
use crate::features::{build_vocab, featurize, FeatureConfig, FeatureIds, Vocab};
use crate::rng::Xoshiro256StarStar;
use crate::{Error, Result};

/// Training settings. Defaults: 50-dimensional embeddings, 5 epochs, initial
/// learning rate 0.1, seed 42.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub lr0: f64,
    pub seed: u64,
    pub feature_config: FeatureConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 50,
            epochs: 5,
            lr0: 0.1,
            seed: 42,
            feature_config: FeatureConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dim must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::InvalidConfig("lr0 must be positive".into()));
        }
        self.feature_config.validate()
    }
}

/// Softmax output over the three labels plus the argmax, ties broken by the
/// fixed label order entailment < neutral < contradiction.
#[derive(Clone, Copy, Debug)]
pub struct Prediction {
    pub probs: [f64; 3],
    pub argmax: Label,
}

/// Gradients of one example's negative log-likelihood, in `f64`.
#[derive(Clone, Debug)]
pub struct NllGradients {
    pub nll: f64,
    /// d nll / d output, row-major `dim x 3`.
    pub output: Vec<f64>,
    /// d nll / d embedding row, one entry per distinct touched row
    /// (ascending row id), each of length `dim`.
    pub embedding: Vec<(u32, Vec<f64>)>,
}

/// Trained classifier parameters plus everything needed to featurize new
/// hypotheses the same way as during training.
#[derive(Clone, Debug)]
pub struct Model {
    config: TrainConfig,
    vocab: Vocab,
    /// Row-major `(vocab.len() + n_buckets) x dim`.
    embedding: Vec<f32>,
    /// Row-major `dim x 3`.
    output: Vec<f32>,
}

fn softmax3(logits: [f64; 3]) -> [f64; 3] {
    let max = logits[0].max(logits[1]).max(logits[2]);
    let exps = [
        (logits[0] - max).exp(),
        (logits[1] - max).exp(),
        (logits[2] - max).exp(),
    ];
    let sum = exps[0] + exps[1] + exps[2];
    [exps[0] / sum, exps[1] / sum, exps[2] / sum]
}

fn argmax3(probs: [f64; 3]) -> Label {
    let mut best = 0;
    for i in 1..3 {
        if probs[i] > probs[best] {
            best = i;
        }
    }
    Label::from_index(best).unwrap()
}

impl Model {
    pub(crate) fn from_parts(
        config: TrainConfig,
        vocab: Vocab,
        embedding: Vec<f32>,
        output: Vec<f32>,
    ) -> Result<Model> {
        config.validate()?;
        let rows = vocab.len() + config.feature_config.n_buckets as usize;
        if embedding.len() != rows * config.dim {
            return Err(Error::ModelFormat(format!(
                "embedding has {} values, expected {} rows x dim {}",
                embedding.len(),
                rows,
                config.dim
            )));
        }
        if output.len() != config.dim * 3 {
            return Err(Error::ModelFormat(format!(
                "output matrix has {} values, expected dim {} x 3",
                output.len(),
                config.dim
            )));
        }
        Ok(Model {
            config,
            vocab,
            embedding,
            output,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    /// Total embedding rows: exact word slots plus hashed n-gram buckets.
    pub fn n_rows(&self) -> usize {
        self.vocab.len() + self.config.feature_config.n_buckets as usize
    }

    /// Row-major `n_rows x dim` embedding table.
    pub fn embedding(&self) -> &[f32] {
        &self.embedding
    }

    pub fn embedding_mut(&mut self) -> &mut [f32] {
        &mut self.embedding
    }

    /// Row-major `dim x 3` output matrix.
    pub fn output_weights(&self) -> &[f32] {
        &self.output
    }

    pub fn output_weights_mut(&mut self) -> &mut [f32] {
        &mut self.output
    }

    /// Tokenize and featurize a hypothesis with this model's vocabulary and
    /// feature settings.
    pub fn featurize_hypothesis(&self, hypothesis: &str) -> FeatureIds {
        featurize(
            &tokenize(hypothesis),
            &self.vocab,
            &self.config.feature_config,
        )
    }

    fn check_range(&self, feats: &FeatureIds) -> Result<()> {
        let rows = self.n_rows();
        for &id in feats.ids() {
            if (id as usize) >= rows {
                return Err(Error::FeatureRange { index: id, rows });
            }
        }
        Ok(())
    }

    /// Mean of the touched embedding rows; the zero vector for empty input.
    fn hidden(&self, feats: &FeatureIds) -> Vec<f64> {
        let dim = self.config.dim;
        let mut h = vec![0.0f64; dim];
        if feats.is_empty() {
            return h;
        }
        for &id in feats.ids() {
            let row = &self.embedding[id as usize * dim..(id as usize + 1) * dim];
            for (hd, &v) in h.iter_mut().zip(row) {
                *hd += f64::from(v);
            }
        }
        let inv = 1.0 / feats.len() as f64;
        for hd in &mut h {
            *hd *= inv;
        }
        h
    }

    fn logits(&self, h: &[f64]) -> [f64; 3] {
        let mut z = [0.0f64; 3];
        for (d, &hd) in h.iter().enumerate() {
            let row = &self.output[d * 3..d * 3 + 3];
            z[0] += hd * f64::from(row[0]);
            z[1] += hd * f64::from(row[1]);
            z[2] += hd * f64::from(row[2]);
        }
        z
    }

    pub fn forward(&self, feats: &FeatureIds) -> Result<Prediction> {
        self.check_range(feats)?;
        let probs = softmax3(self.logits(&self.hidden(feats)));
        Ok(Prediction {
            probs,
            argmax: argmax3(probs),
        })
    }

    /// Negative log-likelihood of `gold` for one example.
    pub fn nll(&self, feats: &FeatureIds, gold: Label) -> Result<f64> {
        self.check_range(feats)?;
        let probs = softmax3(self.logits(&self.hidden(feats)));
        Ok(-probs[gold.index()].ln())
    }

    /// Analytic gradients of the example's negative log-likelihood with
    /// respect to the output matrix and each touched embedding row.
    pub fn nll_gradients(&self, feats: &FeatureIds, gold: Label) -> Result<NllGradients> {
        self.check_range(feats)?;
        let dim = self.config.dim;
        let h = self.hidden(feats);
        let probs = softmax3(self.logits(&h));
        let nll = -probs[gold.index()].ln();

        let mut dz = probs;
        dz[gold.index()] -= 1.0;

        let mut d_output = vec![0.0f64; dim * 3];
        let mut dh = vec![0.0f64; dim];
        for d in 0..dim {
            let row = &self.output[d * 3..d * 3 + 3];
            for j in 0..3 {
                d_output[d * 3 + j] = h[d] * dz[j];
                dh[d] += f64::from(row[j]) * dz[j];
            }
        }

        let mut d_embedding = Vec::new();
        if !feats.is_empty() {
            let mut counts: std::collections::BTreeMap<u32, u32> = std::collections::BTreeMap::new();
            for &id in feats.ids() {
                *counts.entry(id).or_insert(0) += 1;
            }
            let n = feats.len() as f64;
            for (row, mult) in counts {
                let scale = f64::from(mult) / n;
                d_embedding.push((row, dh.iter().map(|&g| g * scale).collect()));
            }
        }

        Ok(NllGradients {
            nll,
            output: d_output,
            embedding: d_embedding,
        })
    }

    /// One SGD step on this example's negative log-likelihood. Returns the
    /// loss before the update. Embedding updates are applied once per feature
    /// occurrence. Empty inputs leave the model unchanged.
    pub fn sgd_step(&mut self, feats: &FeatureIds, gold: Label, lr: f64) -> Result<f64> {
        self.check_range(feats)?;
        let dim = self.config.dim;
        let h = self.hidden(feats);
        let probs = softmax3(self.logits(&h));
        let nll = -probs[gold.index()].ln();

        let mut dz = probs;
        dz[gold.index()] -= 1.0;

        let mut dh = vec![0.0f64; dim];
        for d in 0..dim {
            let row = &mut self.output[d * 3..d * 3 + 3];
            for j in 0..3 {
                dh[d] += f64::from(row[j]) * dz[j];
                let g = h[d] * dz[j];
                row[j] = (f64::from(row[j]) - lr * g) as f32;
            }
        }

        if !feats.is_empty() {
            let scale = lr / feats.len() as f64;
            for &id in feats.ids() {
                let row = &mut self.embedding[id as usize * dim..(id as usize + 1) * dim];
                for (v, &g) in row.iter_mut().zip(&dh) {
                    *v = (f64::from(*v) - scale * g) as f32;
                }
            }
        }

        Ok(nll)
    }
}

/// Train the classifier on the hypotheses of `train_set`.
///
/// Requires a non-empty dataset; a missing label class is logged as a
/// warning and training proceeds. The PRNG stream is consumed in a fixed
/// order: embedding initialization first, then one shuffle per epoch.
pub fn train(train_set: &Dataset, config: &TrainConfig) -> Result<Model> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let label_counts = train_set.label_counts();
    for label in Label::ALL {
        if label_counts[label.index()] == 0 {
            log::warn!(
                "training set {:?} has no {} examples; proceeding anyway",
                train_set.name,
                label
            );
        }
    }

    let vocab = build_vocab(train_set, &config.feature_config)?;
    let rows = vocab.len() + config.feature_config.n_buckets as usize;
    if rows > u32::MAX as usize {
        return Err(Error::InvalidConfig(format!(
            "vocab size {} + n_buckets {} exceeds the feature id range",
            vocab.len(),
            config.feature_config.n_buckets
        )));
    }

    let feats: Vec<FeatureIds> = train_set
        .examples
        .iter()
        .map(|ex| featurize(&tokenize(&ex.hypothesis), &vocab, &config.feature_config))
        .collect();
    let golds: Vec<Label> = train_set.examples.iter().map(|ex| ex.label).collect();

    let mut rng = Xoshiro256StarStar::seed_from_u64(config.seed);
    let bound = 1.0 / config.dim as f64;
    let mut embedding = Vec::with_capacity(rows * config.dim);
    for _ in 0..rows * config.dim {
        embedding.push(rng.uniform(-bound, bound) as f32);
    }
    let output = vec![0.0f32; config.dim * 3];
    let mut model = Model::from_parts(config.clone(), vocab, embedding, output)?;

    let n = train_set.len();
    let total_steps = (config.epochs * n) as f64;
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut step = 0usize;
    for _ in 0..config.epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            let lr = config.lr0 * (1.0 - step as f64 / total_steps);
            model.sgd_step(&feats[i as usize], golds[i as usize], lr)?;
            step += 1;
        }
    }

    Ok(model)
}

/// Per-label precision/recall; a zero denominator yields 0.0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub support: u64,
}

/// Evaluation summary: accuracy, confusion matrix (rows gold, columns
/// predicted, fixed label order), and per-label precision/recall.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n_examples: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    pub confusion: [[u64; 3]; 3],
    pub per_label: [LabelMetrics; 3],
}

pub(crate) fn predict_labels(model: &Model, dataset: &Dataset) -> Result<Vec<Label>> {
    dataset
        .examples
        .par_iter()
        .map(|ex| {
            let feats = model.featurize_hypothesis(&ex.hypothesis);
            model.forward(&feats).map(|p| p.argmax)
        })
        .collect()
}

pub(crate) fn metrics_from_confusion(confusion: [[u64; 3]; 3]) -> Metrics {
    let n: u64 = confusion.iter().flatten().sum();
    let correct: u64 = (0..3).map(|i| confusion[i][i]).sum();
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };

    let per_label = [0, 1, 2].map(|i| {
        let tp = confusion[i][i];
        let predicted: u64 = (0..3).map(|g| confusion[g][i]).sum();
        let support: u64 = confusion[i].iter().sum();
        LabelMetrics {
            label: Label::from_index(i).unwrap(),
            precision: ratio(tp, predicted),
            recall: ratio(tp, support),
            support,
        }
    });

    Metrics {
        n_examples: n as usize,
        n_correct: correct as usize,
        accuracy: ratio(correct, n),
        confusion,
        per_label,
    }
}

/// Evaluate the model's argmax predictions against the gold labels.
pub fn evaluate(model: &Model, dataset: &Dataset) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let predictions = predict_labels(model, dataset)?;
    let mut confusion = [[0u64; 3]; 3];
    for (ex, pred) in dataset.examples.iter().zip(&predictions) {
        confusion[ex.label.index()][pred.index()] += 1;
    }
    Ok(metrics_from_confusion(confusion))
}
