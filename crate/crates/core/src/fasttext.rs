//! Subword-aware word embeddings: unsupervised skipgram with negative
//! sampling, and a supervised one-vs-all text classifier sharing the same
//! input layer.
//!
//! The input layer has one row per vocabulary word followed by
//! `bucket_count` hashed subword rows. Only the bucket rows reached by the
//! training data are stored; any other row holds its deterministic
//! initial value, recomputed on demand.
//!
//! A word's input vector is the mean of its word row (when in vocabulary)
//! and its subword rows. A text's vector is the mean of its word vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::{CodecError, Decoder, Encoder, Persist};
use crate::vector::DenseVector;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FastTextError {
    #[error("no word reaches the minimum count")]
    EmptyVocabulary,
    #[error("supervised training needs at least two distinct labels")]
    SingleClass,
    #[error("{0} texts but {1} labels")]
    LengthMismatch(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastTextParams {
    pub dim: usize,
    /// Maximum context window `ws`; each position samples a window in
    /// `[1, ws]`.
    pub window: usize,
    pub epochs: usize,
    pub min_count: usize,
    pub subword_min: usize,
    /// Subwords are disabled when `subword_min > subword_max`.
    pub subword_max: usize,
    pub bucket_count: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for FastTextParams {
    fn default() -> Self {
        Self {
            dim: 50,
            window: 5,
            epochs: 5,
            min_count: 1,
            subword_min: 2,
            subword_max: 5,
            bucket_count: 2_000_000,
            negatives: 5,
            learning_rate: 0.05,
            seed: 0,
        }
    }
}

impl FastTextParams {
    pub fn validate(&self) -> Result<(), FastTextError> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("min_count", self.min_count),
            ("bucket_count", self.bucket_count),
            ("negatives", self.negatives),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(FastTextError::InvalidParams(format!("{name} must be positive")));
        }
        if self.bucket_count > u32::MAX as usize {
            return Err(FastTextError::InvalidParams("bucket_count exceeds 2^32".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(FastTextError::InvalidParams("learning_rate must be positive".into()));
        }
        Ok(())
    }

    pub fn subwords_enabled(&self) -> bool {
        self.subword_min >= 1 && self.subword_min <= self.subword_max
    }
}

/// 32-bit FNV-1a over the UTF-8 bytes of `s`.
pub fn fnv1a32(s: &str) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for &b in s.as_bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Character n-grams of `<word>` for every length in the subword range,
/// shortest first.
pub fn subword_grams(word: &str, params: &FastTextParams) -> Vec<String> {
    if !params.subwords_enabled() {
        return Vec::new();
    }
    let wrapped: Vec<char> = std::iter::once('<').chain(word.chars()).chain(std::iter::once('>')).collect();
    let mut out = Vec::new();
    for k in params.subword_min..=params.subword_max.min(wrapped.len()) {
        for window in wrapped.windows(k) {
            out.push(window.iter().collect());
        }
    }
    out
}

fn subword_buckets(word: &str, params: &FastTextParams) -> Vec<u32> {
    subword_grams(word, params)
        .iter()
        .map(|g| fnv1a32(g) % params.bucket_count as u32)
        .collect()
}

/// Input-layer row indices of the subwords of `word`, offset past a
/// vocabulary of `vocab_size` words.
pub fn subword_ids(word: &str, params: &FastTextParams, vocab_size: usize) -> Vec<usize> {
    subword_buckets(word, params)
        .into_iter()
        .map(|b| vocab_size + b as usize)
        .collect()
}

/// Deterministic initial value of input row `row`: uniform in
/// `[-1/dim, 1/dim]`.
fn init_row(seed: u64, row: usize, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (row as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let bound = 1.0 / dim as f64;
    (0..dim).map(|_| rng.random_range(-bound..=bound)).collect()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically safe `-ln(sigmoid(x))`.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// The shared input layer.
///
/// Stored rows ("slots") are the vocabulary words in order, followed by
/// the materialized subword buckets in ascending bucket order.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    pub params: FastTextParams,
    words: Vec<String>,
    word_index: HashMap<String, usize>,
    buckets: Vec<u32>,
    rows: Vec<f64>,
}

impl Embeddings {
    fn build(params: FastTextParams, words: Vec<String>, buckets: BTreeSet<u32>) -> Self {
        let dim = params.dim;
        let word_index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let buckets: Vec<u32> = buckets.into_iter().collect();
        let mut rows = Vec::with_capacity((words.len() + buckets.len()) * dim);
        for i in 0..words.len() {
            rows.extend(init_row(params.seed, i, dim));
        }
        for &b in &buckets {
            rows.extend(init_row(params.seed, words.len() + b as usize, dim));
        }
        Self {
            params,
            words,
            word_index,
            buckets,
            rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn vocab(&self) -> &[String] {
        &self.words
    }

    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.word_index.get(word).copied()
    }

    pub fn slot_count(&self) -> usize {
        self.words.len() + self.buckets.len()
    }

    /// Input-layer row id of a stored slot.
    pub fn slot_row_id(&self, slot: usize) -> usize {
        if slot < self.words.len() {
            slot
        } else {
            self.words.len() + self.buckets[slot - self.words.len()] as usize
        }
    }

    pub fn slot(&self, slot: usize) -> &[f64] {
        let d = self.params.dim;
        &self.rows[slot * d..(slot + 1) * d]
    }

    pub fn slot_mut(&mut self, slot: usize) -> &mut [f64] {
        let d = self.params.dim;
        &mut self.rows[slot * d..(slot + 1) * d]
    }

    fn bucket_slot(&self, bucket: u32) -> Option<usize> {
        self.buckets.binary_search(&bucket).ok().map(|p| self.words.len() + p)
    }

    pub fn subword_ids(&self, word: &str) -> Vec<usize> {
        subword_ids(word, &self.params, self.words.len())
    }

    /// Value of any input row, stored or not.
    pub fn row(&self, row_id: usize) -> Vec<f64> {
        let n = self.words.len();
        let slot = if row_id < n {
            Some(row_id)
        } else {
            u32::try_from(row_id - n).ok().and_then(|b| self.bucket_slot(b))
        };
        match slot {
            Some(s) => self.slot(s).to_vec(),
            None => init_row(self.params.seed, row_id, self.params.dim),
        }
    }

    /// Stored slots of an in-vocabulary word, or `None` if any of its rows
    /// is not stored.
    fn trainable_slots(&self, word: &str) -> Option<Vec<usize>> {
        let mut slots: Vec<usize> = self.word_id(word).into_iter().collect();
        for b in subword_buckets(word, &self.params) {
            slots.push(self.bucket_slot(b)?);
        }
        (!slots.is_empty()).then_some(slots)
    }

    /// Mean of the word row (if in vocabulary) and its subword rows.
    pub fn word_vector(&self, word: &str) -> Option<Vec<f64>> {
        let mut ids: Vec<usize> = self.word_id(word).into_iter().collect();
        ids.extend(self.subword_ids(word));
        if ids.is_empty() {
            return None;
        }
        let mut out = vec![0.0; self.params.dim];
        for id in &ids {
            axpy(1.0, &self.row(*id), &mut out);
        }
        let scale = 1.0 / ids.len() as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        Some(out)
    }

    pub fn sentence_vector(&self, text: &str) -> DenseVector {
        let mut out = vec![0.0; self.params.dim];
        let mut n = 0usize;
        for word in text.split_whitespace() {
            if let Some(v) = self.word_vector(word) {
                axpy(1.0, &v, &mut out);
                n += 1;
            }
        }
        if n > 0 {
            let scale = 1.0 / n as f64;
            out.iter_mut().for_each(|v| *v *= scale);
        }
        DenseVector(out)
    }

    /// `(slot, coefficient)` pairs such that the text's hidden vector is
    /// `sum coef * slot_row`. Words without stored rows are skipped.
    fn text_inputs(&self, text: &str) -> Vec<(usize, f64)> {
        let per_word: Vec<Vec<usize>> = text.split_whitespace().filter_map(|w| self.trainable_slots(w)).collect();
        if per_word.is_empty() {
            return Vec::new();
        }
        let n = per_word.len() as f64;
        let mut coef: BTreeMap<usize, f64> = BTreeMap::new();
        for slots in &per_word {
            let c = 1.0 / (n * slots.len() as f64);
            for &s in slots {
                *coef.entry(s).or_insert(0.0) += c;
            }
        }
        coef.into_iter().collect()
    }

    fn hidden(&self, inputs: &[(usize, f64)]) -> Vec<f64> {
        let mut h = vec![0.0; self.params.dim];
        for &(s, c) in inputs {
            axpy(c, self.slot(s), &mut h);
        }
        h
    }
}

fn tokenize_counts<S: AsRef<str>>(texts: &[S]) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for t in texts {
        for w in t.as_ref().split_whitespace() {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

fn linear_lr(params: &FastTextParams, done: u64, total: u64) -> f64 {
    params.learning_rate * (1.0 - done as f64 / total.max(1) as f64).max(0.0)
}

/// Skipgram embeddings with their context-side output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub embeddings: Embeddings,
    /// `|vocab| x dim`, row-major.
    pub output_vectors: Vec<f64>,
    pub epoch_losses: Vec<f64>,
}

pub fn train_skipgram<S: AsRef<str>>(texts: &[S], params: &FastTextParams) -> Result<EmbeddingModel, FastTextError> {
    params.validate()?;
    let counts = tokenize_counts(texts);
    let vocab: Vec<(&str, usize)> = counts
        .iter()
        .filter(|(_, &c)| c >= params.min_count)
        .map(|(&w, &c)| (w, c))
        .collect();
    if vocab.is_empty() {
        return Err(FastTextError::EmptyVocabulary);
    }
    let buckets: BTreeSet<u32> = vocab.iter().flat_map(|(w, _)| subword_buckets(w, params)).collect();
    let words: Vec<String> = vocab.iter().map(|(w, _)| w.to_string()).collect();
    let mut emb = Embeddings::build(*params, words, buckets);
    let dim = params.dim;
    let vocab_len = vocab.len();
    let word_slots: Vec<Vec<usize>> = emb
        .words
        .iter()
        .map(|w| emb.trainable_slots(w).expect("vocabulary rows are stored"))
        .collect();
    let sentences: Vec<Vec<usize>> = texts
        .iter()
        .map(|t| t.as_ref().split_whitespace().filter_map(|w| emb.word_id(w)).collect())
        .collect();
    let total_tokens: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    let total = total_tokens * params.epochs as u64;
    let noise = WeightedIndex::new(vocab.iter().map(|(_, c)| (*c as f64).powf(0.75))).expect("positive weights");

    let mut output = vec![0.0; vocab_len * dim];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut losses = Vec::with_capacity(params.epochs);
    let mut done: u64 = 0;
    let mut hidden = vec![0.0; dim];
    let mut grad = vec![0.0; dim];

    for epoch in 0..params.epochs {
        let mut epoch_loss = 0.0;
        let mut pairs = 0u64;
        for sentence in &sentences {
            for (i, &center) in sentence.iter().enumerate() {
                let lr = linear_lr(params, done, total);
                done += 1;
                let reach = rng.random_range(1..=params.window);
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(sentence.len() - 1);
                let slots = &word_slots[center];
                let scale = 1.0 / slots.len() as f64;
                for (j, &target) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    hidden.iter_mut().for_each(|h| *h = 0.0);
                    for &s in slots {
                        axpy(scale, emb.slot(s), &mut hidden);
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let mut loss = 0.0;
                    for n in 0..=params.negatives {
                        let (word, label) = if n == 0 {
                            (target, 1.0)
                        } else {
                            let mut neg = noise.sample(&mut rng);
                            // resample collisions with the positive target
                            for _ in 0..10 {
                                if neg != target || vocab_len == 1 {
                                    break;
                                }
                                neg = noise.sample(&mut rng);
                            }
                            if neg == target {
                                continue;
                            }
                            (neg, 0.0)
                        };
                        let out_row = &mut output[word * dim..(word + 1) * dim];
                        let score = dot(out_row, &hidden);
                        loss += if label == 1.0 { neg_log_sigmoid(score) } else { neg_log_sigmoid(-score) };
                        let g = lr * (label - sigmoid(score));
                        axpy(g, out_row, &mut grad);
                        axpy(g, &hidden, out_row);
                    }
                    for &s in slots {
                        axpy(scale, &grad, emb.slot_mut(s));
                    }
                    epoch_loss += loss;
                    pairs += 1;
                }
            }
        }
        let mean = if pairs > 0 { epoch_loss / pairs as f64 } else { 0.0 };
        log::info!("skipgram epoch {} mean_loss {:.6}", epoch + 1, mean);
        losses.push(mean);
    }
    Ok(EmbeddingModel {
        embeddings: emb,
        output_vectors: output,
        epoch_losses: losses,
    })
}

/// Supervised classifier: one independent logistic output per label on
/// top of the shared input layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedTextModel {
    pub embeddings: Embeddings,
    /// `class_count x dim`, row-major.
    pub label_matrix: Vec<f64>,
    class_count: usize,
    pub epoch_losses: Vec<f64>,
}

/// Gradient of the summed one-vs-all loss over a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct OvaGradient {
    /// Same layout as [`SupervisedTextModel::label_matrix`].
    pub label_matrix: Vec<f64>,
    /// Gradient per stored input slot.
    pub input_slots: BTreeMap<usize, Vec<f64>>,
}

pub fn train_supervised<S: AsRef<str>>(
    texts: &[S],
    labels: &[usize],
    params: &FastTextParams,
) -> Result<SupervisedTextModel, FastTextError> {
    params.validate()?;
    if texts.len() != labels.len() {
        return Err(FastTextError::LengthMismatch(texts.len(), labels.len()));
    }
    let distinct: BTreeSet<usize> = labels.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(FastTextError::SingleClass);
    }
    let class_count = distinct.last().copied().unwrap_or(0) + 1;
    let counts = tokenize_counts(texts);
    let words: Vec<String> = counts
        .iter()
        .filter(|(_, &c)| c >= params.min_count)
        .map(|(w, _)| w.to_string())
        .collect();
    if words.is_empty() {
        return Err(FastTextError::EmptyVocabulary);
    }
    let buckets: BTreeSet<u32> = counts.keys().flat_map(|w| subword_buckets(w, params)).collect();
    let emb = Embeddings::build(*params, words, buckets);
    let dim = params.dim;
    let mut model = SupervisedTextModel {
        embeddings: emb,
        label_matrix: vec![0.0; class_count * dim],
        class_count,
        epoch_losses: Vec::with_capacity(params.epochs),
    };
    let inputs: Vec<Vec<(usize, f64)>> = texts.iter().map(|t| model.embeddings.text_inputs(t.as_ref())).collect();
    let mut order: Vec<usize> = (0..texts.len()).collect();
    let total = (texts.len() * params.epochs) as u64;
    let mut done = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut score_grads = vec![0.0; class_count];
    let mut grad_hidden = vec![0.0; dim];

    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for &ex in &order {
            let lr = linear_lr(params, done, total);
            done += 1;
            if inputs[ex].is_empty() {
                continue;
            }
            let hidden = model.embeddings.hidden(&inputs[ex]);
            epoch_loss += model.ova_scores(&hidden, labels[ex], &mut score_grads);
            seen += 1;
            grad_hidden.iter_mut().for_each(|g| *g = 0.0);
            for (c, &g) in score_grads.iter().enumerate() {
                let row = &mut model.label_matrix[c * dim..(c + 1) * dim];
                axpy(g, row, &mut grad_hidden);
                axpy(-lr * g, &hidden, row);
            }
            for &(s, coef) in &inputs[ex] {
                axpy(-lr * coef, &grad_hidden, model.embeddings.slot_mut(s));
            }
        }
        let mean = if seen > 0 { epoch_loss / seen as f64 } else { 0.0 };
        log::info!("supervised epoch {} mean_loss {:.6}", epoch + 1, mean);
        model.epoch_losses.push(mean);
    }
    Ok(model)
}

impl SupervisedTextModel {
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    fn label_row(&self, c: usize) -> &[f64] {
        let d = self.embeddings.dim();
        &self.label_matrix[c * d..(c + 1) * d]
    }

    /// Loss of one example and `dL/dscore` per label.
    fn ova_scores(&self, hidden: &[f64], target: usize, score_grads: &mut [f64]) -> f64 {
        let mut loss = 0.0;
        for (c, g) in score_grads.iter_mut().enumerate() {
            let s = dot(self.label_row(c), hidden);
            if c == target {
                loss += neg_log_sigmoid(s);
                *g = sigmoid(s) - 1.0;
            } else {
                loss += neg_log_sigmoid(-s);
                *g = sigmoid(s);
            }
        }
        loss
    }

    /// Per-label logits.
    pub fn scores(&self, text: &str) -> Vec<f64> {
        let h = self.embeddings.sentence_vector(text);
        (0..self.class_count).map(|c| dot(self.label_row(c), &h.0)).collect()
    }

    pub fn predict(&self, text: &str) -> usize {
        crate::svc::argmax(&self.scores(text))
    }

    /// Summed one-vs-all logistic loss over `(text, label)` pairs.
    pub fn ova_loss(&self, batch: &[(&str, usize)]) -> f64 {
        let mut grads = vec![0.0; self.class_count];
        batch
            .iter()
            .map(|(text, label)| {
                let inputs = self.embeddings.text_inputs(text);
                let hidden = self.embeddings.hidden(&inputs);
                self.ova_scores(&hidden, *label, &mut grads)
            })
            .sum()
    }

    /// Analytic gradient of [`Self::ova_loss`], as used by training.
    pub fn ova_gradient(&self, batch: &[(&str, usize)]) -> OvaGradient {
        let dim = self.embeddings.dim();
        let mut out = OvaGradient {
            label_matrix: vec![0.0; self.label_matrix.len()],
            input_slots: BTreeMap::new(),
        };
        let mut grads = vec![0.0; self.class_count];
        for (text, label) in batch {
            let inputs = self.embeddings.text_inputs(text);
            let hidden = self.embeddings.hidden(&inputs);
            self.ova_scores(&hidden, *label, &mut grads);
            let mut grad_hidden = vec![0.0; dim];
            for (c, &g) in grads.iter().enumerate() {
                axpy(g, self.label_row(c), &mut grad_hidden);
                axpy(g, &hidden, &mut out.label_matrix[c * dim..(c + 1) * dim]);
            }
            for (s, coef) in inputs {
                let slot = out.input_slots.entry(s).or_insert_with(|| vec![0.0; dim]);
                axpy(coef, &grad_hidden, slot);
            }
        }
        out
    }
}

/// Anything that maps a text to a fixed-length dense vector.
pub trait SentenceEncoder {
    fn dim(&self) -> usize;
    fn sentence_vector(&self, text: &str) -> DenseVector;

    fn extract_features<S: AsRef<str>>(&self, texts: &[S]) -> Vec<DenseVector> {
        texts.iter().map(|t| self.sentence_vector(t.as_ref())).collect()
    }
}

impl SentenceEncoder for EmbeddingModel {
    fn dim(&self) -> usize {
        self.embeddings.dim()
    }

    fn sentence_vector(&self, text: &str) -> DenseVector {
        self.embeddings.sentence_vector(text)
    }
}

impl SentenceEncoder for SupervisedTextModel {
    fn dim(&self) -> usize {
        self.embeddings.dim()
    }

    fn sentence_vector(&self, text: &str) -> DenseVector {
        self.embeddings.sentence_vector(text)
    }
}

pub fn sentence_vector<M: SentenceEncoder>(model: &M, text: &str) -> DenseVector {
    model.sentence_vector(text)
}

pub fn extract_features<M: SentenceEncoder, S: AsRef<str>>(model: &M, texts: &[S]) -> Vec<DenseVector> {
    model.extract_features(texts)
}

fn encode_params(p: &FastTextParams, enc: &mut Encoder) {
    for v in [
        p.dim,
        p.window,
        p.epochs,
        p.min_count,
        p.subword_min,
        p.subword_max,
        p.bucket_count,
        p.negatives,
    ] {
        enc.usize(v);
    }
    enc.f64(p.learning_rate);
    enc.u64(p.seed);
}

fn decode_params(dec: &mut Decoder<'_>) -> Result<FastTextParams, CodecError> {
    let at = dec.offset();
    let p = FastTextParams {
        dim: dec.usize()?,
        window: dec.usize()?,
        epochs: dec.usize()?,
        min_count: dec.usize()?,
        subword_min: dec.usize()?,
        subword_max: dec.usize()?,
        bucket_count: dec.usize()?,
        negatives: dec.usize()?,
        learning_rate: dec.f64()?,
        seed: dec.u64()?,
    };
    p.validate().map_err(|_| CodecError::CorruptFile(at))?;
    Ok(p)
}

pub(crate) fn encode_embeddings(e: &Embeddings, enc: &mut Encoder) {
    encode_params(&e.params, enc);
    enc.usize(e.words.len());
    for w in &e.words {
        enc.str(w);
    }
    enc.usize(e.buckets.len());
    for &b in &e.buckets {
        enc.u64(b as u64);
    }
    enc.f64s(&e.rows);
}

pub(crate) fn decode_embeddings(dec: &mut Decoder<'_>) -> Result<Embeddings, CodecError> {
    let params = decode_params(dec)?;
    let n = dec.len(8)?;
    let words = (0..n).map(|_| dec.str()).collect::<Result<Vec<_>, _>>()?;
    let nb = dec.len(8)?;
    let mut buckets = Vec::with_capacity(nb);
    for _ in 0..nb {
        let at = dec.offset();
        let b = u32::try_from(dec.u64()?).map_err(|_| CodecError::CorruptFile(at))?;
        if buckets.last().is_some_and(|&p| p >= b) {
            return Err(CodecError::CorruptFile(at));
        }
        buckets.push(b);
    }
    let at = dec.offset();
    let rows = dec.f64s()?;
    if rows.len() != (words.len() + buckets.len()) * params.dim {
        return Err(CodecError::CorruptFile(at));
    }
    let word_index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    Ok(Embeddings {
        params,
        words,
        word_index,
        buckets,
        rows,
    })
}

impl Persist for EmbeddingModel {
    const KIND: u8 = 4;

    fn encode(&self, enc: &mut Encoder) {
        encode_embeddings(&self.embeddings, enc);
        enc.f64s(&self.output_vectors);
        enc.f64s(&self.epoch_losses);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let embeddings = decode_embeddings(dec)?;
        let at = dec.offset();
        let output_vectors = dec.f64s()?;
        if output_vectors.len() != embeddings.words.len() * embeddings.dim() {
            return Err(CodecError::CorruptFile(at));
        }
        Ok(Self {
            embeddings,
            output_vectors,
            epoch_losses: dec.f64s()?,
        })
    }
}

impl Persist for SupervisedTextModel {
    const KIND: u8 = 5;

    fn encode(&self, enc: &mut Encoder) {
        encode_embeddings(&self.embeddings, enc);
        enc.usize(self.class_count);
        enc.f64s(&self.label_matrix);
        enc.f64s(&self.epoch_losses);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let embeddings = decode_embeddings(dec)?;
        let class_count = dec.usize()?;
        let at = dec.offset();
        let label_matrix = dec.f64s()?;
        if label_matrix.len() != class_count * embeddings.dim() {
            return Err(CodecError::CorruptFile(at));
        }
        Ok(Self {
            embeddings,
            label_matrix,
            class_count,
            epoch_losses: dec.f64s()?,
        })
    }
}
