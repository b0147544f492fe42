//! Word, character and word-bounded character n-gram analyzers, TF-IDF
//! fitting, and the weighted union of the three analyzer blocks.
//!
//! Weighting follows the common vectorizer defaults: raw term counts,
//! smoothed idf `ln((1 + N) / (1 + df)) + 1`, and per-block L2
//! normalization. Union weights scale each normalized block; the
//! concatenation is not normalized again.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::codec::{CodecError, Decoder, Encoder, Persist};
use crate::vector::SparseVector;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TfidfError {
    #[error("cannot fit on an empty corpus")]
    EmptyCorpus,
    #[error("no term survived analysis")]
    EmptyVocabulary,
    #[error("invalid analyzer config: {0}")]
    InvalidConfig(String),
    #[error("union weight {0} outside (0, 1]")]
    InvalidWeight(f64),
    #[error("union analyzers must be (word, char, char_wb) in that order")]
    AnalyzerOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalyzerKind {
    Word,
    Char,
    CharWb,
}

impl AnalyzerKind {
    pub const UNION_ORDER: [AnalyzerKind; 3] = [AnalyzerKind::Word, AnalyzerKind::Char, AnalyzerKind::CharWb];

    pub fn as_str(&self) -> &'static str {
        match self {
            AnalyzerKind::Word => "word",
            AnalyzerKind::Char => "char",
            AnalyzerKind::CharWb => "char_wb",
        }
    }

    fn tag(&self) -> u8 {
        match self {
            AnalyzerKind::Word => 0,
            AnalyzerKind::Char => 1,
            AnalyzerKind::CharWb => 2,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        Self::UNION_ORDER.get(tag as usize).copied()
    }
}

impl fmt::Display for AnalyzerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnalyzerKind {
    type Err = TfidfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::UNION_ORDER
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| TfidfError::InvalidConfig(format!("unknown analyzer {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnalyzerConfig {
    pub kind: AnalyzerKind,
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub max_features: Option<usize>,
}

impl AnalyzerConfig {
    pub fn new(kind: AnalyzerKind, ngram_min: usize, ngram_max: usize) -> Result<Self, TfidfError> {
        let config = Self {
            kind,
            ngram_min,
            ngram_max,
            max_features: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_max_features(mut self, max_features: Option<usize>) -> Self {
        self.max_features = max_features;
        self
    }

    pub fn validate(&self) -> Result<(), TfidfError> {
        if self.ngram_min == 0 || self.ngram_min > self.ngram_max {
            return Err(TfidfError::InvalidConfig(format!(
                "n-gram range ({}, {}) must satisfy 1 <= m <= n",
                self.ngram_min, self.ngram_max
            )));
        }
        if self.max_features == Some(0) {
            return Err(TfidfError::InvalidConfig("max_features must be positive".into()));
        }
        Ok(())
    }
}

/// Calls `emit` for every term of `text`, in the order documented on
/// [`analyze`], without allocating a string per term.
pub fn visit_terms<F: FnMut(&str)>(text: &str, config: &AnalyzerConfig, mut emit: F) {
    let (m, n) = (config.ngram_min, config.ngram_max);
    match config.kind {
        AnalyzerKind::Word => {
            let tokens: Vec<&str> = text.split_whitespace().collect();
            let mut joined = String::new();
            for k in m..=n {
                if k > tokens.len() {
                    break;
                }
                for window in tokens.windows(k) {
                    if k == 1 {
                        emit(window[0]);
                    } else {
                        joined.clear();
                        for (i, tok) in window.iter().enumerate() {
                            if i > 0 {
                                joined.push(' ');
                            }
                            joined.push_str(tok);
                        }
                        emit(&joined);
                    }
                }
            }
        }
        AnalyzerKind::Char => {
            let bounds = char_bounds(text);
            let len = bounds.len() - 1;
            for k in m..=n {
                if k > len {
                    break;
                }
                for start in 0..=len - k {
                    emit(&text[bounds[start]..bounds[start + k]]);
                }
            }
        }
        AnalyzerKind::CharWb => {
            let padded: Vec<String> = text.split_whitespace().map(|t| format!(" {t} ")).collect();
            let bounds: Vec<Vec<usize>> = padded.iter().map(|p| char_bounds(p)).collect();
            // short padded tokens are emitted whole, once, at the first k
            // that reaches their length
            let mut done = vec![false; padded.len()];
            for k in m..=n {
                for ((p, b), done) in padded.iter().zip(&bounds).zip(done.iter_mut()) {
                    if *done {
                        continue;
                    }
                    let len = b.len() - 1;
                    if len <= k {
                        emit(p);
                        *done = true;
                    } else {
                        for start in 0..=len - k {
                            emit(&p[b[start]..b[start + k]]);
                        }
                    }
                }
            }
        }
    }
}

fn char_bounds(s: &str) -> Vec<usize> {
    s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len())).collect()
}

/// Terms of `text` under `config`.
///
/// * `word`: whitespace tokens; every run of k consecutive tokens joined by
///   single spaces.
/// * `char`: every window of k scalars over the raw text, spaces included.
/// * `char_wb`: each whitespace token padded with one space per side;
///   windows of k scalars within the padded token. A padded token no
///   longer than k is emitted whole, once, and not again for larger k.
///
/// Terms come out with k ascending, then position ascending.
pub fn analyze(text: &str, config: &AnalyzerConfig) -> Vec<String> {
    let mut out = Vec::new();
    visit_terms(text, config, |t| out.push(t.to_string()));
    out
}

/// A fitted vocabulary with idf weights for one analyzer.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    config: AnalyzerConfig,
    terms: Vec<String>,
    vocabulary: HashMap<String, usize>,
    idf: Vec<f64>,
    document_count: usize,
}

pub fn smoothed_idf(document_count: usize, document_frequency: usize) -> f64 {
    ((1.0 + document_count as f64) / (1.0 + document_frequency as f64)).ln() + 1.0
}

struct TermStats {
    total: u64,
    df: u64,
    last_doc: usize,
}

pub fn fit<S: AsRef<str>>(texts: &[S], config: &AnalyzerConfig) -> Result<TfidfModel, TfidfError> {
    config.validate()?;
    if texts.is_empty() {
        return Err(TfidfError::EmptyCorpus);
    }
    let mut stats: HashMap<String, TermStats> = HashMap::new();
    for (doc, text) in texts.iter().enumerate() {
        visit_terms(text.as_ref(), config, |term| match stats.get_mut(term) {
            Some(s) => {
                s.total += 1;
                if s.last_doc != doc {
                    s.df += 1;
                    s.last_doc = doc;
                }
            }
            None => {
                stats.insert(
                    term.to_string(),
                    TermStats {
                        total: 1,
                        df: 1,
                        last_doc: doc,
                    },
                );
            }
        });
    }
    if stats.is_empty() {
        return Err(TfidfError::EmptyVocabulary);
    }
    let mut entries: Vec<(String, TermStats)> = stats.into_iter().collect();
    if let Some(cap) = config.max_features {
        if entries.len() > cap {
            entries.sort_unstable_by(|a, b| b.1.total.cmp(&a.1.total).then_with(|| a.0.cmp(&b.0)));
            entries.truncate(cap);
        }
    }
    entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let n = texts.len();
    let idf = entries.iter().map(|(_, s)| smoothed_idf(n, s.df as usize)).collect();
    let terms: Vec<String> = entries.into_iter().map(|(t, _)| t).collect();
    Ok(TfidfModel::from_parts(*config, terms, idf, n))
}

impl TfidfModel {
    fn from_parts(config: AnalyzerConfig, terms: Vec<String>, idf: Vec<f64>, document_count: usize) -> Self {
        let vocabulary = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            config,
            terms,
            vocabulary,
            idf,
            document_count,
        }
    }

    pub fn config(&self) -> &AnalyzerConfig {
        &self.config
    }

    /// Vocabulary terms in column order.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.vocabulary.get(term).copied()
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn document_count(&self) -> usize {
        self.document_count
    }

    pub fn dimension(&self) -> usize {
        self.terms.len()
    }

    /// Counts in-vocabulary terms, weights them by idf and L2-normalizes.
    pub fn transform(&self, text: &str) -> SparseVector {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        visit_terms(text, &self.config, |term| {
            if let Some(&i) = self.vocabulary.get(term) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        });
        let mut pairs: Vec<(usize, f64)> = counts.into_iter().map(|(i, c)| (i, c * self.idf[i])).collect();
        pairs.sort_unstable_by_key(|&(i, _)| i);
        let norm = pairs.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut pairs {
                *v /= norm;
            }
        }
        SparseVector::from_pairs(self.dimension(), pairs)
    }

    pub fn transform_all<S: AsRef<str>>(&self, texts: &[S]) -> Vec<SparseVector> {
        texts.iter().map(|t| self.transform(t.as_ref())).collect()
    }
}

fn validate_weights(weights: &[f64; 3]) -> Result<(), TfidfError> {
    match weights.iter().find(|&&w| !(w > 0.0 && w <= 1.0)) {
        Some(&w) => Err(TfidfError::InvalidWeight(w)),
        None => Ok(()),
    }
}

/// Three TF-IDF blocks (word, char, char_wb) and their union weights.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionModel {
    blocks: [TfidfModel; 3],
    weights: [f64; 3],
}

pub fn fit_union<S: AsRef<str>>(
    texts: &[S],
    configs: &[AnalyzerConfig; 3],
    weights: [f64; 3],
) -> Result<UnionModel, TfidfError> {
    validate_weights(&weights)?;
    if configs.iter().map(|c| c.kind).ne(AnalyzerKind::UNION_ORDER) {
        return Err(TfidfError::AnalyzerOrder);
    }
    let blocks = [
        fit(texts, &configs[0])?,
        fit(texts, &configs[1])?,
        fit(texts, &configs[2])?,
    ];
    UnionModel::from_blocks(blocks, weights)
}

impl UnionModel {
    pub fn from_blocks(blocks: [TfidfModel; 3], weights: [f64; 3]) -> Result<Self, TfidfError> {
        validate_weights(&weights)?;
        if blocks.iter().map(|b| b.config.kind).ne(AnalyzerKind::UNION_ORDER) {
            return Err(TfidfError::AnalyzerOrder);
        }
        Ok(Self { blocks, weights })
    }

    pub fn blocks(&self) -> &[TfidfModel; 3] {
        &self.blocks
    }

    pub fn weights(&self) -> [f64; 3] {
        self.weights
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(TfidfModel::dimension).sum()
    }

    /// Start column of each block in the union space.
    pub fn offsets(&self) -> [usize; 3] {
        let d0 = self.blocks[0].dimension();
        let d1 = self.blocks[1].dimension();
        [0, d0, d0 + d1]
    }

    pub fn transform(&self, text: &str) -> SparseVector {
        let parts = self.blocks.each_ref().map(|b| b.transform(text));
        combine_blocks(parts, self.weights)
    }

    pub fn transform_all<S: AsRef<str>>(&self, texts: &[S]) -> Vec<SparseVector> {
        texts.iter().map(|t| self.transform(t.as_ref())).collect()
    }
}

/// Scales each block by its weight and concatenates.
pub fn combine_blocks(mut parts: [SparseVector; 3], weights: [f64; 3]) -> SparseVector {
    for (p, w) in parts.iter_mut().zip(weights) {
        if w != 1.0 {
            p.scale(w);
        }
    }
    SparseVector::concat(&parts)
}

pub fn transform_union(text: &str, model: &UnionModel) -> SparseVector {
    model.transform(text)
}

pub(crate) fn encode_tfidf(model: &TfidfModel, enc: &mut Encoder) {
    enc.u8(model.config.kind.tag());
    enc.usize(model.config.ngram_min);
    enc.usize(model.config.ngram_max);
    enc.opt_usize(model.config.max_features);
    enc.usize(model.document_count);
    enc.usize(model.terms.len());
    for (term, idf) in model.terms.iter().zip(&model.idf) {
        enc.str(term);
        enc.f64(*idf);
    }
}

pub(crate) fn decode_tfidf(dec: &mut Decoder<'_>) -> Result<TfidfModel, CodecError> {
    let at = dec.offset();
    let kind = AnalyzerKind::from_tag(dec.u8()?).ok_or(CodecError::CorruptFile(at))?;
    let at = dec.offset();
    let config = AnalyzerConfig {
        kind,
        ngram_min: dec.usize()?,
        ngram_max: dec.usize()?,
        max_features: dec.opt_usize()?,
    };
    config.validate().map_err(|_| CodecError::CorruptFile(at))?;
    let document_count = dec.usize()?;
    let n = dec.len(9)?;
    let mut terms = Vec::with_capacity(n);
    let mut idf = Vec::with_capacity(n);
    for _ in 0..n {
        let at = dec.offset();
        let term = dec.str()?;
        if terms.last().is_some_and(|prev: &String| *prev >= term) {
            return Err(CodecError::CorruptFile(at));
        }
        terms.push(term);
        idf.push(dec.f64()?);
    }
    Ok(TfidfModel::from_parts(config, terms, idf, document_count))
}

impl Persist for TfidfModel {
    const KIND: u8 = 1;

    fn encode(&self, enc: &mut Encoder) {
        encode_tfidf(self, enc);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        decode_tfidf(dec)
    }
}

impl Persist for UnionModel {
    const KIND: u8 = 2;

    fn encode(&self, enc: &mut Encoder) {
        for w in self.weights {
            enc.f64(w);
        }
        for b in &self.blocks {
            encode_tfidf(b, enc);
        }
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let at = dec.offset();
        let weights = [dec.f64()?, dec.f64()?, dec.f64()?];
        let blocks = [decode_tfidf(dec)?, decode_tfidf(dec)?, decode_tfidf(dec)?];
        UnionModel::from_blocks(blocks, weights).map_err(|_| CodecError::CorruptFile(at))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: AnalyzerKind, m: usize, n: usize) -> AnalyzerConfig {
        AnalyzerConfig::new(kind, m, n).unwrap()
    }

    #[test]
    fn word_ngrams() {
        let terms = analyze("a b c", &cfg(AnalyzerKind::Word, 1, 2));
        assert_eq!(terms, vec!["a", "b", "c", "a b", "b c"]);
        assert!(analyze("", &cfg(AnalyzerKind::Word, 1, 2)).is_empty());
        assert_eq!(analyze(" a \t b ", &cfg(AnalyzerKind::Word, 2, 5)), vec!["a b"]);
    }

    #[test]
    fn char_ngrams() {
        assert!(analyze("ab", &cfg(AnalyzerKind::Char, 3, 3)).is_empty());
        assert_eq!(analyze("ab c", &cfg(AnalyzerKind::Char, 2, 2)), vec!["ab", "b ", " c"]);
        assert_eq!(analyze("كتب", &cfg(AnalyzerKind::Char, 1, 3)), vec!["ك", "ت", "ب", "كت", "تب", "كتب"]);
    }

    #[test]
    fn char_wb_ngrams() {
        assert_eq!(analyze("ab", &cfg(AnalyzerKind::CharWb, 2, 2)), vec![" a", "ab", "b "]);
        assert_eq!(analyze("ab", &cfg(AnalyzerKind::CharWb, 3, 3)), vec![" ab", "ab "]);
        // padded " a " has length 3: emitted once at k=3, never again
        assert_eq!(analyze("a", &cfg(AnalyzerKind::CharWb, 3, 5)), vec![" a "]);
        assert_eq!(
            analyze("a bc", &cfg(AnalyzerKind::CharWb, 3, 4)),
            vec![" a ", " bc", "bc ", " bc "]
        );
    }

    #[test]
    fn invalid_ranges() {
        assert!(AnalyzerConfig::new(AnalyzerKind::Word, 0, 1).is_err());
        assert!(AnalyzerConfig::new(AnalyzerKind::Word, 3, 2).is_err());
        let c = cfg(AnalyzerKind::Word, 1, 1).with_max_features(Some(0));
        assert!(c.validate().is_err());
    }

    #[test]
    fn fit_hand_example() {
        let model = fit(&["aa ab", "ab"], &cfg(AnalyzerKind::Word, 1, 1)).unwrap();
        assert_eq!(model.terms(), &["aa", "ab"]);
        assert!((model.idf()[0] - ((3.0f64 / 2.0).ln() + 1.0)).abs() < 1e-15);
        assert!((model.idf()[0] - 1.405465).abs() < 1e-6);
        assert_eq!(model.idf()[1], 1.0);
    }

    #[test]
    fn fit_max_features() {
        let c = cfg(AnalyzerKind::Word, 1, 1).with_max_features(Some(1));
        let model = fit(&["aa ab", "ab"], &c).unwrap();
        assert_eq!(model.terms(), &["ab"]);
        // tie on frequency: the lexicographically smaller term is kept
        let model = fit(&["b a", "c"], &c).unwrap();
        assert_eq!(model.terms(), &["a"]);
    }

    #[test]
    fn fit_errors() {
        let c = cfg(AnalyzerKind::Word, 1, 1);
        let empty: [&str; 0] = [];
        assert_eq!(fit(&empty, &c).unwrap_err(), TfidfError::EmptyCorpus);
        assert_eq!(fit(&["", "  "], &c).unwrap_err(), TfidfError::EmptyVocabulary);
    }

    #[test]
    fn transform_hand_example() {
        let model = fit(&["aa ab", "ab"], &cfg(AnalyzerKind::Word, 1, 1)).unwrap();
        let v = model.transform("ab");
        assert_eq!(v.indices(), &[1]);
        assert_eq!(v.values(), &[1.0]);
        // frozen from the brute-force oracle in tests/tfidf_oracle.rs
        let v = model.transform("aa ab");
        assert!((v.get(0) - 0.814_802_474_667_168_9).abs() < 1e-12);
        assert!((v.get(1) - 0.579_738_671_537_665_7).abs() < 1e-12);
        assert!(model.transform("zz qq").is_empty());
    }

    #[test]
    fn union_weights() {
        let configs = [
            cfg(AnalyzerKind::Word, 1, 1),
            cfg(AnalyzerKind::Char, 1, 2),
            cfg(AnalyzerKind::CharWb, 2, 3),
        ];
        let texts = ["ab cd", "cd ef", "ab"];
        let unit = fit_union(&texts, &configs, [1.0, 1.0, 1.0]).unwrap();
        let half = fit_union(&texts, &configs, [0.5, 1.0, 1.0]).unwrap();
        let x = unit.transform("ab ef");
        let parts: Vec<SparseVector> = unit.blocks().iter().map(|b| b.transform("ab ef")).collect();
        assert_eq!(x, SparseVector::concat(&parts));
        let y = half.transform("ab ef");
        let off = unit.offsets();
        for (i, v) in x.iter() {
            if i < off[1] {
                assert_eq!(y.get(i) * 2.0, v);
            } else {
                assert_eq!(y.get(i).to_bits(), v.to_bits());
            }
        }
        let e = unit.transform("");
        assert!(e.is_empty());
        assert_eq!(e.dimension(), unit.dimension());
    }

    #[test]
    fn union_validation() {
        let configs = [
            cfg(AnalyzerKind::Word, 1, 1),
            cfg(AnalyzerKind::Char, 1, 2),
            cfg(AnalyzerKind::CharWb, 2, 3),
        ];
        assert_eq!(
            fit_union(&["a"], &configs, [0.0, 1.0, 1.0]).unwrap_err(),
            TfidfError::InvalidWeight(0.0)
        );
        assert!(fit_union(&["a"], &configs, [1.0, 1.5, 1.0]).is_err());
        let swapped = [configs[1], configs[0], configs[2]];
        assert_eq!(
            fit_union(&["a"], &swapped, [1.0; 3]).unwrap_err(),
            TfidfError::AnalyzerOrder
        );
    }

    #[test]
    fn persistence_round_trip() {
        let configs = [
            cfg(AnalyzerKind::Word, 1, 2),
            cfg(AnalyzerKind::Char, 1, 3).with_max_features(Some(5)),
            cfg(AnalyzerKind::CharWb, 2, 4),
        ];
        let model = fit_union(&["مرحبا بكم", "اهلا وسهلا"], &configs, [0.5, 0.75, 1.0]).unwrap();
        let back = UnionModel::from_bytes(&model.to_bytes()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn transform_is_bit_stable() {
        let text = "the quick brown fox jumps over the lazy dog while a wary cat naps";
        let model = fit(&[text], &cfg(AnalyzerKind::Char, 1, 5)).unwrap();
        let first = model.transform(text);
        for _ in 0..20 {
            let again = model.transform(text);
            assert!(again.values().iter().zip(first.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }
}
