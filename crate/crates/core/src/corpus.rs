//! Labeled text records, TSV ingestion and descriptive statistics.
//!
//! A corpus file holds one document per line as `id<TAB>text<TAB>label`
//! (or `id<TAB>text` for unlabeled data). Tabs inside the text are not
//! allowed; there is no escaping.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("malformed row at line {0}")]
    MalformedRow(usize),
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("invalid UTF-8 at line {0}")]
    InvalidEncoding(usize),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("document {0:?} has no label")]
    UnlabeledDocument(String),
    #[error("document {id:?} has label {label:?} outside the label set")]
    UnknownLabel { id: String, label: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One tweet or sentence with an optional label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label,
        }
    }

    pub fn labeled(id: impl Into<String>, text: impl Into<String>, label: impl Into<String>) -> Self {
        Self::new(id, text, Some(label.into()))
    }
}

/// An ordered collection of documents with unique ids.
///
/// `label_set` is the sorted set of distinct labels and defines the
/// canonical label index used by every downstream model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    documents: Vec<Document>,
    label_set: Vec<String>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(documents.len());
        let mut labels = BTreeSet::new();
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(CorpusError::DuplicateId(doc.id.clone()));
            }
            if let Some(label) = &doc.label {
                labels.insert(label.clone());
            }
        }
        Ok(Self {
            documents,
            label_set: labels.into_iter().collect(),
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn label_set(&self) -> &[String] {
        &self.label_set
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.documents.iter().map(|d| d.text.as_str()).collect()
    }

    /// Returns a copy of the corpus with every text rewritten by `f`.
    /// Ids and labels are untouched.
    pub fn map_texts<F>(&self, mut f: F) -> Corpus
    where
        F: FnMut(&str) -> String,
    {
        let documents = self
            .documents
            .iter()
            .map(|d| Document {
                id: d.id.clone(),
                text: f(&d.text),
                label: d.label.clone(),
            })
            .collect();
        Corpus {
            documents,
            label_set: self.label_set.clone(),
        }
    }

    /// Fallible variant of [`Corpus::map_texts`].
    pub fn try_map_texts<F, E>(&self, mut f: F) -> Result<Corpus, E>
    where
        F: FnMut(&str) -> Result<String, E>,
    {
        let documents = self
            .documents
            .iter()
            .map(|d| {
                Ok(Document {
                    id: d.id.clone(),
                    text: f(&d.text)?,
                    label: d.label.clone(),
                })
            })
            .collect::<Result<Vec<_>, E>>()?;
        Ok(Corpus {
            documents,
            label_set: self.label_set.clone(),
        })
    }

    /// Texts and label indices relative to this corpus' own label set.
    pub fn split_labels(&self) -> Result<(Vec<String>, Vec<usize>), CorpusError> {
        self.split_labels_with(&self.label_set)
    }

    /// Texts and label indices relative to an externally supplied, sorted
    /// label set (typically the training corpus' labels).
    pub fn split_labels_with(&self, label_set: &[String]) -> Result<(Vec<String>, Vec<usize>), CorpusError> {
        let index: HashMap<&str, usize> = label_set
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut texts = Vec::with_capacity(self.documents.len());
        let mut labels = Vec::with_capacity(self.documents.len());
        for doc in &self.documents {
            let label = doc
                .label
                .as_deref()
                .ok_or_else(|| CorpusError::UnlabeledDocument(doc.id.clone()))?;
            let idx = *index.get(label).ok_or_else(|| CorpusError::UnknownLabel {
                id: doc.id.clone(),
                label: label.to_string(),
            })?;
            texts.push(doc.text.clone());
            labels.push(idx);
        }
        Ok((texts, labels))
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.documents.iter().all(|d| d.label.is_some())
    }
}

/// Parses TSV corpus data already held in memory.
pub fn parse_tsv(bytes: &[u8], has_labels: bool) -> Result<Corpus, CorpusError> {
    let expected = if has_labels { 3 } else { 2 };
    let mut documents = Vec::new();
    for (i, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line_no = i + 1;
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        if raw.is_empty() {
            continue;
        }
        let line = std::str::from_utf8(raw).map_err(|_| CorpusError::InvalidEncoding(line_no))?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != expected || fields.iter().any(|f| f.is_empty()) {
            return Err(CorpusError::MalformedRow(line_no));
        }
        let label = has_labels.then(|| fields[2].to_string());
        documents.push(Document::new(fields[0], fields[1], label));
    }
    Corpus::new(documents)
}

pub fn load_tsv(path: impl AsRef<Path>, has_labels: bool) -> Result<Corpus, CorpusError> {
    let bytes = fs::read(path)?;
    parse_tsv(&bytes, has_labels)
}

/// Serializes a corpus as TSV with `\n` line terminators. Labels are
/// written only for labeled documents.
pub fn to_tsv(corpus: &Corpus) -> String {
    let mut out = String::new();
    for doc in corpus.documents() {
        out.push_str(&doc.id);
        out.push('\t');
        out.push_str(&doc.text);
        if let Some(label) = &doc.label {
            out.push('\t');
            out.push_str(label);
        }
        out.push('\n');
    }
    out
}

pub fn write_tsv(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    fs::write(path, to_tsv(corpus))?;
    Ok(())
}

/// Sentence, word and character counts of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatsReport {
    pub sentence_count: usize,
    pub word_count: usize,
    pub max_words_per_sentence: usize,
    pub min_words_per_sentence: usize,
    pub max_chars_per_sentence: usize,
    pub min_chars_per_sentence: usize,
}

/// Words are maximal runs of non-whitespace; characters are Unicode
/// scalar values.
pub fn compute_stats(corpus: &Corpus) -> Result<StatsReport, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut report = StatsReport {
        sentence_count: corpus.len(),
        word_count: 0,
        max_words_per_sentence: 0,
        min_words_per_sentence: usize::MAX,
        max_chars_per_sentence: 0,
        min_chars_per_sentence: usize::MAX,
    };
    for doc in corpus.documents() {
        let words = doc.text.split_whitespace().count();
        let chars = doc.text.chars().count();
        report.word_count += words;
        report.max_words_per_sentence = report.max_words_per_sentence.max(words);
        report.min_words_per_sentence = report.min_words_per_sentence.min(words);
        report.max_chars_per_sentence = report.max_chars_per_sentence.max(chars);
        report.min_chars_per_sentence = report.min_chars_per_sentence.min(chars);
    }
    Ok(report)
}

impl StatsReport {
    fn rows(&self) -> [(&'static str, usize); 6] {
        [
            ("sentences", self.sentence_count),
            ("words", self.word_count),
            ("max_words_per_sentence", self.max_words_per_sentence),
            ("min_words_per_sentence", self.min_words_per_sentence),
            ("max_chars_per_sentence", self.max_chars_per_sentence),
            ("min_chars_per_sentence", self.min_chars_per_sentence),
        ]
    }

    /// `key=value` lines, one per field.
    pub fn to_key_values(&self) -> String {
        self.rows()
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

impl fmt::Display for StatsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = self.rows();
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            writeln!(f, "{k:<width$}  {v:>10}")?;
        }
        Ok(())
    }
}
