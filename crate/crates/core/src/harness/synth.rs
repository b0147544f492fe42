//! Synthetic labeled corpora standing in for restricted shared-task data.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document};
use crate::morph::{PREFIXES, SUFFIXES};

/// Country labels used for the first 18 synthetic classes.
pub const COUNTRY_LABELS: [&str; 18] = [
    "Algeria",
    "Bahrain",
    "Egypt",
    "Iraq",
    "Jordan",
    "Kuwait",
    "Lebanon",
    "Libya",
    "Morocco",
    "Oman",
    "Palestine",
    "Qatar",
    "Saudi_Arabia",
    "Sudan",
    "Syria",
    "Tunisia",
    "UAE",
    "Yemen",
];

const ARABIC_LETTERS: [char; 28] = [
    'ا', 'ب', 'ت', 'ث', 'ج', 'ح', 'خ', 'د', 'ذ', 'ر', 'ز', 'س', 'ش', 'ص', 'ض', 'ط', 'ظ', 'ع', 'غ', 'ف', 'ق', 'ك',
    'ل', 'م', 'ن', 'ه', 'و', 'ي',
];

/// Letters that occur in no prefix or suffix the light stemmer strips and
/// that letter normalization leaves alone.
const STEM_LETTERS: [char; 17] = [
    'د', 'ر', 'س', 'ش', 'ص', 'ض', 'ط', 'ظ', 'ع', 'غ', 'ق', 'ج', 'ح', 'خ', 'ز', 'ذ', 'ث',
];

const CLASS_MARKS: [&str; 18] = ["!", "؟", "،", "؛", "…", "«", "»", "(", ")", "[", "]", "{", "}", ":", ";", "?", ".", ","];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub class_count: usize,
    pub docs_per_class: usize,
    pub vocab_per_class: usize,
    pub shared_vocab: usize,
    /// Inclusive token-count range per document.
    pub doc_len: (usize, usize),
    pub seed: u64,
}

impl SynthParams {
    /// The bundled 18-class corpus: 1800 documents, seed 7.
    pub fn bundled() -> Self {
        Self {
            class_count: 18,
            docs_per_class: 100,
            vocab_per_class: 40,
            shared_vocab: 200,
            doc_len: (5, 30),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Corpus,
    pub dev: Corpus,
    pub test: Corpus,
}

pub fn class_label(class: usize, class_count: usize) -> String {
    if class_count <= COUNTRY_LABELS.len() {
        COUNTRY_LABELS[class].to_string()
    } else {
        format!("class_{class:02}")
    }
}

fn random_word(rng: &mut ChaCha8Rng, letters: &[char], len: (usize, usize)) -> String {
    let n = rng.random_range(len.0..=len.1);
    (0..n).map(|_| *letters.choose(rng).expect("letters")).collect()
}

fn unique_words(rng: &mut ChaCha8Rng, count: usize, letters: &[char], len: (usize, usize), taken: &mut HashSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let w = random_word(rng, letters, len);
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Per-class document counts for an 80/10/10 split.
fn split_sizes(n: usize) -> (usize, usize) {
    let train = (n as f64 * 0.8).round() as usize;
    let dev = ((n as f64 * 0.1).round() as usize).min(n - train);
    (train, dev)
}

fn assemble(per_class: Vec<Vec<String>>, class_count: usize) -> Splits {
    let mut parts: [Vec<(String, String)>; 3] = Default::default();
    for (class, docs) in per_class.into_iter().enumerate() {
        let label = class_label(class, class_count);
        let (n_train, n_dev) = split_sizes(docs.len());
        for (i, text) in docs.into_iter().enumerate() {
            let part = if i < n_train {
                0
            } else if i < n_train + n_dev {
                1
            } else {
                2
            };
            parts[part].push((text, label.clone()));
        }
    }
    let [train, dev, test] = [("train", &parts[0]), ("dev", &parts[1]), ("test", &parts[2])].map(|(name, docs)| {
        let docs = docs
            .iter()
            .enumerate()
            .map(|(i, (text, label))| Document::labeled(format!("synth-{name}-{:05}", i + 1), text.as_str(), label.as_str()))
            .collect();
        Corpus::new(docs).expect("generated ids are unique")
    });
    Splits { train, dev, test }
}

/// Each class draws 70% of its tokens from a private vocabulary and 30%
/// from a pool shared by all classes (all private when the pool is empty).
/// Documents are split 80/10/10 per class.
pub fn generate_synthetic(params: &SynthParams) -> Splits {
    assert!(
        params.class_count > 0 && params.docs_per_class > 0 && params.vocab_per_class > 0,
        "counts must be positive"
    );
    assert!(params.doc_len.0 >= 1 && params.doc_len.0 <= params.doc_len.1, "invalid length range");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut taken = HashSet::new();
    let shared = unique_words(&mut rng, params.shared_vocab, &ARABIC_LETTERS, (3, 7), &mut taken);
    let private: Vec<Vec<String>> = (0..params.class_count)
        .map(|_| unique_words(&mut rng, params.vocab_per_class, &ARABIC_LETTERS, (3, 7), &mut taken))
        .collect();
    let per_class = private
        .iter()
        .map(|own| {
            (0..params.docs_per_class)
                .map(|_| {
                    let len = rng.random_range(params.doc_len.0..=params.doc_len.1);
                    (0..len)
                        .map(|_| {
                            let pool = if shared.is_empty() || rng.random_bool(0.7) { own } else { &shared };
                            pool.choose(&mut rng).expect("non-empty pool").as_str()
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect()
        })
        .collect();
    assemble(per_class, params.class_count)
}

/// A corpus whose class signal lives only in affixes, punctuation and
/// diacritics: every class uses the same stems, but each class decorates
/// them with its own prefix/suffix pair, diacritic pattern and punctuation
/// mark. Surface cleanup plus stemming erases the signal.
pub fn generate_affix_corpus(class_count: usize, docs_per_class: usize, doc_len: (usize, usize), seed: u64) -> Splits {
    assert!(
        class_count > 1 && class_count <= CLASS_MARKS.len() && docs_per_class > 0,
        "unsupported class count"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = HashSet::new();
    let stems = unique_words(&mut rng, 60, &STEM_LETTERS, (3, 4), &mut taken);
    let suffixes: Vec<&str> = SUFFIXES.iter().copied().filter(|s| !s.ends_with('ة')).collect();
    let decorations: Vec<(&str, &str)> = (0..class_count)
        .map(|c| (PREFIXES[c % PREFIXES.len()], suffixes[(c / PREFIXES.len() + c) % suffixes.len()]))
        .collect();
    let per_class = (0..class_count)
        .map(|class| {
            (0..docs_per_class)
                .map(|_| {
                    let len = rng.random_range(doc_len.0..=doc_len.1);
                    let mut tokens: Vec<String> = (0..len)
                        .map(|_| {
                            let owner = if rng.random_bool(0.6) {
                                class
                            } else {
                                rng.random_range(0..class_count)
                            };
                            let (prefix, suffix) = decorations[owner];
                            let stem = stems.choose(&mut rng).expect("stems");
                            let diacritic = if owner % 2 == 0 { "\u{064E}" } else { "\u{0650}" };
                            let mut chars = stem.chars();
                            let first = chars.next().expect("non-empty stem");
                            format!("{prefix}{first}{diacritic}{}{suffix}", chars.as_str())
                        })
                        .collect();
                    tokens.push(CLASS_MARKS[class].to_string());
                    tokens.join(" ")
                })
                .collect()
        })
        .collect();
    assemble(per_class, class_count)
}
