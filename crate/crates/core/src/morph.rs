//! Morphological preprocessing: light affix stripping and dictionary
//! lemmatization.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum MorphError {
    #[error("malformed lexicon row at line {0}")]
    MalformedRow(usize),
    #[error("invalid UTF-8 in lexicon")]
    InvalidEncoding,
    #[error("unknown morphology mode {0:?}")]
    UnknownMode(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Prefixes tried longest-first.
pub const PREFIXES: [&str; 7] = ["وال", "بال", "كال", "فال", "لل", "ال", "و"];

/// Suffixes tried longest-first.
pub const SUFFIXES: [&str; 15] = [
    "هما", "كما", "تين", "تان", "ات", "ون", "ين", "ان", "ها", "ية", "ته", "ة", "ه", "ي", "ا",
];

pub const MIN_STEM_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MorphMode {
    #[default]
    None,
    Stem,
    Lemma,
    LemmaThenStem,
}

impl MorphMode {
    pub const ALL: [MorphMode; 4] = [
        MorphMode::None,
        MorphMode::Stem,
        MorphMode::Lemma,
        MorphMode::LemmaThenStem,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MorphMode::None => "none",
            MorphMode::Stem => "stem",
            MorphMode::Lemma => "lemma",
            MorphMode::LemmaThenStem => "lemma_then_stem",
        }
    }
}

impl fmt::Display for MorphMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MorphMode {
    type Err = MorphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MorphMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| MorphError::UnknownMode(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MorphConfig {
    pub mode: MorphMode,
}

impl MorphConfig {
    pub fn new(mode: MorphMode) -> Self {
        Self { mode }
    }
}

/// Surface token to lemma lookup table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: HashMap<String, String>,
}

impl Lexicon {
    pub fn new<I, K, V>(entries: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Self {
            entries: entries
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    /// The bundled lexicon of regular verb conjugations and noun
    /// inflections.
    pub fn bundled() -> Self {
        Self::parse(include_str!("../data/lexicon.tsv")).expect("bundled lexicon is well-formed")
    }

    /// Parses `surface<TAB>lemma` rows. Neither column may be empty or
    /// contain whitespace.
    pub fn parse(text: &str) -> Result<Self, MorphError> {
        let mut entries = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let (Some(surface), Some(lemma), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(MorphError::MalformedRow(i + 1));
            };
            let bad = |s: &str| s.is_empty() || s.chars().any(char::is_whitespace);
            if bad(surface) || bad(lemma) {
                return Err(MorphError::MalformedRow(i + 1));
            }
            entries.insert(surface.to_string(), lemma.to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MorphError> {
        let bytes = fs::read(path)?;
        let text = String::from_utf8(bytes).map_err(|_| MorphError::InvalidEncoding)?;
        Self::parse(&text)
    }

    pub fn get(&self, token: &str) -> Option<&str> {
        self.entries.get(token).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sorted by surface form.
    pub fn sorted_entries(&self) -> Vec<(&str, &str)> {
        let mut v: Vec<(&str, &str)> = self
            .entries
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        v.sort_unstable();
        v
    }
}

/// Strips at most one prefix and then at most one suffix. An affix is only
/// removed when at least [`MIN_STEM_LEN`] scalars remain; otherwise the
/// next candidate in the list is tried.
pub fn light_stem(token: &str) -> String {
    let len = token.chars().count();
    let mut stem = token;
    let mut stem_len = len;
    for prefix in PREFIXES {
        if let Some(rest) = stem.strip_prefix(prefix) {
            let rest_len = stem_len - prefix.chars().count();
            if rest_len >= MIN_STEM_LEN {
                stem = rest;
                stem_len = rest_len;
                break;
            }
        }
    }
    for suffix in SUFFIXES {
        if let Some(rest) = stem.strip_suffix(suffix) {
            if stem_len - suffix.chars().count() >= MIN_STEM_LEN {
                stem = rest;
                break;
            }
        }
    }
    stem.to_string()
}

pub fn lemmatize(token: &str, lexicon: &Lexicon) -> String {
    lexicon.get(token).unwrap_or(token).to_string()
}

pub fn apply_morph(text: &str, config: &MorphConfig, lexicon: &Lexicon) -> String {
    let map: fn(&str, &Lexicon) -> String = match config.mode {
        MorphMode::None => return text.to_string(),
        MorphMode::Stem => |t, _| light_stem(t),
        MorphMode::Lemma => lemmatize,
        MorphMode::LemmaThenStem => |t, lex| light_stem(&lemmatize(t, lex)),
    };
    text.split_whitespace()
        .map(|tok| map(tok, lexicon))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn enumerate_morph_configs() -> Vec<MorphConfig> {
    MorphMode::ALL.into_iter().map(MorphConfig::new).collect()
}
