//! Surface preprocessing: orthographic clean-up steps that never change
//! word structure.
//!
//! Each step is a pure `&str -> String` function and is idempotent.
//! [`apply_surface`] runs the enabled steps in a fixed order:
//! letter normalization, diacritics, punctuation/emoji, non-Arabic
//! tokens, stopwords. Scalar-level steps therefore always run before
//! token-level ones.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;

use unicode_categories::UnicodeCategories;

#[derive(Debug, thiserror::Error)]
pub enum SurfaceError {
    #[error("stopword removal enabled with an empty stoplist")]
    MissingStoplist,
    #[error("invalid UTF-8 in stoplist")]
    InvalidEncoding,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Letter normalization table: hamza/madda/wasla alef forms collapse to
/// bare alef, alef maqsura to ya, ta marbuta to ha, and hamza carriers to
/// their base letter.
pub const LETTER_MAP: [(char, char); 8] = [
    ('\u{0622}', '\u{0627}'),
    ('\u{0623}', '\u{0627}'),
    ('\u{0625}', '\u{0627}'),
    ('\u{0671}', '\u{0627}'),
    ('\u{0649}', '\u{064A}'),
    ('\u{0629}', '\u{0647}'),
    ('\u{0624}', '\u{0648}'),
    ('\u{0626}', '\u{064A}'),
];

const TATWEEL: char = '\u{0640}';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SurfaceConfig {
    pub normalize_letters: bool,
    pub remove_punct_emoji: bool,
    pub remove_stopwords: bool,
    pub remove_diacritics: bool,
    pub remove_non_arabic: bool,
}

impl SurfaceConfig {
    pub const NONE: SurfaceConfig = SurfaceConfig {
        normalize_letters: false,
        remove_punct_emoji: false,
        remove_stopwords: false,
        remove_diacritics: false,
        remove_non_arabic: false,
    };

    pub const ALL: SurfaceConfig = SurfaceConfig {
        normalize_letters: true,
        remove_punct_emoji: true,
        remove_stopwords: true,
        remove_diacritics: true,
        remove_non_arabic: true,
    };

    /// Flag names in bit order (bit 0 = least significant).
    pub const FLAG_NAMES: [&'static str; 5] = [
        "normalize_letters",
        "remove_punct_emoji",
        "remove_stopwords",
        "remove_diacritics",
        "remove_non_arabic",
    ];

    /// Builds a config from a 5-bit mask; `normalize_letters` is bit 0.
    pub fn from_bits(bits: u8) -> Self {
        let flag = |i: u8| bits & (1 << i) != 0;
        Self {
            normalize_letters: flag(0),
            remove_punct_emoji: flag(1),
            remove_stopwords: flag(2),
            remove_diacritics: flag(3),
            remove_non_arabic: flag(4),
        }
    }

    pub fn bits(&self) -> u8 {
        self.flags()
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &on)| acc | ((on as u8) << i))
    }

    pub fn flags(&self) -> [bool; 5] {
        [
            self.normalize_letters,
            self.remove_punct_emoji,
            self.remove_stopwords,
            self.remove_diacritics,
            self.remove_non_arabic,
        ]
    }

    pub fn set_flag(&mut self, name: &str, value: bool) -> bool {
        let slot = match name {
            "normalize_letters" => &mut self.normalize_letters,
            "remove_punct_emoji" => &mut self.remove_punct_emoji,
            "remove_stopwords" => &mut self.remove_stopwords,
            "remove_diacritics" => &mut self.remove_diacritics,
            "remove_non_arabic" => &mut self.remove_non_arabic,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub fn is_identity(&self) -> bool {
        self.bits() == 0
    }

    /// Compact label such as `norm+punct`, or `none`.
    pub fn label(&self) -> String {
        const SHORT: [&str; 5] = ["norm", "punct", "stop", "diac", "nonar"];
        let parts: Vec<&str> = self
            .flags()
            .iter()
            .zip(SHORT)
            .filter(|(on, _)| **on)
            .map(|(_, s)| s)
            .collect();
        if parts.is_empty() {
            "none".to_string()
        } else {
            parts.join("+")
        }
    }
}

pub fn normalize_letter(c: char) -> char {
    LETTER_MAP
        .iter()
        .find(|(from, _)| *from == c)
        .map_or(c, |&(_, to)| to)
}

pub fn normalize_letters(text: &str) -> String {
    text.chars().map(normalize_letter).collect()
}

pub fn is_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{0652}' | '\u{0670}') || c == TATWEEL
}

pub fn remove_diacritics(text: &str) -> String {
    text.chars().filter(|&c| !is_diacritic(c)).collect()
}

pub fn is_emoji(c: char) -> bool {
    matches!(
        c,
        '\u{1F300}'..='\u{1FAFF}' | '\u{2600}'..='\u{27BF}' | '\u{FE0F}' | '\u{200D}'
    )
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Replaces punctuation and emoji scalars by spaces, then collapses
/// whitespace runs and trims.
pub fn remove_punct_emoji(text: &str) -> String {
    let spaced: String = text
        .chars()
        .map(|c| if c.is_punctuation() || is_emoji(c) { ' ' } else { c })
        .collect();
    collapse_whitespace(&spaced)
}

pub fn is_arabic(c: char) -> bool {
    matches!(c, '\u{0600}'..='\u{06FF}' | '\u{0750}'..='\u{077F}')
}

/// Drops whitespace tokens that contain no Arabic scalar at all.
pub fn remove_non_arabic(text: &str) -> String {
    text.split_whitespace()
        .filter(|tok| tok.chars().any(is_arabic))
        .collect::<Vec<_>>()
        .join(" ")
}

/// A set of tokens removed by exact match.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist {
    words: HashSet<String>,
}

impl Stoplist {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            words: words
                .into_iter()
                .map(Into::into)
                .filter(|w: &String| !w.is_empty())
                .collect(),
        }
    }

    /// The bundled list of Modern Standard Arabic function words, plus the
    /// letter-normalized spelling of each entry so the list still matches
    /// after [`normalize_letters`].
    pub fn bundled() -> Self {
        let raw = include_str!("../data/stopwords.txt");
        let mut words: HashSet<String> = HashSet::new();
        for w in raw.lines().map(str::trim).filter(|w| !w.is_empty()) {
            words.insert(w.to_string());
            words.insert(normalize_letters(w));
            words.insert(remove_diacritics(&normalize_letters(w)));
        }
        Self { words }
    }

    /// One token per line, UTF-8. Blank lines are ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SurfaceError> {
        let bytes = fs::read(path)?;
        let text = String::from_utf8(bytes).map_err(|_| SurfaceError::InvalidEncoding)?;
        Ok(Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty())))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Entries in sorted order.
    pub fn sorted(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.words.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }
}

pub fn remove_stopwords(text: &str, stoplist: &Stoplist) -> Result<String, SurfaceError> {
    if stoplist.is_empty() {
        return Err(SurfaceError::MissingStoplist);
    }
    Ok(text
        .split_whitespace()
        .filter(|tok| !stoplist.contains(tok))
        .collect::<Vec<_>>()
        .join(" "))
}

pub fn apply_surface(text: &str, config: &SurfaceConfig, stoplist: &Stoplist) -> Result<String, SurfaceError> {
    let mut out = text.to_string();
    if config.normalize_letters {
        out = normalize_letters(&out);
    }
    if config.remove_diacritics {
        out = remove_diacritics(&out);
    }
    if config.remove_punct_emoji {
        out = remove_punct_emoji(&out);
    }
    if config.remove_non_arabic {
        out = remove_non_arabic(&out);
    }
    if config.remove_stopwords {
        out = remove_stopwords(&out, stoplist)?;
    }
    Ok(out)
}

/// All 32 configurations, in binary counting order with
/// `normalize_letters` as the least significant flag.
pub fn enumerate_surface_configs() -> Vec<SurfaceConfig> {
    (0u8..32).map(SurfaceConfig::from_bits).collect()
}
