//! Declarative experiment configuration in TOML.
//!
//! ```toml
//! id = "exp4"
//! runs = 3
//! seed = 7
//! feature_source = "tfidf_union"
//! surface = "none"          # "none", "all", or a table of flags
//! morph = "none"            # "none", a mode name, or "all"
//!
//! [tfidf]
//! word = [1, 1]
//! char = [1, 4]
//! char_wb = [2, 5]
//! sweep = ["char", "char_wb"]
//! ngram_m = [1, 3]
//! ngram_n = [1, 10]
//! max_features = [25000]
//!
//! [weights]
//! triples = [[1.0, 1.0, 1.0], [0.5, 1.0, 1.0]]
//!
//! [svc]
//! C = 100.0
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use super::HarnessError;
use crate::fasttext::FastTextParams;
use crate::morph::MorphMode;
use crate::surface::SurfaceConfig;
use crate::svc::SvcParams;
use crate::tfidf::AnalyzerKind;

/// Bounds of the n-gram search space.
pub const NGRAM_M_RANGE: (usize, usize) = (1, 3);
pub const NGRAM_N_RANGE: (usize, usize) = (1, 10);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentId {
    Exp1,
    Exp2,
    Exp3,
    Exp4,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [Self::Exp1, Self::Exp2, Self::Exp3, Self::Exp4];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Exp1 => "exp1",
            Self::Exp2 => "exp2",
            Self::Exp3 => "exp3",
            Self::Exp4 => "exp4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s)
    }
}

impl std::fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureSource {
    TfidfUnion,
    FastTextSupervised,
    FastTextUnsupervised,
}

impl FeatureSource {
    pub const ALL: [FeatureSource; 3] = [Self::TfidfUnion, Self::FastTextSupervised, Self::FastTextUnsupervised];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TfidfUnion => "tfidf_union",
            Self::FastTextSupervised => "fasttext_supervised",
            Self::FastTextUnsupervised => "fasttext_unsupervised",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.as_str() == s)
    }
}

impl std::fmt::Display for FeatureSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceChoice {
    Fixed(SurfaceConfig),
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphChoice {
    Fixed(MorphMode),
    All,
}

/// The TF-IDF part of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzerGrid {
    /// `(m, n)` per analyzer in union order, used when not swept.
    pub fixed: [(usize, usize); 3],
    /// Analyzers that take the swept `(m, n)` pair.
    pub sweep: Vec<AnalyzerKind>,
    /// Inclusive bounds for `m` and `n` of the swept pair.
    pub ngram_m: (usize, usize),
    pub ngram_n: (usize, usize),
    /// Candidate per-block vocabulary caps; `None` keeps every term.
    pub max_features: Vec<Option<usize>>,
}

impl Default for AnalyzerGrid {
    fn default() -> Self {
        Self {
            fixed: [(1, 1), (1, 4), (2, 5)],
            sweep: Vec::new(),
            ngram_m: NGRAM_M_RANGE,
            ngram_n: NGRAM_N_RANGE,
            max_features: vec![None],
        }
    }
}

impl AnalyzerGrid {
    /// Valid `(m, n)` pairs in the configured bounds, `m` outer.
    pub fn ngram_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for m in self.ngram_m.0..=self.ngram_m.1 {
            for n in self.ngram_n.0.max(m)..=self.ngram_n.1 {
                out.push((m, n));
            }
        }
        out
    }

    /// Widen the swept bounds to the full search space.
    pub fn widen(&mut self) {
        self.ngram_m = NGRAM_M_RANGE;
        self.ngram_n = NGRAM_N_RANGE;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub runs: usize,
    pub seed: u64,
    pub surface: SurfaceChoice,
    pub morph: MorphChoice,
    pub feature_sources: Vec<FeatureSource>,
    pub stoplist: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub analyzers: AnalyzerGrid,
    pub weights: Vec<[f64; 3]>,
    pub svc: SvcParams,
    pub fasttext: FastTextParams,
}

impl ExperimentSpec {
    /// Defaults for an experiment id, before any config keys are applied.
    pub fn defaults(id: ExperimentId) -> Self {
        let (surface, morph, sources) = match id {
            ExperimentId::Exp1 => (SurfaceChoice::All, MorphChoice::Fixed(MorphMode::None), vec![FeatureSource::TfidfUnion]),
            ExperimentId::Exp2 => (
                SurfaceChoice::Fixed(SurfaceConfig::NONE),
                MorphChoice::All,
                vec![FeatureSource::TfidfUnion],
            ),
            ExperimentId::Exp3 => (
                SurfaceChoice::Fixed(SurfaceConfig::NONE),
                MorphChoice::Fixed(MorphMode::None),
                vec![FeatureSource::FastTextSupervised, FeatureSource::FastTextUnsupervised],
            ),
            ExperimentId::Exp4 => (
                SurfaceChoice::Fixed(SurfaceConfig::NONE),
                MorphChoice::Fixed(MorphMode::None),
                vec![FeatureSource::TfidfUnion],
            ),
        };
        Self {
            id,
            runs: 1,
            seed: 0,
            surface,
            morph,
            feature_sources: sources,
            stoplist: None,
            lexicon: None,
            analyzers: AnalyzerGrid::default(),
            weights: vec![[1.0; 3]],
            svc: SvcParams::default(),
            fasttext: FastTextParams {
                bucket_count: 100_000,
                ..FastTextParams::default()
            },
        }
    }

    /// Checks the per-experiment shape constraints.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let violation = |msg: &str| Err(HarnessError::SchemaViolation(format!("{}: {msg}", self.id)));
        let tfidf_only = self.feature_sources == [FeatureSource::TfidfUnion];
        let unit_weights = self.weights == [[1.0; 3]];
        if self.feature_sources.is_empty() {
            return violation("feature_source is empty");
        }
        match self.id {
            ExperimentId::Exp1 => {
                if self.surface != SurfaceChoice::All {
                    return violation("surface must be \"all\"");
                }
                if self.morph != MorphChoice::Fixed(MorphMode::None) {
                    return violation("morph must be \"none\"");
                }
                if !tfidf_only || !unit_weights {
                    return violation("features must be the unweighted tfidf_union");
                }
            }
            ExperimentId::Exp2 => {
                if self.morph != MorphChoice::All {
                    return violation("morph must be \"all\"");
                }
                if self.surface != SurfaceChoice::Fixed(SurfaceConfig::NONE) {
                    return violation("surface must be \"none\"");
                }
                if !tfidf_only || !unit_weights {
                    return violation("features must be the unweighted tfidf_union");
                }
            }
            ExperimentId::Exp3 => {
                if self.feature_sources.contains(&FeatureSource::TfidfUnion) {
                    return violation("feature_source must be fasttext_supervised and/or fasttext_unsupervised");
                }
                if self.surface == SurfaceChoice::All || self.morph == MorphChoice::All {
                    return violation("preprocessing cannot be enumerated");
                }
            }
            ExperimentId::Exp4 => {
                if !tfidf_only {
                    return violation("feature_source must be tfidf_union");
                }
                if self.surface == SurfaceChoice::All || self.morph == MorphChoice::All {
                    return violation("preprocessing cannot be enumerated");
                }
            }
        }
        if self.analyzers.ngram_pairs().is_empty() && !self.analyzers.sweep.is_empty() {
            return Err(HarnessError::EmptyGrid);
        }
        Ok(())
    }
}

const PRESETS: [(&str, &str); 4] = [
    ("exp1", include_str!("../../presets/exp1.toml")),
    ("exp2", include_str!("../../presets/exp2.toml")),
    ("exp3", include_str!("../../presets/exp3.toml")),
    ("exp4", include_str!("../../presets/exp4.toml")),
];

/// The bundled preset for an experiment id.
pub fn preset(id: ExperimentId) -> ExperimentSpec {
    let text = PRESETS
        .iter()
        .find(|(name, _)| *name == id.as_str())
        .map(|(_, text)| *text)
        .expect("preset for every id");
    parse_config_str(text).expect("bundled presets are valid")
}

pub fn preset_text(id: ExperimentId) -> &'static str {
    PRESETS.iter().find(|(name, _)| *name == id.as_str()).map(|(_, t)| *t).expect("preset")
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentSpec, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut spec = parse_config_str(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for p in [&mut spec.stoplist, &mut spec.lexicon].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(spec)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentSpec, HarnessError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| HarnessError::SchemaViolation(e.message().to_string()))?;
    let id_value = table
        .get("id")
        .ok_or_else(|| HarnessError::SchemaViolation("missing key \"id\"".into()))?;
    let id = id_value
        .as_str()
        .and_then(ExperimentId::parse)
        .ok_or_else(|| HarnessError::InvalidValue("id".into()))?;
    let mut spec = ExperimentSpec::defaults(id);
    for (key, value) in &table {
        match key.as_str() {
            "id" => {}
            "runs" => spec.runs = positive(value, key)?,
            "seed" => spec.seed = non_negative(value, key)? as u64,
            "surface" => spec.surface = surface_choice(value)?,
            "morph" => spec.morph = morph_choice(value)?,
            "feature_source" => spec.feature_sources = feature_sources(value)?,
            "stoplist" => spec.stoplist = Some(PathBuf::from(string(value, key)?)),
            "lexicon" => spec.lexicon = Some(PathBuf::from(string(value, key)?)),
            "tfidf" => parse_tfidf(section(value, key)?, &mut spec.analyzers)?,
            "weights" => spec.weights = parse_weights(section(value, key)?)?,
            "svc" => parse_svc(section(value, key)?, &mut spec.svc)?,
            "fasttext" => parse_fasttext(section(value, key)?, &mut spec.fasttext)?,
            other => return Err(HarnessError::UnknownKey(other.to_string())),
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn invalid(key: &str) -> HarnessError {
    HarnessError::InvalidValue(key.to_string())
}

fn section<'a>(value: &'a Value, key: &str) -> Result<&'a Table, HarnessError> {
    value
        .as_table()
        .ok_or_else(|| HarnessError::SchemaViolation(format!("[{key}] must be a table")))
}

fn string<'a>(value: &'a Value, key: &str) -> Result<&'a str, HarnessError> {
    value.as_str().ok_or_else(|| invalid(key))
}

fn non_negative(value: &Value, key: &str) -> Result<usize, HarnessError> {
    value
        .as_integer()
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| invalid(key))
}

fn positive(value: &Value, key: &str) -> Result<usize, HarnessError> {
    match non_negative(value, key)? {
        0 => Err(invalid(key)),
        v => Ok(v),
    }
}

fn positive_real(value: &Value, key: &str) -> Result<f64, HarnessError> {
    let v = value
        .as_float()
        .or_else(|| value.as_integer().map(|i| i as f64))
        .ok_or_else(|| invalid(key))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key))
    }
}

fn pair(value: &Value, key: &str) -> Result<(usize, usize), HarnessError> {
    let arr = value.as_array().filter(|a| a.len() == 2).ok_or_else(|| invalid(key))?;
    let (a, b) = (positive(&arr[0], key)?, positive(&arr[1], key)?);
    if a > b {
        return Err(invalid(key));
    }
    Ok((a, b))
}

fn surface_choice(value: &Value) -> Result<SurfaceChoice, HarnessError> {
    match value {
        Value::String(s) if s == "all" => Ok(SurfaceChoice::All),
        Value::String(s) if s == "none" => Ok(SurfaceChoice::Fixed(SurfaceConfig::NONE)),
        Value::Table(t) => {
            let mut cfg = SurfaceConfig::NONE;
            for (flag, v) in t {
                let on = v.as_bool().ok_or_else(|| invalid(&format!("surface.{flag}")))?;
                if !cfg.set_flag(flag, on) {
                    return Err(HarnessError::UnknownKey(format!("surface.{flag}")));
                }
            }
            Ok(SurfaceChoice::Fixed(cfg))
        }
        _ => Err(invalid("surface")),
    }
}

fn morph_choice(value: &Value) -> Result<MorphChoice, HarnessError> {
    match value.as_str() {
        Some("all") => Ok(MorphChoice::All),
        Some(s) => s.parse().map(MorphChoice::Fixed).map_err(|_| invalid("morph")),
        None => Err(invalid("morph")),
    }
}

fn feature_sources(value: &Value) -> Result<Vec<FeatureSource>, HarnessError> {
    let names: Vec<&Value> = match value {
        Value::Array(a) => a.iter().collect(),
        v => vec![v],
    };
    let mut out = Vec::new();
    for v in names {
        let src = v
            .as_str()
            .and_then(FeatureSource::parse)
            .ok_or_else(|| invalid("feature_source"))?;
        if !out.contains(&src) {
            out.push(src);
        }
    }
    Ok(out)
}

fn parse_tfidf(t: &Table, grid: &mut AnalyzerGrid) -> Result<(), HarnessError> {
    for (key, value) in t {
        let full = format!("tfidf.{key}");
        match key.as_str() {
            "word" => grid.fixed[0] = pair(value, &full)?,
            "char" => grid.fixed[1] = pair(value, &full)?,
            "char_wb" => grid.fixed[2] = pair(value, &full)?,
            "sweep" => {
                let arr = value.as_array().ok_or_else(|| invalid(&full))?;
                let mut kinds = Vec::new();
                for v in arr {
                    let kind: AnalyzerKind = v.as_str().and_then(|s| s.parse().ok()).ok_or_else(|| invalid(&full))?;
                    if !kinds.contains(&kind) {
                        kinds.push(kind);
                    }
                }
                grid.sweep = kinds;
            }
            "ngram_m" => {
                grid.ngram_m = pair(value, &full)?;
                if grid.ngram_m.0 < NGRAM_M_RANGE.0 || grid.ngram_m.1 > NGRAM_M_RANGE.1 {
                    return Err(invalid(&full));
                }
            }
            "ngram_n" => {
                grid.ngram_n = pair(value, &full)?;
                if grid.ngram_n.0 < NGRAM_N_RANGE.0 || grid.ngram_n.1 > NGRAM_N_RANGE.1 {
                    return Err(invalid(&full));
                }
            }
            "max_features" => {
                let arr = value.as_array().filter(|a| !a.is_empty()).ok_or_else(|| invalid(&full))?;
                grid.max_features = arr
                    .iter()
                    .map(|v| match v {
                        Value::String(s) if s == "all" => Ok(None),
                        v => positive(v, &full).map(Some),
                    })
                    .collect::<Result<_, _>>()?;
            }
            _ => return Err(HarnessError::UnknownKey(full)),
        }
    }
    Ok(())
}

fn weight(value: &Value, key: &str) -> Result<f64, HarnessError> {
    let w = positive_real(value, key)?;
    if w <= 1.0 {
        Ok(w)
    } else {
        Err(invalid(key))
    }
}

fn parse_weights(t: &Table) -> Result<Vec<[f64; 3]>, HarnessError> {
    if t.contains_key("values") && t.contains_key("triples") {
        return Err(HarnessError::SchemaViolation(
            "[weights] takes either \"values\" or \"triples\"".into(),
        ));
    }
    let mut out = Vec::new();
    for (key, value) in t {
        let full = format!("weights.{key}");
        let arr = value.as_array().filter(|a| !a.is_empty()).ok_or_else(|| invalid(&full))?;
        match key.as_str() {
            "values" => {
                let vals = arr.iter().map(|v| weight(v, &full)).collect::<Result<Vec<_>, _>>()?;
                for &a in &vals {
                    for &b in &vals {
                        for &c in &vals {
                            out.push([a, b, c]);
                        }
                    }
                }
            }
            "triples" => {
                for v in arr {
                    let tri = v.as_array().filter(|a| a.len() == 3).ok_or_else(|| invalid(&full))?;
                    out.push([weight(&tri[0], &full)?, weight(&tri[1], &full)?, weight(&tri[2], &full)?]);
                }
            }
            _ => return Err(HarnessError::UnknownKey(full)),
        }
    }
    if out.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    Ok(out)
}

fn parse_svc(t: &Table, svc: &mut SvcParams) -> Result<(), HarnessError> {
    for (key, value) in t {
        let full = format!("svc.{key}");
        match key.as_str() {
            "C" => svc.c = positive_real(value, &full)?,
            "tolerance" => svc.tolerance = positive_real(value, &full)?,
            "max_sweeps" => svc.max_sweeps = positive(value, &full)?,
            "gamma" => log::warn!("svc.gamma has no effect on a linear kernel and is ignored"),
            _ => return Err(HarnessError::UnknownKey(full)),
        }
    }
    Ok(())
}

fn parse_fasttext(t: &Table, p: &mut FastTextParams) -> Result<(), HarnessError> {
    for (key, value) in t {
        let full = format!("fasttext.{key}");
        match key.as_str() {
            "dim" => p.dim = positive(value, &full)?,
            "window" => p.window = positive(value, &full)?,
            "epochs" => p.epochs = non_negative(value, &full)?,
            "min_count" => p.min_count = positive(value, &full)?,
            "subword_min" => p.subword_min = non_negative(value, &full)?,
            "subword_max" => p.subword_max = non_negative(value, &full)?,
            "bucket_count" => p.bucket_count = positive(value, &full)?,
            "negatives" => p.negatives = positive(value, &full)?,
            "learning_rate" => p.learning_rate = positive_real(value, &full)?,
            _ => return Err(HarnessError::UnknownKey(full)),
        }
    }
    p.validate().map_err(|e| HarnessError::InvalidValue(format!("fasttext: {e}")))
}
