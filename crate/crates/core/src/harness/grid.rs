//! Expansion of an [`ExperimentSpec`] into concrete grid points.

use std::collections::BTreeMap;

use super::config::{ExperimentSpec, FeatureSource, MorphChoice, SurfaceChoice};
use super::HarnessError;
use crate::morph::{MorphMode, enumerate_morph_configs};
use crate::surface::{SurfaceConfig, enumerate_surface_configs};
use crate::tfidf::{AnalyzerConfig, AnalyzerKind};

/// Feature extraction settings of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureSpec {
    TfidfUnion {
        analyzers: [AnalyzerConfig; 3],
        weights: [f64; 3],
    },
    FastTextSupervised,
    FastTextUnsupervised,
}

impl FeatureSpec {
    pub fn source(&self) -> FeatureSource {
        match self {
            Self::TfidfUnion { .. } => FeatureSource::TfidfUnion,
            Self::FastTextSupervised => FeatureSource::FastTextSupervised,
            Self::FastTextUnsupervised => FeatureSource::FastTextUnsupervised,
        }
    }
}

/// One fully specified pipeline configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub surface: SurfaceConfig,
    pub morph: MorphMode,
    pub features: FeatureSpec,
}

fn ngram_label(c: &AnalyzerConfig) -> String {
    match c.max_features {
        Some(k) => format!("({},{}) max={k}", c.ngram_min, c.ngram_max),
        None => format!("({},{})", c.ngram_min, c.ngram_max),
    }
}

impl GridPoint {
    /// Flat `key -> value` view of every parameter.
    pub fn flatten(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        out.insert("surface".to_string(), self.surface.label());
        out.insert("morph".to_string(), self.morph.to_string());
        out.insert("feature_source".to_string(), self.features.source().to_string());
        if let FeatureSpec::TfidfUnion { analyzers, weights } = &self.features {
            for (c, w) in analyzers.iter().zip(weights) {
                out.insert(format!("{}.ngram", c.kind), format!("({},{})", c.ngram_min, c.ngram_max));
                out.insert(
                    format!("{}.max_features", c.kind),
                    c.max_features.map_or_else(|| "all".to_string(), |k| k.to_string()),
                );
                out.insert(format!("{}.weight", c.kind), w.to_string());
            }
        }
        out
    }

    /// Compact one-line description.
    pub fn describe(&self) -> String {
        let mut s = format!("surface={} morph={} source={}", self.surface.label(), self.morph, self.features.source());
        if let FeatureSpec::TfidfUnion { analyzers, weights } = &self.features {
            for (c, w) in analyzers.iter().zip(weights) {
                s.push_str(&format!(" {}={} w={w}", c.kind, ngram_label(c)));
            }
        }
        s
    }

    /// Grid points sharing this key share preprocessing and TF-IDF
    /// vocabularies; they differ only in block weights.
    pub(crate) fn feature_key(&self) -> (u8, MorphMode, FeatureSource, Option<[AnalyzerConfig; 3]>) {
        let analyzers = match &self.features {
            FeatureSpec::TfidfUnion { analyzers, .. } => Some(*analyzers),
            _ => None,
        };
        (self.surface.bits(), self.morph, self.features.source(), analyzers)
    }
}

/// Cartesian product of the active dimensions, in the order surface,
/// morph, feature source, n-gram pair, max_features, weights (last varies
/// fastest).
pub fn enumerate_grid(spec: &ExperimentSpec) -> Result<Vec<GridPoint>, HarnessError> {
    let surfaces = match spec.surface {
        SurfaceChoice::All => enumerate_surface_configs(),
        SurfaceChoice::Fixed(c) => vec![c],
    };
    let morphs: Vec<MorphMode> = match spec.morph {
        MorphChoice::All => enumerate_morph_configs().into_iter().map(|c| c.mode).collect(),
        MorphChoice::Fixed(m) => vec![m],
    };
    let grid = &spec.analyzers;
    let pairs: Vec<Option<(usize, usize)>> = if grid.sweep.is_empty() {
        vec![None]
    } else {
        grid.ngram_pairs().into_iter().map(Some).collect()
    };
    let mut tfidf = Vec::new();
    for pair in &pairs {
        for &max_features in &grid.max_features {
            let analyzers: [AnalyzerConfig; 3] = std::array::from_fn(|i| {
                let kind = AnalyzerKind::UNION_ORDER[i];
                let (m, n) = match pair {
                    Some(p) if grid.sweep.contains(&kind) => *p,
                    _ => grid.fixed[i],
                };
                AnalyzerConfig {
                    kind,
                    ngram_min: m,
                    ngram_max: n,
                    max_features,
                }
            });
            for &weights in &spec.weights {
                tfidf.push(FeatureSpec::TfidfUnion { analyzers, weights });
            }
        }
    }
    let mut out = Vec::new();
    for &surface in &surfaces {
        for &morph in &morphs {
            for source in &spec.feature_sources {
                let features: Vec<FeatureSpec> = match source {
                    FeatureSource::TfidfUnion => tfidf.clone(),
                    FeatureSource::FastTextSupervised => vec![FeatureSpec::FastTextSupervised],
                    FeatureSource::FastTextUnsupervised => vec![FeatureSpec::FastTextUnsupervised],
                };
                out.extend(features.into_iter().map(|features| GridPoint {
                    surface,
                    morph,
                    features,
                }));
            }
        }
    }
    if out.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    Ok(out)
}
