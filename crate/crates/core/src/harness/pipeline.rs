//! A fitted end-to-end classifier: preprocessing, feature extraction and
//! the linear SVC, persisted as one self-contained file.

use std::path::Path;

use super::grid::{FeatureSpec, GridPoint};
use super::HarnessError;
use crate::codec::{CodecError, Decoder, Encoder, Persist};
use crate::corpus::{Corpus, CorpusError};
use crate::fasttext::{self, EmbeddingModel, FastTextParams, SentenceEncoder, SupervisedTextModel};
use crate::metrics::{self, EvalReport};
use crate::morph::{self, Lexicon, MorphConfig, MorphMode};
use crate::surface::{self, Stoplist, SurfaceConfig};
use crate::svc::{self, LinearSvcModel, SvcParams};
use crate::tfidf::{self, UnionModel};
use crate::vector::{DenseVector, SparseVector};

/// Word lists used by preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct Resources {
    pub stoplist: Stoplist,
    pub lexicon: Lexicon,
}

impl Resources {
    pub fn bundled() -> Self {
        Self {
            stoplist: Stoplist::bundled(),
            lexicon: Lexicon::bundled(),
        }
    }

    /// Bundled resources, with either list replaced when a path is given.
    pub fn load(stoplist: Option<&Path>, lexicon: Option<&Path>) -> Result<Self, HarnessError> {
        Ok(Self {
            stoplist: match stoplist {
                Some(p) => Stoplist::load(p)?,
                None => Stoplist::bundled(),
            },
            lexicon: match lexicon {
                Some(p) => Lexicon::load(p)?,
                None => Lexicon::bundled(),
            },
        })
    }
}

/// Surface cleanup followed by morphological reduction.
pub fn preprocess(
    text: &str,
    surface: &SurfaceConfig,
    morph: MorphMode,
    resources: &Resources,
) -> Result<String, HarnessError> {
    let cleaned = surface::apply_surface(text, surface, &resources.stoplist)?;
    Ok(morph::apply_morph(&cleaned, &MorphConfig::new(morph), &resources.lexicon))
}

pub fn preprocess_all<S: AsRef<str>>(
    texts: &[S],
    surface: &SurfaceConfig,
    morph: MorphMode,
    resources: &Resources,
) -> Result<Vec<String>, HarnessError> {
    texts.iter().map(|t| preprocess(t.as_ref(), surface, morph, resources)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureModel {
    Tfidf(UnionModel),
    FastTextSupervised(SupervisedTextModel),
    FastTextUnsupervised(EmbeddingModel),
}

pub(crate) enum Features {
    Sparse(Vec<SparseVector>),
    Dense(Vec<DenseVector>),
}

impl Features {
    pub(crate) fn train(&self, labels: &[usize], class_count: usize, params: &SvcParams) -> Result<LinearSvcModel, HarnessError> {
        Ok(match self {
            Features::Sparse(x) => svc::train_ovr(x, labels, class_count, params)?,
            Features::Dense(x) => svc::train_ovr(x, labels, class_count, params)?,
        })
    }

    pub(crate) fn decision_values(&self, model: &LinearSvcModel) -> Result<Vec<Vec<f64>>, HarnessError> {
        Ok(match self {
            Features::Sparse(x) => x.iter().map(|v| model.decision_values(v)).collect::<Result<_, _>>()?,
            Features::Dense(x) => x.iter().map(|v| model.decision_values(v)).collect::<Result<_, _>>()?,
        })
    }

    pub(crate) fn predict(&self, model: &LinearSvcModel) -> Result<Vec<usize>, HarnessError> {
        Ok(match self {
            Features::Sparse(x) => model.predict_all(x)?,
            Features::Dense(x) => model.predict_all(x)?,
        })
    }
}

impl FeatureModel {
    pub(crate) fn transform<S: AsRef<str>>(&self, texts: &[S]) -> Features {
        match self {
            FeatureModel::Tfidf(m) => Features::Sparse(m.transform_all(texts)),
            FeatureModel::FastTextSupervised(m) => Features::Dense(m.extract_features(texts)),
            FeatureModel::FastTextUnsupervised(m) => Features::Dense(m.extract_features(texts)),
        }
    }

    /// Fits the feature extractor on preprocessed training texts.
    pub(crate) fn fit<S: AsRef<str>>(
        spec: &FeatureSpec,
        texts: &[S],
        labels: &[usize],
        fasttext: &FastTextParams,
    ) -> Result<Self, HarnessError> {
        Ok(match spec {
            FeatureSpec::TfidfUnion { analyzers, weights } => FeatureModel::Tfidf(tfidf::fit_union(texts, analyzers, *weights)?),
            FeatureSpec::FastTextSupervised => {
                FeatureModel::FastTextSupervised(fasttext::train_supervised(texts, labels, fasttext)?)
            }
            FeatureSpec::FastTextUnsupervised => FeatureModel::FastTextUnsupervised(fasttext::train_skipgram(texts, fasttext)?),
        })
    }
}

/// Maps labels of `corpus` onto `label_set`, reporting foreign labels as
/// [`HarnessError::LabelMismatch`].
pub fn label_indices(corpus: &Corpus, label_set: &[String]) -> Result<(Vec<String>, Vec<usize>), HarnessError> {
    corpus.split_labels_with(label_set).map_err(|e| match e {
        CorpusError::UnknownLabel { id, label } => HarnessError::LabelMismatch { id, label },
        other => other.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub surface: SurfaceConfig,
    pub morph: MorphMode,
    pub resources: Resources,
    pub features: FeatureModel,
    pub classifier: LinearSvcModel,
}

impl Pipeline {
    /// Fits every stage on `train` only. `seed` drives both the embedding
    /// training and the SVC coordinate order.
    pub fn fit(
        point: &GridPoint,
        resources: &Resources,
        train: &Corpus,
        svc_params: &SvcParams,
        fasttext_params: &FastTextParams,
        seed: u64,
    ) -> Result<Self, HarnessError> {
        let (texts, labels) = train.split_labels()?;
        let class_names = train.label_set().to_vec();
        let texts = preprocess_all(&texts, &point.surface, point.morph, resources)?;
        let ft = FastTextParams { seed, ..*fasttext_params };
        let features = FeatureModel::fit(&point.features, &texts, &labels, &ft)?;
        let svc = SvcParams { seed, ..*svc_params };
        let classifier = features
            .transform(&texts)
            .train(&labels, class_names.len(), &svc)?
            .with_class_names(class_names);
        Ok(Self {
            surface: point.surface,
            morph: point.morph,
            resources: resources.clone(),
            features,
            classifier,
        })
    }

    pub fn class_names(&self) -> &[String] {
        &self.classifier.class_names
    }

    pub fn preprocess(&self, text: &str) -> Result<String, HarnessError> {
        preprocess(text, &self.surface, self.morph, &self.resources)
    }

    pub fn predict_indices<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<usize>, HarnessError> {
        let cleaned = preprocess_all(texts, &self.surface, self.morph, &self.resources)?;
        self.features.transform(&cleaned).predict(&self.classifier)
    }

    /// One score per class for each text.
    pub fn decision_values<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<Vec<f64>>, HarnessError> {
        let cleaned = preprocess_all(texts, &self.surface, self.morph, &self.resources)?;
        self.features.transform(&cleaned).decision_values(&self.classifier)
    }

    pub fn predict<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<String>, HarnessError> {
        Ok(self
            .predict_indices(texts)?
            .into_iter()
            .map(|i| self.class_names()[i].clone())
            .collect())
    }

    /// Scores a labeled corpus whose labels are all known to the model.
    pub fn evaluate(&self, corpus: &Corpus) -> Result<EvalReport, HarnessError> {
        let (texts, truth) = label_indices(corpus, self.class_names())?;
        let predicted = self.predict_indices(&texts)?;
        Ok(metrics::evaluate(&truth, &predicted, self.class_names().len())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        Ok(Persist::save(self, path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Ok(<Self as Persist>::load(path)?)
    }
}

/// Index of the best dev score, lowest index on ties.
pub(crate) fn best_index(scores: &[f64]) -> usize {
    svc::argmax(scores)
}

impl Persist for Pipeline {
    const KIND: u8 = 6;

    fn encode(&self, enc: &mut Encoder) {
        enc.u8(self.surface.bits());
        enc.u8(MorphMode::ALL.iter().position(|m| *m == self.morph).expect("known mode") as u8);
        let stop = self.resources.stoplist.sorted();
        enc.usize(stop.len());
        for w in stop {
            enc.str(w);
        }
        let lex = self.resources.lexicon.sorted_entries();
        enc.usize(lex.len());
        for (k, v) in lex {
            enc.str(k);
            enc.str(v);
        }
        match &self.features {
            FeatureModel::Tfidf(m) => {
                enc.u8(0);
                m.encode(enc);
            }
            FeatureModel::FastTextSupervised(m) => {
                enc.u8(1);
                m.encode(enc);
            }
            FeatureModel::FastTextUnsupervised(m) => {
                enc.u8(2);
                m.encode(enc);
            }
        }
        self.classifier.encode(enc);
    }

    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let at = dec.offset();
        let bits = dec.u8()?;
        if bits >= 32 {
            return Err(CodecError::CorruptFile(at));
        }
        let at = dec.offset();
        let morph = *MorphMode::ALL
            .get(dec.u8()? as usize)
            .ok_or(CodecError::CorruptFile(at))?;
        let n = dec.len(8)?;
        let stop = (0..n).map(|_| dec.str()).collect::<Result<Vec<_>, _>>()?;
        let n = dec.len(16)?;
        let mut lex = Vec::with_capacity(n);
        for _ in 0..n {
            lex.push((dec.str()?, dec.str()?));
        }
        let at = dec.offset();
        let features = match dec.u8()? {
            0 => FeatureModel::Tfidf(UnionModel::decode(dec)?),
            1 => FeatureModel::FastTextSupervised(SupervisedTextModel::decode(dec)?),
            2 => FeatureModel::FastTextUnsupervised(EmbeddingModel::decode(dec)?),
            _ => return Err(CodecError::CorruptFile(at)),
        };
        let at = dec.offset();
        let classifier = LinearSvcModel::decode(dec)?;
        let dim = match &features {
            FeatureModel::Tfidf(m) => m.dimension(),
            FeatureModel::FastTextSupervised(m) => m.dim(),
            FeatureModel::FastTextUnsupervised(m) => m.dim(),
        };
        if classifier.dimension() != dim {
            return Err(CodecError::CorruptFile(at));
        }
        Ok(Self {
            surface: SurfaceConfig::from_bits(bits),
            morph,
            resources: Resources {
                stoplist: Stoplist::new(stop),
                lexicon: Lexicon::new(lex),
            },
            features,
            classifier,
        })
    }
}
