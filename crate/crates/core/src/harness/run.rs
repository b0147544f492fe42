//! Grid evaluation and experiment runs.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use rayon::prelude::*;

use super::config::ExperimentSpec;
use super::grid::{FeatureSpec, GridPoint, enumerate_grid};
use super::pipeline::{FeatureModel, Features, Pipeline, Resources, best_index, label_indices, preprocess_all};
use super::HarnessError;
use super::worker_count;
use crate::corpus::Corpus;
use crate::metrics;
use crate::tfidf::{self, combine_blocks};
use crate::vector::SparseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub spec_id: String,
    pub run_index: usize,
    /// Flattened parameters of the selected grid point.
    pub chosen_config: BTreeMap<String, String>,
    pub best_index: usize,
    pub dev_macro_f1: f64,
    pub test_macro_f1: Option<f64>,
    /// Seconds spent on the run, including test rescoring.
    pub wall_time: f64,
    /// Dev macro-F1 of every grid point, in grid order.
    pub grid_scores: Vec<f64>,
}

/// Labeled train and dev data with dev labels mapped onto train's.
struct Data<'a> {
    train_texts: Vec<String>,
    train_labels: Vec<usize>,
    dev_texts: Vec<String>,
    dev_labels: Vec<usize>,
    class_count: usize,
    spec: &'a ExperimentSpec,
    resources: &'a Resources,
}

fn macro_f1(truth: &[usize], predicted: &[usize], class_count: usize) -> Result<f64, HarnessError> {
    Ok(metrics::evaluate(truth, predicted, class_count)?.macro_f1)
}

fn with_context(index: usize, point: &GridPoint, err: HarnessError) -> HarnessError {
    HarnessError::AtGridPoint {
        index,
        config: point.describe(),
        source: Box::new(err),
    }
}

/// Dev scores for a group of grid points sharing preprocessing and
/// vocabulary; only block weights differ within the group.
fn score_group(
    data: &Data<'_>,
    texts: &(Vec<String>, Vec<String>),
    points: &[(usize, &GridPoint)],
    seed: u64,
) -> Result<Vec<(usize, f64)>, HarnessError> {
    let (train_texts, dev_texts) = texts;
    let svc = crate::svc::SvcParams { seed, ..data.spec.svc };
    let mut out = Vec::with_capacity(points.len());
    match &points[0].1.features {
        FeatureSpec::TfidfUnion { analyzers, .. } => {
            let blocks = [
                tfidf::fit(train_texts, &analyzers[0])?,
                tfidf::fit(train_texts, &analyzers[1])?,
                tfidf::fit(train_texts, &analyzers[2])?,
            ];
            let split = |texts: &[String]| -> Vec<[SparseVector; 3]> {
                texts.iter().map(|t| blocks.each_ref().map(|b| b.transform(t))).collect()
            };
            let train_blocks = split(train_texts);
            let dev_blocks = split(dev_texts);
            for &(index, point) in points {
                let FeatureSpec::TfidfUnion { weights, .. } = &point.features else {
                    unreachable!("groups share a feature source");
                };
                let combine = |rows: &[[SparseVector; 3]]| -> Vec<SparseVector> {
                    rows.iter().map(|r| combine_blocks(r.clone(), *weights)).collect()
                };
                let model = Features::Sparse(combine(&train_blocks)).train(&data.train_labels, data.class_count, &svc)?;
                let predicted = Features::Sparse(combine(&dev_blocks)).predict(&model)?;
                out.push((index, macro_f1(&data.dev_labels, &predicted, data.class_count)?));
            }
        }
        spec => {
            let ft = crate::fasttext::FastTextParams {
                seed,
                ..data.spec.fasttext
            };
            let features = FeatureModel::fit(spec, train_texts, &data.train_labels, &ft)?;
            let model = features.transform(train_texts).train(&data.train_labels, data.class_count, &svc)?;
            let predicted = features.transform(dev_texts).predict(&model)?;
            let score = macro_f1(&data.dev_labels, &predicted, data.class_count)?;
            out.extend(points.iter().map(|&(i, _)| (i, score)));
        }
    }
    Ok(out)
}

/// Fit-on-train, score-on-dev macro-F1 for every grid point, in grid
/// order. Independent groups run on the worker pool.
pub fn evaluate_grid(
    spec: &ExperimentSpec,
    resources: &Resources,
    points: &[GridPoint],
    train: &Corpus,
    dev: &Corpus,
    seed: u64,
) -> Result<Vec<f64>, HarnessError> {
    let (train_texts, train_labels) = train.split_labels()?;
    let (dev_texts, dev_labels) = label_indices(dev, train.label_set())?;
    let data = Data {
        train_texts,
        train_labels,
        dev_texts,
        dev_labels,
        class_count: train.label_set().len(),
        spec,
        resources,
    };

    let mut groups: Vec<Vec<(usize, &GridPoint)>> = Vec::new();
    let mut group_of = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let g = *group_of.entry(p.feature_key()).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push((i, p));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| HarnessError::Internal(e.to_string()))?;
    let results: Vec<Result<Vec<(usize, f64)>, HarnessError>> = pool.install(|| {
        groups
            .par_iter()
            .map(|group| {
                let (index, point) = group[0];
                let prepared = preprocess_all(&data.train_texts, &point.surface, point.morph, data.resources)
                    .and_then(|tr| Ok((tr, preprocess_all(&data.dev_texts, &point.surface, point.morph, data.resources)?)))
                    .map_err(|e| with_context(index, point, e))?;
                score_group(&data, &prepared, group, seed).map_err(|e| with_context(index, point, e))
            })
            .collect()
    });

    let mut scores = vec![f64::NAN; points.len()];
    let mut first_error: Option<(usize, HarnessError)> = None;
    for (group, result) in groups.iter().zip(results) {
        match result {
            Ok(pairs) => {
                for (i, s) in pairs {
                    scores[i] = s;
                }
            }
            Err(e) => {
                let index = group[0].0;
                if first_error.as_ref().is_none_or(|(j, _)| index < *j) {
                    first_error = Some((index, e));
                }
            }
        }
    }
    match first_error {
        Some((_, e)) => Err(e),
        None => Ok(scores),
    }
}

/// Runs every configured run. Run `r` uses seed `spec.seed + r`.
pub fn run_experiment(
    spec: &ExperimentSpec,
    train: &Corpus,
    dev: &Corpus,
    test: Option<&Corpus>,
) -> Result<Vec<RunResult>, HarnessError> {
    let resources = Resources::load(spec.stoplist.as_deref(), spec.lexicon.as_deref())?;
    run_experiment_with(spec, &resources, train, dev, test)
}

pub fn run_experiment_with(
    spec: &ExperimentSpec,
    resources: &Resources,
    train: &Corpus,
    dev: &Corpus,
    test: Option<&Corpus>,
) -> Result<Vec<RunResult>, HarnessError> {
    spec.validate()?;
    let points = enumerate_grid(spec)?;
    if let Some(t) = test.filter(|t| t.is_fully_labeled()) {
        label_indices(t, train.label_set())?;
    }
    let mut out = Vec::with_capacity(spec.runs);
    for run_index in 0..spec.runs {
        let started = Instant::now();
        let seed = spec.seed + run_index as u64;
        let grid_scores = evaluate_grid(spec, resources, &points, train, dev, seed)?;
        let best = best_index(&grid_scores);
        let test_macro_f1 = match test.filter(|t| t.is_fully_labeled()) {
            Some(t) => {
                let pipeline = Pipeline::fit(&points[best], resources, train, &spec.svc, &spec.fasttext, seed)
                    .map_err(|e| with_context(best, &points[best], e))?;
                Some(pipeline.evaluate(t)?.macro_f1)
            }
            None => None,
        };
        log::info!(
            "{} run {}: best dev macro-F1 {:.4} at grid point {} of {}",
            spec.id,
            run_index + 1,
            grid_scores[best],
            best,
            points.len()
        );
        out.push(RunResult {
            spec_id: spec.id.to_string(),
            run_index,
            chosen_config: points[best].flatten(),
            best_index: best,
            dev_macro_f1: grid_scores[best],
            test_macro_f1,
            wall_time: started.elapsed().as_secs_f64(),
            grid_scores,
        });
    }
    Ok(out)
}
