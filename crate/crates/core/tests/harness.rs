mod common;

use common::criteria;
use dialectid::codec::{CodecError, FORMAT_VERSION, Persist};
use dialectid::corpus::{Corpus, Document};
use dialectid::harness::{
    ExperimentSpec, HarnessError, Pipeline, Resources, RunResult, SynthParams, emit_report, enumerate_grid,
    evaluate_grid, generate_synthetic, parse_config_str, run_experiment,
};

const SMALL_UNION: &str = r#"
id = "exp4"
runs = 2
seed = 3
[tfidf]
sweep = ["char_wb"]
ngram_m = [1, 2]
ngram_n = [2, 3]
[weights]
triples = [[1.0, 1.0, 1.0], [0.5, 1.0, 1.0]]
"#;

const SMALL_FASTTEXT: &str = r#"
id = "exp3"
runs = 1
seed = 5
feature_source = ["fasttext_supervised", "fasttext_unsupervised"]
[fasttext]
dim = 8
epochs = 3
bucket_count = 2000
"#;

fn splits() -> dialectid::harness::Splits {
    generate_synthetic(&SynthParams {
        class_count: 4,
        docs_per_class: 25,
        vocab_per_class: 10,
        shared_vocab: 100,
        doc_len: (3, 8),
        seed: 21,
    })
}

fn spec(text: &str) -> ExperimentSpec {
    parse_config_str(text).unwrap()
}

fn without_time(mut results: Vec<RunResult>) -> Vec<RunResult> {
    for r in &mut results {
        r.wall_time = 0.0;
    }
    results
}

#[test]
fn grid_scores_come_from_train_only_fits() {
    let s = splits();
    let spec = spec(SMALL_UNION);
    let resources = Resources::bundled();
    let points = enumerate_grid(&spec).unwrap();
    let scores = evaluate_grid(&spec, &resources, &points, &s.train, &s.dev, 3).unwrap();
    for (point, score) in points.iter().zip(&scores) {
        let pipeline = Pipeline::fit(point, &resources, &s.train, &spec.svc, &spec.fasttext, 3).unwrap();
        assert_eq!(pipeline.evaluate(&s.dev).unwrap().macro_f1, *score, "{}", point.describe());
    }
}

#[test]
fn dev_and_test_do_not_change_fitted_models() {
    let s = splits();
    let spec = spec(SMALL_UNION);
    let resources = Resources::bundled();
    let point = &enumerate_grid(&spec).unwrap()[5];
    let alone = Pipeline::fit(point, &resources, &s.train, &spec.svc, &spec.fasttext, 1).unwrap();
    let with_test = run_experiment(&spec, &s.train, &s.dev, Some(&s.test)).unwrap();
    let without_test = run_experiment(&spec, &s.train, &s.dev, None).unwrap();
    for (a, b) in with_test.iter().zip(&without_test) {
        assert_eq!(a.grid_scores, b.grid_scores);
        assert_eq!(a.chosen_config, b.chosen_config);
        assert!(b.test_macro_f1.is_none());
    }
    let other_dev = Corpus::new(s.test.documents().to_vec()).unwrap();
    run_experiment(&spec, &s.train, &other_dev, None).unwrap();
    let again = Pipeline::fit(point, &resources, &s.train, &spec.svc, &spec.fasttext, 1).unwrap();
    assert_eq!(alone.to_bytes(), again.to_bytes());
}

#[test]
fn identical_spec_and_seed_give_identical_results() {
    let s = splits();
    for text in [SMALL_UNION, SMALL_FASTTEXT] {
        let spec = spec(text);
        let a = without_time(run_experiment(&spec, &s.train, &s.dev, Some(&s.test)).unwrap());
        let b = without_time(run_experiment(&spec, &s.train, &s.dev, Some(&s.test)).unwrap());
        assert_eq!(a, b);
    }
}

#[test]
fn reported_best_is_the_grid_maximum() {
    let s = splits();
    let spec = spec(SMALL_UNION);
    let resources = Resources::bundled();
    let points = enumerate_grid(&spec).unwrap();
    let results = run_experiment(&spec, &s.train, &s.dev, None).unwrap();
    for r in &results {
        let seed = spec.seed + r.run_index as u64;
        let rescan: Vec<f64> = points
            .iter()
            .map(|p| {
                Pipeline::fit(p, &resources, &s.train, &spec.svc, &spec.fasttext, seed)
                    .unwrap()
                    .evaluate(&s.dev)
                    .unwrap()
                    .macro_f1
            })
            .collect();
        let max = rescan.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.dev_macro_f1, max);
        assert_eq!(r.best_index, rescan.iter().position(|&x| x == max).unwrap());
        assert_eq!(r.chosen_config, points[r.best_index].flatten());
    }
}

#[test]
fn runs_differ_by_seed_and_fill_the_report() {
    let s = splits();
    let mut spec = spec(SMALL_UNION);
    spec.runs = 3;
    let results = run_experiment(&spec, &s.train, &s.dev, Some(&s.test)).unwrap();
    assert_eq!(results.len(), 3);
    assert_eq!(results.iter().map(|r| r.run_index).collect::<Vec<_>>(), [0, 1, 2]);
    let table = emit_report(&results).unwrap().to_table();
    for run in ["Run 1", "Run 2", "Run 3"] {
        assert!(table.contains(run), "{table}");
    }
}

#[test]
fn foreign_dev_label_is_rejected() {
    let s = splits();
    let mut docs = s.dev.documents().to_vec();
    docs.push(Document::labeled("extra-1", "نص جديد", "Atlantis"));
    let dev = Corpus::new(docs).unwrap();
    let err = run_experiment(&spec(SMALL_UNION), &s.train, &dev, None).unwrap_err();
    assert!(matches!(err, HarnessError::LabelMismatch { ref label, .. } if label == "Atlantis"), "{err}");
}

#[test]
fn saved_pipelines_round_trip() {
    let r = criteria::persistence();
    assert!(r.passed, "{}", r.detail);
}

#[test]
fn damaged_pipeline_files_are_rejected() {
    let (_, pipeline) = criteria::pipeline_variants().remove(0);
    let bytes = pipeline.to_bytes();
    for cut in [3, 6, bytes.len() / 2, bytes.len() - 1] {
        let err = Pipeline::from_bytes(&bytes[..cut]).unwrap_err();
        assert!(matches!(err, CodecError::CorruptFile(_)), "cut {cut}: {err}");
    }
    let mut bumped = bytes.clone();
    bumped[4] = FORMAT_VERSION + 1;
    let err = Pipeline::from_bytes(&bumped).unwrap_err();
    assert!(matches!(err, CodecError::VersionMismatch { .. }), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.model");
    std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
    let err = Pipeline::load(&path).unwrap_err();
    assert!(matches!(err, HarnessError::Codec(CodecError::CorruptFile(_))), "{err}");
}

#[test]
fn preprocessing_erases_affix_signal() {
    let r = criteria::preprocessing_harm();
    assert!(r.passed, "{}", r.detail);
}
