//! One check per acceptance criterion. Each returns whether it passed and
//! a short measurement line.

use std::time::Instant;

use dialectid::codec::Persist;
use dialectid::fasttext::{self, FastTextParams};
use dialectid::harness::config::AnalyzerGrid;
use dialectid::harness::{
    ExperimentId, FeatureSpec, GridPoint, Pipeline, Resources, SynthParams, enumerate_grid, evaluate_grid,
    generate_affix_corpus, generate_synthetic, parse_config_str, preset, run_experiment,
};
use dialectid::metrics;
use dialectid::morph::{MorphMode, enumerate_morph_configs};
use dialectid::surface::{SurfaceConfig, Stoplist, apply_surface, enumerate_surface_configs};
use dialectid::svc::{self, SvcParams};
use dialectid::tfidf::{self, AnalyzerConfig, AnalyzerKind};
use dialectid::vector::DenseVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

const KINDS: [AnalyzerKind; 3] = AnalyzerKind::UNION_ORDER;

pub fn tfidf_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    let mut vocab_mismatches = 0;
    let mut empty = 0;
    for _ in 0..25 {
        let docs: Vec<String> = (0..rng.random_range(1..=5)).map(|_| small_doc(&mut rng, 8)).collect();
        let kind = KINDS[rng.random_range(0..3)];
        let m = rng.random_range(1..=3);
        let n = rng.random_range(m..=m + 2);
        let max_features = if rng.random_bool(0.3) { Some(rng.random_range(1..=6)) } else { None };
        let config = AnalyzerConfig::new(kind, m, n).unwrap().with_max_features(max_features);
        let (vocab, rows) = oracle_tfidf(&docs, kind, m, n, max_features);
        let model = match tfidf::fit(&docs, &config) {
            Ok(model) => model,
            Err(_) => {
                empty += 1;
                vocab_mismatches += usize::from(!vocab.is_empty());
                continue;
            }
        };
        if model.terms() != vocab.as_slice() {
            vocab_mismatches += 1;
            continue;
        }
        for (doc, row) in docs.iter().zip(&rows) {
            let got = model.transform(doc).to_dense();
            for (a, b) in got.iter().zip(row) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        vocab_mismatches == 0 && worst <= 1e-9 && secs < 5.0,
        format!(
            "25 corpora ({empty} without terms), vocabulary mismatches {vocab_mismatches}, max abs error {worst:.2e}, {secs:.3} s"
        ),
    )
}

pub fn analyzer_conformance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut mismatches = 0;
    let mut short_tokens = 0;
    for _ in 0..500 {
        let text = fuzz_text(&mut rng, 30);
        for kind in KINDS {
            let m = rng.random_range(1..=3);
            let n = rng.random_range(m..=6);
            let config = AnalyzerConfig::new(kind, m, n).unwrap();
            let expected = oracle_analyze(&text, kind, m, n);
            if tfidf::analyze(&text, &config) != expected {
                mismatches += 1;
            }
            if kind == AnalyzerKind::CharWb {
                short_tokens += text.split_whitespace().filter(|t| t.chars().count() + 2 <= n).count();
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("500 strings x 3 analyzers, {mismatches} mismatches, {short_tokens} padded tokens within n"),
    )
}

fn monotone(history: &[f64]) -> bool {
    history.windows(2).all(|w| w[1] >= w[0] - 1e-12 * (1.0 + w[0].abs()))
}

pub fn svm_solver() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    let mut all_monotone = true;
    for _ in 0..20 {
        let l = rng.random_range(2..=20);
        let d = rng.random_range(1..=5);
        let x: Vec<Vec<f64>> = (0..l).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let mut y: Vec<f64> = (0..l).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let c = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        let params = SvcParams {
            c,
            tolerance: 1e-11,
            max_sweeps: 1_000_000,
            seed: rng.random(),
        };
        let feats: Vec<DenseVector> = x.iter().cloned().map(DenseVector).collect();
        let sol = svc::train_binary(&feats, &y, &params).unwrap();
        all_monotone &= monotone(&sol.dual_history);
        let reference = oracle_svm(&x, &y, c);
        let mut ours = sol.weights.clone();
        ours.push(sol.bias);
        let diff = ours.iter().zip(&reference).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = reference.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        worst = worst.max(diff / scale);
    }

    let mut points = Vec::new();
    let mut labels = Vec::new();
    for i in 0..30 {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        points.push(DenseVector(vec![
            sign * rng.random_range(1.0..3.0),
            sign * rng.random_range(1.0..3.0),
            rng.random_range(-1.0..1.0),
        ]));
        labels.push(sign);
    }
    let params = SvcParams {
        c: 1e6,
        tolerance: 1e-10,
        max_sweeps: 1_000_000,
        seed: 9,
    };
    let sol = svc::train_binary(&points, &labels, &params).unwrap();
    all_monotone &= monotone(&sol.dual_history);
    let margin = points
        .iter()
        .zip(&labels)
        .map(|(x, y)| y * sol.decision(x))
        .fold(f64::INFINITY, f64::min);
    outcome(
        all_monotone && worst <= 1e-4 && margin >= 1.0 - 1e-6,
        format!("dual monotone {all_monotone}, max relative weight error {worst:.2e}, separable margin {margin:.9}"),
    )
}

/// The exp4 preset on the bundled synthetic corpus.
pub fn end_to_end(runs: usize) -> Outcome {
    let started = Instant::now();
    let splits = generate_synthetic(&SynthParams::bundled());
    let mut spec = preset(ExperimentId::Exp4);
    spec.runs = runs;
    let points = enumerate_grid(&spec).unwrap().len();
    let results = run_experiment(&spec, &splits.train, &splits.dev, Some(&splits.test)).unwrap();
    let best = results.iter().map(|r| r.dev_macro_f1).fold(f64::INFINITY, f64::min);
    let secs = started.elapsed().as_secs_f64();
    outcome(
        best >= 0.95 && secs < 600.0,
        format!(
            "{points} grid points x {runs} run(s), best dev macro-F1 {best:.4}, test {:.4}, {secs:.1} s",
            results[0].test_macro_f1.unwrap_or(f64::NAN)
        ),
    )
}

const HARM_NONE: &str = "id = \"exp4\"\nsurface = \"none\"\nmorph = \"none\"\n";
const HARM_ALL: &str = r#"
id = "exp4"
morph = "lemma_then_stem"
[surface]
normalize_letters = true
remove_diacritics = true
remove_punct_emoji = true
remove_stopwords = true
remove_non_arabic = true
"#;

pub fn preprocessing_harm() -> Outcome {
    let splits = generate_affix_corpus(18, 100, (5, 20), 11);
    let score = |text: &str| {
        let spec = parse_config_str(text).unwrap();
        let points = enumerate_grid(&spec).unwrap();
        evaluate_grid(&spec, &Resources::bundled(), &points, &splits.train, &splits.dev, 7).unwrap()[0]
    };
    let none = score(HARM_NONE);
    let all = score(HARM_ALL);
    outcome(
        all < none,
        format!("dev macro-F1 without preprocessing {none:.4}, with all preprocessing {all:.4}"),
    )
}

fn toy_labeled<R: Rng>(rng: &mut R, count: usize) -> (Vec<String>, Vec<usize>) {
    const WORDS: [&[&str]; 3] = [&["kitab", "qalam", "bab"], &["shams", "qamar", "najm"], &["bahr", "nahr", "mawj"]];
    (0..count)
        .map(|_| {
            let label = rng.random_range(0..3);
            let len = rng.random_range(2..6);
            let text: Vec<&str> = (0..len)
                .map(|_| {
                    let family = if rng.random_bool(0.7) { label } else { rng.random_range(0..3) };
                    WORDS[family][rng.random_range(0..3)]
                })
                .collect();
            (text.join(" "), label)
        })
        .unzip()
}

fn gradient_check() -> (f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (texts, labels) = toy_labeled(&mut rng, 60);
    let params = FastTextParams {
        dim: 8,
        epochs: 3,
        bucket_count: 1000,
        learning_rate: 0.1,
        seed: 4,
        ..FastTextParams::default()
    };
    let model = fasttext::train_supervised(&texts, &labels, &params).unwrap();
    let batch: Vec<(&str, usize)> = texts.iter().zip(&labels).take(12).map(|(t, l)| (t.as_str(), *l)).collect();
    let grad = model.ova_gradient(&batch);

    let mut coords: Vec<(Option<usize>, usize, f64)> = Vec::new();
    for (i, g) in grad.label_matrix.iter().enumerate() {
        coords.push((None, i, *g));
    }
    for (slot, g) in &grad.input_slots {
        for (j, v) in g.iter().enumerate() {
            coords.push((Some(*slot), j, *v));
        }
    }
    coords.retain(|c| c.2.abs() >= 1e-4);
    coords.shuffle(&mut rng);
    coords.truncate(20);

    let h = 1e-5;
    let mut worst = 0.0f64;
    for &(slot, j, analytic) in &coords {
        let loss_at = |delta: f64| {
            let mut m = model.clone();
            match slot {
                None => m.label_matrix[j] += delta,
                Some(s) => m.embeddings.slot_mut(s)[j] += delta,
            }
            m.ova_loss(&batch)
        };
        let numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
        worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()));
    }
    (worst, coords.len())
}

fn family_cosines() -> (f64, f64, f64, f64) {
    const FAMILIES: [[&str; 5]; 2] = [
        ["tree", "leaf", "root", "bark", "twig"],
        ["wave", "tide", "salt", "reef", "foam"],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let texts: Vec<String> = (0..200)
        .map(|i| {
            let fam = &FAMILIES[i % 2];
            (0..8).map(|_| fam[rng.random_range(0..5)]).collect::<Vec<_>>().join(" ")
        })
        .collect();
    let params = FastTextParams {
        dim: 10,
        epochs: 30,
        window: 3,
        subword_min: 0,
        subword_max: 0,
        bucket_count: 1000,
        seed: 5,
        ..FastTextParams::default()
    };
    let model = fasttext::train_skipgram(&texts, &params).unwrap();
    let vec = |w: &str| model.embeddings.word_vector(w).unwrap();
    let (mut intra, mut inter, mut n_intra, mut n_inter) = (0.0, 0.0, 0.0, 0.0);
    let words: Vec<(usize, &str)> = FAMILIES.iter().enumerate().flat_map(|(f, ws)| ws.iter().map(move |w| (f, *w))).collect();
    for (i, (fa, a)) in words.iter().enumerate() {
        for (fb, b) in &words[i + 1..] {
            let c = cosine(&vec(a), &vec(b));
            if fa == fb {
                intra += c;
                n_intra += 1.0;
            } else {
                inter += c;
                n_inter += 1.0;
            }
        }
    }
    let losses = &model.epoch_losses;
    (intra / n_intra, inter / n_inter, losses[0], losses[losses.len() - 1])
}

fn toy_accuracy(epochs: usize) -> f64 {
    let texts: Vec<&str> = (0..100).map(|i| if i < 50 { "aa aa" } else { "bb bb" }).collect();
    let labels: Vec<usize> = (0..100).map(|i| usize::from(i >= 50)).collect();
    let params = FastTextParams {
        dim: 10,
        epochs,
        bucket_count: 1000,
        learning_rate: 0.1,
        seed: 6,
        ..FastTextParams::default()
    };
    let model = fasttext::train_supervised(&texts, &labels, &params).unwrap();
    let hits = texts.iter().zip(&labels).filter(|(t, l)| model.predict(t) == **l).count();
    hits as f64 / texts.len() as f64
}

fn reproducible() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let (texts, labels) = toy_labeled(&mut rng, 80);
    let params = FastTextParams {
        dim: 12,
        epochs: 4,
        bucket_count: 5000,
        seed: 11,
        ..FastTextParams::default()
    };
    let a = fasttext::train_supervised(&texts, &labels, &params).unwrap();
    let b = fasttext::train_supervised(&texts, &labels, &params).unwrap();
    let c = fasttext::train_skipgram(&texts, &params).unwrap();
    let d = fasttext::train_skipgram(&texts, &params).unwrap();
    a.to_bytes() == b.to_bytes() && c.to_bytes() == d.to_bytes()
}

pub fn fasttext_checks() -> Outcome {
    let (grad_err, sampled) = gradient_check();
    let (intra, inter, first_loss, last_loss) = family_cosines();
    let trained = toy_accuracy(25);
    let untrained = toy_accuracy(0);
    let same = reproducible();
    let passed = sampled == 20
        && grad_err <= 1e-4
        && intra > inter
        && last_loss <= first_loss
        && trained >= 0.95
        && (untrained - 0.5).abs() <= 0.15
        && same;
    outcome(
        passed,
        format!(
            "gradient rel error {grad_err:.2e} over {sampled} coords, cosine intra {intra:.3} inter {inter:.3}, \
             loss {first_loss:.4}->{last_loss:.4}, toy accuracy {trained:.2} (untrained {untrained:.2}), reproducible {same}"
        ),
    )
}

pub fn metrics_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    let mut equivariant = true;
    for _ in 0..100 {
        let k = rng.random_range(1..=6);
        let len = rng.random_range(1..=30);
        let truth: Vec<usize> = (0..len).map(|_| rng.random_range(0..k)).collect();
        let pred: Vec<usize> = (0..len).map(|_| rng.random_range(0..k)).collect();
        let report = metrics::evaluate(&truth, &pred, k).unwrap();
        let (f1, macro_f1) = oracle_f1(&truth, &pred, k);
        worst = worst.max((report.macro_f1 - macro_f1).abs());
        for (a, b) in report.per_class.iter().zip(&f1) {
            worst = worst.max((a.f1 - b).abs());
        }

        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut rng);
        let pt: Vec<usize> = truth.iter().map(|&c| perm[c]).collect();
        let pp: Vec<usize> = pred.iter().map(|&c| perm[c]).collect();
        let permuted = metrics::evaluate(&pt, &pp, k).unwrap();
        equivariant &= (permuted.macro_f1 - report.macro_f1).abs() <= 1e-12
            && (0..k).all(|c| permuted.per_class[perm[c]] == report.per_class[c]);
    }
    let fixture = metrics::evaluate(&[0, 0, 1], &[0, 1, 1], 2).unwrap().macro_f1;
    outcome(
        worst <= 1e-12 && fixture == 2.0 / 3.0 && equivariant,
        format!("max deviation {worst:.1e} over 100 instances, fixture macro-F1 {fixture}, permutation equivariant {equivariant}"),
    )
}

pub fn grid_counts() -> Outcome {
    let surface = enumerate_surface_configs().len();
    let morph = enumerate_morph_configs().len();
    let pairs = AnalyzerGrid::default().ngram_pairs().len();
    outcome(
        surface == 32 && morph == 4 && pairs == 27,
        format!("{surface} surface configs, {morph} morph modes, {pairs} n-gram pairs"),
    )
}

fn union_point(surface: SurfaceConfig, morph: MorphMode, weights: [f64; 3]) -> GridPoint {
    GridPoint {
        surface,
        morph,
        features: FeatureSpec::TfidfUnion {
            analyzers: [
                AnalyzerConfig::new(AnalyzerKind::Word, 1, 2).unwrap(),
                AnalyzerConfig::new(AnalyzerKind::Char, 1, 4).unwrap().with_max_features(Some(500)),
                AnalyzerConfig::new(AnalyzerKind::CharWb, 2, 5).unwrap(),
            ],
            weights,
        },
    }
}

/// One fitted pipeline per feature source, with and without preprocessing.
pub fn pipeline_variants() -> Vec<(String, Pipeline)> {
    let splits = generate_synthetic(&SynthParams {
        class_count: 4,
        docs_per_class: 30,
        vocab_per_class: 20,
        shared_vocab: 30,
        doc_len: (5, 15),
        seed: 3,
    });
    let ft = FastTextParams {
        dim: 16,
        epochs: 5,
        bucket_count: 5000,
        ..FastTextParams::default()
    };
    let svc = SvcParams::default();
    let resources = Resources::bundled();
    let points = [
        ("tfidf_union", union_point(SurfaceConfig::NONE, MorphMode::None, [0.5, 0.75, 1.0])),
        ("tfidf_union+all+lemma_then_stem", union_point(SurfaceConfig::ALL, MorphMode::LemmaThenStem, [1.0; 3])),
        (
            "fasttext_supervised",
            GridPoint {
                surface: SurfaceConfig::NONE,
                morph: MorphMode::None,
                features: FeatureSpec::FastTextSupervised,
            },
        ),
        (
            "fasttext_supervised+all+stem",
            GridPoint {
                surface: SurfaceConfig::ALL,
                morph: MorphMode::Stem,
                features: FeatureSpec::FastTextSupervised,
            },
        ),
        (
            "fasttext_unsupervised+lemma",
            GridPoint {
                surface: SurfaceConfig::from_bits(0b00011),
                morph: MorphMode::Lemma,
                features: FeatureSpec::FastTextUnsupervised,
            },
        ),
    ];
    points
        .into_iter()
        .map(|(name, p)| (name.to_string(), Pipeline::fit(&p, &resources, &splits.train, &svc, &ft, 13).unwrap()))
        .collect()
}

pub fn persistence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let texts: Vec<String> = (0..100).map(|_| fuzz_text(&mut rng, 25)).collect();
    let dir = tempfile::tempdir().unwrap();
    let mut failed = Vec::new();
    let variants = pipeline_variants();
    for (name, pipeline) in &variants {
        let path = dir.path().join(format!("{name}.model"));
        pipeline.save(&path).unwrap();
        let from_file = Pipeline::load(&path).unwrap();
        let from_bytes = Pipeline::from_bytes(&pipeline.to_bytes()).unwrap();
        let bits = |p: &Pipeline| -> Vec<Vec<u64>> {
            p.decision_values(&texts)
                .unwrap()
                .into_iter()
                .map(|row| row.into_iter().map(f64::to_bits).collect())
                .collect()
        };
        let expected = bits(pipeline);
        let ok = [&from_file, &from_bytes]
            .iter()
            .all(|p| bits(p) == expected && p.predict(&texts).unwrap() == pipeline.predict(&texts).unwrap());
        if !ok {
            failed.push(name.clone());
        }
    }
    outcome(
        failed.is_empty(),
        format!("{} variants x 100 fuzzed texts, failing: {failed:?}", variants.len()),
    )
}

pub fn idempotence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let stoplist = Stoplist::bundled();
    let configs = enumerate_surface_configs();
    let mut violations = 0;
    for _ in 0..1000 {
        let text = fuzz_text(&mut rng, 40);
        for config in &configs {
            let once = apply_surface(&text, config, &stoplist).unwrap();
            let twice = apply_surface(&once, config, &stoplist).unwrap();
            if once != twice {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("1000 strings x 32 configs, {violations} violations"))
}
