use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use dialectid::corpus::{self, Corpus};
use dialectid::fasttext::FastTextParams;
use dialectid::harness::config::{self, ExperimentId};
use dialectid::harness::grid::{FeatureSpec, GridPoint};
use dialectid::harness::pipeline::preprocess;
use dialectid::harness::{
    ExperimentSpec, FeatureSource, HarnessError, Pipeline, Resources, SynthParams, emit_report, enumerate_grid,
    generate_affix_corpus, generate_synthetic, run_experiment,
};
use dialectid::morph::MorphMode;
use dialectid::surface::SurfaceConfig;
use dialectid::svc::SvcParams;
use dialectid::tfidf::{AnalyzerConfig, AnalyzerKind};

use crate::{Command, ExperimentArgs, PrepArgs, SynthArgs, TrainArgs};

/// A malformed command-line value.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn harness<E: Into<HarnessError>>(e: E) -> anyhow::Error {
    anyhow::Error::new(e.into())
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Stats { corpus, unlabeled, kv } => stats(&corpus, !unlabeled, kv),
        Command::Preprocess {
            input,
            output,
            prep,
            unlabeled,
        } => preprocess_corpus(&input, &output, &prep, !unlabeled),
        Command::Synth(args) => synth(&args),
        Command::Train(args) => train(&args),
        Command::Predict {
            model,
            input,
            labeled,
            output,
        } => predict(&model, &input, labeled, output.as_deref()),
        Command::Evaluate {
            model,
            data,
            confusion,
            kv,
        } => evaluate(&model, &data, confusion.as_deref(), kv),
        Command::Experiment(args) => experiment(&args),
        Command::Grid { experiment, full_grid } => grid(&experiment, full_grid),
    }
}

fn load(path: &Path, labeled: bool) -> Result<Corpus> {
    corpus::load_tsv(path, labeled)
        .map_err(harness)
        .with_context(|| format!("reading {}", path.display()))
}

fn stats(path: &Path, labeled: bool, kv: bool) -> Result<()> {
    let report = corpus::compute_stats(&load(path, labeled)?).map_err(harness)?;
    if kv {
        print!("{}", report.to_key_values());
    } else {
        print!("{report}");
    }
    Ok(())
}

fn parse_surface(spec: &str) -> Result<SurfaceConfig> {
    match spec {
        "none" => return Ok(SurfaceConfig::NONE),
        "all" => return Ok(SurfaceConfig::ALL),
        _ => {}
    }
    let mut cfg = SurfaceConfig::NONE;
    for flag in spec.split(',').map(str::trim).filter(|f| !f.is_empty()) {
        if !cfg.set_flag(flag, true) {
            return Err(usage(format!(
                "unknown surface flag {flag:?}; expected one of {}",
                SurfaceConfig::FLAG_NAMES.join(", ")
            )));
        }
    }
    Ok(cfg)
}

fn parse_morph(mode: &str) -> Result<MorphMode> {
    mode.parse().map_err(|_| usage(format!("unknown morph mode {mode:?}")))
}

fn resources(prep: &PrepArgs) -> Result<Resources> {
    Resources::load(prep.stoplist.as_deref(), prep.lexicon.as_deref()).map_err(anyhow::Error::new)
}

fn preprocess_corpus(input: &Path, output: &Path, prep: &PrepArgs, labeled: bool) -> Result<()> {
    let surface = parse_surface(&prep.surface)?;
    let morph = parse_morph(&prep.morph)?;
    let res = resources(prep)?;
    let corpus = load(input, labeled)?;
    let cleaned = corpus.try_map_texts(|t| preprocess(t, &surface, morph, &res))?;
    corpus::write_tsv(&cleaned, output)
        .map_err(harness)
        .with_context(|| format!("writing {}", output.display()))?;
    log::info!("wrote {} documents to {}", cleaned.len(), output.display());
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<()> {
    if args.classes == 0 || args.docs_per_class == 0 || args.vocab_per_class == 0 {
        return Err(usage("class, document and vocabulary counts must be positive"));
    }
    if args.min_len == 0 || args.min_len > args.max_len {
        return Err(usage("need 1 <= --min-len <= --max-len"));
    }
    let splits = if args.affix {
        if !(2..=18).contains(&args.classes) {
            return Err(usage("the affix corpus supports 2 to 18 classes"));
        }
        generate_affix_corpus(args.classes, args.docs_per_class, (args.min_len, args.max_len), args.seed)
    } else {
        generate_synthetic(&SynthParams {
            class_count: args.classes,
            docs_per_class: args.docs_per_class,
            vocab_per_class: args.vocab_per_class,
            shared_vocab: args.shared_vocab,
            doc_len: (args.min_len, args.max_len),
            seed: args.seed,
        })
    };
    fs::create_dir_all(&args.out_dir).map_err(harness)?;
    for (name, corpus) in [("train", &splits.train), ("dev", &splits.dev), ("test", &splits.test)] {
        let path = args.out_dir.join(format!("{name}.tsv"));
        corpus::write_tsv(corpus, &path).map_err(harness)?;
        log::info!("wrote {} documents to {}", corpus.len(), path.display());
    }
    Ok(())
}

fn parse_numbers<T: std::str::FromStr>(text: &str, count: usize, what: &str) -> Result<Vec<T>> {
    let parts: Vec<T> = text
        .split(',')
        .map(|p| p.trim().parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("{what}: expected {count} comma-separated numbers, got {text:?}")))?;
    if parts.len() != count {
        return Err(usage(format!("{what}: expected {count} comma-separated numbers, got {text:?}")));
    }
    Ok(parts)
}

fn analyzer(kind: AnalyzerKind, text: &str, max_features: Option<usize>) -> Result<AnalyzerConfig> {
    let v: Vec<usize> = parse_numbers(text, 2, kind.as_str())?;
    Ok(AnalyzerConfig::new(kind, v[0], v[1])
        .map_err(harness)?
        .with_max_features(max_features))
}

fn train(args: &TrainArgs) -> Result<()> {
    let source = FeatureSource::parse(&args.features).ok_or_else(|| usage(format!("unknown feature source {:?}", args.features)))?;
    let features = match source {
        FeatureSource::TfidfUnion => {
            let w: Vec<f64> = parse_numbers(&args.weights, 3, "weights")?;
            FeatureSpec::TfidfUnion {
                analyzers: [
                    analyzer(AnalyzerKind::Word, &args.word, args.max_features)?,
                    analyzer(AnalyzerKind::Char, &args.char, args.max_features)?,
                    analyzer(AnalyzerKind::CharWb, &args.char_wb, args.max_features)?,
                ],
                weights: [w[0], w[1], w[2]],
            }
        }
        FeatureSource::FastTextSupervised => FeatureSpec::FastTextSupervised,
        FeatureSource::FastTextUnsupervised => FeatureSpec::FastTextUnsupervised,
    };
    let point = GridPoint {
        surface: parse_surface(&args.prep.surface)?,
        morph: parse_morph(&args.prep.morph)?,
        features,
    };
    let svc = SvcParams {
        c: args.c,
        tolerance: args.tolerance,
        max_sweeps: args.max_sweeps,
        seed: args.seed,
    };
    let ft = FastTextParams {
        dim: args.dim,
        window: args.window,
        epochs: args.epochs,
        min_count: 1,
        subword_min: args.minn,
        subword_max: args.maxn,
        bucket_count: args.buckets,
        negatives: 5,
        learning_rate: args.learning_rate,
        seed: args.seed,
    };
    let res = resources(&args.prep)?;
    let train = load(&args.train, true)?;
    log::info!("fitting {}", point.describe());
    let pipeline = Pipeline::fit(&point, &res, &train, &svc, &ft, args.seed)?;
    pipeline.save(&args.model)?;
    log::info!("saved model to {}", args.model.display());
    Ok(())
}

fn predict(model: &Path, input: &Path, labeled: bool, output: Option<&Path>) -> Result<()> {
    let pipeline = Pipeline::load(model).with_context(|| format!("loading {}", model.display()))?;
    let corpus = load(input, labeled)?;
    let labels = pipeline.predict(&corpus.texts())?;
    let mut out = String::new();
    for (doc, label) in corpus.documents().iter().zip(labels) {
        out.push_str(&doc.id);
        out.push('\t');
        out.push_str(&label);
        out.push('\n');
    }
    match output {
        Some(path) => fs::write(path, out).map_err(harness)?,
        None => io::stdout().write_all(out.as_bytes()).map_err(harness)?,
    }
    Ok(())
}

fn evaluate(model: &Path, data: &Path, confusion: Option<&Path>, kv: bool) -> Result<()> {
    let pipeline = Pipeline::load(model).with_context(|| format!("loading {}", model.display()))?;
    let corpus = load(data, true)?;
    let report = pipeline.evaluate(&corpus)?;
    if kv {
        print!("{}", report.to_key_values());
    } else {
        print!("{}", report.table(pipeline.class_names()));
    }
    if let Some(path) = confusion {
        fs::write(path, report.confusion.to_tsv(pipeline.class_names())).map_err(harness)?;
    }
    Ok(())
}

fn load_spec(name: &str, full_grid: bool) -> Result<ExperimentSpec> {
    let mut spec = match ExperimentId::parse(name) {
        Some(id) => config::preset(id),
        None if !Path::new(name).is_file() => {
            return Err(usage(format!("{name:?} is neither exp1..exp4 nor a config file")));
        }
        None => config::parse_config(name).with_context(|| format!("reading config {name}"))?,
    };
    if full_grid {
        spec.analyzers.widen();
        if spec.analyzers.sweep.is_empty() && spec.feature_sources.contains(&FeatureSource::TfidfUnion) {
            spec.analyzers.sweep = AnalyzerKind::UNION_ORDER.to_vec();
        }
    }
    Ok(spec)
}

fn grid(name: &str, full_grid: bool) -> Result<()> {
    let spec = load_spec(name, full_grid)?;
    let points = enumerate_grid(&spec)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{} grid points for {}", points.len(), spec.id).map_err(harness)?;
    for (i, p) in points.iter().enumerate() {
        writeln!(out, "{i}\t{}", p.describe()).map_err(harness)?;
    }
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let mut spec = load_spec(&args.experiment, args.full_grid)?;
    if let Some(runs) = args.runs {
        if runs == 0 {
            return Err(usage("--runs must be positive"));
        }
        spec.runs = runs;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let (train, dev, test) = match (&args.train, &args.dev) {
        (Some(train), Some(dev)) => {
            let test = match &args.test {
                Some(p) => Some(load(p, true)?),
                None => None,
            };
            (load(train, true)?, load(dev, true)?, test)
        }
        _ => {
            log::info!("no corpus given; using the bundled synthetic corpus");
            let s = generate_synthetic(&SynthParams::bundled());
            (s.train, s.dev, Some(s.test))
        }
    };
    let points = enumerate_grid(&spec)?;
    log::info!("{}: {} grid points x {} runs", spec.id, points.len(), spec.runs);
    let results = run_experiment(&spec, &train, &dev, test.as_ref())?;
    for r in &results {
        println!(
            "Run {}: dev macro-F1 {:.4}{}  ({:.1}s, grid point {} of {})",
            r.run_index + 1,
            r.dev_macro_f1,
            r.test_macro_f1.map_or_else(String::new, |t| format!(", test macro-F1 {t:.4}")),
            r.wall_time,
            r.best_index,
            r.grid_scores.len()
        );
        for (k, v) in &r.chosen_config {
            println!("  {k} = {v}");
        }
    }
    let report = emit_report(&results)?;
    println!();
    print!("{}", report.to_table());
    if let Some(path) = &args.tsv {
        fs::write(path, report.to_tsv()).map_err(harness)?;
    }
    Ok(())
}
