//! Independent reference implementations and fuzz inputs shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

pub mod criteria;

use std::collections::{BTreeMap, BTreeSet};

use dialectid::tfidf::AnalyzerKind;
use rand::Rng;

const PIECES: &[&str] = &[
    "ا", "ب", "ت", "ث", "ج", "ح", "خ", "د", "ر", "س", "ش", "ع", "ق", "ك", "ل", "م", "ن", "ه", "و", "ي", "أ", "إ",
    "آ", "ة", "ى", "ئ", "ؤ", "ء", "\u{064B}", "\u{064E}", "\u{064F}", "\u{0650}", "\u{0651}", "\u{0652}", "\u{0640}",
    "،", "؛", "؟", "ال", "في", "من", "على", "a", "b", "z", "Q", "7", "0", "!", "?", ".", ",", "#", "@", "-", "(", "😀",
    "🇪🇬", "👍🏽", "❤️", "\u{200D}", " ", " ", " ", "  ", "\t", "\n", "\u{00A0}", "\u{3000}", "é", "ß", "中", "ж",
];

/// A random string mixing Arabic letters and marks, Latin, digits,
/// punctuation, emoji, odd whitespace and arbitrary scalars.
pub fn fuzz_text<R: Rng>(rng: &mut R, max_pieces: usize) -> String {
    let n = rng.random_range(0..=max_pieces);
    let mut s = String::new();
    for _ in 0..n {
        if rng.random_bool(0.08) {
            s.push(random_scalar(rng));
        } else {
            s.push_str(PIECES[rng.random_range(0..PIECES.len())]);
        }
    }
    s
}

fn random_scalar<R: Rng>(rng: &mut R) -> char {
    loop {
        if let Some(c) = char::from_u32(rng.random_range(0..0x11_0000)) {
            return c;
        }
    }
}

/// Texts over a tiny alphabet so that terms repeat across documents.
pub fn small_doc<R: Rng>(rng: &mut R, max_tokens: usize) -> String {
    const TOKENS: &[&str] = &["a", "b", "ab", "ba", "aab", "بب", "با", "ب", "abba", "x"];
    let n = rng.random_range(1..=max_tokens);
    let sep = [" ", " ", " ", "  ", "\t"];
    let mut s = String::new();
    for i in 0..n {
        if i > 0 {
            s.push_str(sep[rng.random_range(0..sep.len())]);
        }
        s.push_str(TOKENS[rng.random_range(0..TOKENS.len())]);
    }
    s
}

fn whitespace_tokens(text: &str) -> Vec<Vec<char>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for c in text.chars() {
        if c.is_whitespace() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Reference analyzer. char_wb follows the reference vectorizer loop:
/// per token, per k, with a break once the padded token fits in k. The
/// result is then stably ordered by k.
pub fn oracle_analyze(text: &str, kind: AnalyzerKind, m: usize, n: usize) -> Vec<String> {
    let mut tagged: Vec<(usize, String)> = Vec::new();
    match kind {
        AnalyzerKind::Word => {
            let toks: Vec<String> = whitespace_tokens(text).into_iter().map(|t| t.into_iter().collect()).collect();
            for k in m..=n {
                let mut i = 0;
                while i + k <= toks.len() {
                    tagged.push((k, toks[i..i + k].join(" ")));
                    i += 1;
                }
            }
        }
        AnalyzerKind::Char => {
            let chars: Vec<char> = text.chars().collect();
            for k in m..=n {
                let mut i = 0;
                while i + k <= chars.len() {
                    tagged.push((k, chars[i..i + k].iter().collect()));
                    i += 1;
                }
            }
        }
        AnalyzerKind::CharWb => {
            for tok in whitespace_tokens(text) {
                let mut w = vec![' '];
                w.extend(tok);
                w.push(' ');
                for k in m..=n {
                    let mut offset = 0;
                    tagged.push((k, w[..k.min(w.len())].iter().collect()));
                    while offset + k < w.len() {
                        offset += 1;
                        tagged.push((k, w[offset..offset + k].iter().collect()));
                    }
                    if offset == 0 {
                        break;
                    }
                }
            }
        }
    }
    tagged.sort_by_key(|(k, _)| *k);
    tagged.into_iter().map(|(_, t)| t).collect()
}

/// Brute-force TF-IDF: vocabulary sorted by term, smoothed idf, raw counts,
/// L2 rows. Returns the vocabulary and one dense row per document.
pub fn oracle_tfidf(
    docs: &[String],
    kind: AnalyzerKind,
    m: usize,
    n: usize,
    max_features: Option<usize>,
) -> (Vec<String>, Vec<Vec<f64>>) {
    let analyzed: Vec<Vec<String>> = docs.iter().map(|d| oracle_analyze(d, kind, m, n)).collect();
    let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
    for terms in &analyzed {
        for t in terms {
            *totals.entry(t).or_default() += 1;
        }
    }
    let mut vocab: Vec<String> = totals.keys().map(|t| t.to_string()).collect();
    if let Some(k) = max_features {
        let mut ranked: Vec<(&str, usize)> = totals.iter().map(|(t, c)| (*t, *c)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let keep: BTreeSet<&str> = ranked.iter().take(k).map(|(t, _)| *t).collect();
        vocab = keep.into_iter().map(str::to_string).collect();
    }
    let n_docs = docs.len() as f64;
    let idf: Vec<f64> = vocab
        .iter()
        .map(|t| {
            let df = analyzed.iter().filter(|terms| terms.contains(t)).count() as f64;
            ((1.0 + n_docs) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    let rows = analyzed
        .iter()
        .map(|terms| {
            let mut row: Vec<f64> = vocab
                .iter()
                .zip(&idf)
                .map(|(t, w)| terms.iter().filter(|x| *x == t).count() as f64 * w)
                .collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
            row
        })
        .collect();
    (vocab, rows)
}

/// Solves the bias-augmented L1-hinge SVM dual by projected gradient with
/// momentum and adaptive restart, until the projected gradient vanishes.
/// Returns the primal weights followed by the bias.
pub fn oracle_svm(x: &[Vec<f64>], y: &[f64], c: f64) -> Vec<f64> {
    let l = x.len();
    let d = x[0].len();
    let q: Vec<Vec<f64>> = (0..l)
        .map(|i| {
            (0..l)
                .map(|j| y[i] * y[j] * (x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum::<f64>() + 1.0))
                .collect()
        })
        .collect();
    let matvec = |v: &[f64]| -> Vec<f64> { q.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect() };
    let mut v = vec![1.0; l];
    let mut lip = 1.0;
    for _ in 0..200 {
        let u = matvec(&v);
        lip = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if lip == 0.0 {
            break;
        }
        v = u.iter().map(|a| a / lip).collect();
    }
    let step = 1.0 / (lip * 1.05 + 1e-12);
    let objective = |a: &[f64]| -> f64 {
        let qa = matvec(a);
        0.5 * a.iter().zip(&qa).map(|(p, r)| p * r).sum::<f64>() - a.iter().sum::<f64>()
    };
    let mut alpha = vec![0.0; l];
    let mut z = alpha.clone();
    let mut t = 1.0f64;
    let mut prev = objective(&alpha);
    for _ in 0..500_000 {
        let grad: Vec<f64> = matvec(&z).iter().map(|g| g - 1.0).collect();
        let next: Vec<f64> = z.iter().zip(&grad).map(|(a, g)| (a - step * g).clamp(0.0, c)).collect();
        let f = objective(&next);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        if f > prev {
            z = alpha.clone();
            t = 1.0;
            continue;
        }
        z = next
            .iter()
            .zip(&alpha)
            .map(|(a, o)| a + (t - 1.0) / t_next * (a - o))
            .collect();
        alpha = next;
        t = t_next;
        prev = f;
        let g: Vec<f64> = matvec(&alpha).iter().map(|g| g - 1.0).collect();
        let pg = alpha
            .iter()
            .zip(&g)
            .map(|(a, g)| {
                if *a <= 0.0 {
                    g.min(0.0).abs()
                } else if *a >= c {
                    g.max(0.0).abs()
                } else {
                    g.abs()
                }
            })
            .fold(0.0, f64::max);
        if pg < 1e-12 {
            break;
        }
    }
    let mut w = vec![0.0; d + 1];
    for i in 0..l {
        for k in 0..d {
            w[k] += alpha[i] * y[i] * x[i][k];
        }
        w[d] += alpha[i] * y[i];
    }
    w
}

/// Per-class F1 and their mean, counted pair by pair.
pub fn oracle_f1(truth: &[usize], predicted: &[usize], class_count: usize) -> (Vec<f64>, f64) {
    let f1: Vec<f64> = (0..class_count)
        .map(|c| {
            let mut tp = 0.0;
            let mut fp = 0.0;
            let mut fn_ = 0.0;
            for (t, p) in truth.iter().zip(predicted) {
                match (*t == c, *p == c) {
                    (true, true) => tp += 1.0,
                    (false, true) => fp += 1.0,
                    (true, false) => fn_ += 1.0,
                    _ => {}
                }
            }
            let precision = if tp + fp == 0.0 { 0.0 } else { tp / (tp + fp) };
            let recall = if tp + fn_ == 0.0 { 0.0 } else { tp / (tp + fn_) };
            if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            }
        })
        .collect();
    let mean = f1.iter().sum::<f64>() / class_count as f64;
    (f1, mean)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}
