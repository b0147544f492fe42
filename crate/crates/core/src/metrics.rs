//! Multiclass evaluation: confusion matrix, per-class precision, recall
//! and F1, macro-F1 and accuracy.

use std::fmt::{self, Write as _};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{0} true labels but {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("label {label} out of range for {class_count} classes")]
    IndexOutOfRange { label: usize, class_count: usize },
    #[error("nothing to evaluate")]
    Empty,
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn class_count(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, truth: usize, predicted: usize) -> usize {
        self.counts[truth][predicted]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.class_count()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, class: usize) -> usize {
        self.counts[class].iter().sum()
    }

    pub fn column_sum(&self, class: usize) -> usize {
        self.counts.iter().map(|r| r[class]).sum()
    }

    /// TSV with a header row of class names; the first column holds the
    /// true class name.
    pub fn to_tsv(&self, class_names: &[String]) -> String {
        let mut out = String::from("true\\predicted");
        for name in class_names {
            out.push('\t');
            out.push_str(name);
        }
        out.push('\n');
        for (name, row) in class_names.iter().zip(&self.counts) {
            out.push_str(name);
            for c in row {
                let _ = write!(out, "\t{c}");
            }
            out.push('\n');
        }
        out
    }
}

fn validate(truth: &[usize], predicted: &[usize], class_count: usize) -> Result<(), MetricsError> {
    if truth.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch(truth.len(), predicted.len()));
    }
    if truth.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(&label) = truth.iter().chain(predicted).find(|&&l| l >= class_count) {
        return Err(MetricsError::IndexOutOfRange { label, class_count });
    }
    Ok(())
}

pub fn confusion_matrix(truth: &[usize], predicted: &[usize], class_count: usize) -> Result<ConfusionMatrix, MetricsError> {
    validate(truth, predicted, class_count)?;
    let mut counts = vec![vec![0; class_count]; class_count];
    for (&t, &p) in truth.iter().zip(predicted) {
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassScores>,
    pub macro_f1: f64,
    pub accuracy: f64,
    /// Classes whose precision or recall was 0/0 and was set to zero.
    pub undefined_classes: usize,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Macro-averaged scores over all `class_count` classes, including classes
/// that never occur. Undefined ratios count as zero.
pub fn evaluate(truth: &[usize], predicted: &[usize], class_count: usize) -> Result<EvalReport, MetricsError> {
    let confusion = confusion_matrix(truth, predicted, class_count)?;
    let mut undefined_classes = 0;
    let per_class: Vec<ClassScores> = (0..class_count)
        .map(|c| {
            let tp = confusion.get(c, c);
            let (precision, p_undef) = ratio(tp, confusion.column_sum(c));
            let (recall, r_undef) = ratio(tp, confusion.row_sum(c));
            if p_undef || r_undef {
                undefined_classes += 1;
            }
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassScores { precision, recall, f1 }
        })
        .collect();
    let macro_f1 = per_class.iter().map(|s| s.f1).sum::<f64>() / class_count as f64;
    let accuracy = confusion.trace() as f64 / confusion.total() as f64;
    Ok(EvalReport {
        confusion,
        per_class,
        macro_f1,
        accuracy,
        undefined_classes,
    })
}

impl EvalReport {
    pub fn to_key_values(&self) -> String {
        let mut out = format!(
            "macro_f1={:.6}\naccuracy={:.6}\nundefined_classes={}\n",
            self.macro_f1, self.accuracy, self.undefined_classes
        );
        for (i, s) in self.per_class.iter().enumerate() {
            let _ = writeln!(
                out,
                "class.{i}.precision={:.6}\nclass.{i}.recall={:.6}\nclass.{i}.f1={:.6}",
                s.precision, s.recall, s.f1
            );
        }
        out
    }

    /// Plain-text table with one row per class.
    pub fn table(&self, class_names: &[String]) -> String {
        let width = class_names.iter().map(|n| n.chars().count()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  {:>9}  {:>9}  {:>9}  {:>7}\n", "class", "precision", "recall", "f1", "support");
        for (c, (name, s)) in class_names.iter().zip(&self.per_class).enumerate() {
            let _ = writeln!(
                out,
                "{name:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>7}",
                s.precision,
                s.recall,
                s.f1,
                self.confusion.row_sum(c)
            );
        }
        let _ = writeln!(out, "\nmacro-F1  {:.4}\naccuracy  {:.4}", self.macro_f1, self.accuracy);
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.per_class.len()).map(|i| i.to_string()).collect();
        f.write_str(&self.table(&names))
    }
}
