//! Run-by-experiment score tables.

use std::fmt::Write as _;

use super::run::RunResult;
use super::HarnessError;

/// Macro-F1 as a percentage with two decimals, ties rounded to even.
pub fn format_percent(score: f64) -> String {
    let hundredths = (score * 10_000.0).round_ties_even();
    format!("{:.2}", hundredths / 100.0)
}

/// Rows are runs, columns experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiments: Vec<String>,
    pub runs: Vec<usize>,
    /// `dev[row][column]`, absent when that run of that experiment is
    /// missing.
    pub dev: Vec<Vec<Option<f64>>>,
    pub test: Vec<Vec<Option<f64>>>,
}

fn best_in_row(row: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in row.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

pub fn emit_report(results: &[RunResult]) -> Result<Report, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let mut experiments: Vec<String> = results.iter().map(|r| r.spec_id.clone()).collect();
    experiments.sort();
    experiments.dedup();
    let mut runs: Vec<usize> = results.iter().map(|r| r.run_index).collect();
    runs.sort_unstable();
    runs.dedup();
    let mut dev = vec![vec![None; experiments.len()]; runs.len()];
    let mut test = dev.clone();
    for r in results {
        let row = runs.binary_search(&r.run_index).expect("collected run");
        let col = experiments.binary_search(&r.spec_id).expect("collected experiment");
        dev[row][col] = Some(r.dev_macro_f1);
        test[row][col] = r.test_macro_f1;
    }
    Ok(Report {
        experiments,
        runs,
        dev,
        test,
    })
}

impl Report {
    pub fn best_dev(&self, row: usize) -> Option<usize> {
        best_in_row(&self.dev[row])
    }

    pub fn has_test(&self) -> bool {
        self.test.iter().flatten().any(Option::is_some)
    }

    fn cells(row: &[Option<f64>]) -> Vec<String> {
        let best = best_in_row(row);
        row.iter()
            .enumerate()
            .map(|(i, v)| match v {
                Some(v) if Some(i) == best => format!("{}*", format_percent(*v)),
                Some(v) => format_percent(*v),
                None => "-".to_string(),
            })
            .collect()
    }

    fn render(&self, title: &str, grid: &[Vec<Option<f64>>], out: &mut String) {
        let width = self.experiments.iter().map(String::len).max().unwrap_or(0).max(7);
        let _ = writeln!(out, "{title}");
        let _ = write!(out, "{:<8}", "");
        for e in &self.experiments {
            let _ = write!(out, "  {e:>width$}");
        }
        out.push('\n');
        for (run, row) in self.runs.iter().zip(grid) {
            let _ = write!(out, "{:<8}", format!("Run {}", run + 1));
            for cell in Self::cells(row) {
                let _ = write!(out, "  {cell:>width$}");
            }
            out.push('\n');
        }
    }

    /// Plain-text tables of macro-F1 percentages; `*` marks the best cell
    /// of each row.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        self.render("dev macro-F1 (%)", &self.dev, &mut out);
        if self.has_test() {
            out.push('\n');
            self.render("test macro-F1 (%)", &self.test, &mut out);
        }
        out
    }

    /// One line per (split, run); the last column names the best
    /// experiment of the row.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("split\trun\t{}\tbest\n", self.experiments.join("\t"));
        let mut splits = vec![("dev", &self.dev)];
        if self.has_test() {
            splits.push(("test", &self.test));
        }
        for (name, grid) in splits {
            for (run, row) in self.runs.iter().zip(grid) {
                let cells: Vec<String> = row.iter().map(|v| v.map_or_else(|| "-".to_string(), format_percent)).collect();
                let best = best_in_row(row).map_or("-", |i| self.experiments[i].as_str());
                let _ = writeln!(out, "{name}\t{}\t{}\t{best}", run + 1, cells.join("\t"));
            }
        }
        out
    }
}
