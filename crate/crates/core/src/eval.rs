//! Recall, precision and F-measure over partition decisions, and the
//! learning-set/test-set comparison across methods.

use std::fmt;
use std::thread;

use crate::corpus::{Corpus, Instance};
use crate::error::{BunsetsuError, Result};
use crate::learners::{Learner, MethodKind, TrainParams};
use crate::rulebase::{exclusive_coverage, Coverage};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalReport {
    pub n_spaces: usize,
    pub n_gold_partitions: usize,
    pub n_predicted_partitions: usize,
    pub n_correct_partitions: usize,
    pub recall: f64,
    pub precision: f64,
    pub f_measure: f64,
    pub exclusive_coverage: Option<Coverage>,
}

/// Scores partition predictions against gold flags.
///
/// With no gold partitions, recall is 1 if nothing was predicted and 0
/// otherwise. With no predicted partitions, precision is 1 if there were no
/// gold partitions and 0 otherwise. F is 0 when recall and precision are both 0.
pub fn score(predictions: &[bool], gold: &[bool]) -> Result<EvalReport> {
    if predictions.len() != gold.len() {
        return Err(BunsetsuError::invalid(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    let n_gold = gold.iter().filter(|&&g| g).count();
    let n_pred = predictions.iter().filter(|&&p| p).count();
    let n_correct = predictions
        .iter()
        .zip(gold)
        .filter(|(&p, &g)| p && g)
        .count();
    let recall = match (n_gold, n_pred) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        _ => n_correct as f64 / n_gold as f64,
    };
    let precision = match (n_pred, n_gold) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        _ => n_correct as f64 / n_pred as f64,
    };
    let f_measure = if recall + precision > 0.0 {
        2.0 * recall * precision / (recall + precision)
    } else {
        0.0
    };
    Ok(EvalReport {
        n_spaces: gold.len(),
        n_gold_partitions: n_gold,
        n_predicted_partitions: n_pred,
        n_correct_partitions: n_correct,
        recall,
        precision,
        f_measure,
        exclusive_coverage: None,
    })
}

/// Percentage with two decimals, e.g. `97.58`.
pub fn percent(ratio: f64) -> String {
    format!("{:.2}", 100.0 * ratio)
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "spaces\t{}", self.n_spaces)?;
        writeln!(
            f,
            "recall\t{}%\t({}/{})",
            percent(self.recall),
            self.n_correct_partitions,
            self.n_gold_partitions
        )?;
        writeln!(
            f,
            "precision\t{}%\t({}/{})",
            percent(self.precision),
            self.n_correct_partitions,
            self.n_predicted_partitions
        )?;
        write!(f, "F\t{}%", percent(self.f_measure))?;
        if let Some(c) = self.exclusive_coverage {
            write!(
                f,
                "\nexclusive coverage\t{}%\t({}/{})",
                percent(c.ratio()),
                c.covered,
                c.total
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Split {
    Learning,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Learning => "learning",
            Split::Test => "test",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub kind: MethodKind,
    pub split: Split,
    /// Training failures are kept per kind as their message.
    pub outcome: std::result::Result<EvalReport, String>,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
}

fn evaluate_split(learner: &Learner, instances: &[Instance], gold: &[bool]) -> Result<EvalReport> {
    let mut report = score(&learner.predict_all(instances), gold)?;
    if matches!(learner.kind, MethodKind::Method1 | MethodKind::Method2) {
        report.exclusive_coverage = learner
            .rule_table()
            .map(|t| exclusive_coverage(t, instances));
    }
    Ok(report)
}

/// Trains every requested kind on `learning` and scores it on both corpora.
/// Kinds are trained on separate threads; rows come out in kind order, then
/// learning before test.
pub fn run_experiment(
    learning: &Corpus,
    test: &Corpus,
    kinds: &[MethodKind],
    params: &TrainParams,
) -> Result<ExperimentTable> {
    if learning.n_spaces() == 0 || test.n_spaces() == 0 {
        return Err(BunsetsuError::invalid(
            "learning and test corpora need at least one space",
        ));
    }
    let mut kinds = kinds.to_vec();
    kinds.sort();
    kinds.dedup();

    let learn_inst = learning.instances();
    let learn_gold = learning.gold();
    let test_inst = test.instances();
    let test_gold = test.gold();

    let per_kind: Vec<Vec<ExperimentRow>> = thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| {
                let (li, lg, ti, tg) = (&learn_inst, &learn_gold, &test_inst, &test_gold);
                scope.spawn(move || {
                    let learner = Learner::train_instances(kind, li, params);
                    [(Split::Learning, li, lg), (Split::Test, ti, tg)]
                        .into_iter()
                        .map(|(split, inst, gold)| ExperimentRow {
                            kind,
                            split,
                            outcome: learner.as_ref().map_err(|e| e.to_string()).and_then(|l| {
                                evaluate_split(l, inst, gold).map_err(|e| e.to_string())
                            }),
                        })
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .zip(&kinds)
            .map(|(h, &kind)| {
                h.join().unwrap_or_else(|_| {
                    [Split::Learning, Split::Test]
                        .into_iter()
                        .map(|split| ExperimentRow {
                            kind,
                            split,
                            outcome: Err("training panicked".into()),
                        })
                        .collect()
                })
            })
            .collect()
    });
    Ok(ExperimentTable {
        rows: per_kind.into_iter().flatten().collect(),
    })
}

impl ExperimentTable {
    pub fn get(&self, kind: MethodKind, split: Split) -> Option<&ExperimentRow> {
        self.rows
            .iter()
            .find(|r| r.kind == kind && r.split == split)
    }

    /// Aligned text table, percentages to two decimals.
    pub fn to_text(&self) -> String {
        let header = [
            "method",
            "split",
            "F",
            "recall",
            "precision",
            "coverage",
            "correct",
            "gold",
            "predicted",
            "spaces",
        ];
        let mut lines: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for row in &self.rows {
            let mut cells = vec![row.kind.name().to_string(), row.split.name().to_string()];
            match &row.outcome {
                Ok(r) => cells.extend([
                    percent(r.f_measure),
                    percent(r.recall),
                    percent(r.precision),
                    r.exclusive_coverage
                        .map_or_else(|| "-".to_string(), |c| percent(c.ratio())),
                    r.n_correct_partitions.to_string(),
                    r.n_gold_partitions.to_string(),
                    r.n_predicted_partitions.to_string(),
                    r.n_spaces.to_string(),
                ]),
                Err(e) => cells.push(format!("FAILED: {e}")),
            }
            lines.push(cells);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                lines
                    .iter()
                    .filter(|l| l.len() == header.len())
                    .filter_map(|l| l.get(c))
                    .map(|s| s.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for l in &lines {
            let padded: Vec<String> = l
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    if i + 1 == l.len() {
                        s.clone()
                    } else if i < 2 {
                        format!("{s:<w$}", w = widths[i])
                    } else {
                        format!("{s:>w$}", w = widths[i])
                    }
                })
                .collect();
            out.push_str(&padded.join("  "));
            out.push('\n');
        }
        out
    }

    /// Tab-separated rows: method, split, F, recall, precision, coverage and
    /// the raw counts. Failed kinds carry `error` and the message.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "method\tsplit\tf\trecall\tprecision\tcoverage\tcorrect\tgold\tpredicted\tspaces\n",
        );
        for row in &self.rows {
            let cells = match &row.outcome {
                Ok(r) => format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    percent(r.f_measure),
                    percent(r.recall),
                    percent(r.precision),
                    r.exclusive_coverage
                        .map_or_else(|| "-".to_string(), |c| percent(c.ratio())),
                    r.n_correct_partitions,
                    r.n_gold_partitions,
                    r.n_predicted_partitions,
                    r.n_spaces
                ),
                Err(e) => format!("error\t{}", e.replace(['\t', '\n'], " ")),
            };
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                row.kind.name(),
                row.split.name(),
                cells
            ));
        }
        out
    }
}
