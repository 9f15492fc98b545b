use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::ModelKind;
use crate::corpus::{Language, Task};
use crate::error::{Error, Result};

/// Per-seed metrics of one grid cell and their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub acc_mean: f64,
    pub acc_std: f64,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub acc: Vec<f64>,
    pub f1: Vec<f64>,
}

impl CellStats {
    pub fn from_runs(acc: Vec<f64>, f1: Vec<f64>) -> Self {
        let (acc_mean, acc_std) = super::mean_std(&acc);
        let (f1_mean, f1_std) = super::mean_std(&f1);
        CellStats {
            acc_mean,
            acc_std,
            f1_mean,
            f1_std,
            acc,
            f1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Done(CellStats),
    Skipped(String),
}

/// One (task, language, feature set, model) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub task: Task,
    pub language: Language,
    pub features: String,
    pub model: ModelKind,
    pub outcome: Outcome,
    pub seeds: Vec<u64>,
    /// `kind=mode` pairs joined by `;`.
    pub active_providers: String,
    pub config_fingerprint: String,
    /// JSON of the model's hyperparameters.
    pub hyperparameters: String,
}

/// Rows in results-table order: feature set, language, task, model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

const HEADER: [&str; 15] = [
    "task",
    "language",
    "features",
    "model",
    "acc_mean",
    "acc_std",
    "f1_mean",
    "f1_std",
    "acc_per_seed",
    "f1_per_seed",
    "seeds",
    "skipped",
    "active_providers",
    "config_fingerprint",
    "hyperparameters",
];

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

fn split<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|v| v.parse().map_err(|_| Error::Malformed {
            location: "report.csv".into(),
            message: format!("bad {what} value {v:?}"),
        }))
        .collect()
}

/// Floats are written in shortest round-trip form, so loading is lossless.
pub fn render_csv(report: &EvalReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Malformed {
        location: "report.csv".into(),
        message: e.to_string(),
    };
    w.write_record(HEADER).map_err(csv_err)?;
    for row in &report.rows {
        let (metrics, skipped) = match &row.outcome {
            Outcome::Done(s) => (
                [
                    s.acc_mean.to_string(),
                    s.acc_std.to_string(),
                    s.f1_mean.to_string(),
                    s.f1_std.to_string(),
                    join(&s.acc),
                    join(&s.f1),
                ],
                String::new(),
            ),
            Outcome::Skipped(reason) => (Default::default(), reason.clone()),
        };
        let mut record = vec![
            row.task.name().to_string(),
            row.language.code().to_string(),
            row.features.clone(),
            row.model.name().to_string(),
        ];
        record.extend(metrics);
        record.extend([
            join(&row.seeds),
            skipped,
            row.active_providers.clone(),
            row.config_fingerprint.clone(),
            row.hyperparameters.clone(),
        ]);
        w.write_record(&record).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Malformed {
        location: "report.csv".into(),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn load_report_csv(text: &str) -> Result<EvalReport> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let bad = |line: usize, message: String| Error::Malformed {
        location: format!("report.csv:{line}"),
        message,
    };
    let header = r.headers().map_err(|e| bad(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(bad(1, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| bad(line, e.to_string()))?;
        let f = |k: usize| rec.get(k).unwrap_or_default();
        let num = |k: usize| -> Result<f64> { f(k).parse().map_err(|_| bad(line, format!("bad number {:?}", f(k)))) };
        let outcome = if f(11).is_empty() {
            Outcome::Done(CellStats {
                acc_mean: num(4)?,
                acc_std: num(5)?,
                f1_mean: num(6)?,
                f1_std: num(7)?,
                acc: split(f(8), "accuracy")?,
                f1: split(f(9), "f1")?,
            })
        } else {
            Outcome::Skipped(f(11).to_string())
        };
        rows.push(ReportRow {
            task: f(0).parse().map_err(|e: Error| bad(line, e.to_string()))?,
            language: f(1).parse().map_err(|e: Error| bad(line, e.to_string()))?,
            features: f(2).to_string(),
            model: f(3).parse().map_err(|e: Error| bad(line, e.to_string()))?,
            outcome,
            seeds: split(f(10), "seed")?,
            active_providers: f(12).to_string(),
            config_fingerprint: f(13).to_string(),
            hyperparameters: f(14).to_string(),
        });
    }
    Ok(EvalReport { rows })
}

fn first_seen<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

fn pct(mean: f64, std: f64) -> String {
    format!("{:.1} ± {:.1}", 100.0 * mean, 100.0 * std)
}

/// One row per (feature set, language), Acc/F1 columns per task and model,
/// best accuracy per (language, task) in bold.
pub fn render_markdown(report: &EvalReport) -> String {
    let sets = first_seen(report.rows.iter().map(|r| r.features.clone()));
    let languages = first_seen(report.rows.iter().map(|r| r.language));
    let tasks: Vec<Task> = Task::ALL.into_iter().filter(|t| report.rows.iter().any(|r| r.task == *t)).collect();
    let models: Vec<ModelKind> = ModelKind::ALL
        .into_iter()
        .filter(|m| report.rows.iter().any(|r| r.model == *m))
        .collect();
    let cell: BTreeMap<(String, Language, Task, ModelKind), &ReportRow> = report
        .rows
        .iter()
        .map(|r| ((r.features.clone(), r.language, r.task, r.model), r))
        .collect();

    let mut best: BTreeMap<(Language, Task), (f64, String, ModelKind)> = BTreeMap::new();
    for set in &sets {
        for &lang in &languages {
            for &task in &tasks {
                for &model in &models {
                    if let Some(ReportRow {
                        outcome: Outcome::Done(s),
                        ..
                    }) = cell.get(&(set.clone(), lang, task, model))
                    {
                        let entry = best.entry((lang, task)).or_insert((f64::NEG_INFINITY, set.clone(), model));
                        if s.acc_mean > entry.0 {
                            *entry = (s.acc_mean, set.clone(), model);
                        }
                    }
                }
            }
        }
    }

    let mut out = String::new();
    let mut header = vec!["Category".to_string(), "Lang".to_string()];
    for &task in &tasks {
        for &model in &models {
            header.push(format!("{} {} Acc", task.name(), model.display_name()));
            header.push(format!("{} {} F1", task.name(), model.display_name()));
        }
    }
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(
        out,
        "|{}",
        header.iter().enumerate().map(|(i, _)| if i < 2 { ":---|" } else { "---:|" }).collect::<String>()
    );
    for set in &sets {
        for &lang in &languages {
            let present = report.rows.iter().any(|r| &r.features == set && r.language == lang);
            if !present {
                continue;
            }
            let mut line = vec![set.clone(), lang.code().to_string()];
            for &task in &tasks {
                for &model in &models {
                    match cell.get(&(set.clone(), lang, task, model)).map(|r| &r.outcome) {
                        Some(Outcome::Done(s)) => {
                            let bold = best
                                .get(&(lang, task))
                                .is_some_and(|(_, bs, bm)| bs == set && *bm == model);
                            let (a, f) = (pct(s.acc_mean, s.acc_std), pct(s.f1_mean, s.f1_std));
                            if bold {
                                line.push(format!("**{a}**"));
                                line.push(format!("**{f}**"));
                            } else {
                                line.push(a);
                                line.push(f);
                            }
                        }
                        Some(Outcome::Skipped(reason)) => {
                            line.push(format!("—({reason})"));
                            line.push(format!("—({reason})"));
                        }
                        None => {
                            line.push(String::new());
                            line.push(String::new());
                        }
                    }
                }
            }
            let _ = writeln!(out, "| {} |", line.join(" | "));
        }
    }

    if let Some(first) = report.rows.first() {
        let _ = writeln!(out);
        let _ = writeln!(out, "Values are mean ± standard deviation in percent over seeds {}.", first.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", "));
        let _ = writeln!(out, "F1 is computed for the AI class.");
        let _ = writeln!(out);
        let _ = writeln!(out, "- Providers: {}", first.active_providers.replace(';', ", "));
        let _ = writeln!(out, "- Config fingerprint: `{}`", first.config_fingerprint);
        let params = first_seen(report.rows.iter().map(|r| (r.model, r.hyperparameters.clone())));
        for (model, json) in params {
            let _ = writeln!(out, "- {} hyperparameters: `{json}`", model.display_name());
        }
    }
    out
}

/// Write `report.csv` and `report.md` into `dir`.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join("report.csv");
    std::fs::write(&csv_path, render_csv(report)?).map_err(|e| Error::io(&csv_path, e))?;
    let md_path = dir.join("report.md");
    std::fs::write(&md_path, render_markdown(report)).map_err(|e| Error::io(&md_path, e))?;
    Ok(())
}
