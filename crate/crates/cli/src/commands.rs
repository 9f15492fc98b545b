use std::collections::BTreeMap;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use veridict::corpus::{self, load_corpus, validate, CorpusFormat, Counts};
use veridict::detector::{extract_split, Detector};
use veridict::eval::{run_grid, write_report, GridSpec, Hyperparameters, Outcome};
use veridict::providers::{ProviderSet, ProvidersConfig};
use veridict::{Document, Error, Label, Language};

use crate::run_manifest::RunManifest;
use crate::{CorpusInput, DetectArgs, ExtractArgs, RunArgs, SplitArgs, TrainArgs};

/// A usage problem detected by the CLI itself, outside the library.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

/// 2 for usage and validation problems, 1 for everything at runtime.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Config(_)
                | Error::InvalidInput(_)
                | Error::Malformed { .. }
                | Error::DuplicateId(_)
                | Error::InvalidCorpus(_)
                | Error::Manifest(_)
                | Error::ModelFormat(_)
                | Error::Stratify(_)
                | Error::Json(_) => 2,
                Error::Io { .. } | Error::Provider { .. } | Error::Protocol { .. } | Error::Training(_) => 1,
            };
        }
    }
    1
}

fn require_exists(path: &Path, what: &str) -> Result<()> {
    if !path.exists() {
        return Err(usage(format!("{what} {} does not exist", path.display())));
    }
    Ok(())
}

fn load(input: &CorpusInput) -> Result<(Vec<Document>, CorpusFormat)> {
    require_exists(&input.input, "corpus")?;
    let format = input.format.unwrap_or_else(|| CorpusFormat::detect(&input.input));
    let docs = load_corpus(&input.input, format).with_context(|| format!("loading {}", input.input.display()))?;
    log::info!("loaded {} documents from {}", docs.len(), input.input.display());
    Ok((docs, format))
}

fn load_providers(path: Option<&Path>) -> Result<(ProviderSet, Option<PathBuf>)> {
    let Some(path) = path else {
        return Ok((ProviderSet::local(), None));
    };
    require_exists(path, "providers file")?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config: ProvidersConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok((ProviderSet::from_config(&config)?, Some(path.to_path_buf())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Serialize)]
struct StatsRow {
    language: Language,
    label: Label,
    #[serde(flatten)]
    counts: Counts,
}

pub fn corpus_stats(input: &CorpusInput, json: bool) -> Result<ExitCode> {
    let (docs, _) = load(input)?;
    let stats = corpus::corpus_stats(&docs);
    let rows: Vec<StatsRow> = Language::ALL
        .into_iter()
        .flat_map(|language| Label::ALL.into_iter().map(move |label| (language, label)))
        .map(|(language, label)| StatsRow {
            language,
            label,
            counts: stats.get(&(language, label)).copied().unwrap_or_default(),
        })
        .collect();
    if json {
        print_json(&rows)?;
    } else {
        println!("{:<4} {:<12} {:>10} {:>10} {:>10}", "Lang", "Label", "P", "S", "W");
        for r in &rows {
            println!(
                "{:<4} {:<12} {:>10} {:>10} {:>10}",
                r.language.code(),
                r.label.name(),
                r.counts.paragraphs,
                r.counts.sentences,
                r.counts.words
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn corpus_validate(input: &CorpusInput, paper_complete: bool, json: bool) -> Result<ExitCode> {
    let (docs, _) = load(input)?;
    let problems = validate(&docs, paper_complete);
    if json {
        print_json(&serde_json::json!({"documents": docs.len(), "problems": problems}))?;
    } else if problems.is_empty() {
        println!("{} documents, no problems", docs.len());
    }
    for p in &problems {
        eprintln!("{p}");
    }
    Ok(if problems.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

pub fn corpus_synth(out: &Path, languages: &[Language], per_label: usize, seed: u64) -> Result<ExitCode> {
    let languages = if languages.is_empty() { &Language::ALL[..] } else { languages };
    let docs = veridict::synth::synthetic_corpus(languages, per_label, seed);
    let file = std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = BufWriter::new(file);
    corpus::write_jsonl(&docs, &mut w)?;
    w.flush()?;
    eprintln!("wrote {} documents to {}", docs.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

struct SplitContext {
    docs: Vec<Document>,
    providers: ProviderSet,
    manifest: RunManifest,
}

fn split_context(command: &str, split: &SplitArgs) -> Result<SplitContext> {
    let (docs, _) = load(&split.corpus)?;
    let (providers, providers_path) = load_providers(split.providers.as_deref())?;
    let manifest = RunManifest::new(
        command,
        providers_path.as_deref(),
        &split.corpus.input,
        &docs,
        &[split.lang],
        &providers,
        vec![split.seed],
    )?;
    Ok(SplitContext {
        docs,
        providers,
        manifest,
    })
}

pub fn extract(args: &ExtractArgs, json: bool) -> Result<ExitCode> {
    let s = &args.split;
    let ctx = split_context("extract", s)?;
    let (plan, _, matrices) = extract_split(&ctx.docs, s.task, s.lang, s.seed, &s.features, &ctx.providers)
        .with_context(|| format!("extracting {} {} {} seed {}", s.task, s.lang, s.features, s.seed))?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut written = BTreeMap::new();
    for (name, m) in ["train", "val", "test"].into_iter().zip(&matrices) {
        let path = args.out.join(format!("{name}.csv"));
        let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        m.write_csv(&mut out)?;
        out.flush()?;
        written.insert(name, m.ids.len());
    }
    let mut manifest_txt = Vec::new();
    matrices[0].write_manifest(&mut manifest_txt)?;
    std::fs::write(args.out.join("manifest.txt"), manifest_txt)?;
    write_json(&args.out.join("split.json"), &plan)?;
    write_json(&args.out.join("run_manifest.json"), &ctx.manifest)?;
    let summary = serde_json::json!({
        "out": args.out,
        "columns": matrices[0].manifest.len(),
        "rows": written,
    });
    if json {
        print_json(&summary)?;
    } else {
        println!(
            "{} feature columns; train {} / val {} / test {} rows written to {}",
            matrices[0].manifest.len(),
            written["train"],
            written["val"],
            written["test"],
            args.out.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

pub fn run(args: &RunArgs, json: bool) -> Result<ExitCode> {
    require_exists(&args.config, "config")?;
    let mut spec = GridSpec::load(&args.config).with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(t) = args.threads {
        spec.threads = Some(t);
    }
    let corpus = match (&args.corpus, &spec.corpus) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) if p.is_relative() => args.config.parent().unwrap_or(Path::new("")).join(p),
        (None, Some(p)) => p.clone(),
        (None, None) => return Err(usage("no corpus: pass --corpus or set \"corpus\" in the config")),
    };
    let (docs, _) = load(&CorpusInput {
        input: corpus.clone(),
        format: spec.corpus_format,
    })?;
    let providers = ProviderSet::from_config(&spec.providers)?;
    let manifest = RunManifest::new(
        "run",
        Some(&args.config),
        &corpus,
        &docs,
        &spec.languages,
        &providers,
        spec.seeds.clone(),
    )?;

    let cancel = Arc::new(AtomicBool::new(false));
    {
        let cancel = cancel.clone();
        if let Err(e) = ctrlc::set_handler(move || {
            eprintln!("interrupt: finishing running cells, skipping the rest");
            cancel.store(true, Ordering::SeqCst);
        }) {
            log::warn!("cannot install interrupt handler: {e}");
        }
    }
    let outcome = run_grid(&docs, &spec, &providers, Some(&args.out), &cancel)?;
    write_report(&outcome.report, &args.out)?;
    write_json(&args.out.join("run_manifest.json"), &manifest)?;

    let done = outcome
        .report
        .rows
        .iter()
        .filter(|r| matches!(r.outcome, Outcome::Done(_)))
        .count();
    let skipped = outcome.report.rows.len() - done;
    if json {
        print_json(&serde_json::json!({
            "out": args.out,
            "cells": outcome.report.rows.len(),
            "done": done,
            "skipped": skipped,
            "cancelled": outcome.cancelled,
        }))?;
    } else {
        println!(
            "{} cells ({done} done, {skipped} skipped); report written to {}",
            outcome.report.rows.len(),
            args.out.display()
        );
    }
    Ok(if outcome.cancelled { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

pub fn train(args: &TrainArgs, json: bool) -> Result<ExitCode> {
    let s = &args.split;
    let hyperparameters = match &args.hyperparameters {
        None => Hyperparameters::default(),
        Some(path) => {
            require_exists(path, "hyperparameters file")?;
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
    };
    let ctx = split_context("train", s)?;
    let (detector, summary) = Detector::train(
        &ctx.docs,
        s.lang,
        s.task,
        &s.features,
        args.model,
        s.seed,
        &hyperparameters,
        &ctx.providers,
    )
    .with_context(|| format!("training {} on {} {} {}", args.model, s.task, s.lang, s.features))?;
    detector.save(&args.out)?;
    let report = serde_json::json!({
        "model": args.out,
        "features": detector.manifest.len(),
        "train": summary.plan.train_ids.len(),
        "test": summary.plan.test_ids.len(),
        "test_accuracy": summary.test.accuracy(),
        "test_f1": summary.test.f1(),
    });
    if json {
        print_json(&report)?;
    } else {
        println!(
            "{} trained on {} documents ({} features); held-out accuracy {:.3}, F1 {:.3}; saved to {}",
            args.model,
            summary.plan.train_ids.len(),
            detector.manifest.len(),
            summary.test.accuracy(),
            summary.test.f1(),
            args.out.display()
        );
    }
    Ok(ExitCode::SUCCESS)
}

pub fn detect(args: &DetectArgs) -> Result<ExitCode> {
    require_exists(&args.model, "model")?;
    let detector = Detector::load(&args.model)?;
    if let Some(lang) = args.lang {
        if lang != detector.language {
            return Err(usage(format!(
                "text language {lang} does not match the detector's language {}",
                detector.language
            )));
        }
    }
    let text = match args.text.as_deref() {
        Some(p) if p != Path::new("-") => {
            require_exists(p, "text file")?;
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
        }
        _ => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).context("reading stdin")?;
            buf
        }
    };
    let (providers, _) = load_providers(args.providers.as_deref())?;
    if detector.features.skip_reason(&veridict::features::ActiveProviders::of(&providers)).is_some() {
        bail!(Error::Manifest("the detector needs a provider that is not configured".into()));
    }
    let detection = detector.detect(&text, &providers)?;
    print_json(&detection)?;
    Ok(ExitCode::SUCCESS)
}
