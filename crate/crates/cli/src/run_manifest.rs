use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use veridict::corpus::write_jsonl;
use veridict::providers::ProviderSet;
use veridict::{Document, LanguagePack, Language};

/// Everything needed to reproduce an output directory. Deliberately free of
/// timestamps so identical inputs give identical manifests.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_path: Option<String>,
    pub config_sha256: Option<String>,
    pub corpus_path: String,
    /// Hash of the loaded corpus re-serialized as JSON Lines, so the same
    /// documents hash equally in either on-disk format.
    pub corpus_sha256: String,
    pub resource_versions: BTreeMap<Language, String>,
    pub provider_modes: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: Option<&Path>,
        corpus: &Path,
        docs: &[Document],
        languages: &[Language],
        providers: &ProviderSet,
        seeds: Vec<u64>,
    ) -> Result<Self> {
        let config_sha256 = match config {
            Some(p) => Some(hex::encode(Sha256::digest(
                std::fs::read(p).with_context(|| format!("reading {}", p.display()))?,
            ))),
            None => None,
        };
        let mut jsonl = Vec::new();
        write_jsonl(docs, &mut jsonl)?;
        Ok(RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_path: config.map(|p| p.display().to_string()),
            config_sha256,
            corpus_path: corpus.display().to_string(),
            corpus_sha256: hex::encode(Sha256::digest(&jsonl)),
            resource_versions: languages
                .iter()
                .map(|&l| (l, LanguagePack::bundled(l).version.clone()))
                .collect(),
            provider_modes: providers
                .modes
                .iter()
                .map(|(k, m)| (k.name().to_string(), m.clone()))
                .collect(),
            seeds,
        })
    }
}
