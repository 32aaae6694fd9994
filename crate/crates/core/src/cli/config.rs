use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::search::{RDecode, SearchConfig, SearchMode, DEFAULT_CALL_BUDGET};

/// Environment variable naming the default corpus directory.
pub const CORPUS_ENV: &str = "ONE3PROBE_CORPUS";

/// Corpus directory used when neither a flag, the config file, nor the
/// environment names one.
pub const DEFAULT_CORPUS_DIR: &str = "one3probe-corpus";

/// Settings read from a TOML config file. Every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub mode: Option<SearchMode>,
    pub r_decode: Option<RDecode>,
    pub call_budget: Option<u64>,
    pub depth_budget: Option<u64>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Values given on the command line, before defaults are filled in.
#[derive(Clone, Debug, Default)]
pub struct FlagValues {
    pub corpus: Option<PathBuf>,
    pub mode: Option<SearchMode>,
    pub r_decode: Option<RDecode>,
    pub call_budget: Option<u64>,
    pub depth_budget: Option<u64>,
    pub seed: Option<u64>,
}

/// Fully resolved settings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Settings {
    pub search: SearchConfig,
    pub corpus: PathBuf,
    pub seed: Option<u64>,
}

/// Flags win over the config file; the corpus directory falls back to the
/// environment and then to [`DEFAULT_CORPUS_DIR`].
pub fn resolve(
    flags: &FlagValues,
    file: &FileConfig,
    env_corpus: Option<PathBuf>,
) -> Result<Settings> {
    let search = SearchConfig {
        mode: flags.mode.or(file.mode).unwrap_or_default(),
        r_decode: flags.r_decode.or(file.r_decode).unwrap_or_default(),
        call_budget: flags
            .call_budget
            .or(file.call_budget)
            .unwrap_or(DEFAULT_CALL_BUDGET),
        depth_budget: flags.depth_budget.or(file.depth_budget),
    };
    search.validate()?;
    let corpus = flags
        .corpus
        .clone()
        .or_else(|| file.corpus.clone())
        .or(env_corpus)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CORPUS_DIR));
    Ok(Settings {
        search,
        corpus,
        seed: flags.seed.or(file.seed),
    })
}

pub fn env_corpus() -> Option<PathBuf> {
    std::env::var_os(CORPUS_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}
