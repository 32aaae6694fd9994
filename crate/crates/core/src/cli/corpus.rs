//! Counterexample records: one `p3cnf` file and one JSON sidecar per record,
//! both named by a content hash and written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::formula::PosCnf;
use crate::search::{solve, SearchConfig, SearchStats};

use super::SCHEMA_VERSION;

/// An instance on which a search variant disagrees with the oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleRecord {
    pub schema_version: u32,
    pub formula: PosCnf,
    pub search_verdict: bool,
    pub oracle_verdict: bool,
    pub config: SearchConfig,
    pub seed: Option<u64>,
    pub stats: SearchStats,
}

impl CounterexampleRecord {
    pub fn new(
        formula: PosCnf,
        search_verdict: bool,
        oracle_verdict: bool,
        config: SearchConfig,
        seed: Option<u64>,
        stats: SearchStats,
    ) -> CounterexampleRecord {
        CounterexampleRecord {
            schema_version: SCHEMA_VERSION,
            formula,
            search_verdict,
            oracle_verdict,
            config,
            seed,
            stats,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<CounterexampleRecord> {
        let rec: CounterexampleRecord = serde_json::from_str(text)?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported record schema_version {}",
                rec.schema_version
            )));
        }
        Ok(rec)
    }

    /// First 16 bytes of the SHA-256 of the JSON sidecar, in hex.
    pub fn content_hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_json()?.as_bytes());
        Ok(digest[..16].iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Paths of a stored record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredRecord {
    pub formula_path: PathBuf,
    pub sidecar_path: PathBuf,
    /// False if an identical record was already present.
    pub created: bool,
}

fn write_atomic(dir: &Path, dest: &Path, contents: &str) -> Result<()> {
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(dest).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Writes `rec` into `dir`, creating the directory if needed. The formula
/// file lands before the sidecar, so a visible sidecar always has its
/// formula.
pub fn store(dir: &Path, rec: &CounterexampleRecord) -> Result<StoredRecord> {
    fs::create_dir_all(dir)?;
    let hash = rec.content_hash()?;
    let formula_path = dir.join(format!("{hash}.p3cnf"));
    let sidecar_path = dir.join(format!("{hash}.json"));
    if sidecar_path.exists() {
        return Ok(StoredRecord {
            formula_path,
            sidecar_path,
            created: false,
        });
    }
    write_atomic(dir, &formula_path, &rec.formula.to_text())?;
    write_atomic(dir, &sidecar_path, &rec.to_json()?)?;
    Ok(StoredRecord {
        formula_path,
        sidecar_path,
        created: true,
    })
}

pub fn load(sidecar: &Path) -> Result<CounterexampleRecord> {
    CounterexampleRecord::from_json(&fs::read_to_string(sidecar)?)
}

/// All sidecars in `dir`, sorted by file name.
pub fn list(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    out.sort();
    Ok(out)
}

/// Outcome of re-running a record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub schema_version: u32,
    pub search_verdict: bool,
    pub oracle_verdict: bool,
    pub stats: SearchStats,
    /// Search verdict and statistics match the record exactly.
    pub reproduced: bool,
}

/// Re-solves the recorded formula with the recorded config and re-runs the
/// oracle.
pub fn replay(rec: &CounterexampleRecord) -> Result<ReplayReport> {
    let out = solve(&rec.formula, rec.config)?;
    let oracle = crate::oracle::brute_force_one_in_three(&rec.formula)?.is_some();
    Ok(ReplayReport {
        schema_version: SCHEMA_VERSION,
        search_verdict: out.result.found,
        oracle_verdict: oracle,
        stats: out.result.stats,
        reproduced: out.result.found == rec.search_verdict
            && oracle == rec.oracle_verdict
            && out.result.stats == rec.stats,
    })
}
