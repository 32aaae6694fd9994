//! Differential runs: every instance through each search variant and the
//! brute-force oracle, with disagreements persisted to the corpus.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{enumerate_small, generate_random, PosCnf, DEFAULT_CLAUSE_CAP};
use crate::oracle::brute_force_one_in_three;
use crate::search::{solve, SearchConfig, SearchMode};

use super::corpus::{store, CounterexampleRecord};
use super::SCHEMA_VERSION;

/// Default upper bound on `k1` for random instances.
pub const DEFAULT_RANDOM_K1_MAX: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiffSource {
    /// Every canonical formula with at most `k1_max` variables.
    Exhaustive { k1_max: usize, clause_cap: usize },
    /// `count` seeded random formulas. Unset `k1` is drawn from
    /// `[4, k1_max]`; unset `m1` from the feasible range up to `2·k1`.
    Random {
        count: usize,
        k1: Option<usize>,
        m1: Option<usize>,
        k1_max: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug)]
pub struct DiffOptions {
    pub source: DiffSource,
    /// Budgets are taken from here; mode and decode come from `variants`.
    pub base: SearchConfig,
    pub variants: Vec<SearchConfig>,
    /// `None` skips persistence.
    pub corpus: Option<PathBuf>,
}

/// One generated instance and the seed that produced it, if any.
#[derive(Clone, Debug)]
pub struct Instance {
    pub formula: PosCnf,
    pub seed: Option<u64>,
}

fn feasible_m1(k1: usize) -> (usize, usize) {
    let lo = k1.div_ceil(3).max(2);
    let triples = k1 * (k1 - 1) * (k1 - 2) / 6;
    (lo, (2 * k1).min(triples).max(lo))
}

/// Instance seeds are `seed + i`; sizes come from a generator on the same seed.
pub fn random_instances(
    count: usize,
    k1: Option<usize>,
    m1: Option<usize>,
    k1_max: usize,
    seed: u64,
) -> Result<Vec<Instance>> {
    if k1.is_none() && k1_max < 4 {
        return Err(Error::Config("--k1-max must be at least 4".into()));
    }
    (0..count as u64)
        .map(|i| {
            let s = seed.wrapping_add(i);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let k = k1.unwrap_or_else(|| rng.gen_range(4..=k1_max));
            let m = match m1 {
                Some(m) => m,
                None => {
                    if k < 3 {
                        return Err(Error::Infeasible(format!("k1 = {k} admits no clause")));
                    }
                    let (lo, hi) = feasible_m1(k);
                    rng.gen_range(lo..=hi)
                }
            };
            Ok(Instance {
                formula: generate_random(k, m, s)?,
                seed: Some(s),
            })
        })
        .collect()
}

pub fn instances(source: &DiffSource) -> Result<Vec<Instance>> {
    match *source {
        DiffSource::Exhaustive { k1_max, clause_cap } => Ok(enumerate_small(k1_max, clause_cap)?
            .map(|formula| Instance {
                formula,
                seed: None,
            })
            .collect()),
        DiffSource::Random {
            count,
            k1,
            m1,
            k1_max,
            seed,
        } => random_instances(count, k1, m1, k1_max, seed),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantCounts {
    pub agreements: usize,
    pub disagreements: usize,
    /// Disagreements where the search reported "not found" on a satisfiable input.
    pub false_negatives: usize,
    /// Disagreements where the search reported "found" on an unsatisfiable input.
    pub false_positives: usize,
    pub budget_exhausted: usize,
    /// Witnesses that fail the target value or the exactly-one predicate.
    pub witness_violations: usize,
    pub calls: u64,
    pub cells_evaluated: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSummary {
    pub schema_version: u32,
    pub instances: usize,
    pub satisfiable: usize,
    /// Instances on which every variant agreed with the oracle.
    pub agreements: usize,
    /// Instances on which at least one variant disagreed.
    pub disagreements: usize,
    pub disagreements_by_variant: BTreeMap<String, usize>,
    pub variants: BTreeMap<String, VariantCounts>,
    pub witness_violations: usize,
    pub records: usize,
    pub records_written: usize,
    pub corpus: Option<PathBuf>,
    /// Set when no repaired variant disagreed anywhere in the run.
    pub repaired_zero_disagreements: bool,
    pub note: String,
}

struct InstanceOutcome {
    oracle: bool,
    per_variant: Vec<(VariantCounts, Option<CounterexampleRecord>)>,
}

fn run_instance(inst: &Instance, variants: &[SearchConfig]) -> Result<InstanceOutcome> {
    let oracle = brute_force_one_in_three(&inst.formula)?.is_some();
    let per_variant = variants
        .iter()
        .map(|cfg| {
            let out = solve(&inst.formula, *cfg)?;
            let found = out.result.found;
            let stats = out.result.stats;
            let mut c = VariantCounts {
                calls: stats.calls,
                cells_evaluated: stats.cells_evaluated,
                budget_exhausted: stats.budget_exhausted as usize,
                witness_violations: (!out.witness_is_sound()) as usize,
                ..VariantCounts::default()
            };
            let rec = if found == oracle {
                c.agreements = 1;
                None
            } else {
                c.disagreements = 1;
                if found {
                    c.false_positives = 1;
                } else {
                    c.false_negatives = 1;
                }
                Some(CounterexampleRecord::new(
                    inst.formula.clone(),
                    found,
                    oracle,
                    *cfg,
                    inst.seed,
                    stats,
                ))
            };
            Ok((c, rec))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InstanceOutcome {
        oracle,
        per_variant,
    })
}

fn add(into: &mut VariantCounts, c: &VariantCounts) {
    into.agreements += c.agreements;
    into.disagreements += c.disagreements;
    into.false_negatives += c.false_negatives;
    into.false_positives += c.false_positives;
    into.budget_exhausted += c.budget_exhausted;
    into.witness_violations += c.witness_violations;
    into.calls += c.calls;
    into.cells_evaluated += c.cells_evaluated;
}

/// Runs every instance, persists every disagreement, and summarizes.
pub fn run_diff(opts: &DiffOptions) -> Result<(DiffSummary, Vec<CounterexampleRecord>)> {
    let insts = instances(&opts.source)?;
    run_diff_on(&insts, opts)
}

pub fn run_diff_on(
    insts: &[Instance],
    opts: &DiffOptions,
) -> Result<(DiffSummary, Vec<CounterexampleRecord>)> {
    if opts.variants.is_empty() {
        return Err(Error::Config("no search variants selected".into()));
    }
    let variants: Vec<SearchConfig> = opts
        .variants
        .iter()
        .map(|v| SearchConfig {
            mode: v.mode,
            r_decode: v.r_decode,
            ..opts.base
        })
        .collect();
    let outcomes = insts
        .par_iter()
        .map(|i| run_instance(i, &variants))
        .collect::<Result<Vec<_>>>()?;

    let labels: Vec<String> = variants.iter().map(SearchConfig::variant).collect();
    let mut per: BTreeMap<String, VariantCounts> = labels
        .iter()
        .map(|l| (l.clone(), VariantCounts::default()))
        .collect();
    let mut records = Vec::new();
    let mut agreements = 0;
    let mut satisfiable = 0;
    for o in outcomes {
        satisfiable += o.oracle as usize;
        let mut all_agree = true;
        for (label, (c, rec)) in labels.iter().zip(o.per_variant) {
            add(per.get_mut(label).expect("label registered"), &c);
            all_agree &= c.disagreements == 0;
            records.extend(rec);
        }
        agreements += all_agree as usize;
    }

    let mut written = 0;
    if let Some(dir) = &opts.corpus {
        if !records.is_empty() {
            for rec in &records {
                written += store(dir, rec)?.created as usize;
            }
        }
    }

    let repaired: Vec<&String> = variants
        .iter()
        .zip(&labels)
        .filter(|(v, _)| v.mode == SearchMode::Repaired)
        .map(|(_, l)| l)
        .collect();
    let repaired_zero = !repaired.is_empty() && repaired.iter().all(|l| per[*l].disagreements == 0);
    let note = if repaired_zero {
        format!(
            "ZERO DISAGREEMENTS in repaired mode across all {} instances: every repaired verdict matched the brute-force oracle",
            insts.len()
        )
    } else if repaired.is_empty() {
        "no repaired variant was run".to_string()
    } else {
        let n: usize = repaired.iter().map(|l| per[*l].disagreements).sum();
        format!("repaired mode disagreed with the oracle {n} times")
    };

    let summary = DiffSummary {
        schema_version: SCHEMA_VERSION,
        instances: insts.len(),
        satisfiable,
        agreements,
        disagreements: insts.len() - agreements,
        disagreements_by_variant: per
            .iter()
            .map(|(k, v)| (k.clone(), v.disagreements))
            .collect(),
        witness_violations: per.values().map(|v| v.witness_violations).sum(),
        variants: per,
        records: records.len(),
        records_written: written,
        corpus: opts.corpus.clone(),
        repaired_zero_disagreements: repaired_zero,
        note,
    };
    Ok((summary, records))
}

/// Default source for `--exhaustive`.
pub fn exhaustive(k1_max: usize) -> DiffSource {
    DiffSource::Exhaustive {
        k1_max,
        clause_cap: DEFAULT_CLAUSE_CAP,
    }
}
