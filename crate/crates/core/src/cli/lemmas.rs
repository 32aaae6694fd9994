//! Per-instance lemma checks and corpus-wide pass rates.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::encode_formula;
use crate::error::{Error, Result};
use crate::formula::{ensure_valid, PosCnf};
use crate::oracle::{check_dominance, check_equivalence, check_sortedness, materialize, Verdict};
use crate::preprocess::expand;

use super::SCHEMA_VERSION;

/// A check that ran, or the reason it did not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CheckOutcome {
    Ran { verdict: Verdict },
    Skipped { reason: String },
}

impl CheckOutcome {
    fn from_result(r: Result<Verdict>) -> Result<CheckOutcome> {
        match r {
            Ok(verdict) => Ok(CheckOutcome::Ran { verdict }),
            Err(e @ Error::GuardExceeded { .. }) => Ok(CheckOutcome::Skipped {
                reason: e.to_string(),
            }),
            Err(e) => Err(e),
        }
    }

    pub fn holds(&self) -> Option<bool> {
        match self {
            CheckOutcome::Ran { verdict } => Some(verdict.holds),
            CheckOutcome::Skipped { .. } => None,
        }
    }
}

/// Checks over one encoded matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixChecks {
    pub k1: usize,
    pub k2: usize,
    pub sortedness_strict: CheckOutcome,
    pub sortedness_nonstrict: CheckOutcome,
    pub dominance: CheckOutcome,
}

fn matrix_checks(ef: &crate::encoding::EncodedFormula) -> Result<MatrixChecks> {
    let (strict, nonstrict) = match materialize(ef) {
        Ok(mm) => (
            CheckOutcome::Ran {
                verdict: check_sortedness(&mm, true),
            },
            CheckOutcome::Ran {
                verdict: check_sortedness(&mm, false),
            },
        ),
        Err(e @ Error::GuardExceeded { .. }) => {
            let s = CheckOutcome::Skipped {
                reason: e.to_string(),
            };
            (s.clone(), s)
        }
        Err(e) => return Err(e),
    };
    Ok(MatrixChecks {
        k1: ef.k1(),
        k2: ef.k2(),
        sortedness_strict: strict,
        sortedness_nonstrict: nonstrict,
        dominance: CheckOutcome::Ran {
            verdict: check_dominance(ef),
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub schema_version: u32,
    pub formula: PosCnf,
    /// The matrix of the expanded formula, which the search runs on.
    pub expanded: MatrixChecks,
    /// The input encoded directly, rows over its first `⌈k/2⌉` variables.
    pub raw: MatrixChecks,
    pub equivalence: CheckOutcome,
}

/// Row split used for the unexpanded population.
pub fn raw_split(k: usize) -> usize {
    k.div_ceil(2)
}

pub fn lemma_report(psi: &PosCnf) -> Result<LemmaReport> {
    ensure_valid(psi)?;
    let e = expand(psi)?;
    let raw_ef = encode_formula(psi, raw_split(psi.num_vars()))?;
    Ok(LemmaReport {
        schema_version: SCHEMA_VERSION,
        formula: psi.clone(),
        expanded: matrix_checks(&e.ef)?,
        raw: matrix_checks(&raw_ef)?,
        equivalence: CheckOutcome::from_result(check_equivalence(psi))?,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// `passed / (passed + failed)`, absent when nothing ran.
    pub pass_rate: Option<f64>,
}

impl Tally {
    fn add(&mut self, c: &CheckOutcome) {
        match c.holds() {
            Some(true) => self.passed += 1,
            Some(false) => self.failed += 1,
            None => self.skipped += 1,
        }
        let ran = self.passed + self.failed;
        self.pass_rate = (ran > 0).then(|| self.passed as f64 / ran as f64);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSweep {
    pub schema_version: u32,
    pub instances: usize,
    /// Keys are `<population>.<check>` and `equivalence`.
    pub checks: BTreeMap<String, Tally>,
    /// Instances where strict sortedness failed but the non-strict form held.
    pub ties_only: BTreeMap<String, usize>,
}

pub fn sweep(formulas: &[PosCnf]) -> Result<(LemmaSweep, Vec<LemmaReport>)> {
    let reports = formulas
        .par_iter()
        .map(lemma_report)
        .collect::<Result<Vec<_>>>()?;
    let mut checks: BTreeMap<String, Tally> = BTreeMap::new();
    let mut ties_only: BTreeMap<String, usize> = BTreeMap::new();
    for r in &reports {
        for (pop, m) in [("expanded", &r.expanded), ("raw", &r.raw)] {
            for (name, c) in [
                ("sortedness_strict", &m.sortedness_strict),
                ("sortedness_nonstrict", &m.sortedness_nonstrict),
                ("dominance", &m.dominance),
            ] {
                checks.entry(format!("{pop}.{name}")).or_default().add(c);
            }
            let t = ties_only.entry(pop.to_string()).or_default();
            if m.sortedness_strict.holds() == Some(false)
                && m.sortedness_nonstrict.holds() == Some(true)
            {
                *t += 1;
            }
        }
        checks
            .entry("equivalence".into())
            .or_default()
            .add(&r.equivalence);
    }
    Ok((
        LemmaSweep {
            schema_version: SCHEMA_VERSION,
            instances: reports.len(),
            checks,
            ties_only,
        },
        reports,
    ))
}
