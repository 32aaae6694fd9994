//! Formula expansion ahead of the search: rank and rename the variables by
//! occurrence encoding, put each clause's literals in descending order, and
//! attach a three-clause gadget with three fresh variables to every clause.

use crate::encoding::{encode_formula, occurrence_encoding, EncodedFormula, Rect};
use crate::error::{Error, Result};
use crate::formula::{ensure_valid, Assignment, Clause, PosCnf, VarId};

/// A permutation of `[1, k1]`, mapping old variable indices to new ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Renaming {
    new_of_old: Vec<u32>,
}

impl Renaming {
    pub fn identity(k: usize) -> Renaming {
        Renaming {
            new_of_old: (1..=k as u32).collect(),
        }
    }

    /// Builds a renaming from the new index of each old index (`new_of_old[i-1]`).
    pub fn from_new_of_old(new_of_old: Vec<u32>) -> Option<Renaming> {
        let mut seen = vec![false; new_of_old.len()];
        for &n in &new_of_old {
            let slot = (n as usize).checked_sub(1)?;
            if slot >= seen.len() || std::mem::replace(&mut seen[slot], true) {
                return None;
            }
        }
        Some(Renaming { new_of_old })
    }

    pub fn len(&self) -> usize {
        self.new_of_old.len()
    }

    pub fn is_empty(&self) -> bool {
        self.new_of_old.is_empty()
    }

    pub fn new_of(&self, old: VarId) -> VarId {
        VarId::from_index(self.new_of_old[old.slot()])
    }

    pub fn old_of(&self, new: VarId) -> VarId {
        let pos = self
            .new_of_old
            .iter()
            .position(|&n| n == new.index())
            .expect("renaming is a permutation");
        VarId::from_index(pos as u32 + 1)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.new_of_old
    }

    pub fn apply(&self, f: &PosCnf) -> PosCnf {
        PosCnf::new(
            f.clauses()
                .iter()
                .map(|c| c.map(|v| self.new_of(v)))
                .collect(),
            f.num_vars(),
        )
    }
}

/// Orders variables so occurrence encodings are nondecreasing in the new
/// index. Ties keep their original relative order.
pub fn rank_variables(psi: &PosCnf) -> Result<Renaming> {
    let encs = psi
        .vars()
        .map(|v| occurrence_encoding(psi, v))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..psi.num_vars()).collect();
    order.sort_by(|&a, &b| encs[a].cmp(&encs[b]));
    let mut new_of_old = vec![0u32; psi.num_vars()];
    for (new_slot, &old_slot) in order.iter().enumerate() {
        new_of_old[old_slot] = new_slot as u32 + 1;
    }
    Ok(Renaming { new_of_old })
}

/// Sorts each clause's literals into strictly descending index order.
pub fn normalize_clause_order(psi: &PosCnf) -> PosCnf {
    PosCnf::new(
        psi.clauses().iter().map(Clause::descending).collect(),
        psi.num_vars(),
    )
}

/// Everything the search needs, plus what it takes to map answers back.
#[derive(Clone, Debug)]
pub struct ExpansionResult {
    /// The input formula, as given.
    pub psi: PosCnf,
    /// The renamed and normalized input.
    pub psi_normalized: PosCnf,
    pub phi: PosCnf,
    pub ef: EncodedFormula,
    pub rename: Renaming,
    pub k1: usize,
    pub k2: usize,
    pub m1: usize,
    pub m: usize,
}

impl ExpansionResult {
    /// `(0, 0)` to `(2^k1 − 1, 2^k2 − 1)`.
    pub fn search_rect(&self) -> Rect {
        self.ef.full_rect()
    }

    /// Variable indices `(k1+3j, k1+3j−1, k1+3j−2)` of clause `j`'s gadget.
    pub fn aux_block(&self, j: usize) -> [VarId; 3] {
        aux_block(self.k1, j)
    }

    /// Lifts a 1-in-3 witness of the input (original variable names) to a
    /// 1-in-3 witness of the expanded formula.
    pub fn lift_witness(&self, sigma: &Assignment) -> Result<Assignment> {
        if sigma.len() != self.k1 {
            return Err(Error::LengthMismatch {
                expected: self.k1,
                actual: sigma.len(),
            });
        }
        let mut mu = Assignment::all_false(self.k1 + self.k2);
        for old in self.psi.vars() {
            mu.set(self.rename.new_of(old), sigma.get(old));
        }
        for j in 1..=self.m1 {
            let [x3, x2, x1] = self.psi_normalized.clause(j).literals();
            let [a, b, c] = self.aux_block(j);
            let pattern = match (mu.get(x1), mu.get(x2), mu.get(x3)) {
                (true, false, false) => [true, false, false],
                (false, true, false) => [false, true, false],
                (false, false, true) => [false, false, true],
                _ => {
                    return Err(Error::out_of_range(
                        "witness",
                        format!("clause C{j} does not have exactly one true literal"),
                    ))
                }
            };
            mu.set(a, pattern[0]);
            mu.set(b, pattern[1]);
            mu.set(c, pattern[2]);
        }
        Ok(mu)
    }

    /// Splits an expanded-formula assignment into the input's variables
    /// (original names) and the auxiliary block values.
    pub fn project_witness(&self, mu: &Assignment) -> Result<(Assignment, Assignment)> {
        if mu.len() != self.k1 + self.k2 {
            return Err(Error::LengthMismatch {
                expected: self.k1 + self.k2,
                actual: mu.len(),
            });
        }
        let original = Assignment::from_bits(
            self.psi
                .vars()
                .map(|old| mu.get(self.rename.new_of(old)))
                .collect(),
        );
        let aux = Assignment::from_bits(mu.bits()[self.k1..].to_vec());
        Ok((original, aux))
    }
}

fn aux_block(k1: usize, j: usize) -> [VarId; 3] {
    let base = (k1 + 3 * j) as u32;
    [
        VarId::from_index(base),
        VarId::from_index(base - 1),
        VarId::from_index(base - 2),
    ]
}

/// Builds the gadget clauses for an already ranked and normalized formula:
/// for each clause `C_i = z⟨i,3⟩ ∨ z⟨i,2⟩ ∨ z⟨i,1⟩`,
///
/// ```text
/// C_{4i}   = z_{k1+3i} ∨ z_{k1+3i−1} ∨ z⟨i,3⟩
/// C_{4i−1} = z_{k1+3i} ∨ z_{k1+3i−2} ∨ z⟨i,2⟩
/// C_{4i−2} = z_{k1+3i} ∨ z⟨i,3⟩     ∨ z⟨i,2⟩
/// C_{4i−3} = C_i
/// ```
pub fn expand_gadgets(normalized: &PosCnf) -> PosCnf {
    let k1 = normalized.num_vars();
    let m1 = normalized.num_clauses();
    let mut clauses = Vec::with_capacity(4 * m1);
    for i in 1..=m1 {
        let ci = *normalized.clause(i);
        let [x3, x2, _] = ci.literals();
        let [a, b, c] = aux_block(k1, i);
        clauses.push(ci);
        clauses.push(Clause::new(a, x3, x2));
        clauses.push(Clause::new(a, c, x2));
        clauses.push(Clause::new(a, b, x3));
    }
    PosCnf::new(clauses, k1 + 3 * m1)
}

/// Rank, normalize, expand and encode.
pub fn expand(psi: &PosCnf) -> Result<ExpansionResult> {
    ensure_valid(psi)?;
    let rename = rank_variables(psi)?;
    let psi_normalized = normalize_clause_order(&rename.apply(psi));
    let phi = expand_gadgets(&psi_normalized);
    let k1 = psi.num_vars();
    let m1 = psi.num_clauses();
    let ef = encode_formula(&phi, k1)?;
    Ok(ExpansionResult {
        psi: psi.clone(),
        psi_normalized,
        k2: 3 * m1,
        m: 4 * m1,
        phi,
        ef,
        rename,
        k1,
        m1,
    })
}

/// The full preprocessing pipeline; the result carries the encoded formula,
/// target, split, and search rectangle.
pub fn preprocess(psi: &PosCnf) -> Result<ExpansionResult> {
    expand(psi)
}
