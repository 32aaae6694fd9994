//! Positive 3CNF formulas, truth assignments, the `p3cnf` text format, and
//! instance generation.
//!
//! A formula is written `C_m ∧ ⋯ ∧ C_1`. Clauses are stored by clause number,
//! so `clauses[j - 1]` is `C_j`, while the text format lists `C_m` first.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 1-based index `i` of the variable `z_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VarId(u32);

impl VarId {
    pub fn new(index: u32) -> Option<VarId> {
        (index >= 1).then_some(VarId(index))
    }

    /// Panics on 0; for literals known to be positive.
    pub fn from_index(index: u32) -> VarId {
        VarId::new(index).expect("variable indices start at 1")
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// 0-based position in an assignment or encoding vector.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}", self.0)
    }
}

/// Three positive literals, written left to right as `z⟨i,3⟩ ∨ z⟨i,2⟩ ∨ z⟨i,1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Clause([VarId; 3]);

impl Clause {
    pub fn new(a: VarId, b: VarId, c: VarId) -> Clause {
        Clause([a, b, c])
    }

    pub fn from_indices(a: u32, b: u32, c: u32) -> Clause {
        Clause::new(
            VarId::from_index(a),
            VarId::from_index(b),
            VarId::from_index(c),
        )
    }

    /// Literals in written order.
    pub fn literals(&self) -> [VarId; 3] {
        self.0
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.0.contains(&v)
    }

    pub fn has_distinct_vars(&self) -> bool {
        let [a, b, c] = self.0;
        a != b && b != c && a != c
    }

    /// The unordered variable set, as a sorted triple.
    pub fn var_set(&self) -> [VarId; 3] {
        let mut s = self.0;
        s.sort_unstable();
        s
    }

    /// Literals sorted so indices strictly decrease left to right.
    pub fn descending(&self) -> Clause {
        let mut s = self.0;
        s.sort_unstable_by(|a, b| b.cmp(a));
        Clause(s)
    }

    pub fn map(&self, mut f: impl FnMut(VarId) -> VarId) -> Clause {
        Clause(self.0.map(&mut f))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        write!(f, "({a} ∨ {b} ∨ {c})")
    }
}

/// A positive 3CNF formula over `z_1..z_k`.
///
/// Construction does not validate; call [`validate`] (or go through a
/// pipeline entry point, which rejects invalid input).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PosCnf {
    clauses: Vec<Clause>,
    num_vars: usize,
}

impl PosCnf {
    /// `clauses[j - 1]` becomes `C_j`.
    pub fn new(clauses: Vec<Clause>, num_vars: usize) -> PosCnf {
        PosCnf { clauses, num_vars }
    }

    /// Builds a formula from clauses listed in written order `C_m, …, C_1`,
    /// with `num_vars` set to the largest index used.
    pub fn from_written(written: &[[u32; 3]]) -> PosCnf {
        let clauses: Vec<Clause> = written
            .iter()
            .rev()
            .map(|&[a, b, c]| Clause::from_indices(a, b, c))
            .collect();
        let num_vars = written.iter().flatten().copied().max().unwrap_or(0) as usize;
        PosCnf { clauses, num_vars }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// `C_j` for 1-based `j`.
    pub fn clause(&self, j: usize) -> &Clause {
        &self.clauses[j - 1]
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (1..=self.num_vars as u32).map(VarId)
    }

    /// Descending literals within each clause; clauses ordered so the written
    /// form (`C_m` first) is lexicographically ascending.
    pub fn canonical(&self) -> PosCnf {
        let mut clauses: Vec<Clause> = self.clauses.iter().map(Clause::descending).collect();
        clauses.sort_unstable_by_key(|c| std::cmp::Reverse(c.literals()));
        PosCnf {
            clauses,
            num_vars: self.num_vars,
        }
    }

    pub fn to_text(&self) -> String {
        serialize(self)
    }
}

impl fmt::Display for PosCnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, c) in self.clauses.iter().rev().enumerate() {
            if n > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl From<PosCnf> for String {
    fn from(f: PosCnf) -> String {
        serialize(&f)
    }
}

impl TryFrom<String> for PosCnf {
    type Error = Error;

    fn try_from(s: String) -> Result<PosCnf> {
        parse_pos3cnf(&s)
    }
}

/// A total truth assignment; bit `i - 1` is the value of `z_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn all_false(len: usize) -> Assignment {
        Assignment {
            bits: vec![false; len],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Assignment {
        Assignment { bits }
    }

    pub fn from_true_vars(len: usize, vars: impl IntoIterator<Item = u32>) -> Assignment {
        let mut a = Assignment::all_false(len);
        for v in vars {
            a.bits[v as usize - 1] = true;
        }
        a
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, v: VarId) -> bool {
        self.bits[v.slot()]
    }

    pub fn set(&mut self, v: VarId, value: bool) {
        self.bits[v.slot()] = value;
    }

    pub fn true_vars(&self) -> Vec<u32> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }

    /// Number of true literals in each clause, indexed by `j - 1`.
    pub fn true_counts(&self, f: &PosCnf) -> Vec<usize> {
        f.clauses()
            .iter()
            .map(|c| c.literals().iter().filter(|v| self.get(**v)).count())
            .collect()
    }

    /// Every clause has exactly one true literal.
    pub fn is_one_in_three(&self, f: &PosCnf) -> bool {
        self.len() == f.num_vars() && self.true_counts(f).iter().all(|&n| n == 1)
    }
}

impl From<Assignment> for String {
    fn from(a: Assignment) -> String {
        a.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl TryFrom<String> for Assignment {
    type Error = Error;

    fn try_from(s: String) -> Result<Assignment> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse {
                    line: 1,
                    column: i + 1,
                    message: format!("expected '0' or '1', found {c:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment::from_bits)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&String::from(self.clone()))
    }
}

// ---------------------------------------------------------------------------
// text format

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses the `p3cnf` text format.
///
/// ```text
/// c optional comments
/// p p3cnf <k> <m>
/// <three positive indices, for C_m>
/// ...
/// <three positive indices, for C_1>
/// ```
pub fn parse_pos3cnf(text: &str) -> Result<PosCnf> {
    if let Some((idx, ch)) = text.char_indices().find(|(_, c)| !c.is_ascii()) {
        let line = text[..idx].matches('\n').count() + 1;
        let column = idx - text[..idx].rfind('\n').map_or(0, |p| p + 1) + 1;
        return Err(perr(line, column, format!("non-ASCII character {ch:?}")));
    }
    let line_count = text.lines().count();
    if !text.ends_with('\n') {
        return Err(perr(line_count.max(1), 1, "missing trailing newline"));
    }

    let mut header: Option<(usize, usize, usize)> = None;
    let mut written: Vec<(usize, Clause)> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let lineno = n + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty()
            || line == "c"
            || line.starts_with("c ")
            || line.starts_with("c\t")
        {
            continue;
        }
        let tokens = tokenize(line);
        if line.starts_with('p') {
            if header.is_some() {
                return Err(perr(lineno, 1, "duplicate header line"));
            }
            header = Some(parse_header(lineno, &tokens)?);
            continue;
        }
        let Some((k, _, _)) = header else {
            return Err(perr(lineno, 1, "clause before the `p p3cnf` header"));
        };
        if tokens.len() != 3 {
            let col = tokens.get(3).map_or(line.len() + 1, |t| t.0);
            return Err(perr(
                lineno,
                col,
                format!("clause has {} literals, expected exactly 3", tokens.len()),
            ));
        }
        let mut lits = [VarId(1); 3];
        for (slot, &(col, tok)) in tokens.iter().enumerate() {
            let value: i64 = tok.parse().map_err(|_| {
                perr(
                    lineno,
                    col,
                    format!("expected a positive integer, found {tok:?}"),
                )
            })?;
            if value <= 0 {
                return Err(perr(
                    lineno,
                    col,
                    format!("non-positive literal {value}; only positive literals are allowed"),
                ));
            }
            if value as u64 > k as u64 {
                return Err(perr(
                    lineno,
                    col,
                    format!("header/body mismatch: variable {value} exceeds declared count {k}"),
                ));
            }
            lits[slot] = VarId(value as u32);
        }
        let clause = Clause(lits);
        if !clause.has_distinct_vars() {
            return Err(perr(lineno, 1, "duplicate variable in clause"));
        }
        written.push((lineno, clause));
    }

    let Some((k, m, hline)) = header else {
        return Err(perr(1, 1, "missing `p p3cnf <k> <m>` header"));
    };
    if written.is_empty() {
        return Err(perr(hline, 1, "fewer than 1 clause"));
    }
    if written.len() != m {
        let line = written.get(m).map_or(line_count, |w| w.0);
        return Err(perr(
            line,
            1,
            format!(
                "header/body mismatch: header declares {m} clauses, body has {}",
                written.len()
            ),
        ));
    }
    let clauses = written.into_iter().rev().map(|(_, c)| c).collect();
    Ok(PosCnf::new(clauses, k))
}

fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, b) in line.bytes().enumerate() {
        let ws = b == b' ' || b == b'\t';
        match (ws, start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_header(lineno: usize, tokens: &[(usize, &str)]) -> Result<(usize, usize, usize)> {
    let words: Vec<&str> = tokens.iter().map(|t| t.1).collect();
    if words.len() != 4 || words[0] != "p" || words[1] != "p3cnf" {
        return Err(perr(lineno, 1, "expected header `p p3cnf <k> <m>`"));
    }
    let num = |i: usize| -> Result<usize> {
        words[i].parse::<usize>().map_err(|_| {
            perr(
                lineno,
                tokens[i].0,
                format!("expected a count, found {:?}", words[i]),
            )
        })
    };
    let k = num(2)?;
    if k > u32::MAX as usize {
        return Err(perr(lineno, tokens[2].0, "variable count too large"));
    }
    Ok((k, num(3)?, lineno))
}

/// Canonical text: header, then one line per clause from `C_m` down to `C_1`.
pub fn serialize(f: &PosCnf) -> String {
    let mut out = format!("p p3cnf {} {}\n", f.num_vars(), f.num_clauses());
    for c in f.clauses().iter().rev() {
        let [a, b, d] = c.literals();
        out.push_str(&format!("{} {} {}\n", a.0, b.0, d.0));
    }
    out
}

// ---------------------------------------------------------------------------
// validation

/// A broken structural assumption. Clause numbers are 1-based (`C_j`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    TooFewClauses {
        count: usize,
    },
    DuplicateVariable {
        clause: usize,
        var: u32,
    },
    DuplicateCombination {
        first: usize,
        second: usize,
    },
    IndexOutOfRange {
        clause: usize,
        var: u32,
        num_vars: usize,
    },
    IndexGap {
        index: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewClauses { count } => {
                write!(f, "fewer than 2 clauses (found {count})")
            }
            Violation::DuplicateVariable { clause, var } => {
                write!(f, "duplicate variable z{var} in clause C{clause}")
            }
            Violation::DuplicateCombination { first, second } => write!(
                f,
                "duplicate variable combination in clauses C{first} and C{second}"
            ),
            Violation::IndexOutOfRange {
                clause,
                var,
                num_vars,
            } => write!(
                f,
                "clause C{clause} uses z{var} beyond {num_vars} variables"
            ),
            Violation::IndexGap { index } => write!(f, "index gap at {index}"),
        }
    }
}

/// Lists every broken assumption; empty iff `f` is a well-formed instance.
pub fn validate(f: &PosCnf) -> Vec<Violation> {
    let mut out = Vec::new();
    if f.num_clauses() < 2 {
        out.push(Violation::TooFewClauses {
            count: f.num_clauses(),
        });
    }
    let mut seen_sets: HashMap<[VarId; 3], usize> = HashMap::new();
    let mut used: BTreeSet<u32> = BTreeSet::new();
    for (n, c) in f.clauses().iter().enumerate() {
        let j = n + 1;
        let lits = c.literals();
        for (p, v) in lits.iter().enumerate() {
            if lits[..p].contains(v) {
                out.push(Violation::DuplicateVariable {
                    clause: j,
                    var: v.0,
                });
            }
            if v.0 as usize > f.num_vars() {
                out.push(Violation::IndexOutOfRange {
                    clause: j,
                    var: v.0,
                    num_vars: f.num_vars(),
                });
            }
            used.insert(v.0);
        }
        if c.has_distinct_vars() {
            if let Some(&first) = seen_sets.get(&c.var_set()) {
                out.push(Violation::DuplicateCombination { first, second: j });
            } else {
                seen_sets.insert(c.var_set(), j);
            }
        }
    }
    for index in 1..=f.num_vars() as u32 {
        if !used.contains(&index) {
            out.push(Violation::IndexGap { index });
        }
    }
    out
}

/// Returns `Err(Error::Invalid)` unless `validate` is clean.
pub fn ensure_valid(f: &PosCnf) -> Result<()> {
    let v = validate(f);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(v))
    }
}

// ---------------------------------------------------------------------------
// generation

fn binomial3(n: usize) -> u128 {
    let n = n as u128;
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// A random valid formula with exactly `k1` variables and `m1` clauses,
/// deterministic in `seed`.
pub fn generate_random(k1: usize, m1: usize, seed: u64) -> Result<PosCnf> {
    if k1 < 3 {
        return Err(Error::Infeasible(format!(
            "need at least 3 variables, got {k1}"
        )));
    }
    if k1 > u32::MAX as usize {
        return Err(Error::Infeasible(format!("{k1} variables is too many")));
    }
    if m1 < 2 {
        return Err(Error::Infeasible(format!(
            "need at least 2 clauses, got {m1}"
        )));
    }
    if m1 as u128 > binomial3(k1) {
        return Err(Error::Infeasible(format!(
            "{m1} clauses requested but only C({k1},3) = {} distinct variable triples exist",
            binomial3(k1)
        )));
    }
    if 3 * m1 < k1 {
        return Err(Error::Infeasible(format!(
            "{m1} clauses cannot cover {k1} variables"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (1..=k1 as u32).collect();
    order.shuffle(&mut rng);

    let mut sets: Vec<[u32; 3]> = Vec::with_capacity(m1);
    let mut seen: HashSet<[u32; 3]> = HashSet::with_capacity(m1);
    let mut push = |mut t: [u32; 3], sets: &mut Vec<[u32; 3]>| {
        t.sort_unstable();
        if seen.insert(t) {
            sets.push(t);
        }
    };

    // Cover every variable: disjoint chunks of a shuffled order, padding the
    // last chunk with already-used variables.
    for chunk in order.chunks(3) {
        let mut t = [0u32; 3];
        t[..chunk.len()].copy_from_slice(chunk);
        let mut filled = chunk.len();
        while filled < 3 {
            let v = rng.gen_range(1..=k1 as u32);
            if !t[..filled].contains(&v) {
                t[filled] = v;
                filled += 1;
            }
        }
        push(t, &mut sets);
    }

    let remaining = m1 - sets.len();
    if remaining as u128 * 2 <= binomial3(k1) {
        while sets.len() < m1 {
            let mut t = [0u32; 3];
            let mut filled = 0;
            while filled < 3 {
                let v = rng.gen_range(1..=k1 as u32);
                if !t[..filled].contains(&v) {
                    t[filled] = v;
                    filled += 1;
                }
            }
            push(t, &mut sets);
        }
    } else {
        let mut pool: Vec<[u32; 3]> = all_triples(k1 as u32)
            .into_iter()
            .filter(|t| {
                let mut s = *t;
                s.sort_unstable();
                !sets.contains(&s)
            })
            .collect();
        pool.shuffle(&mut rng);
        for t in pool.into_iter().take(remaining) {
            push(t, &mut sets);
        }
    }

    sets.shuffle(&mut rng);
    let clauses = sets
        .into_iter()
        .map(|mut t| {
            t.shuffle(&mut rng);
            Clause::from_indices(t[0], t[1], t[2])
        })
        .collect();
    Ok(PosCnf::new(clauses, k1))
}

/// All descending triples over `[1, k]`, in lexicographic order.
fn all_triples(k: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 3..=k {
        for b in 2..a {
            for c in 1..b {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Largest `k1_max` accepted by [`enumerate_small`].
pub const ENUMERATE_MAX_VARS: usize = 6;

/// Default clause cap for exhaustive corpora. With 5 variables and 6
/// clauses the expanded formula has 23 variables, inside the oracle guard.
pub const DEFAULT_CLAUSE_CAP: usize = 6;

/// Every valid canonical formula over exactly `k` variables for some
/// `k ≤ k1_max`, with between 2 and `clause_cap` clauses.
pub fn enumerate_small(k1_max: usize, clause_cap: usize) -> Result<SmallFormulas> {
    if k1_max > ENUMERATE_MAX_VARS {
        return Err(Error::GuardExceeded {
            what: "enumeration variable count",
            actual: k1_max,
            limit: ENUMERATE_MAX_VARS,
        });
    }
    Ok(SmallFormulas {
        k: 2,
        k_max: k1_max,
        cap: clause_cap,
        triples: Vec::new(),
        combo: Vec::new(),
    })
}

/// Stream produced by [`enumerate_small`]: for each variable count `k`,
/// every subset of the triples over `[1, k]` by increasing size, then in
/// lexicographic combination order.
#[derive(Clone, Debug)]
pub struct SmallFormulas {
    k: usize,
    k_max: usize,
    cap: usize,
    triples: Vec<[u32; 3]>,
    combo: Vec<usize>,
}

impl SmallFormulas {
    fn advance(&mut self) -> bool {
        let n = self.triples.len();
        let r = self.combo.len();
        if r > 0 {
            // next combination of the same size
            let mut i = r;
            while i > 0 {
                i -= 1;
                if self.combo[i] < n - r + i {
                    self.combo[i] += 1;
                    for j in i + 1..r {
                        self.combo[j] = self.combo[j - 1] + 1;
                    }
                    return true;
                }
            }
            if r < self.cap.min(n) {
                self.combo = (0..=r).collect();
                return true;
            }
        }
        loop {
            self.k += 1;
            if self.k > self.k_max {
                return false;
            }
            self.triples = all_triples(self.k as u32);
            if self.triples.len() >= 2 && self.cap >= 2 {
                self.combo = vec![0, 1];
                return true;
            }
        }
    }
}

impl Iterator for SmallFormulas {
    type Item = PosCnf;

    fn next(&mut self) -> Option<PosCnf> {
        while self.advance() {
            let chosen: Vec<[u32; 3]> = self.combo.iter().map(|&i| self.triples[i]).collect();
            let covers = (1..=self.k as u32).all(|v| chosen.iter().any(|t| t.contains(&v)));
            if covers {
                // written order C_m, ..., C_1 ascending
                return Some(PosCnf::from_written(&chosen));
            }
        }
        None
    }
}
