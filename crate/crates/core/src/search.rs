//! Recursive three-quadrant search for the target value over the implicit
//! matrix.
//!
//! Each call probes the midpoint of its rectangle. If the probe is above the
//! target, the quadrant strictly above-right of the midpoint is dropped; if
//! below, the quadrant below-left is dropped; the other three are searched in
//! a fixed order. When one axis has collapsed to extent ≤ 1 only the other
//! axis is halved.
//!
//! Two variants are provided. [`SearchMode::Faithful`] returns "not found" on
//! any rectangle with both extents ≤ 1 without probing it.
//! [`SearchMode::Repaired`] probes every cell of such rectangles and
//! reconstructs the witness assignment on success.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::encoding::{cell_value_unchecked, decimal, BigNat, CellIndex, EncodedFormula, Rect};
use crate::error::{Error, Result};
use crate::formula::{Assignment, PosCnf};
use crate::preprocess::{preprocess, ExpansionResult};

#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    /// Base case returns "not found" without probing.
    Faithful,
    /// Base case probes its cells; witnesses are reconstructed.
    #[default]
    Repaired,
}

/// How a midpoint cell is turned into the probed assignment.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum RDecode {
    /// `r = row + 2^k1·col`: row bits are `z_1..z_k1`, matching the cell layout.
    #[default]
    FConsistent,
    /// `r = 2^k1·row + col`, bits of `r` read as `z_1..z_k`.
    PaperLiteral,
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Faithful => "faithful",
            SearchMode::Repaired => "repaired",
        })
    }
}

impl fmt::Display for RDecode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RDecode::FConsistent => "f-consistent",
            RDecode::PaperLiteral => "paper-literal",
        })
    }
}

pub const DEFAULT_CALL_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchConfig {
    pub mode: SearchMode,
    pub r_decode: RDecode,
    pub call_budget: u64,
    /// `None` means `4·(k1 + k2)` for the matrix being searched.
    pub depth_budget: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            mode: SearchMode::default(),
            r_decode: RDecode::default(),
            call_budget: DEFAULT_CALL_BUDGET,
            depth_budget: None,
        }
    }
}

impl SearchConfig {
    pub fn new(mode: SearchMode, r_decode: RDecode) -> SearchConfig {
        SearchConfig {
            mode,
            r_decode,
            ..SearchConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.call_budget == 0 {
            return Err(Error::Config("call budget must be at least 1".into()));
        }
        if self.depth_budget == Some(0) {
            return Err(Error::Config("depth budget must be at least 1".into()));
        }
        Ok(())
    }

    pub fn effective_depth_budget(&self, ef: &EncodedFormula) -> u64 {
        self.depth_budget
            .unwrap_or(4 * (ef.k1() + ef.k2()) as u64)
            .max(1)
    }

    /// Short label such as `repaired/f-consistent`.
    pub fn variant(&self) -> String {
        format!("{}/{}", self.mode, self.r_decode)
    }
}

/// The four mode × decode combinations, in a fixed order.
pub fn all_variants() -> [(SearchMode, RDecode); 4] {
    [
        (SearchMode::Repaired, RDecode::FConsistent),
        (SearchMode::Repaired, RDecode::PaperLiteral),
        (SearchMode::Faithful, RDecode::FConsistent),
        (SearchMode::Faithful, RDecode::PaperLiteral),
    ]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchStats {
    pub calls: u64,
    pub max_depth: u64,
    pub cells_evaluated: u64,
    pub budget_exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub found: bool,
    /// Present only in repaired mode; always satisfies `σ·φ̂ = t`.
    pub witness: Option<Assignment>,
    /// The cell whose probe matched the target, in either mode.
    pub hit: Option<CellIndex>,
    pub stats: SearchStats,
}

/// A probed midpoint: the packed index `r` and the candidate value `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub mid: CellIndex,
    pub r: BigNat,
    pub s: BigNat,
}

fn check_rect(rect: &Rect, ef: &EncodedFormula) -> Result<()> {
    if rect.lo.row > rect.hi.row || rect.lo.col > rect.hi.col {
        return Err(Error::out_of_range("rectangle", "corners are inverted"));
    }
    if !ef.contains(&rect.hi) {
        return Err(Error::out_of_range(
            "rectangle",
            format!(
                "corner ({}, {}) outside a 2^{} x 2^{} matrix",
                rect.hi.row,
                rect.hi.col,
                ef.k1(),
                ef.k2()
            ),
        ));
    }
    Ok(())
}

fn midpoint(lo: &BigUint, hi: &BigUint) -> (BigUint, BigUint) {
    let sum = lo + hi;
    let floor = &sum >> 1u32;
    let ceil = (sum + 1u32) >> 1u32;
    (floor, ceil)
}

/// Packs `cell` into `r` and evaluates the probed assignment.
fn probe(cell: &CellIndex, ef: &EncodedFormula, decode: RDecode) -> (BigNat, BigNat) {
    let k1 = ef.k1();
    match decode {
        RDecode::FConsistent => {
            let r = &cell.row + (&cell.col << k1);
            (r, cell_value_unchecked(cell, ef))
        }
        RDecode::PaperLiteral => {
            let r = (&cell.row << k1) + &cell.col;
            let mut s = BigNat::zero();
            for (j, e) in ef.encodings().iter().enumerate() {
                if r.bit(j as u64) {
                    s += e;
                }
            }
            (r, s)
        }
    }
}

/// The assignment whose bits are `r`'s low `k` bits (`z_1` = bit 0).
fn assignment_from_r(r: &BigNat, k: usize) -> Assignment {
    Assignment::from_bits((0..k as u64).map(|b| r.bit(b)).collect())
}

/// The midpoint probe of `rect`.
pub fn candidate(rect: &Rect, ef: &EncodedFormula, decode: RDecode) -> Result<Candidate> {
    check_rect(rect, ef)?;
    let mid = CellIndex {
        row: midpoint(&rect.lo.row, &rect.hi.row).0,
        col: midpoint(&rect.lo.col, &rect.hi.col).0,
    };
    let (r, s) = probe(&mid, ef, decode);
    Ok(Candidate { mid, r, s })
}

/// What a call did after probing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Both extents ≤ 1: returned (faithful) or probed every cell (repaired).
    Base,
    BaseFound,
    Found,
    LessSplitBoth,
    LessHalveCols,
    LessHalveRows,
    GreaterSplitBoth,
    GreaterHalveCols,
    GreaterHalveRows,
    Budget,
}

/// One line per call.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub call: u64,
    pub depth: u64,
    #[serde(with = "decimal")]
    pub lo_row: BigNat,
    #[serde(with = "decimal")]
    pub lo_col: BigNat,
    #[serde(with = "decimal")]
    pub hi_row: BigNat,
    #[serde(with = "decimal")]
    pub hi_col: BigNat,
    #[serde(default, with = "opt_decimal")]
    pub r: Option<BigNat>,
    #[serde(default, with = "opt_decimal")]
    pub s: Option<BigNat>,
    pub branch: Branch,
    /// Cells probed by this call itself, excluding its children.
    pub cells: u64,
}

impl TraceRow {
    pub fn rect(&self) -> Rect {
        Rect {
            lo: CellIndex::new(self.lo_row.clone(), self.lo_col.clone()),
            hi: CellIndex::new(self.hi_row.clone(), self.hi_col.clone()),
        }
    }
}

mod opt_decimal {
    use super::BigNat;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &Option<BigNat>, s: S) -> Result<S::Ok, S::Error> {
        match n {
            Some(n) => s.serialize_str(&n.to_str_radix(10)),
            None => s.serialize_str(""),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigNat>, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            return Ok(None);
        }
        BigNat::parse_bytes(s.as_bytes(), 10)
            .map(Some)
            .ok_or_else(|| serde::de::Error::custom(format!("not a decimal natural: {s:?}")))
    }
}

enum Outcome {
    Found(CellIndex, BigNat),
    NotFound,
    Aborted,
}

struct Searcher<'a> {
    ef: &'a EncodedFormula,
    cfg: SearchConfig,
    depth_budget: u64,
    stats: SearchStats,
    trace: Option<Vec<TraceRow>>,
    one: BigUint,
}

impl<'a> Searcher<'a> {
    fn record(
        &mut self,
        call: u64,
        depth: u64,
        rect: &Rect,
        rs: Option<&(BigNat, BigNat)>,
        branch: Branch,
        cells: u64,
    ) {
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceRow {
                call,
                depth,
                lo_row: rect.lo.row.clone(),
                lo_col: rect.lo.col.clone(),
                hi_row: rect.hi.row.clone(),
                hi_col: rect.hi.col.clone(),
                r: rs.map(|p| p.0.clone()),
                s: rs.map(|p| p.1.clone()),
                branch,
                cells,
            });
        }
    }

    fn run(&mut self, rect: &Rect, depth: u64) -> Outcome {
        if self.stats.calls >= self.cfg.call_budget || depth > self.depth_budget {
            self.stats.budget_exhausted = true;
            self.record(self.stats.calls, depth, rect, None, Branch::Budget, 0);
            return Outcome::Aborted;
        }
        self.stats.calls += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let call = self.stats.calls;

        let row_ext = rect.row_extent();
        let col_ext = rect.col_extent();
        let rows_thin = row_ext <= self.one;
        let cols_thin = col_ext <= self.one;

        if rows_thin && cols_thin {
            return self.base_case(call, depth, rect);
        }

        let (row_floor, row_ceil) = midpoint(&rect.lo.row, &rect.hi.row);
        let (col_floor, col_ceil) = midpoint(&rect.lo.col, &rect.hi.col);
        let mid = CellIndex::new(row_floor.clone(), col_floor.clone());
        let (r, s) = probe(&mid, self.ef, self.cfg.r_decode);
        self.stats.cells_evaluated += 1;

        let t = self.ef.target();
        if &s == t {
            self.record(call, depth, rect, Some(&(r.clone(), s)), Branch::Found, 1);
            return Outcome::Found(mid, r);
        }

        let rows_low = (rect.lo.row.clone(), row_floor);
        let rows_high = (row_ceil, rect.hi.row.clone());
        let rows_all = (rect.lo.row.clone(), rect.hi.row.clone());
        let cols_low = (rect.lo.col.clone(), col_floor);
        let cols_high = (col_ceil, rect.hi.col.clone());
        let cols_all = (rect.lo.col.clone(), rect.hi.col.clone());

        let (branch, parts) = if t < &s {
            if !rows_thin && !cols_thin {
                (
                    Branch::LessSplitBoth,
                    vec![
                        (rows_low.clone(), cols_low.clone()),
                        (rows_low, cols_high),
                        (rows_high, cols_low),
                    ],
                )
            } else if rows_thin {
                (Branch::LessHalveCols, vec![(rows_all, cols_low)])
            } else {
                (Branch::LessHalveRows, vec![(rows_low, cols_all)])
            }
        } else if !rows_thin && !cols_thin {
            (
                Branch::GreaterSplitBoth,
                vec![
                    (rows_low, cols_high.clone()),
                    (rows_high.clone(), cols_low),
                    (rows_high, cols_high),
                ],
            )
        } else if rows_thin {
            (Branch::GreaterHalveCols, vec![(rows_all, cols_high)])
        } else {
            (Branch::GreaterHalveRows, vec![(rows_high, cols_all)])
        };
        self.record(call, depth, rect, Some(&(r, s)), branch, 1);

        for (rows, cols) in parts {
            let sub = Rect {
                lo: CellIndex::new(rows.0, cols.0),
                hi: CellIndex::new(rows.1, cols.1),
            };
            match self.run(&sub, depth + 1) {
                Outcome::NotFound => {}
                other => return other,
            }
        }
        Outcome::NotFound
    }

    fn base_case(&mut self, call: u64, depth: u64, rect: &Rect) -> Outcome {
        if self.cfg.mode == SearchMode::Faithful {
            self.record(call, depth, rect, None, Branch::Base, 0);
            return Outcome::NotFound;
        }
        let mut cells = 0;
        let mut row = rect.lo.row.clone();
        while row <= rect.hi.row {
            let mut col = rect.lo.col.clone();
            while col <= rect.hi.col {
                let cell = CellIndex::new(row.clone(), col.clone());
                let (r, s) = probe(&cell, self.ef, self.cfg.r_decode);
                cells += 1;
                self.stats.cells_evaluated += 1;
                if &s == self.ef.target() {
                    self.record(
                        call,
                        depth,
                        rect,
                        Some(&(r.clone(), s)),
                        Branch::BaseFound,
                        cells,
                    );
                    return Outcome::Found(cell, r);
                }
                col += 1u32;
            }
            row += 1u32;
        }
        self.record(call, depth, rect, None, Branch::Base, cells);
        Outcome::NotFound
    }
}

fn search_impl(
    ef: &EncodedFormula,
    rect: &Rect,
    cfg: SearchConfig,
    trace: bool,
) -> Result<(SearchResult, Vec<TraceRow>)> {
    cfg.validate()?;
    check_rect(rect, ef)?;
    let mut s = Searcher {
        ef,
        cfg,
        depth_budget: cfg.effective_depth_budget(ef),
        stats: SearchStats::default(),
        trace: trace.then(Vec::new),
        one: BigUint::one(),
    };
    let outcome = s.run(rect, 1);
    let stats = s.stats;
    let result = match outcome {
        Outcome::Found(cell, r) => SearchResult {
            found: true,
            witness: (cfg.mode == SearchMode::Repaired).then(|| assignment_from_r(&r, ef.k())),
            hit: Some(cell),
            stats,
        },
        Outcome::NotFound | Outcome::Aborted => SearchResult {
            found: false,
            witness: None,
            hit: None,
            stats,
        },
    };
    Ok((result, s.trace.unwrap_or_default()))
}

/// Searches `rect` of the implicit matrix for the target value.
pub fn two_dib_search(ef: &EncodedFormula, rect: &Rect, cfg: SearchConfig) -> Result<SearchResult> {
    search_impl(ef, rect, cfg, false).map(|p| p.0)
}

/// Like [`two_dib_search`], also returning one trace row per call in call order.
pub fn two_dib_search_traced(
    ef: &EncodedFormula,
    rect: &Rect,
    cfg: SearchConfig,
) -> Result<(SearchResult, Vec<TraceRow>)> {
    search_impl(ef, rect, cfg, true)
}

/// Result of the full pipeline on an input formula.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub result: SearchResult,
    pub expansion: ExpansionResult,
    /// Witness restricted to the input's variables, under their original names.
    pub original_witness: Option<Assignment>,
    /// Values of the auxiliary variables `z_{k1+1}..z_{k1+k2}`.
    pub aux_witness: Option<Assignment>,
}

impl SolveOutcome {
    /// The witness (if any) gives every expanded clause exactly one true
    /// literal and hits the target value.
    pub fn witness_is_sound(&self) -> bool {
        match &self.result.witness {
            None => true,
            Some(w) => {
                w.is_one_in_three(&self.expansion.phi)
                    && crate::encoding::assignment_value(w, &self.expansion.ef)
                        .map(|v| &v == self.expansion.ef.target())
                        .unwrap_or(false)
            }
        }
    }
}

/// Preprocesses `psi` and searches the whole matrix.
pub fn solve(psi: &PosCnf, cfg: SearchConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let expansion = preprocess(psi)?;
    let result = two_dib_search(&expansion.ef, &expansion.search_rect(), cfg)?;
    let (original_witness, aux_witness) = match &result.witness {
        Some(w) => {
            let (o, a) = expansion.project_witness(w)?;
            (Some(o), Some(a))
        }
        None => (None, None),
    };
    Ok(SolveOutcome {
        result,
        expansion,
        original_witness,
        aux_witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{assignment_value, encode_formula, matrix_value};

    fn psi1() -> PosCnf {
        PosCnf::from_written(&[[1, 2, 3], [1, 2, 4]])
    }

    fn all_triples_4() -> PosCnf {
        PosCnf::from_written(&[[2, 3, 4], [1, 3, 4], [1, 2, 4], [1, 2, 3]])
    }

    fn psi1_ef() -> EncodedFormula {
        preprocess(&psi1()).unwrap().ef
    }

    #[test]
    fn candidate_single_cells() {
        let ef = psi1_ef();
        let c = candidate(
            &Rect::single(CellIndex::new(15u32, 0u32)),
            &ef,
            RDecode::FConsistent,
        )
        .unwrap();
        assert_eq!(c.s, BigNat::from(23387u32));
        for d in [RDecode::FConsistent, RDecode::PaperLiteral] {
            let c = candidate(&Rect::single(CellIndex::origin()), &ef, d).unwrap();
            assert_eq!(c.s, BigNat::zero());
        }
        assert!(candidate(
            &Rect::single(CellIndex::new(16u32, 0u32)),
            &ef,
            RDecode::FConsistent
        )
        .is_err());
    }

    #[test]
    fn candidate_decodes_differ_on_full_matrix() {
        let ef = psi1_ef();
        let full = ef.full_rect();
        let a = candidate(&full, &ef, RDecode::FConsistent).unwrap();
        let b = candidate(&full, &ef, RDecode::PaperLiteral).unwrap();
        assert_eq!(a.mid, CellIndex::new(7u32, 31u32));
        // 7 + 16·31 and 16·7 + 31
        assert_eq!(a.r, BigNat::from(503u32));
        assert_eq!(b.r, BigNat::from(143u32));
        // probed assignments: {z1,z2,z3,z5..z9} and {z1..z4, z8}
        let sa = Assignment::from_true_vars(10, [1, 2, 3, 5, 6, 7, 8, 9]);
        let sb = Assignment::from_true_vars(10, [1, 2, 3, 4, 8]);
        assert_eq!(a.s, assignment_value(&sa, &ef).unwrap());
        assert_eq!(b.s, assignment_value(&sb, &ef).unwrap());
        assert_ne!(a.s, b.s);
    }

    #[test]
    fn repaired_solves_psi1() {
        let out = solve(&psi1(), SearchConfig::default()).unwrap();
        assert!(out.result.found);
        let w = out.result.witness.clone().unwrap();
        assert_eq!(
            &assignment_value(&w, &out.expansion.ef).unwrap(),
            out.expansion.ef.target()
        );
        assert!(out.witness_is_sound());
        let orig = out.original_witness.unwrap();
        assert!(orig.is_one_in_three(&psi1()));
        assert_eq!(out.aux_witness.unwrap().len(), 6);
    }

    #[test]
    fn repaired_rejects_all_triples() {
        let out = solve(&all_triples_4(), SearchConfig::default()).unwrap();
        assert!(!out.result.found);
        assert!(out.result.witness.is_none());
        assert!(!out.result.stats.budget_exhausted);
    }

    #[test]
    fn faithful_base_case_never_probes() {
        let ef = psi1_ef();
        // the cell of the witness {z4, z5, z8}: row 0b1000, col 0b001001
        let target_cell = CellIndex::new(8u32, 9u32);
        assert_eq!(&matrix_value(&target_cell, &ef).unwrap(), ef.target());
        let rect = Rect::from_bounds((8, 9), (8, 9)).unwrap();
        for d in [RDecode::FConsistent, RDecode::PaperLiteral] {
            let res =
                two_dib_search(&ef, &rect, SearchConfig::new(SearchMode::Faithful, d)).unwrap();
            assert!(!res.found);
            assert_eq!(res.stats.cells_evaluated, 0);
            assert_eq!(res.stats.calls, 1);
        }
        let res = two_dib_search(&ef, &rect, SearchConfig::default()).unwrap();
        assert!(res.found);
        assert_eq!(res.hit, Some(target_cell));
    }

    #[test]
    fn deterministic() {
        let cfg = SearchConfig::default();
        let a = solve(&all_triples_4(), cfg).unwrap();
        let b = solve(&all_triples_4(), cfg).unwrap();
        assert_eq!(a.result, b.result);
    }

    #[test]
    fn budget_exhaustion() {
        let cfg = SearchConfig {
            call_budget: 5,
            ..SearchConfig::default()
        };
        let out = solve(&all_triples_4(), cfg).unwrap();
        assert!(!out.result.found);
        assert!(out.result.stats.budget_exhausted);
        assert_eq!(out.result.stats.calls, 5);

        let cfg = SearchConfig {
            depth_budget: Some(2),
            ..SearchConfig::default()
        };
        let out = solve(&all_triples_4(), cfg).unwrap();
        assert!(out.result.stats.budget_exhausted);
        assert!(out.result.stats.max_depth <= 2);
    }

    #[test]
    fn zero_budgets_rejected() {
        let ef = psi1_ef();
        let cfg = SearchConfig {
            call_budget: 0,
            ..SearchConfig::default()
        };
        assert!(matches!(
            two_dib_search(&ef, &ef.full_rect(), cfg),
            Err(Error::Config(_))
        ));
        let cfg = SearchConfig {
            depth_budget: Some(0),
            ..SearchConfig::default()
        };
        assert!(two_dib_search(&ef, &ef.full_rect(), cfg).is_err());
    }

    #[test]
    fn invalid_rect_rejected() {
        let ef = psi1_ef();
        let r = Rect {
            lo: CellIndex::new(3u32, 0u32),
            hi: CellIndex::new(2u32, 0u32),
        };
        assert!(two_dib_search(&ef, &r, SearchConfig::default()).is_err());
        let r = Rect::from_bounds((0, 16), (0, 0)).unwrap();
        assert!(two_dib_search(&ef, &r, SearchConfig::default()).is_err());
    }

    #[test]
    fn trace_has_one_row_per_call() {
        let ef = encode_formula(&preprocess(&all_triples_4()).unwrap().phi, 4).unwrap();
        for (mode, d) in all_variants() {
            let (res, trace) =
                two_dib_search_traced(&ef, &ef.full_rect(), SearchConfig::new(mode, d)).unwrap();
            assert_eq!(trace.len() as u64, res.stats.calls);
            let cells: u64 = trace.iter().map(|t| t.cells).sum();
            assert_eq!(cells, res.stats.cells_evaluated);
            assert_eq!(trace[0].depth, 1);
        }
    }
}
