//! Base-4 occurrence encodings and the implicit matrix they induce.
//!
//! Digit `j` (1-based, least significant first) of a variable's encoding is 1
//! iff the variable occurs in clause `C_j`. Because every clause has three
//! literals, summing the encodings of the true variables never carries: digit
//! `j` of the sum counts the true literals of `C_j`, so the sum equals
//! `(1…1)_4` exactly when every clause has one true literal.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Assignment, PosCnf, VarId};

/// Arbitrary-precision natural number; all encoding arithmetic is exact.
pub type BigNat = BigUint;

/// Digits `d_1..d_len` of `n` in base 4, least significant first.
pub fn base4_digits(n: &BigNat, len: usize) -> Result<Vec<u8>> {
    let mut digits = if n.is_zero() {
        Vec::new()
    } else {
        n.to_radix_le(4)
    };
    if digits.len() > len {
        return Err(Error::out_of_range(
            "base-4 length",
            format!("{n} needs {} digits, {len} requested", digits.len()),
        ));
    }
    digits.resize(len, 0);
    Ok(digits)
}

/// The `(l, u)`-zone: digits `d_l..d_u` of the length-`len` representation,
/// least significant first.
pub fn base4_zone(n: &BigNat, l: usize, u: usize, len: usize) -> Result<Vec<u8>> {
    if !(1 <= l && l <= u && u <= len) {
        return Err(Error::out_of_range(
            "zone bounds",
            format!("need 1 <= l <= u <= len, got l={l} u={u} len={len}"),
        ));
    }
    let d = base4_digits(n, len)?;
    Ok(d[l - 1..u].to_vec())
}

/// Renders least-significant-first digits as the conventional string, most
/// significant digit first (`[3, 2, 1, 1]` → `"1123"`).
pub fn digits_to_string(digits: &[u8]) -> String {
    digits.iter().rev().map(|d| char::from(b'0' + d)).collect()
}

/// Parses a base-4 digit string written most significant first.
pub fn from_base4(s: &str) -> Option<BigNat> {
    if s.is_empty() {
        return Some(BigNat::zero());
    }
    BigNat::parse_bytes(s.as_bytes(), 4)
}

/// `Σ_j 4^{j−1}·[z_i ∈ C_j]`.
pub fn occurrence_encoding(f: &PosCnf, i: VarId) -> Result<BigNat> {
    if i.index() as usize > f.num_vars() {
        return Err(Error::out_of_range(
            "variable",
            format!("{i} in a formula with {} variables", f.num_vars()),
        ));
    }
    let mut n = BigNat::zero();
    for (slot, c) in f.clauses().iter().enumerate() {
        if c.contains(i) {
            n.set_bit(2 * slot as u64, true);
        }
    }
    Ok(n)
}

/// `(1…1)_4` with `m` ones.
pub fn target_for(m: usize) -> BigNat {
    let mut t = BigNat::zero();
    for j in 0..m {
        t.set_bit(2 * j as u64, true);
    }
    t
}

/// The encoded formula: per-variable encodings, the target, and the split
/// of the variables into `k1` row variables and `k2` column variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedFormula {
    enc: Vec<BigNat>,
    target: BigNat,
    k1: usize,
    k2: usize,
    m: usize,
}

impl EncodedFormula {
    /// Assembles an encoded formula from raw encodings without checking the
    /// digit invariants; for checker experiments.
    pub fn from_parts(enc: Vec<BigNat>, k1: usize, m: usize) -> Result<EncodedFormula> {
        if k1 > enc.len() {
            return Err(Error::out_of_range(
                "k1",
                format!("{k1} exceeds {} encodings", enc.len()),
            ));
        }
        Ok(EncodedFormula {
            k2: enc.len() - k1,
            enc,
            target: target_for(m),
            k1,
            m,
        })
    }

    pub fn encodings(&self) -> &[BigNat] {
        &self.enc
    }

    pub fn target(&self) -> &BigNat {
        &self.target
    }

    pub fn k1(&self) -> usize {
        self.k1
    }

    pub fn k2(&self) -> usize {
        self.k2
    }

    pub fn k(&self) -> usize {
        self.enc.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The rectangle covering the whole `2^k1 × 2^k2` matrix.
    pub fn full_rect(&self) -> Rect {
        let top = |bits: usize| (BigNat::one() << bits) - 1u32;
        Rect {
            lo: CellIndex::origin(),
            hi: CellIndex::new(top(self.k1), top(self.k2)),
        }
    }

    pub fn contains(&self, c: &CellIndex) -> bool {
        c.row.bits() as usize <= self.k1 && c.col.bits() as usize <= self.k2
    }
}

/// Encodes `f`, treating `z_1..z_k1` as row variables and the rest as
/// column variables.
pub fn encode_formula(f: &PosCnf, k1: usize) -> Result<EncodedFormula> {
    if k1 > f.num_vars() {
        return Err(Error::out_of_range(
            "k1",
            format!("{k1} exceeds {} variables", f.num_vars()),
        ));
    }
    let enc = f
        .vars()
        .map(|v| occurrence_encoding(f, v))
        .collect::<Result<Vec<_>>>()?;
    EncodedFormula::from_parts(enc, k1, f.num_clauses())
}

/// The inner product `σ·φ̂`.
pub fn assignment_value(sigma: &Assignment, ef: &EncodedFormula) -> Result<BigNat> {
    if sigma.len() != ef.k() {
        return Err(Error::LengthMismatch {
            expected: ef.k(),
            actual: sigma.len(),
        });
    }
    let mut sum = BigNat::zero();
    for (bit, e) in sigma.bits().iter().zip(&ef.enc) {
        if *bit {
            sum += e;
        }
    }
    Ok(sum)
}

/// One cell of the implicit matrix, 0-based. Bit `i−1` of `row` is `σ(z_i)`
/// and bit `i−1` of `col` is `σ(z_{k1+i})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub row: BigNat,
    pub col: BigNat,
}

impl CellIndex {
    pub fn new(row: impl Into<BigNat>, col: impl Into<BigNat>) -> CellIndex {
        CellIndex {
            row: row.into(),
            col: col.into(),
        }
    }

    pub fn origin() -> CellIndex {
        CellIndex::new(0u32, 0u32)
    }
}

/// Inclusive axis-aligned rectangle `lo..=hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub lo: CellIndex,
    pub hi: CellIndex,
}

impl Rect {
    pub fn new(lo: CellIndex, hi: CellIndex) -> Result<Rect> {
        if lo.row > hi.row || lo.col > hi.col {
            return Err(Error::out_of_range(
                "rectangle",
                format!(
                    "corners ({}, {})..({}, {}) are inverted",
                    lo.row, lo.col, hi.row, hi.col
                ),
            ));
        }
        Ok(Rect { lo, hi })
    }

    pub fn from_bounds(row: (u64, u64), col: (u64, u64)) -> Result<Rect> {
        Rect::new(CellIndex::new(row.0, col.0), CellIndex::new(row.1, col.1))
    }

    pub fn single(c: CellIndex) -> Rect {
        Rect {
            lo: c.clone(),
            hi: c,
        }
    }

    pub fn row_extent(&self) -> BigNat {
        &self.hi.row - &self.lo.row
    }

    pub fn col_extent(&self) -> BigNat {
        &self.hi.col - &self.lo.col
    }

    pub fn contains(&self, c: &CellIndex) -> bool {
        self.lo.row <= c.row && c.row <= self.hi.row && self.lo.col <= c.col && c.col <= self.hi.col
    }
}

fn check_cell(c: &CellIndex, k1: usize, k2: usize) -> Result<()> {
    if c.row.bits() as usize > k1 || c.col.bits() as usize > k2 {
        return Err(Error::out_of_range(
            "cell",
            format!("({}, {}) outside a 2^{k1} x 2^{k2} matrix", c.row, c.col),
        ));
    }
    Ok(())
}

/// Decodes a cell into the assignment it stands for.
pub fn index_to_assignment(c: &CellIndex, k1: usize, k2: usize) -> Result<Assignment> {
    check_cell(c, k1, k2)?;
    let mut bits = Vec::with_capacity(k1 + k2);
    bits.extend((0..k1 as u64).map(|b| c.row.bit(b)));
    bits.extend((0..k2 as u64).map(|b| c.col.bit(b)));
    Ok(Assignment::from_bits(bits))
}

/// Inverse of [`index_to_assignment`]: the first `k1` bits become the row,
/// the rest the column.
pub fn assignment_to_index(sigma: &Assignment, k1: usize) -> Result<CellIndex> {
    if sigma.len() < k1 {
        return Err(Error::LengthMismatch {
            expected: k1,
            actual: sigma.len(),
        });
    }
    let mut c = CellIndex::origin();
    for (i, &b) in sigma.bits().iter().enumerate() {
        if b {
            if i < k1 {
                c.row.set_bit(i as u64, true);
            } else {
                c.col.set_bit((i - k1) as u64, true);
            }
        }
    }
    Ok(c)
}

/// Value of the implicit matrix at `c`, without materializing anything.
pub fn matrix_value(c: &CellIndex, ef: &EncodedFormula) -> Result<BigNat> {
    check_cell(c, ef.k1, ef.k2)?;
    Ok(cell_value_unchecked(c, ef))
}

pub(crate) fn cell_value_unchecked(c: &CellIndex, ef: &EncodedFormula) -> BigNat {
    let mut sum = BigNat::zero();
    for b in 0..ef.k1 {
        if c.row.bit(b as u64) {
            sum += &ef.enc[b];
        }
    }
    for b in 0..ef.k2 {
        if c.col.bit(b as u64) {
            sum += &ef.enc[ef.k1 + b];
        }
    }
    sum
}

/// Serialization helper: decimal strings for big numbers in reports.
pub(crate) mod decimal {
    use super::BigNat;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigNat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigNat, D::Error> {
        let s = String::deserialize(d)?;
        BigNat::parse_bytes(s.as_bytes(), 10)
            .ok_or_else(|| serde::de::Error::custom(format!("not a decimal natural: {s:?}")))
    }
}

/// A cell rendered as a decimal pair, for reports and traces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellText {
    #[serde(with = "decimal")]
    pub row: BigNat,
    #[serde(with = "decimal")]
    pub col: BigNat,
}

impl From<&CellIndex> for CellText {
    fn from(c: &CellIndex) -> CellText {
        CellText {
            row: c.row.clone(),
            col: c.col.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::PosCnf;

    fn psi1() -> PosCnf {
        PosCnf::from_written(&[[1, 2, 3], [1, 2, 4]])
    }

    /// The expanded worked example, as displayed (C_8 first).
    fn psi1_expanded() -> PosCnf {
        PosCnf::from_written(&[
            [10, 9, 4],
            [10, 8, 3],
            [10, 4, 3],
            [4, 3, 2],
            [7, 6, 4],
            [7, 5, 3],
            [7, 4, 3],
            [4, 3, 1],
        ])
    }

    fn n(v: u64) -> BigNat {
        BigNat::from(v)
    }

    #[test]
    fn digits_examples() {
        assert_eq!(base4_digits(&n(5), 2).unwrap(), vec![1, 1]);
        assert_eq!(base4_digits(&n(0), 3).unwrap(), vec![0, 0, 0]);
        let d = base4_digits(&n(23387), 8).unwrap();
        assert_eq!(digits_to_string(&d), "11231123");
        assert!(base4_digits(&n(23387), 7).is_err());
    }

    #[test]
    fn zone_examples() {
        let z = base4_zone(&n(23387), 1, 4, 8).unwrap();
        assert_eq!(digits_to_string(&z), "1123");
        let full = base4_digits(&n(23387), 8).unwrap();
        for l in 1..=8 {
            assert_eq!(base4_zone(&n(23387), l, l, 8).unwrap(), vec![full[l - 1]]);
        }
        assert_eq!(base4_zone(&n(0), 2, 5, 6).unwrap(), vec![0; 4]);
        assert!(base4_zone(&n(1), 3, 2, 4).is_err());
        assert!(base4_zone(&n(1), 0, 2, 4).is_err());
        assert!(base4_zone(&n(1), 1, 5, 4).is_err());
    }

    #[test]
    fn occurrence_examples() {
        let f = psi1();
        assert_eq!(occurrence_encoding(&f, VarId::from_index(1)).unwrap(), n(5));
        assert_eq!(occurrence_encoding(&f, VarId::from_index(2)).unwrap(), n(5));
        assert_eq!(occurrence_encoding(&f, VarId::from_index(3)).unwrap(), n(4));
        assert_eq!(occurrence_encoding(&f, VarId::from_index(4)).unwrap(), n(1));
        assert!(occurrence_encoding(&f, VarId::from_index(5)).is_err());

        let g = psi1_expanded();
        assert_eq!(
            occurrence_encoding(&g, VarId::from_index(5)).unwrap(),
            n(16)
        );
        let z4 = occurrence_encoding(&g, VarId::from_index(4)).unwrap();
        assert_eq!(z4, n(17733));
        assert_eq!(digits_to_string(&base4_digits(&z4, 8).unwrap()), "10111011");
    }

    #[test]
    fn encode_examples() {
        let ef = encode_formula(&psi1_expanded(), 4).unwrap();
        assert_eq!((ef.k1(), ef.k2(), ef.m()), (4, 6, 8));
        assert_eq!(*ef.target(), n(21845));
        let small = encode_formula(&psi1(), 4).unwrap();
        assert_eq!(*small.target(), n(5));
        assert!(encode_formula(&psi1(), 5).is_err());
    }

    #[test]
    fn assignment_value_examples() {
        let ef = encode_formula(&psi1_expanded(), 4).unwrap();
        assert_eq!(
            assignment_value(&Assignment::all_false(10), &ef).unwrap(),
            n(0)
        );
        let s = Assignment::from_true_vars(10, [1, 2, 3, 4]);
        assert_eq!(assignment_value(&s, &ef).unwrap(), n(23387));
        let w = Assignment::from_true_vars(10, [4, 5, 8]);
        assert_eq!(assignment_value(&w, &ef).unwrap(), n(21845));
        assert!(assignment_value(&Assignment::all_false(9), &ef).is_err());
    }

    #[test]
    fn index_mapping_examples() {
        let a = index_to_assignment(&CellIndex::new(1u32, 0u32), 4, 6).unwrap();
        assert_eq!(a, Assignment::from_true_vars(10, [1]));
        let b = index_to_assignment(&CellIndex::new(0u32, 1u32), 4, 6).unwrap();
        assert_eq!(b, Assignment::from_true_vars(10, [5]));
        assert_eq!(
            index_to_assignment(&CellIndex::origin(), 4, 6).unwrap(),
            Assignment::all_false(10)
        );
        assert!(index_to_assignment(&CellIndex::new(16u32, 0u32), 4, 6).is_err());
        assert!(index_to_assignment(&CellIndex::new(0u32, 64u32), 4, 6).is_err());

        assert_eq!(
            assignment_to_index(&a, 4).unwrap(),
            CellIndex::new(1u32, 0u32)
        );
        assert_eq!(
            assignment_to_index(&Assignment::all_false(10), 4).unwrap(),
            CellIndex::origin()
        );
    }

    #[test]
    fn index_mapping_round_trip_exhaustive() {
        for bits in 0u32..1 << 10 {
            let sigma = Assignment::from_bits((0..10).map(|i| bits >> i & 1 == 1).collect());
            let c = assignment_to_index(&sigma, 4).unwrap();
            assert_eq!(c, CellIndex::new(bits & 15, bits >> 4));
            assert_eq!(index_to_assignment(&c, 4, 6).unwrap(), sigma);
        }
    }

    #[test]
    fn matrix_value_examples() {
        let ef = encode_formula(&psi1_expanded(), 4).unwrap();
        assert_eq!(
            matrix_value(&CellIndex::new(15u32, 0u32), &ef).unwrap(),
            n(23387)
        );
        assert_eq!(
            matrix_value(&CellIndex::new(0u32, 63u32), &ef).unwrap(),
            from_base4("22102210").unwrap()
        );
        assert_eq!(matrix_value(&CellIndex::origin(), &ef).unwrap(), n(0));
        assert!(matrix_value(&CellIndex::new(0u32, 64u32), &ef).is_err());
    }

    #[test]
    fn full_rect_bounds() {
        let ef = encode_formula(&psi1_expanded(), 4).unwrap();
        let r = ef.full_rect();
        assert_eq!(r.hi, CellIndex::new(15u32, 63u32));
        assert!(Rect::from_bounds((2, 1), (0, 0)).is_err());
    }
}
