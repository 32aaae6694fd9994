//! Ground truth: exhaustive 1-in-3 solving, dense matrix materialization, and
//! checkers for the sortedness, dominance, and equivalence properties the
//! search relies on. Nothing here is clever; everything is enumeration.

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{decimal, BigNat, EncodedFormula};
use crate::error::{Error, Result};
use crate::formula::{Assignment, PosCnf};
use crate::preprocess::expand;

/// Largest variable count the assignment enumerators accept by default.
pub const ORACLE_MAX_VARS: usize = 24;
/// Largest `k1 + k2` [`materialize`] accepts by default (2^20 cells).
pub const MATERIALIZE_MAX_BITS: usize = 20;
/// Hard ceiling for explicit guard overrides.
const ENUMERATION_CEILING: usize = 40;

/// Outcome of a checker. `first_violation` is present iff `holds` is false.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub first_violation: Option<ViolationDetail>,
}

impl Verdict {
    pub fn pass() -> Verdict {
        Verdict {
            holds: true,
            first_violation: None,
        }
    }

    pub fn fail(v: ViolationDetail) -> Verdict {
        Verdict {
            holds: false,
            first_violation: Some(v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarFamily {
    /// `z_1..z_k1`, which index rows.
    Original,
    /// `z_{k1+1}..z_k`, which index columns.
    Auxiliary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationDetail {
    /// `cell` is not above `neighbor`, its predecessor along one axis.
    Sortedness {
        cell: (usize, usize),
        neighbor: (usize, usize),
        #[serde(with = "decimal")]
        value: BigNat,
        #[serde(with = "decimal")]
        neighbor_value: BigNat,
    },
    /// Encoding of `z_index` does not exceed the sum of the lower encodings
    /// in its family.
    Dominance {
        family: VarFamily,
        index: usize,
        #[serde(with = "decimal")]
        encoding: BigNat,
        #[serde(with = "decimal")]
        lower_sum: BigNat,
    },
    Equivalence {
        input_satisfiable: bool,
        expanded_satisfiable: bool,
    },
}

fn guard(what: &'static str, actual: usize, limit: usize) -> Result<()> {
    if actual > limit {
        return Err(Error::GuardExceeded {
            what,
            actual,
            limit,
        });
    }
    Ok(())
}

/// Lexicographically smallest 1-in-3 witness, ordering assignments by the
/// integer `Σ σ(z_i)·2^{i−1}` (so `z_1` is the least significant position).
pub fn brute_force_one_in_three(f: &PosCnf) -> Result<Option<Assignment>> {
    brute_force_one_in_three_with_limit(f, ORACLE_MAX_VARS)
}

pub fn brute_force_one_in_three_with_limit(
    f: &PosCnf,
    max_vars: usize,
) -> Result<Option<Assignment>> {
    let k = f.num_vars();
    guard(
        "oracle variable count",
        k,
        max_vars.min(ENUMERATION_CEILING),
    )?;
    let masks: Vec<u64> = f
        .clauses()
        .iter()
        .map(|c| c.literals().iter().fold(0u64, |m, v| m | 1 << v.slot()))
        .collect();
    let total: u64 = 1 << k;
    // Split the space into chunks; the first chunk holding a witness wins,
    // and each chunk scans upward, so the minimum is preserved.
    let chunk = (total / 256).max(1 << 12);
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
    let found = starts.par_iter().find_map_first(|&start| {
        let end = (start + chunk).min(total);
        (start..end).find(|&sigma| masks.iter().all(|&m| (sigma & m).count_ones() == 1))
    });
    Ok(found.map(|sigma| Assignment::from_bits((0..k).map(|i| sigma >> i & 1 == 1).collect())))
}

/// Dense `2^k1 × 2^k2` matrix of `σ·φ̂` values in cell layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaterializedMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<BigNat>,
}

impl MaterializedMatrix {
    /// Row-major cells.
    pub fn from_rows(rows: Vec<Vec<BigNat>>) -> MaterializedMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        MaterializedMatrix {
            rows: r,
            cols: c,
            cells: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &BigNat {
        &self.cells[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[BigNat] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    /// The `rows × cols` block whose top-left cell is `(r0, c0)`.
    pub fn window(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> MaterializedMatrix {
        let rows_v = (r0..r0 + rows)
            .map(|r| self.row(r)[c0..c0 + cols].to_vec())
            .collect();
        MaterializedMatrix::from_rows(rows_v)
    }
}

/// Subset sums of `encs`, indexed by bitmask.
fn subset_sums(encs: &[BigNat]) -> Vec<BigNat> {
    let mut sums = vec![BigNat::zero(); 1 << encs.len()];
    for mask in 1usize..sums.len() {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = &sums[mask & (mask - 1)] + &encs[low];
    }
    sums
}

pub fn materialize(ef: &EncodedFormula) -> Result<MaterializedMatrix> {
    materialize_with_limit(ef, MATERIALIZE_MAX_BITS)
}

pub fn materialize_with_limit(ef: &EncodedFormula, max_bits: usize) -> Result<MaterializedMatrix> {
    guard("matrix size (k1 + k2)", ef.k1() + ef.k2(), max_bits.min(30))?;
    let (k1, k2) = (ef.k1(), ef.k2());
    let row_vals = subset_sums(&ef.encodings()[..k1]);
    let col_vals = subset_sums(&ef.encodings()[k1..]);
    let cells = row_vals
        .iter()
        .flat_map(|rv| col_vals.iter().map(move |cv| rv + cv))
        .collect();
    Ok(MaterializedMatrix {
        rows: 1 << k1,
        cols: 1 << k2,
        cells,
    })
}

/// Every row and column ascending (strictly if `strict`). Cells are scanned
/// row-major; at each cell the predecessor along the row index is compared
/// first, then the predecessor along the column index.
pub fn check_sortedness(mm: &MaterializedMatrix, strict: bool) -> Verdict {
    let ok = |prev: &BigNat, cur: &BigNat| if strict { prev < cur } else { prev <= cur };
    for x in 0..mm.rows {
        for y in 0..mm.cols {
            let cur = mm.get(x, y);
            let preds = [(x > 0).then(|| (x - 1, y)), (y > 0).then(|| (x, y - 1))];
            for (px, py) in preds.into_iter().flatten() {
                let prev = mm.get(px, py);
                if !ok(prev, cur) {
                    return Verdict::fail(ViolationDetail::Sortedness {
                        cell: (x, y),
                        neighbor: (px, py),
                        value: cur.clone(),
                        neighbor_value: prev.clone(),
                    });
                }
            }
        }
    }
    Verdict::pass()
}

/// The input is 1-in-3-satisfiable iff its expansion is.
pub fn check_equivalence(psi: &PosCnf) -> Result<Verdict> {
    let e = expand(psi)?;
    guard("oracle variable count", e.phi.num_vars(), ORACLE_MAX_VARS)?;
    let a = brute_force_one_in_three(psi)?.is_some();
    let b = brute_force_one_in_three(&e.phi)?.is_some();
    Ok(if a == b {
        Verdict::pass()
    } else {
        Verdict::fail(ViolationDetail::Equivalence {
            input_satisfiable: a,
            expanded_satisfiable: b,
        })
    })
}

/// Each encoding exceeds the sum of all lower encodings of its family:
/// for row variables `l ∈ [2, k1]` against `z_1..z_{l−1}`, and for column
/// variables `λ ∈ [k1+2, k]` against `z_{k1+1}..z_{λ−1}`.
pub fn check_dominance(ef: &EncodedFormula) -> Verdict {
    let encs = ef.encodings();
    let k1 = ef.k1();
    for (family, range) in [
        (VarFamily::Original, 0..k1),
        (VarFamily::Auxiliary, k1..encs.len()),
    ] {
        let mut lower = BigNat::zero();
        for slot in range.clone() {
            if slot > range.start && encs[slot] <= lower {
                return Verdict::fail(ViolationDetail::Dominance {
                    family,
                    index: slot + 1,
                    encoding: encs[slot].clone(),
                    lower_sum: lower,
                });
            }
            lower += &encs[slot];
        }
    }
    Verdict::pass()
}

/// Smallest assignment (same order as [`brute_force_one_in_three`]) with
/// `σ·φ̂ = t`, found by enumerating every assignment's value.
pub fn target_membership(ef: &EncodedFormula) -> Result<Option<Assignment>> {
    target_membership_with_limit(ef, ORACLE_MAX_VARS)
}

pub fn target_membership_with_limit(
    ef: &EncodedFormula,
    max_vars: usize,
) -> Result<Option<Assignment>> {
    let k = ef.k();
    guard(
        "oracle variable count",
        k,
        max_vars.min(ENUMERATION_CEILING),
    )?;
    // σ = hi·2^low_bits + lo; value(σ) = low[lo] + high[hi].
    let low_bits = k / 2;
    let low = subset_sums(&ef.encodings()[..low_bits]);
    let high = subset_sums(&ef.encodings()[low_bits..]);
    let t = ef.target();
    let found = (0..high.len()).into_par_iter().find_map_first(|h| {
        let hv = &high[h];
        (0..low.len())
            .find(|&l| &(hv + &low[l]) == t)
            .map(|l| (h << low_bits) | l)
    });
    Ok(found.map(|sigma| Assignment::from_bits((0..k).map(|i| sigma >> i & 1 == 1).collect())))
}

/// All 1-in-3 witnesses, in increasing order; for small formulas.
pub fn all_one_in_three(f: &PosCnf) -> Result<Vec<Assignment>> {
    let k = f.num_vars();
    guard("oracle variable count", k, ORACLE_MAX_VARS)?;
    Ok((0u64..1 << k)
        .map(|sigma| Assignment::from_bits((0..k).map(|i| sigma >> i & 1 == 1).collect()))
        .filter(|a| a.is_one_in_three(f))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{encode_formula, from_base4, matrix_value, CellIndex};
    use crate::preprocess::preprocess;

    fn psi1() -> PosCnf {
        PosCnf::from_written(&[[1, 2, 3], [1, 2, 4]])
    }

    fn all_triples_4() -> PosCnf {
        PosCnf::from_written(&[[2, 3, 4], [1, 3, 4], [1, 2, 4], [1, 2, 3]])
    }

    fn n(v: u64) -> BigNat {
        BigNat::from(v)
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(
            brute_force_one_in_three(&psi1()).unwrap(),
            Some(Assignment::from_true_vars(4, [1]))
        );
        assert_eq!(brute_force_one_in_three(&all_triples_4()).unwrap(), None);
        let disjoint = PosCnf::from_written(&[[1, 2, 3], [4, 5, 6]]);
        let w = brute_force_one_in_three(&disjoint).unwrap().unwrap();
        assert_eq!(w, Assignment::from_true_vars(6, [1, 4]));
    }

    #[test]
    fn brute_force_guard() {
        let big = crate::formula::generate_random(25, 9, 1).unwrap();
        assert!(matches!(
            brute_force_one_in_three(&big),
            Err(Error::GuardExceeded { .. })
        ));
    }

    #[test]
    fn brute_force_is_minimal() {
        for f in crate::formula::enumerate_small(5, 3).unwrap() {
            let all = all_one_in_three(&f).unwrap();
            assert_eq!(brute_force_one_in_three(&f).unwrap(), all.first().cloned());
        }
    }

    #[test]
    fn materialize_psi1() {
        let ef = preprocess(&psi1()).unwrap().ef;
        let mm = materialize(&ef).unwrap();
        assert_eq!((mm.rows(), mm.cols()), (16, 64));
        assert_eq!(*mm.get(0, 0), n(0));
        assert_eq!(*mm.get(15, 63), from_base4("33333333").unwrap());
        let prefixes = ["00000001", "00010001", "01120112", "11231123"];
        for (i, p) in prefixes.iter().enumerate() {
            assert_eq!(*mm.get((1 << (i + 1)) - 1, 0), from_base4(p).unwrap());
        }
        for x in 0..16 {
            for y in 0..64 {
                let c = CellIndex::new(x as u32, y as u32);
                assert_eq!(*mm.get(x, y), matrix_value(&c, &ef).unwrap());
            }
        }
    }

    #[test]
    fn materialize_guard() {
        let f = crate::formula::generate_random(6, 5, 3).unwrap();
        let ef = preprocess(&f).unwrap().ef;
        assert!(matches!(materialize(&ef), Err(Error::GuardExceeded { .. })));
        let small = preprocess(&psi1()).unwrap().ef;
        assert!(materialize_with_limit(&small, 9).is_err());
        assert!(materialize_with_limit(&small, 10).is_ok());
    }

    #[test]
    fn sortedness_small_cases() {
        let one = MaterializedMatrix::from_rows(vec![vec![n(7)]]);
        assert!(check_sortedness(&one, true).holds);
        let m = MaterializedMatrix::from_rows(vec![vec![n(0), n(2)], vec![n(1), n(1)]]);
        let v = check_sortedness(&m, false);
        assert!(!v.holds);
        match v.first_violation.unwrap() {
            ViolationDetail::Sortedness { cell, neighbor, .. } => {
                assert_eq!(cell, (1, 1));
                assert_eq!(neighbor, (0, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        let eq = MaterializedMatrix::from_rows(vec![vec![n(1), n(1)]]);
        assert!(check_sortedness(&eq, false).holds);
        assert!(!check_sortedness(&eq, true).holds);
    }

    #[test]
    fn psi1_matrix_sortedness_recorded() {
        let ef = preprocess(&psi1()).unwrap().ef;
        let mm = materialize(&ef).unwrap();
        // Dominance holds on this instance, which forces strict sortedness.
        assert!(check_dominance(&ef).holds);
        assert!(check_sortedness(&mm, true).holds);
        assert!(check_sortedness(&mm, false).holds);
    }

    #[test]
    fn dominance_examples() {
        let ef = EncodedFormula::from_parts(vec![n(1), n(4), n(16)], 3, 3).unwrap();
        assert!(check_dominance(&ef).holds);
        let ef = EncodedFormula::from_parts(vec![n(1), n(1)], 2, 1).unwrap();
        let v = check_dominance(&ef);
        assert!(!v.holds);
        assert!(matches!(
            v.first_violation,
            Some(ViolationDetail::Dominance {
                index: 2,
                family: VarFamily::Original,
                ..
            })
        ));
        // column family is checked independently of the rows
        let ef = EncodedFormula::from_parts(vec![n(1), n(4), n(16), n(16)], 2, 3).unwrap();
        assert!(matches!(
            check_dominance(&ef).first_violation,
            Some(ViolationDetail::Dominance {
                index: 4,
                family: VarFamily::Auxiliary,
                ..
            })
        ));
    }

    #[test]
    fn equivalence_examples() {
        assert!(check_equivalence(&psi1()).unwrap().holds);
        assert!(check_equivalence(&all_triples_4()).unwrap().holds);
    }

    #[test]
    fn target_membership_examples() {
        let e = preprocess(&psi1()).unwrap();
        let w = target_membership(&e.ef).unwrap().unwrap();
        assert_eq!(Some(w.clone()), brute_force_one_in_three(&e.phi).unwrap());
        assert!(w.is_one_in_three(&e.phi));
        let e = preprocess(&all_triples_4()).unwrap();
        assert_eq!(target_membership(&e.ef).unwrap(), None);
    }

    #[test]
    fn target_membership_raw_encoding() {
        let ef = encode_formula(&psi1(), 2).unwrap();
        assert_eq!(
            target_membership(&ef).unwrap(),
            brute_force_one_in_three(&psi1()).unwrap()
        );
    }
}
