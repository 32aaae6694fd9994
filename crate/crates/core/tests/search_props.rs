use num_bigint::BigUint;
use one3probe::cli::dump::read_trace_csv;
use one3probe::encoding::{assignment_value, index_to_assignment};
use one3probe::formula::{enumerate_small, generate_random, parse_pos3cnf, DEFAULT_CLAUSE_CAP};
use one3probe::oracle::{
    all_one_in_three, brute_force_one_in_three, check_sortedness, materialize, MaterializedMatrix,
};
use one3probe::preprocess::expand;
use one3probe::search::{solve, two_dib_search_traced, Branch, TraceRow};
use one3probe::{PosCnf, RDecode, SearchConfig, SearchMode};

fn psi1() -> PosCnf {
    PosCnf::from_written(&[[1, 2, 3], [1, 2, 4]])
}

fn corpus() -> Vec<PosCnf> {
    enumerate_small(4, DEFAULT_CLAUSE_CAP).unwrap().collect()
}

fn small(n: &BigUint) -> usize {
    n.to_u64_digits().first().copied().unwrap_or(0) as usize
}

#[test]
fn faithful_trace_matches_golden_file() {
    let e = expand(&psi1()).unwrap();
    let cfg = SearchConfig::new(SearchMode::Faithful, RDecode::FConsistent);
    let (res, rows) = two_dib_search_traced(&e.ef, &e.search_rect(), cfg).unwrap();
    let golden = read_trace_csv(&include_bytes!("golden/psi1_faithful_trace.csv")[..]).unwrap();
    assert_eq!(rows, golden);
    // the first probe is the midpoint of the whole 16 x 64 matrix
    assert_eq!(
        (small(&golden[0].hi_row), small(&golden[0].hi_col)),
        (15, 63)
    );
    assert_eq!(golden[0].r, Some(BigUint::from(7u32 + 31 * 16)));
    assert!(res.found && res.witness.is_none());
}

#[test]
fn repaired_witnesses_are_sound() {
    for psi in corpus() {
        for d in [RDecode::FConsistent, RDecode::PaperLiteral] {
            let out = solve(&psi, SearchConfig::new(SearchMode::Repaired, d)).unwrap();
            if let Some(w) = &out.result.witness {
                assert_eq!(
                    &assignment_value(w, &out.expansion.ef).unwrap(),
                    out.expansion.ef.target()
                );
                assert!(w.is_one_in_three(&out.expansion.phi));
                assert!(out.original_witness.as_ref().unwrap().is_one_in_three(&psi));
            }
            assert_eq!(out.result.found, out.result.witness.is_some());
        }
    }
}

#[test]
fn depth_and_call_bounds() {
    let mut instances = corpus();
    instances.extend((0..20).map(|s| generate_random(7, 5, s).unwrap()));
    for psi in instances {
        let e = expand(&psi).unwrap();
        let k = (e.k1 + e.k2) as u64;
        for (m, d) in one3probe::search::all_variants() {
            let (res, rows) =
                two_dib_search_traced(&e.ef, &e.search_rect(), SearchConfig::new(m, d)).unwrap();
            assert!(!res.stats.budget_exhausted);
            assert!(res.stats.max_depth <= k + 2);
            assert!((res.stats.calls as f64) <= 3f64.powi(k as i32 + 2));
            assert_eq!(rows.len() as u64, res.stats.calls);
            for w in rows.windows(2) {
                let parent_extent =
                    |t: &TraceRow| (&t.hi_row - &t.lo_row) + (&t.hi_col - &t.lo_col);
                if w[1].depth == w[0].depth + 1 {
                    assert!(parent_extent(&w[1]) < parent_extent(&w[0]));
                }
            }
        }
    }
}

/// Cells of `t`'s rectangle the call did not recurse into, and whether every
/// one of them is comparable with the midpoint.
fn excluded(t: &TraceRow) -> (Vec<(usize, usize)>, bool) {
    let (r0, c0, r1, c1) = (
        small(&t.lo_row),
        small(&t.lo_col),
        small(&t.hi_row),
        small(&t.hi_col),
    );
    let (mr, mc) = ((r0 + r1) / 2, (c0 + c1) / 2);
    let (keep, dominated): (Box<dyn Fn(usize, usize) -> bool>, bool) = match t.branch {
        Branch::LessSplitBoth => (Box::new(move |r, c| r > mr && c > mc), true),
        Branch::LessHalveCols => (Box::new(move |_, c| c > mc), r0 == r1),
        Branch::LessHalveRows => (Box::new(move |r, _| r > mr), c0 == c1),
        Branch::GreaterSplitBoth => (Box::new(move |r, c| r <= mr && c <= mc), true),
        Branch::GreaterHalveCols => (Box::new(move |_, c| c <= mc), r0 == r1),
        Branch::GreaterHalveRows => (Box::new(move |r, _| r <= mr), c0 == c1),
        _ => return (Vec::new(), true),
    };
    let mut out = Vec::new();
    for r in r0..=r1 {
        for c in c0..=c1 {
            if keep(r, c) {
                out.push((r, c));
            }
        }
    }
    (out, dominated)
}

fn window(mm: &MaterializedMatrix, t: &TraceRow) -> MaterializedMatrix {
    let (r0, c0) = (small(&t.lo_row), small(&t.lo_col));
    mm.window(r0, c0, small(&t.hi_row) - r0 + 1, small(&t.hi_col) - c0 + 1)
}

type Pruned = Vec<(u64, (usize, usize))>;

/// Pruned target cells from sorted windows, split by whether the prune was
/// dominated by the midpoint.
fn pruned_targets(psi: &PosCnf) -> (usize, Pruned, Pruned) {
    let e = expand(psi).unwrap();
    let mm = materialize(&e.ef).unwrap();
    let t = e.ef.target();
    let cfg = SearchConfig::new(SearchMode::Repaired, RDecode::FConsistent);
    let (_, rows) = two_dib_search_traced(&e.ef, &e.search_rect(), cfg).unwrap();
    let (mut checked, mut sound, mut strip) = (0, Vec::new(), Vec::new());
    for row in &rows {
        let (ex, dominated) = excluded(row);
        if ex.is_empty() || !check_sortedness(&window(&mm, row), false).holds {
            continue;
        }
        checked += 1;
        for cell in ex.into_iter().filter(|&(r, c)| mm.get(r, c) == t) {
            if dominated {
                sound.push((row.call, cell))
            } else {
                strip.push((row.call, cell))
            }
        }
    }
    (checked, sound, strip)
}

#[test]
fn dominated_prunes_hold_no_target_where_sorted() {
    let mut instances: Vec<PosCnf> = corpus();
    instances.extend((0..30).map(|s| generate_random(5, 3, s).unwrap()));
    let mut checked = 0;
    for psi in instances {
        if psi.num_vars() + 3 * psi.num_clauses() > 14 {
            continue;
        }
        let (n, sound, _) = pruned_targets(&psi);
        checked += n;
        assert!(sound.is_empty(), "{psi}: {sound:?}");
    }
    assert!(checked > 1000);
}

#[test]
fn two_line_strip_halving_drops_target_in_sorted_window() {
    let psi = parse_pos3cnf("p p3cnf 5 3\n1 4 3\n2 5 1\n3 4 5\n").unwrap();
    let (_, sound, strip) = pruned_targets(&psi);
    assert!(sound.is_empty());
    assert!(strip.contains(&(104, (9, 161))), "{strip:?}");
    let e = expand(&psi).unwrap();
    let out = solve(&psi, SearchConfig::default()).unwrap();
    assert!(brute_force_one_in_three(&e.phi).unwrap().is_some());
    assert!(!out.result.found);
}

#[test]
fn faithful_misses_target_alone_in_a_base_rectangle() {
    let mut pinned = 0;
    for psi in enumerate_small(5, 4).unwrap() {
        let e = expand(&psi).unwrap();
        if e.phi.num_vars() > 17 {
            continue;
        }
        let witnesses = all_one_in_three(&e.phi).unwrap();
        if witnesses.len() != 1 {
            continue;
        }
        let mm = materialize(&e.ef).unwrap();
        let hits: Vec<(usize, usize)> = (0..mm.rows())
            .flat_map(|r| (0..mm.cols()).map(move |c| (r, c)))
            .filter(|&(r, c)| mm.get(r, c) == e.ef.target())
            .collect();
        assert_eq!(hits.len(), 1);
        let (tr, tc) = hits[0];
        let cell = one3probe::CellIndex::new(tr as u64, tc as u64);
        assert_eq!(
            index_to_assignment(&cell, e.k1, e.k2).unwrap(),
            witnesses[0]
        );

        let cfg = SearchConfig::new(SearchMode::Faithful, RDecode::FConsistent);
        let (res, rows) = two_dib_search_traced(&e.ef, &e.search_rect(), cfg).unwrap();
        let base = rows
            .iter()
            .find(|t| t.branch == Branch::Base && t.rect().contains(&cell));
        if let Some(b) = base {
            assert!(!res.found, "{psi}");
            assert_eq!(b.cells, 0);
            assert_eq!(
                res.stats.cells_evaluated,
                rows.iter().map(|t| t.cells).sum::<u64>()
            );
            let repaired =
                two_dib_search_traced(&e.ef, &e.search_rect(), SearchConfig::default()).unwrap();
            assert!(repaired.0.found, "{psi}");
            pinned += 1;
        }
    }
    assert!(pinned > 0);
}
