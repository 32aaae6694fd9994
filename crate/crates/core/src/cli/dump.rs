//! CSV artifacts for matrices and search traces.

use std::io::{Read, Write};

use crate::encoding::BigNat;
use crate::error::{Error, Result};
use crate::oracle::MaterializedMatrix;
use crate::search::{Branch, TraceRow};

use super::SCHEMA_VERSION;

/// Header `schema_version,row,c0,c1,…`, then one line per matrix row.
pub fn write_matrix_csv<W: Write>(mm: &MaterializedMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["schema_version".to_string(), "row".to_string()];
    header.extend((0..mm.cols()).map(|c| format!("c{c}")));
    w.write_record(&header)?;
    for r in 0..mm.rows() {
        let mut rec = vec![SCHEMA_VERSION.to_string(), r.to_string()];
        rec.extend(mm.row(r).iter().map(|v| v.to_str_radix(10)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(input: R) -> Result<MaterializedMatrix> {
    let mut rd = csv::Reader::from_reader(input);
    let cols = rd.headers()?.len().saturating_sub(2);
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::out_of_range("matrix csv", format!("row {i}: {what}"));
        if rec.get(0) != Some(SCHEMA_VERSION.to_string().as_str()) {
            return Err(bad("unsupported schema_version"));
        }
        if rec.get(1) != Some(i.to_string().as_str()) || rec.len() != cols + 2 {
            return Err(bad("malformed row"));
        }
        let vals = rec
            .iter()
            .skip(2)
            .map(|s| BigNat::parse_bytes(s.as_bytes(), 10).ok_or_else(|| bad("non-decimal cell")))
            .collect::<Result<Vec<_>>>()?;
        rows.push(vals);
    }
    Ok(MaterializedMatrix::from_rows(rows))
}

/// One line per search call, in call order.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "schema_version",
        "call",
        "depth",
        "lo_row",
        "lo_col",
        "hi_row",
        "hi_col",
        "r",
        "s",
        "branch",
        "cells",
    ])?;
    for t in rows {
        let opt = |n: &Option<BigNat>| n.as_ref().map(|v| v.to_str_radix(10)).unwrap_or_default();
        w.write_record([
            SCHEMA_VERSION.to_string(),
            t.call.to_string(),
            t.depth.to_string(),
            t.lo_row.to_str_radix(10),
            t.lo_col.to_str_radix(10),
            t.hi_row.to_str_radix(10),
            t.hi_col.to_str_radix(10),
            opt(&t.r),
            opt(&t.s),
            branch_name(t.branch).to_string(),
            t.cells.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Base => "base",
        Branch::BaseFound => "base_found",
        Branch::Found => "found",
        Branch::LessSplitBoth => "less_split_both",
        Branch::LessHalveCols => "less_halve_cols",
        Branch::LessHalveRows => "less_halve_rows",
        Branch::GreaterSplitBoth => "greater_split_both",
        Branch::GreaterHalveCols => "greater_halve_cols",
        Branch::GreaterHalveRows => "greater_halve_rows",
        Branch::Budget => "budget",
    }
}

const BRANCHES: [Branch; 10] = [
    Branch::Base,
    Branch::BaseFound,
    Branch::Found,
    Branch::LessSplitBoth,
    Branch::LessHalveCols,
    Branch::LessHalveRows,
    Branch::GreaterSplitBoth,
    Branch::GreaterHalveCols,
    Branch::GreaterHalveRows,
    Branch::Budget,
];

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::out_of_range("trace csv", format!("row {i}: {what}"));
        if rec.len() != 11 {
            return Err(bad("expected 11 fields"));
        }
        if rec[0] != SCHEMA_VERSION.to_string() {
            return Err(bad("unsupported schema_version"));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|_| bad("not an integer"));
        let big = |s: &str| {
            BigNat::parse_bytes(s.as_bytes(), 10).ok_or_else(|| bad("not a decimal natural"))
        };
        let opt = |s: &str| {
            if s.is_empty() {
                Ok(None)
            } else {
                big(s).map(Some)
            }
        };
        let branch = BRANCHES
            .into_iter()
            .find(|b| branch_name(*b) == &rec[9])
            .ok_or_else(|| bad("unknown branch"))?;
        out.push(TraceRow {
            call: int(&rec[1])?,
            depth: int(&rec[2])?,
            lo_row: big(&rec[3])?,
            lo_col: big(&rec[4])?,
            hi_row: big(&rec[5])?,
            hi_col: big(&rec[6])?,
            r: opt(&rec[7])?,
            s: opt(&rec[8])?,
            branch,
            cells: int(&rec[10])?,
        });
    }
    Ok(out)
}
