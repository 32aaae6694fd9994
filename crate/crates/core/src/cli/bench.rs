//! Recursion-growth measurement: repaired search on random instances across a
//! range of `k1`, with least-squares fits of `ln(calls)`.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::generate_random;
use crate::search::{solve, RDecode, SearchConfig, SearchMode};

use super::SCHEMA_VERSION;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub schema_version: u32,
    pub k1: usize,
    pub k2: usize,
    pub m1: usize,
    pub trial: usize,
    pub seed: u64,
    pub calls: u64,
    pub max_depth: u64,
    pub cells_evaluated: u64,
    pub budget_exhausted: bool,
    pub found: bool,
    pub wall_time_ms: f64,
    pub mode: SearchMode,
    pub r_decode: RDecode,
}

impl BenchRecord {
    /// Equality ignoring `wall_time_ms`.
    pub fn same_run(&self, other: &BenchRecord) -> bool {
        BenchRecord {
            wall_time_ms: 0.0,
            ..self.clone()
        } == BenchRecord {
            wall_time_ms: 0.0,
            ..other.clone()
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub k1_min: usize,
    pub k1_max: usize,
    pub trials: usize,
    /// Clause count per instance; `None` means `m1 = k1`.
    pub m1: Option<usize>,
    pub seed: u64,
    pub config: SearchConfig,
}

/// Seed of trial `trial` at `k1`.
pub fn run_seed(seed: u64, k1: usize, trial: usize) -> u64 {
    seed.wrapping_add(((k1 as u64) << 32) | trial as u64)
}

pub fn run_bench(opts: &BenchOptions) -> Result<Vec<BenchRecord>> {
    if opts.k1_min > opts.k1_max {
        return Err(Error::Config(format!(
            "empty k1 range {}..={}",
            opts.k1_min, opts.k1_max
        )));
    }
    opts.config.validate()?;
    let jobs: Vec<(usize, usize)> = (opts.k1_min..=opts.k1_max)
        .flat_map(|k1| (0..opts.trials).map(move |t| (k1, t)))
        .collect();
    jobs.par_iter()
        .map(|&(k1, trial)| {
            let m1 = opts.m1.unwrap_or(k1);
            let seed = run_seed(opts.seed, k1, trial);
            let psi = generate_random(k1, m1, seed)?;
            let start = Instant::now();
            let out = solve(&psi, opts.config)?;
            let wall = start.elapsed();
            let st = out.result.stats;
            Ok(BenchRecord {
                schema_version: SCHEMA_VERSION,
                k1,
                k2: out.expansion.k2,
                m1,
                trial,
                seed,
                calls: st.calls,
                max_depth: st.max_depth,
                cells_evaluated: st.cells_evaluated,
                budget_exhausted: st.budget_exhausted,
                found: out.result.found,
                wall_time_ms: wall.as_secs_f64() * 1e3,
                mode: opts.config.mode,
                r_decode: opts.config.r_decode,
            })
        })
        .collect()
}

pub fn write_bench_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bench_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let recs = rd
        .deserialize()
        .collect::<std::result::Result<Vec<BenchRecord>, _>>()?;
    if recs.iter().any(|r| r.schema_version != SCHEMA_VERSION) {
        return Err(Error::out_of_range(
            "bench csv",
            "unsupported schema_version",
        ));
    }
    Ok(recs)
}

/// `y ≈ intercept + slope·x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `y − ŷ`, in record order.
    pub residuals: Vec<f64>,
}

/// Ordinary least squares. `None` with fewer than two distinct `x` values.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len() as f64;
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
        residuals,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub schema_version: u32,
    pub records: usize,
    pub budget_exhausted: usize,
    /// Median calls per `k1`.
    pub median_calls: BTreeMap<usize, f64>,
    /// Whether the medians never decrease as `k1` grows; observed, not required.
    pub median_monotone: bool,
    /// `ln(calls)` against `k1`: a straight line here means exponential growth.
    pub exponential_fit: Option<LinearFit>,
    /// `ln(calls)` against `ln(k1)`: a straight line here means polynomial growth.
    pub polynomial_fit: Option<LinearFit>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn summarize(records: &[BenchRecord]) -> BenchSummary {
    let mut by_k1: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records {
        by_k1.entry(r.k1).or_default().push(r.calls as f64);
    }
    let median_calls: BTreeMap<usize, f64> =
        by_k1.into_iter().map(|(k, v)| (k, median(v))).collect();
    let meds: Vec<f64> = median_calls.values().copied().collect();
    let ys: Vec<f64> = records.iter().map(|r| (r.calls as f64).ln()).collect();
    let lin: Vec<f64> = records.iter().map(|r| r.k1 as f64).collect();
    let log: Vec<f64> = lin.iter().map(|x| x.ln()).collect();
    BenchSummary {
        schema_version: SCHEMA_VERSION,
        records: records.len(),
        budget_exhausted: records.iter().filter(|r| r.budget_exhausted).count(),
        median_monotone: meds.windows(2).all(|w| w[0] <= w[1]),
        median_calls,
        exponential_fit: least_squares(&lin, &ys),
        polynomial_fit: least_squares(&log, &ys),
    }
}
