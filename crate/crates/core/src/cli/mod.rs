//! The `one3probe` command line.
//!
//! Exit codes: [`EXIT_OK`] (found, satisfiable, reproduced, or plain
//! success), [`EXIT_NOT_FOUND`], [`EXIT_ERROR`], [`EXIT_BUDGET`].

pub mod bench;
pub mod config;
pub mod corpus;
pub mod diff;
pub mod dump;
pub mod lemmas;

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::encoding::{encode_formula, CellText};
use crate::error::{Error, Result};
use crate::formula::{parse_pos3cnf, Assignment, PosCnf, DEFAULT_CLAUSE_CAP};
use crate::oracle::{
    brute_force_one_in_three_with_limit, materialize, target_membership_with_limit, ORACLE_MAX_VARS,
};
use crate::preprocess::expand;
use crate::search::{
    all_variants, solve, two_dib_search_traced, RDecode, SearchConfig, SearchMode,
};

use config::{FileConfig, FlagValues, Settings};

/// Version stamped into every report, record and CSV row.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_FOUND: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Explicit guard ceiling for `oracle --allow-large`.
const LARGE_ORACLE_VARS: usize = 40;

#[derive(Debug, Parser)]
#[command(
    name = "one3probe",
    version,
    about = "Probe a divide-and-conquer decision procedure for positive 1-in-3 SAT against brute force",
    after_help = "Exit codes: 0 found / success, 1 not found, 2 error, 3 search budget exhausted."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    #[arg(long, global = true, value_enum)]
    pub mode: Option<SearchMode>,
    #[arg(long, global = true, value_enum)]
    pub r_decode: Option<RDecode>,
    /// Maximum number of search calls [default: 10000000]
    #[arg(long, global = true)]
    pub call_budget: Option<u64>,
    /// Maximum recursion depth [default: 4·(k1 + k2)]
    #[arg(long, global = true)]
    pub depth_budget: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Counterexample corpus directory [env: ONE3PROBE_CORPUS]
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Emit machine-readable JSON
    #[arg(long, global = true)]
    pub json: bool,
    /// TOML file with defaults for the flags above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand, encode and search a formula
    Solve {
        /// p3cnf file, or `-` for stdin
        path: PathBuf,
        /// Also run the oracle and record a counterexample on disagreement
        #[arg(long)]
        check: bool,
    },
    /// Print the expanded formula as p3cnf
    Expand {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force 1-in-3 satisfiability
    Oracle {
        path: PathBuf,
        /// Run on the expanded formula, and also scan it for the target value
        #[arg(long)]
        expanded: bool,
        /// Lift the variable-count guard to 40
        #[arg(long)]
        allow_large: bool,
    },
    /// Compare every search variant against the oracle over a corpus
    Diff {
        /// Every canonical formula with at most this many variables
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        exhaustive: Option<usize>,
        /// This many seeded random formulas
        #[arg(long)]
        random: Option<usize>,
        #[arg(long)]
        k1: Option<usize>,
        #[arg(long)]
        m1: Option<usize>,
        /// Upper bound for randomly drawn k1
        #[arg(long, default_value_t = diff::DEFAULT_RANDOM_K1_MAX)]
        k1_max: usize,
        #[arg(long, default_value_t = DEFAULT_CLAUSE_CAP)]
        clause_cap: usize,
        /// Do not write counterexample records
        #[arg(long)]
        no_persist: bool,
    },
    /// Check sortedness, dominance and equivalence
    Lemmas {
        #[arg(required_unless_present = "exhaustive")]
        path: Option<PathBuf>,
        /// Sweep every canonical formula with at most this many variables
        #[arg(long, conflicts_with = "path")]
        exhaustive: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_CLAUSE_CAP)]
        clause_cap: usize,
        /// Include per-instance reports in a sweep
        #[arg(long)]
        reports: bool,
    },
    /// Write the full value matrix as CSV
    MatrixDump {
        path: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Encode the input directly instead of its expansion
        #[arg(long)]
        raw: bool,
    },
    /// Time the search over a range of k1
    Bench {
        #[arg(long, default_value_t = 4)]
        k1_min: usize,
        #[arg(long, default_value_t = 12)]
        k1_max: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        /// Clauses per instance [default: k1]
        #[arg(long)]
        m1: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write one CSV line per search call
    Trace {
        path: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-run a counterexample record, or every record in a directory
    Replay { record: PathBuf },
}

struct Ctx<'a> {
    settings: Settings,
    flags: FlagValues,
    json: bool,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn report<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let v = serde_json::to_value(value)?;
        if self.json {
            writeln!(self.out, "{}", serde_json::to_string_pretty(&v)?)?;
        } else {
            write_text(self.out, &v)?;
        }
        Ok(())
    }
}

fn write_text(out: &mut dyn Write, v: &Value) -> Result<()> {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::String(s) if !s.contains('\n') => writeln!(out, "{k}: {s}")?,
                    Value::String(s) => writeln!(out, "{k}:\n{s}")?,
                    other => writeln!(out, "{k}: {other}")?,
                }
            }
        }
        other => writeln!(out, "{other}")?,
    }
    Ok(())
}

fn read_formula(path: &Path) -> Result<PosCnf> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    };
    parse_pos3cnf(&text)
}

fn write_output(
    path: Option<&Path>,
    out: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut file = std::io::BufWriter::new(fs::File::create(p)?);
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => f(out),
    }
}

/// Parses `args` (including the program name), runs the command, and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let g = cli.global;
    let file = match &g.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = FlagValues {
        corpus: g.corpus,
        mode: g.mode,
        r_decode: g.r_decode,
        call_budget: g.call_budget,
        depth_budget: g.depth_budget,
        seed: g.seed,
    };
    let settings = config::resolve(&flags, &file, config::env_corpus())?;
    let mut ctx = Ctx {
        settings,
        flags,
        json: g.json,
        out,
    };
    match cli.command {
        Command::Solve { path, check } => cmd_solve(&mut ctx, &path, check),
        Command::Expand { path, out } => cmd_expand(&mut ctx, &path, out.as_deref()),
        Command::Oracle {
            path,
            expanded,
            allow_large,
        } => cmd_oracle(&mut ctx, &path, expanded, allow_large),
        Command::Diff {
            exhaustive,
            random,
            k1,
            m1,
            k1_max,
            clause_cap,
            no_persist,
        } => {
            let source = match (exhaustive, random) {
                (Some(k1_max), _) => diff::DiffSource::Exhaustive { k1_max, clause_cap },
                (None, Some(count)) => diff::DiffSource::Random {
                    count,
                    k1,
                    m1,
                    k1_max,
                    seed: ctx.settings.seed.unwrap_or(0),
                },
                (None, None) => return Err(Error::Config("pass --exhaustive or --random".into())),
            };
            cmd_diff(&mut ctx, source, no_persist)
        }
        Command::Lemmas {
            path,
            exhaustive,
            clause_cap,
            reports,
        } => cmd_lemmas(&mut ctx, path.as_deref(), exhaustive, clause_cap, reports),
        Command::MatrixDump { path, csv, raw } => {
            cmd_matrix_dump(&mut ctx, &path, csv.as_deref(), raw)
        }
        Command::Bench {
            k1_min,
            k1_max,
            trials,
            m1,
            csv,
        } => cmd_bench(&mut ctx, k1_min, k1_max, trials, m1, csv.as_deref()),
        Command::Trace { path, csv } => cmd_trace(&mut ctx, &path, csv.as_deref()),
        Command::Replay { record } => cmd_replay(&mut ctx, &record),
    }
}

/// Exit code for a search outcome.
pub fn solve_exit_code(found: bool, budget_exhausted: bool) -> i32 {
    match (found, budget_exhausted) {
        (true, _) => EXIT_OK,
        (false, true) => EXIT_BUDGET,
        (false, false) => EXIT_NOT_FOUND,
    }
}

fn cmd_solve(ctx: &mut Ctx, path: &Path, check: bool) -> Result<i32> {
    let psi = read_formula(path)?;
    let cfg = ctx.settings.search;
    let o = solve(&psi, cfg)?;
    let r = &o.result;
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "found": r.found,
        "witness": o.original_witness.as_ref().map(bits),
        "expanded_witness": r.witness.as_ref().map(bits),
        "witness_sound": o.witness_is_sound(),
        "hit": r.hit.as_ref().map(CellText::from),
        "k1": o.expansion.k1,
        "k2": o.expansion.k2,
        "m": o.expansion.m,
        "config": cfg,
        "stats": r.stats,
    });
    if check {
        let oracle = crate::oracle::brute_force_one_in_three(&psi)?.is_some();
        let mut c = json!({ "oracle_verdict": oracle, "agrees": oracle == r.found });
        if oracle != r.found {
            let rec = corpus::CounterexampleRecord::new(
                psi.clone(),
                r.found,
                oracle,
                cfg,
                ctx.settings.seed,
                r.stats,
            );
            let stored = corpus::store(&ctx.settings.corpus, &rec)?;
            c["record"] = json!(stored.sidecar_path);
        }
        report["check"] = c;
    }
    ctx.report(&report)?;
    Ok(solve_exit_code(r.found, r.stats.budget_exhausted))
}

fn bits(a: &Assignment) -> String {
    a.clone().into()
}

fn cmd_expand(ctx: &mut Ctx, path: &Path, dest: Option<&Path>) -> Result<i32> {
    let psi = read_formula(path)?;
    let e = expand(&psi)?;
    let text = e.phi.to_text();
    if let Some(p) = dest {
        fs::write(p, &text)?;
    }
    if ctx.json {
        ctx.report(&json!({
            "schema_version": SCHEMA_VERSION,
            "k1": e.k1,
            "k2": e.k2,
            "m": e.m,
            "renaming": e.rename.as_slice(),
            "target": e.ef.target().to_str_radix(10),
            "phi": text,
        }))?;
    } else if dest.is_none() {
        write!(ctx.out, "{text}")?;
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(ctx: &mut Ctx, path: &Path, expanded: bool, allow_large: bool) -> Result<i32> {
    let psi = read_formula(path)?;
    let limit = if allow_large {
        LARGE_ORACLE_VARS
    } else {
        ORACLE_MAX_VARS
    };
    let mut report = json!({ "schema_version": SCHEMA_VERSION });
    let sat = if expanded {
        let e = expand(&psi)?;
        let w = brute_force_one_in_three_with_limit(&e.phi, limit)?;
        let t = target_membership_with_limit(&e.ef, limit)?;
        report["satisfiable"] = json!(w.is_some());
        report["witness"] = json!(w.as_ref().map(bits));
        report["target_witness"] = json!(t.as_ref().map(bits));
        report["target_agrees"] = json!(w.is_some() == t.is_some());
        w.is_some()
    } else {
        let w = brute_force_one_in_three_with_limit(&psi, limit)?;
        report["satisfiable"] = json!(w.is_some());
        report["witness"] = json!(w.as_ref().map(bits));
        w.is_some()
    };
    ctx.report(&report)?;
    Ok(if sat { EXIT_OK } else { EXIT_NOT_FOUND })
}

/// Variants selected by the `--mode` / `--r-decode` flags; all four if neither is given.
fn selected_variants(flags: &FlagValues) -> Vec<SearchConfig> {
    all_variants()
        .into_iter()
        .filter(|(m, d)| {
            flags.mode.is_none_or(|x| x == *m) && flags.r_decode.is_none_or(|x| x == *d)
        })
        .map(|(m, d)| SearchConfig::new(m, d))
        .collect()
}

fn cmd_diff(ctx: &mut Ctx, source: diff::DiffSource, no_persist: bool) -> Result<i32> {
    let opts = diff::DiffOptions {
        source,
        base: ctx.settings.search,
        variants: selected_variants(&ctx.flags),
        corpus: (!no_persist).then(|| ctx.settings.corpus.clone()),
    };
    let (summary, _) = diff::run_diff(&opts)?;
    ctx.report(&summary)?;
    Ok(EXIT_OK)
}

fn cmd_lemmas(
    ctx: &mut Ctx,
    path: Option<&Path>,
    exhaustive: Option<usize>,
    clause_cap: usize,
    reports: bool,
) -> Result<i32> {
    match (path, exhaustive) {
        (_, Some(k1_max)) => {
            let formulas: Vec<PosCnf> =
                crate::formula::enumerate_small(k1_max, clause_cap)?.collect();
            let (sweep, all) = lemmas::sweep(&formulas)?;
            if reports {
                ctx.report(
                    &json!({ "schema_version": SCHEMA_VERSION, "sweep": sweep, "reports": all }),
                )?;
            } else {
                ctx.report(&sweep)?;
            }
        }
        (Some(p), None) => {
            let psi = read_formula(p)?;
            ctx.report(&lemmas::lemma_report(&psi)?)?;
        }
        (None, None) => return Err(Error::Config("pass a formula path or --exhaustive".into())),
    }
    Ok(EXIT_OK)
}

fn cmd_matrix_dump(ctx: &mut Ctx, path: &Path, csv: Option<&Path>, raw: bool) -> Result<i32> {
    let psi = read_formula(path)?;
    let ef = if raw {
        encode_formula(&psi, lemmas::raw_split(psi.num_vars()))?
    } else {
        expand(&psi)?.ef
    };
    let mm = materialize(&ef)?;
    write_output(csv, ctx.out, |w| dump::write_matrix_csv(&mm, w))?;
    Ok(EXIT_OK)
}

fn cmd_bench(
    ctx: &mut Ctx,
    k1_min: usize,
    k1_max: usize,
    trials: usize,
    m1: Option<usize>,
    csv: Option<&Path>,
) -> Result<i32> {
    let opts = bench::BenchOptions {
        k1_min,
        k1_max,
        trials,
        m1,
        seed: ctx.settings.seed.unwrap_or(0),
        config: ctx.settings.search,
    };
    let records = bench::run_bench(&opts)?;
    let summary = bench::summarize(&records);
    match csv {
        Some(p) => {
            write_output(Some(p), ctx.out, |w| bench::write_bench_csv(&records, w))?;
            ctx.report(&summary)?;
        }
        None if ctx.json => ctx.report(
            &json!({ "summary": summary, "records": records, "schema_version": SCHEMA_VERSION }),
        )?,
        None => {
            bench::write_bench_csv(&records, &mut *ctx.out)?;
            ctx.report(&summary)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_trace(ctx: &mut Ctx, path: &Path, csv: Option<&Path>) -> Result<i32> {
    let psi = read_formula(path)?;
    let e = expand(&psi)?;
    let cfg = ctx.settings.search;
    let (res, rows) = two_dib_search_traced(&e.ef, &e.search_rect(), cfg)?;
    write_output(csv, ctx.out, |w| dump::write_trace_csv(&rows, w))?;
    if csv.is_some() {
        ctx.report(&json!({
            "schema_version": SCHEMA_VERSION,
            "found": res.found,
            "rows": rows.len(),
            "stats": res.stats,
        }))?;
    }
    Ok(solve_exit_code(res.found, res.stats.budget_exhausted))
}

fn cmd_replay(ctx: &mut Ctx, record: &Path) -> Result<i32> {
    let paths = if record.is_dir() {
        corpus::list(record)?
    } else {
        vec![record.to_path_buf()]
    };
    let mut results = Vec::new();
    let mut all = true;
    for p in &paths {
        let rec = corpus::load(p)?;
        let r = corpus::replay(&rec)?;
        all &= r.reproduced;
        results.push(json!({ "record": p, "replay": r }));
    }
    ctx.report(&json!({
        "schema_version": SCHEMA_VERSION,
        "records": paths.len(),
        "reproduced": all,
        "results": results,
    }))?;
    Ok(if all { EXIT_OK } else { EXIT_NOT_FOUND })
}
