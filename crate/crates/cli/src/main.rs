//! `oql`: parse, validate and run option-strategy queries, generate synthetic
//! chains and price paths, backtest result sets and score query attempts.
//!
//! Exit codes: 0 success, 1 error, 2 valid query with no matching strategy.

mod config;
mod diag;
mod render;

use std::collections::BTreeMap;
use std::io::{self, BufRead, IsTerminal, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use oql_core::backtest::{backtest_documents, BacktestConfig, Cohort, Marks, ValuationPolicy};
use oql_core::catalog::schema_table;
use oql_core::chain::{
    generate_path, generate_synthetic, load_snapshot, to_csv, to_jsonl, ChainFormat, LoadOptions, SpotSeries,
    SyntheticParams,
};
use oql_core::engine::{execute_validated, ResultDocument};
use oql_core::evalkit::{evaluate, parse_cases, DEFAULT_ATTEMPT_BUDGET};
use oql_core::{parse_query, pretty_print, ChainSnapshot, OqlError};
use serde::{Deserialize, Serialize};
use serde_json::json;

use config::{EngineFlags, OutputFormat, OutputMode, RunConfig};

const DEFAULT_AS_OF: &str = "2025-01-02";

#[derive(Debug, Parser)]
#[command(name = "oql", version, about = "Option Query Language engine")]
struct Cli {
    /// TOML config file. Falls back to $OQL_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// A query read from `--query`, a file, or stdin.
#[derive(Debug, Clone, Args)]
struct QueryInput {
    /// Query file; `-` or absent reads stdin.
    file: Option<PathBuf>,
    /// Query text given inline.
    #[arg(short, long, conflicts_with = "file")]
    query: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a query and print its canonical form and AST.
    Parse {
        #[command(flatten)]
        input: QueryInput,
    },
    /// Validate a query against the strategy catalog.
    Check {
        #[command(flatten)]
        input: QueryInput,
        /// Print the strategy catalog instead of checking a query.
        #[arg(long)]
        strategy_docs: bool,
        #[arg(long)]
        symmetric_butterfly: bool,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Run a query against a chain snapshot.
    Run {
        #[command(flatten)]
        input: QueryInput,
        /// Chain snapshot (CSV or JSONL).
        #[arg(long)]
        chain: PathBuf,
        #[command(flatten)]
        engine: EngineFlags,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        #[arg(long, value_enum)]
        mode: Option<OutputMode>,
    },
    /// Mark result sets along a price path and report WR, RE and ROC.
    Backtest(BacktestArgs),
    /// Write a synthetic chain snapshot.
    GenChain(GenChainArgs),
    /// Write a seeded GBM closing-price path.
    GenPath(GenPathArgs),
    /// Score stored query attempts: VR, SM, Eff and AvgRows.
    Eval {
        /// JSONL cases; chain paths resolve relative to this file.
        #[arg(long)]
        cases: PathBuf,
        /// Attempt budget K.
        #[arg(long, default_value_t = DEFAULT_ATTEMPT_BUDGET)]
        k: usize,
        #[command(flatten)]
        engine: EngineFlags,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Interactive loop over one chain.
    Repl {
        #[arg(long)]
        chain: PathBuf,
        /// Rows shown per query.
        #[arg(long, default_value_t = 10)]
        rows: usize,
        #[command(flatten)]
        engine: EngineFlags,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CohortArg {
    All,
    Top,
}

#[derive(Debug, Args)]
struct BacktestArgs {
    /// Result JSON written by `oql run`. Repeatable.
    #[arg(long, required = true)]
    results: Vec<PathBuf>,
    /// Spot CSV (`date,close`); legs are revalued at their entry IV.
    #[arg(long, conflicts_with = "snapshots")]
    spots: Option<PathBuf>,
    /// Directory of daily chain snapshots; legs are marked at quoted prices.
    #[arg(long)]
    snapshots: Option<PathBuf>,
    /// Defaults to the results' as-of date.
    #[arg(long)]
    entry: Option<NaiveDate>,
    /// Defaults to the last date of the price source.
    #[arg(long)]
    exit: Option<NaiveDate>,
    /// Defaults to the results' rate.
    #[arg(long)]
    rate: Option<f64>,
    /// Defaults to the results' multiplier.
    #[arg(long)]
    multiplier: Option<f64>,
    #[arg(long, value_enum, default_value = "all")]
    cohort: CohortArg,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

/// Generator settings that may also come from a `--params` TOML file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenChainFile {
    underlying: Option<String>,
    as_of: Option<NaiveDate>,
    spot: Option<f64>,
    rate: Option<f64>,
    base_vol: Option<f64>,
    skew: Option<f64>,
    term: Option<f64>,
    strikes: Option<StrikeSpec>,
    expiries: Option<Vec<u32>>,
    seed: Option<u64>,
    base_volume: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum StrikeSpec {
    List(Vec<f64>),
    Text(String),
}

#[derive(Debug, Args)]
struct GenChainArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overwrite an existing output file.
    #[arg(long)]
    force: bool,
    /// TOML file with generator keys; flags override it.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FileFormat>,
    #[arg(long)]
    underlying: Option<String>,
    #[arg(long)]
    as_of: Option<NaiveDate>,
    #[arg(long)]
    spot: Option<f64>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    base_vol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    skew: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    term: Option<f64>,
    /// `lo:hi:step` or a comma-separated list.
    #[arg(long)]
    strikes: Option<String>,
    /// Comma-separated days to expiry.
    #[arg(long, value_delimiter = ',')]
    expiries: Option<Vec<u32>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    base_volume: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FileFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
struct GenPathArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
    #[arg(long, default_value_t = 100.0)]
    spot: f64,
    /// Annual drift.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    /// Annual volatility.
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    /// Number of daily steps.
    #[arg(long, default_value_t = 30)]
    days: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Date of the first close.
    #[arg(long, default_value = DEFAULT_AS_OF)]
    start: NaiveDate,
}

enum Failure {
    /// Already rendered for stderr.
    Message(String),
    Empty,
}

type CmdResult = Result<(), Failure>;

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Message(format!("error: {e}"))
    }
}

fn fail<T>(msg: impl std::fmt::Display) -> Result<T, Failure> {
    Err(Failure::Message(format!("error: {msg}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Empty) => ExitCode::from(2),
        Err(Failure::Message(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> CmdResult {
    let config_file = config::config_path(cli.config.as_deref());
    let file = config::load_file(config_file.as_deref()).map_err(Failure::Message)?;
    let resolve = |flags: &EngineFlags, format, mode| config::resolve(&file, flags, format, mode).map_err(|e| Failure::Message(format!("error: {e}")));
    match cli.command {
        Command::Parse { input } => cmd_parse(&input),
        Command::Check {
            input,
            strategy_docs,
            symmetric_butterfly,
            format,
        } => {
            let flags = EngineFlags {
                symmetric_butterfly,
                ..EngineFlags::default()
            };
            cmd_check(&input, strategy_docs, &resolve(&flags, format, None)?)
        }
        Command::Run {
            input,
            chain,
            engine,
            format,
            mode,
        } => cmd_run(&input, &chain, &resolve(&engine, format, mode)?),
        Command::Backtest(args) => {
            let format = args.format.or(file.output_format).unwrap_or_default();
            cmd_backtest(&args, format)
        }
        Command::GenChain(args) => cmd_gen_chain(&args),
        Command::GenPath(args) => cmd_gen_path(&args),
        Command::Eval {
            cases,
            k,
            engine,
            format,
        } => cmd_eval(&cases, k, &resolve(&engine, format, None)?),
        Command::Repl { chain, rows, engine } => cmd_repl(&chain, rows, &resolve(&engine, None, None)?),
    }
}

fn read_query(input: &QueryInput) -> Result<String, Failure> {
    let text = match (&input.query, &input.file) {
        (Some(q), _) => q.clone(),
        (None, Some(p)) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).map_err(|e| Failure::Message(format!("error: cannot read {}: {e}", p.display())))?
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    if text.trim().is_empty() {
        return fail("empty input");
    }
    Ok(text)
}

fn query_failure(source: &str, err: &OqlError) -> Failure {
    Failure::Message(diag::render(source, err))
}

fn print_json(value: &impl Serialize) -> CmdResult {
    let mut out = serde_json::to_string_pretty(value)?;
    out.push('\n');
    io::stdout().write_all(out.as_bytes())?;
    Ok(())
}

fn cmd_parse(input: &QueryInput) -> CmdResult {
    let text = read_query(input)?;
    let query = parse_query(&text).map_err(|e| query_failure(&text, &e))?;
    print_json(&json!({ "canonical": pretty_print(&query), "ast": query }))
}

fn cmd_check(input: &QueryInput, strategy_docs: bool, cfg: &RunConfig) -> CmdResult {
    let catalog = cfg.engine.catalog();
    if strategy_docs {
        print!("{}", schema_table(&catalog));
        return Ok(());
    }
    let text = read_query(input)?;
    let query = parse_query(&text).map_err(|e| query_failure(&text, &e))?;
    let vq = catalog
        .validate(&query)
        .map_err(|e| query_failure(&text, &OqlError::from(e)))?;
    match cfg.output_format {
        OutputFormat::Table => {
            print!("{}", render::check(&vq));
            Ok(())
        }
        OutputFormat::Json => print_json(&json!({ "canonical": pretty_print(&vq.query), "validated": vq })),
    }
}

fn load_chain(path: &Path, rate: Option<f64>) -> Result<ChainSnapshot, Failure> {
    let opts = LoadOptions {
        rate,
        ..LoadOptions::default()
    };
    load_snapshot(path, &opts).map_err(|e| Failure::Message(format!("error: cannot load chain {}: {e}", path.display())))
}

fn cmd_run(input: &QueryInput, chain: &Path, cfg: &RunConfig) -> CmdResult {
    let text = read_query(input)?;
    let query = parse_query(&text).map_err(|e| query_failure(&text, &e))?;
    let vq = cfg
        .engine
        .catalog()
        .validate(&query)
        .map_err(|e| query_failure(&text, &OqlError::from(e)))?;
    let snapshot = load_chain(chain, cfg.rate)?;
    let rs = execute_validated(&vq, &snapshot, &cfg.engine).map_err(|e| query_failure(&text, &OqlError::from(e)))?;
    let doc = rs.to_document();
    match (cfg.output_format, cfg.output_mode) {
        (OutputFormat::Table, _) => print!("{}", render::strategies(&doc, None)),
        (OutputFormat::Json, OutputMode::Standard) => print_json(&doc)?,
        (OutputFormat::Json, OutputMode::Blueprint) => {
            let items: Vec<_> = doc.strategies.iter().map(|s| s.blueprint()).collect();
            print_json(&json!({
                "query": doc.query,
                "as_of": doc.as_of,
                "config": cfg,
                "strategies": items,
            }))?
        }
    }
    if doc.strategies.is_empty() {
        eprintln!("no strategy satisfies the query");
        return Err(Failure::Empty);
    }
    Ok(())
}

fn read_results(path: &Path) -> Result<Vec<ResultDocument>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Message(format!("error: cannot read {}: {e}", path.display())))?;
    let bad = |e: serde_json::Error| Failure::Message(format!("error: {} is not a result document: {e}", path.display()));
    // A result file holds one document, an array of documents, or JSONL.
    let value: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(_) => {
            return text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| serde_json::from_str(l).map_err(bad))
                .collect();
        }
    };
    if value.is_array() {
        serde_json::from_value(value).map_err(bad)
    } else {
        Ok(vec![serde_json::from_value(value).map_err(bad)?])
    }
}

fn load_snapshot_dir(dir: &Path, rate: Option<f64>) -> Result<BTreeMap<NaiveDate, ChainSnapshot>, Failure> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::Message(format!("error: cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|x| x.to_str())
                .is_some_and(|x| matches!(x, "csv" | "jsonl" | "json"))
        })
        .collect();
    paths.sort();
    let mut snaps = BTreeMap::new();
    for p in paths {
        let snap = load_chain(&p, rate)?;
        if snaps.insert(snap.as_of, snap).is_some() {
            return fail(format!("two snapshots in {} share an as-of date", dir.display()));
        }
    }
    Ok(snaps)
}

fn cmd_backtest(args: &BacktestArgs, format: OutputFormat) -> CmdResult {
    let mut docs = Vec::new();
    for p in &args.results {
        docs.extend(read_results(p)?);
    }
    let Some(first) = docs.first() else {
        return fail("no result documents");
    };
    let entry_date = args.entry.unwrap_or(first.as_of);
    let rate = args.rate.unwrap_or(first.rate);
    let multiplier = args.multiplier.unwrap_or(first.config.multiplier);

    let spots;
    let snaps;
    let (marks, last, policy) = match (&args.spots, &args.snapshots) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Message(format!("error: cannot read {}: {e}", path.display())))?;
            spots = SpotSeries::parse_csv(&text)?;
            let last = spots.points.last().map(|(d, _)| *d);
            (Marks::Spots(&spots), last, ValuationPolicy::StickyEntry)
        }
        (None, Some(dir)) => {
            snaps = load_snapshot_dir(dir, args.rate)?;
            let last = snaps.keys().next_back().copied();
            (Marks::Snapshots(&snaps), last, ValuationPolicy::Snapshot)
        }
        (None, None) => return fail("one of --spots or --snapshots is required"),
    };
    let Some(exit_date) = args.exit.or(last) else {
        return fail("the price source is empty");
    };
    let config = BacktestConfig {
        entry_date,
        exit_date,
        rate,
        multiplier,
        policy,
    };
    config.validate()?;
    let cohort = match args.cohort {
        CohortArg::All => Cohort::All,
        CohortArg::Top => Cohort::Top,
    };
    let report = backtest_documents(&docs, marks, &config, cohort)?;
    match format {
        OutputFormat::Table => {
            print!("{}", render::backtest(&report));
            Ok(())
        }
        OutputFormat::Json => print_json(&report),
    }
}

fn parse_strikes(spec: &str) -> Result<Vec<f64>, Failure> {
    let num = |s: &str| -> Result<f64, Failure> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Failure::Message(format!("error: bad strike `{s}` in `{spec}`")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0 && lo <= hi) {
            return fail(format!("strike range `{spec}` needs lo <= hi and a positive step"));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        // Rounded to 1e-6 so that repeated addition error never leaks into tickers.
        return Ok((0..=n).map(|i| ((lo + i as f64 * step) * 1e6).round() / 1e6).collect());
    }
    spec.split(',').map(num).collect()
}

fn default_strikes(spot: f64) -> Vec<f64> {
    let step = spot * 0.025;
    (-12..=12).map(|i| ((spot + f64::from(i) * step) * 100.0).round() / 100.0).collect()
}

fn refuse_overwrite(path: &Path, force: bool) -> CmdResult {
    if path.exists() && !force {
        return fail(format!("{} exists; pass --force to overwrite", path.display()));
    }
    Ok(())
}

fn write_output(out: Option<&Path>, force: bool, body: &str) -> CmdResult {
    match out {
        Some(path) => {
            refuse_overwrite(path, force)?;
            std::fs::write(path, body).map_err(|e| Failure::Message(format!("error: cannot write {}: {e}", path.display())))
        }
        None => Ok(io::stdout().write_all(body.as_bytes())?),
    }
}

fn cmd_gen_chain(args: &GenChainArgs) -> CmdResult {
    let file = match &args.params {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Message(format!("error: cannot read {}: {e}", p.display())))?;
            toml::from_str::<GenChainFile>(&text).map_err(|e| Failure::Message(format!("error: invalid params {}: {e}", p.display())))?
        }
        None => GenChainFile::default(),
    };
    let spot = args.spot.or(file.spot).unwrap_or(100.0);
    let strikes = match (&args.strikes, &file.strikes) {
        (Some(s), _) => parse_strikes(s)?,
        (None, Some(StrikeSpec::Text(s))) => parse_strikes(s)?,
        (None, Some(StrikeSpec::List(v))) => v.clone(),
        (None, None) => default_strikes(spot),
    };
    let params = SyntheticParams {
        underlying: args.underlying.clone().or(file.underlying).unwrap_or_else(|| "SPY".into()),
        as_of: args
            .as_of
            .or(file.as_of)
            .unwrap_or_else(|| DEFAULT_AS_OF.parse().expect("valid default date")),
        spot,
        rate: args.rate.or(file.rate).unwrap_or(0.04),
        base_vol: args.base_vol.or(file.base_vol).unwrap_or(0.25),
        skew: args.skew.or(file.skew).unwrap_or(-0.1),
        term: args.term.or(file.term).unwrap_or(0.0),
        strikes,
        expiries: args
            .expiries
            .clone()
            .or(file.expiries)
            .unwrap_or_else(|| vec![7, 14, 21, 30, 45, 60]),
        seed: args.seed.or(file.seed).unwrap_or(0),
        base_volume: args.base_volume.or(file.base_volume).unwrap_or(5000.0),
    };
    let snapshot = generate_synthetic(&params)?;
    let format = match (args.format, &args.out) {
        (Some(FileFormat::Csv), _) => ChainFormat::Csv,
        (Some(FileFormat::Jsonl), _) => ChainFormat::Jsonl,
        (None, Some(p)) => ChainFormat::from_path(p),
        (None, None) => ChainFormat::Csv,
    };
    let body = match format {
        ChainFormat::Csv => to_csv(&snapshot),
        ChainFormat::Jsonl => to_jsonl(&snapshot),
    };
    write_output(args.out.as_deref(), args.force, &body)?;
    if let Some(p) = &args.out {
        eprintln!("wrote {} contracts to {}", snapshot.records.len(), p.display());
    }
    Ok(())
}

fn cmd_gen_path(args: &GenPathArgs) -> CmdResult {
    if !(args.spot > 0.0 && args.sigma >= 0.0) {
        return fail("spot must be positive and sigma non-negative");
    }
    if args.days == 0 {
        return fail("days must be at least 1");
    }
    let closes = generate_path(args.spot, args.mu, args.sigma, args.days, args.seed);
    let series = SpotSeries::from_path(args.start, &closes);
    write_output(args.out.as_deref(), args.force, &series.to_csv())
}

fn cmd_eval(cases_path: &Path, k: usize, cfg: &RunConfig) -> CmdResult {
    let text = std::fs::read_to_string(cases_path)
        .map_err(|e| Failure::Message(format!("error: cannot read {}: {e}", cases_path.display())))?;
    let cases = parse_cases(&text)?;
    let base = cases_path.parent().unwrap_or(Path::new("."));
    let report = evaluate(&cases, &cfg.engine, k, |chain| {
        let path = base.join(chain);
        load_chain(&path, cfg.rate).map_err(|f| match f {
            Failure::Message(m) => m.trim_start_matches("error: ").to_string(),
            Failure::Empty => String::new(),
        })
    })?;
    match cfg.output_format {
        OutputFormat::Table => {
            print!("{}", render::eval(&report));
            Ok(())
        }
        OutputFormat::Json => {
            let mut value = serde_json::to_value(&report)?;
            value["config"] = serde_json::to_value(cfg)?;
            print_json(&value)
        }
    }
}

const REPL_HELP: &str = "Enter a query on one line, or:
  :help             this message
  :schema           all strategies
  :schema <NAME>    roles and rules of one strategy
  :quit             leave (Ctrl-D also works)
";

fn cmd_repl(chain: &Path, rows: usize, cfg: &RunConfig) -> CmdResult {
    let snapshot = load_chain(chain, cfg.rate)?;
    let catalog = cfg.engine.catalog();
    let interactive = io::stdin().is_terminal();
    let mut stdout = io::stdout();
    writeln!(
        stdout,
        "loaded {} contracts for {} as of {} (spot {:.2}); :help for commands",
        snapshot.records.len(),
        snapshot.underlying,
        snapshot.as_of,
        snapshot.spot
    )?;
    let mut lines = io::stdin().lock().lines();
    loop {
        if interactive {
            write!(stdout, "oql> ")?;
            stdout.flush()?;
        }
        let Some(line) = lines.next() else { break };
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with("--") {
            continue;
        }
        if let Some(cmd) = line.strip_prefix(':') {
            let mut parts = cmd.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("quit" | "q" | "exit"), _) => break,
                (Some("help" | "h"), _) => write!(stdout, "{REPL_HELP}")?,
                (Some("schema"), None) => write!(stdout, "{}", schema_table(&catalog))?,
                (Some("schema"), Some(name)) => match catalog.lookup(name) {
                    Ok(s) => write!(stdout, "{}", render::schema(s))?,
                    Err(e) => eprintln!("error: {e}"),
                },
                _ => eprintln!("error: unknown command `{line}`; try :help"),
            }
            continue;
        }
        let result = parse_query(line)
            .and_then(|q| catalog.validate(&q).map_err(OqlError::from))
            .and_then(|vq| execute_validated(&vq, &snapshot, &cfg.engine).map_err(OqlError::from));
        match result {
            Ok(rs) => write!(stdout, "{}", render::strategies(&rs.to_document(), Some(rows)))?,
            Err(e) => eprintln!("{}", diag::render(line, &e)),
        }
    }
    Ok(())
}
