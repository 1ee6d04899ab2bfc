//! Option-chain snapshots: the record model, canonical CSV/JSONL files,
//! Greek enrichment and a seeded synthetic generator.
//!
//! Canonical CSV layout (the metadata line carries values that are not
//! per-contract attributes):
//!
//! ```text
//! # underlying=TSLA,as_of=2025-06-02,spot=250,rate=0.04
//! ticker,underlying,as_of,expiry,strike,type,price,volume,iv,delta,gamma,vega,theta
//! O:TSLA251219P00300000,TSLA,2025-06-02,2025-12-19,300,P,19.95,1200,0.52,-0.29,0.004,0.71,-0.05
//! ```
//!
//! JSONL mirrors it: a first object with `underlying, as_of, spot, rate`, then
//! one object per contract with the CSV column names.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::ChainError;
use crate::pricing::{self, arbitrage_bounds, bsm_price, greeks, implied_vol, IvOptions, MarketParams};
use crate::types::{Moneyness, OptionType};

pub const CSV_HEADER: &str = "ticker,underlying,as_of,expiry,strike,type,price,volume,iv,delta,gamma,vega,theta";
pub const DEFAULT_RATE: f64 = 0.04;
pub const DEFAULT_ATM_BAND: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractRecord {
    pub ticker: String,
    pub underlying: String,
    pub as_of: NaiveDate,
    pub expiry: NaiveDate,
    pub strike: f64,
    #[serde(rename = "type")]
    pub option_type: OptionType,
    pub price: f64,
    pub volume: u64,
    pub iv: f64,
    pub delta: f64,
    pub gamma: f64,
    pub vega: f64,
    pub theta: f64,
}

impl ContractRecord {
    /// Calendar days to expiry.
    pub fn dte(&self) -> i64 {
        (self.expiry - self.as_of).num_days()
    }

    pub fn tau(&self) -> f64 {
        pricing::year_fraction(self.dte())
    }

    /// Sort key used wherever a deterministic contract order is needed.
    pub fn order_key(&self) -> (NaiveDate, f64, &str) {
        (self.expiry, self.strike, self.ticker.as_str())
    }
}

/// Fields derived from a record and its snapshot rather than stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedLegFields {
    pub dte: i64,
    pub moneyness: Moneyness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedRecord {
    pub ticker: String,
    /// 1-based line in the source file, when loaded from disk.
    pub row: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSnapshot {
    pub underlying: String,
    pub as_of: NaiveDate,
    pub spot: f64,
    pub rate: f64,
    pub records: Vec<ContractRecord>,
    /// Rows that could not be given a volatility or Greeks; never queried.
    #[serde(default)]
    pub excluded: Vec<ExcludedRecord>,
}

impl ChainSnapshot {
    pub fn derived(&self, record: &ContractRecord, atm_band: f64) -> DerivedLegFields {
        DerivedLegFields {
            dte: record.dte(),
            moneyness: Moneyness::classify(record.option_type, record.strike, self.spot, atm_band),
        }
    }

    pub fn market(&self, record: &ContractRecord) -> MarketParams {
        MarketParams::new(self.spot, self.rate, record.iv, record.tau())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainFormat {
    Csv,
    Jsonl,
}

impl ChainFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("json") => ChainFormat::Jsonl,
            _ => ChainFormat::Csv,
        }
    }
}

/// Overrides for values normally carried by the file's metadata line.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub format: Option<ChainFormat>,
    pub spot: Option<f64>,
    pub rate: Option<f64>,
}

/// A contract row before validation; analytics may be missing.
#[derive(Debug, Clone, Deserialize)]
struct RawRecord {
    ticker: String,
    underlying: String,
    as_of: NaiveDate,
    expiry: NaiveDate,
    strike: f64,
    #[serde(rename = "type")]
    option_type: OptionType,
    price: f64,
    volume: u64,
    iv: Option<f64>,
    delta: Option<f64>,
    gamma: Option<f64>,
    vega: Option<f64>,
    theta: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
struct Metadata {
    underlying: Option<String>,
    as_of: Option<NaiveDate>,
    spot: Option<f64>,
    rate: Option<f64>,
}

pub fn load_snapshot(path: &Path, opts: &LoadOptions) -> Result<ChainSnapshot, ChainError> {
    let text = fs::read_to_string(path)?;
    let format = opts.format.unwrap_or_else(|| ChainFormat::from_path(path));
    parse_snapshot(&text, format, opts)
}

/// Parses snapshot text. Rows missing Greeks are backfilled from `iv` (or
/// from `price` when `iv` is also missing); rows where that fails are moved
/// to `excluded`.
pub fn parse_snapshot(text: &str, format: ChainFormat, opts: &LoadOptions) -> Result<ChainSnapshot, ChainError> {
    let (meta, rows) = match format {
        ChainFormat::Csv => parse_csv(text)?,
        ChainFormat::Jsonl => parse_jsonl(text)?,
    };
    build_snapshot(meta, rows, opts)
}

fn format_err(row: usize, message: impl Into<String>) -> ChainError {
    ChainError::Format {
        row,
        message: message.into(),
    }
}

fn parse_metadata_line(line: &str, row: usize) -> Result<Metadata, ChainError> {
    let mut meta = Metadata::default();
    for pair in line.trim_start_matches('#').split(',') {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format_err(row, format!("metadata entry `{pair}` is not key=value")))?;
        let bad = |what: &str| format_err(row, format!("bad metadata {what} `{value}`"));
        match key.trim() {
            "underlying" => meta.underlying = Some(value.trim().to_string()),
            "as_of" => meta.as_of = Some(value.trim().parse().map_err(|_| bad("date"))?),
            "spot" => meta.spot = Some(value.trim().parse().map_err(|_| bad("spot"))?),
            "rate" => meta.rate = Some(value.trim().parse().map_err(|_| bad("rate"))?),
            other => return Err(format_err(row, format!("unknown metadata key `{other}`"))),
        }
    }
    Ok(meta)
}

fn parse_csv(text: &str) -> Result<(Metadata, Vec<(usize, RawRecord)>), ChainError> {
    let mut lines = text.lines().enumerate().peekable();
    let mut meta = Metadata::default();
    if let Some((i, line)) = lines.peek().copied() {
        if line.starts_with('#') {
            meta = parse_metadata_line(line, i + 1)?;
            lines.next();
        }
    }
    let Some((header_idx, header)) = lines.next() else {
        return Err(format_err(1, "missing header"));
    };
    if header.trim() != CSV_HEADER {
        return Err(format_err(header_idx + 1, format!("missing header: expected `{CSV_HEADER}`")));
    }

    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row = i + 1;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(line.as_bytes());
        let record = reader
            .records()
            .next()
            .transpose()
            .map_err(|e| format_err(row, e.to_string()))?
            .ok_or_else(|| format_err(row, "empty row"))?;
        let header_record = csv::StringRecord::from(CSV_HEADER.split(',').collect::<Vec<_>>());
        let raw: RawRecord = record
            .deserialize(Some(&header_record))
            .map_err(|e| format_err(row, e.to_string()))?;
        rows.push((row, raw));
    }
    Ok((meta, rows))
}

fn parse_jsonl(text: &str) -> Result<(Metadata, Vec<(usize, RawRecord)>), ChainError> {
    let mut meta = Metadata::default();
    let mut rows = Vec::new();
    let mut seen_any = false;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = i + 1;
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| format_err(row, e.to_string()))?;
        if !seen_any && value.get("ticker").is_none() {
            meta = serde_json::from_value(value).map_err(|e| format_err(row, e.to_string()))?;
        } else {
            rows.push((row, serde_json::from_value(value).map_err(|e| format_err(row, e.to_string()))?));
        }
        seen_any = true;
    }
    if !seen_any {
        return Err(format_err(1, "missing header"));
    }
    Ok((meta, rows))
}

fn build_snapshot(meta: Metadata, rows: Vec<(usize, RawRecord)>, opts: &LoadOptions) -> Result<ChainSnapshot, ChainError> {
    let first = rows.first().map(|(_, r)| r);
    let underlying = meta
        .underlying
        .or_else(|| first.map(|r| r.underlying.clone()))
        .ok_or_else(|| format_err(1, "no underlying in metadata and no rows"))?;
    let as_of = meta
        .as_of
        .or_else(|| first.map(|r| r.as_of))
        .ok_or_else(|| format_err(1, "no as_of in metadata and no rows"))?;
    let spot = opts
        .spot
        .or(meta.spot)
        .ok_or_else(|| format_err(1, "spot price missing from metadata"))?;
    if !(spot.is_finite() && spot > 0.0) {
        return Err(format_err(1, format!("spot must be positive, got {spot}")));
    }
    let rate = opts.rate.or(meta.rate).unwrap_or(DEFAULT_RATE);

    let mut snapshot = ChainSnapshot {
        underlying,
        as_of,
        spot,
        rate,
        records: Vec::with_capacity(rows.len()),
        excluded: Vec::new(),
    };
    let mut seen = HashSet::new();
    let violation = |row: usize, message: String| ChainError::InvariantViolation { row, message };

    for (row, raw) in rows {
        if raw.underlying != snapshot.underlying {
            return Err(violation(row, format!("underlying {} differs from {}", raw.underlying, snapshot.underlying)));
        }
        if raw.as_of != snapshot.as_of {
            return Err(violation(row, format!("as_of {} differs from {}", raw.as_of, snapshot.as_of)));
        }
        if raw.expiry < raw.as_of {
            return Err(violation(row, format!("expiry {} is before as_of {}", raw.expiry, raw.as_of)));
        }
        if !(raw.strike.is_finite() && raw.strike > 0.0) {
            return Err(violation(row, format!("strike must be positive, got {}", raw.strike)));
        }
        if !(raw.price.is_finite() && raw.price >= 0.0) {
            return Err(violation(row, format!("price must be non-negative, got {}", raw.price)));
        }
        if let Some(iv) = raw.iv {
            if !(iv.is_finite() && iv >= 0.0) {
                return Err(violation(row, format!("iv must be non-negative, got {iv}")));
            }
        }
        if let Some(delta) = raw.delta {
            let ok = match raw.option_type {
                OptionType::Call => (0.0..=1.0).contains(&delta),
                OptionType::Put => (-1.0..=0.0).contains(&delta),
            };
            if !ok {
                return Err(violation(row, format!("{} delta {delta} out of range", raw.option_type)));
            }
        }
        let key = (raw.expiry, raw.strike.to_bits(), raw.option_type);
        if !seen.insert(key) {
            return Err(violation(
                row,
                format!("duplicate contract {} {} {}", raw.expiry, raw.strike, raw.option_type.code()),
            ));
        }

        match complete_record(&snapshot, raw) {
            Ok(record) => snapshot.records.push(record),
            Err((ticker, reason)) => snapshot.excluded.push(ExcludedRecord {
                ticker,
                row: Some(row),
                reason,
            }),
        }
    }
    Ok(snapshot)
}

fn complete_record(snapshot: &ChainSnapshot, raw: RawRecord) -> Result<ContractRecord, (String, String)> {
    let mut record = ContractRecord {
        ticker: raw.ticker,
        underlying: raw.underlying,
        as_of: raw.as_of,
        expiry: raw.expiry,
        strike: raw.strike,
        option_type: raw.option_type,
        price: raw.price,
        volume: raw.volume,
        iv: raw.iv.unwrap_or(f64::NAN),
        delta: raw.delta.unwrap_or(f64::NAN),
        gamma: raw.gamma.unwrap_or(f64::NAN),
        vega: raw.vega.unwrap_or(f64::NAN),
        theta: raw.theta.unwrap_or(f64::NAN),
    };
    let complete = [raw.iv, raw.delta, raw.gamma, raw.vega, raw.theta].iter().all(Option::is_some);
    if complete {
        return Ok(record);
    }
    let ticker = record.ticker.clone();
    if raw.iv.is_none() {
        let m = snapshot.market(&record);
        record.iv = implied_vol(&m, record.strike, record.option_type, record.price, &IvOptions::default())
            .map_err(|e| (ticker.clone(), e.to_string()))?;
    }
    apply_greeks(snapshot, &mut record).map_err(|reason| (ticker, reason))?;
    Ok(record)
}

fn apply_greeks(snapshot: &ChainSnapshot, record: &mut ContractRecord) -> Result<(), String> {
    if record.dte() <= 0 {
        return Err("contract expires on the snapshot date".into());
    }
    let g = greeks(&snapshot.market(record), record.strike, record.option_type).map_err(|e| e.to_string())?;
    record.delta = g.delta;
    record.gamma = g.gamma;
    record.vega = g.vega;
    record.theta = g.theta;
    Ok(())
}

/// Recomputes every record's Greeks from its `iv` at the snapshot's spot and
/// rate. Records that expire on the snapshot date, have zero volatility or
/// are priced outside the no-arbitrage bounds are moved to `excluded`.
pub fn enrich(snapshot: &ChainSnapshot) -> ChainSnapshot {
    let mut out = ChainSnapshot {
        records: Vec::with_capacity(snapshot.records.len()),
        excluded: snapshot.excluded.clone(),
        ..snapshot.clone()
    };
    for record in &snapshot.records {
        let mut record = record.clone();
        let (lower, upper) = arbitrage_bounds(out.spot, out.rate, record.tau(), record.strike, record.option_type);
        let slack = 1e-9 * out.spot.max(record.strike);
        let reason = if record.dte() > 0 && record.price < lower - slack {
            Some(format!("price {} is below the arbitrage bound {lower}", record.price))
        } else if record.dte() > 0 && record.price >= upper {
            Some(format!("price {} is at or above the arbitrage bound {upper}", record.price))
        } else {
            apply_greeks(&out, &mut record).err()
        };
        match reason {
            None => out.records.push(record),
            Some(reason) => out.excluded.push(ExcludedRecord {
                ticker: record.ticker,
                row: None,
                reason,
            }),
        }
    }
    out
}

fn format_f64(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

/// Canonical CSV text, metadata line first.
pub fn to_csv(snapshot: &ChainSnapshot) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# underlying={},as_of={},spot={},rate={}",
        snapshot.underlying, snapshot.as_of, snapshot.spot, snapshot.rate
    )
    .unwrap();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &snapshot.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.ticker,
            r.underlying,
            r.as_of,
            r.expiry,
            format_f64(r.strike),
            r.option_type.code(),
            format_f64(r.price),
            r.volume,
            format_f64(r.iv),
            format_f64(r.delta),
            format_f64(r.gamma),
            format_f64(r.vega),
            format_f64(r.theta),
        )
        .unwrap();
    }
    out
}

pub fn to_jsonl(snapshot: &ChainSnapshot) -> String {
    let meta = Metadata {
        underlying: Some(snapshot.underlying.clone()),
        as_of: Some(snapshot.as_of),
        spot: Some(snapshot.spot),
        rate: Some(snapshot.rate),
    };
    let mut out = serde_json::to_string(&meta).expect("metadata serializes");
    out.push('\n');
    for r in &snapshot.records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn save_snapshot(snapshot: &ChainSnapshot, path: &Path, format: ChainFormat) -> Result<(), ChainError> {
    let text = match format {
        ChainFormat::Csv => to_csv(snapshot),
        ChainFormat::Jsonl => to_jsonl(snapshot),
    };
    fs::write(path, text)?;
    Ok(())
}

/// OCC-style contract identifier, e.g. `O:TSLA251219P00300000`.
pub fn occ_ticker(underlying: &str, expiry: NaiveDate, option_type: OptionType, strike: f64) -> String {
    format!(
        "O:{}{}{}{:08}",
        underlying,
        expiry.format("%y%m%d"),
        option_type.code(),
        (strike * 1000.0).round() as u64
    )
}

/// Inputs for [`generate_synthetic`]. The volatility smile is
/// `max(base_vol + skew * ln(K/S) + term * sqrt(tau), 0.01)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub underlying: String,
    pub as_of: NaiveDate,
    pub spot: f64,
    pub rate: f64,
    pub base_vol: f64,
    pub skew: f64,
    pub term: f64,
    pub strikes: Vec<f64>,
    /// Expiries as calendar days after `as_of`.
    pub expiries: Vec<u32>,
    pub seed: u64,
    pub base_volume: f64,
}

pub const MIN_SMILE_VOL: f64 = 0.01;

impl SyntheticParams {
    pub fn smile(&self, strike: f64, tau: f64) -> f64 {
        (self.base_vol + self.skew * (strike / self.spot).ln() + self.term * tau.sqrt()).max(MIN_SMILE_VOL)
    }
}

/// Prices the full (expiry, strike, type) grid with BSM under the configured
/// smile. Volumes fall off with |ln(K/S)| and carry seeded noise.
pub fn generate_synthetic(params: &SyntheticParams) -> Result<ChainSnapshot, ChainError> {
    let invalid = |m: String| ChainError::InvalidParams(m);
    if !(params.spot.is_finite() && params.spot > 0.0) {
        return Err(invalid(format!("spot must be positive, got {}", params.spot)));
    }
    if params.expiries.is_empty() {
        return Err(invalid("at least one expiry is required".into()));
    }
    if params.expiries.contains(&0) {
        return Err(invalid("expiries must be at least one day out".into()));
    }
    if params.strikes.is_empty() || params.strikes.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(invalid("strikes must be a non-empty list of positive numbers".into()));
    }
    if !params.underlying.chars().all(|c| c.is_ascii_uppercase()) || params.underlying.is_empty() {
        return Err(invalid(format!("underlying `{}` must be uppercase letters", params.underlying)));
    }

    let mut strikes = params.strikes.clone();
    strikes.sort_by(f64::total_cmp);
    strikes.dedup();
    let mut expiries = params.expiries.clone();
    expiries.sort_unstable();
    expiries.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut snapshot = ChainSnapshot {
        underlying: params.underlying.clone(),
        as_of: params.as_of,
        spot: params.spot,
        rate: params.rate,
        records: Vec::with_capacity(2 * strikes.len() * expiries.len()),
        excluded: Vec::new(),
    };
    for &days in &expiries {
        let expiry = params.as_of + chrono::Days::new(u64::from(days));
        let tau = pricing::year_fraction(i64::from(days));
        for &strike in &strikes {
            let vol = params.smile(strike, tau);
            let m = MarketParams::new(params.spot, params.rate, vol, tau);
            for option_type in [OptionType::Call, OptionType::Put] {
                let g = greeks(&m, strike, option_type).expect("tau and vol are positive");
                let noise: f64 = rng.random();
                let liquidity = (-6.0 * (strike / params.spot).ln().abs()).exp();
                snapshot.records.push(ContractRecord {
                    ticker: occ_ticker(&params.underlying, expiry, option_type, strike),
                    underlying: params.underlying.clone(),
                    as_of: params.as_of,
                    expiry,
                    strike,
                    option_type,
                    price: bsm_price(&m, strike, option_type),
                    volume: (params.base_volume * liquidity * (0.5 + noise)).round() as u64,
                    iv: vol,
                    delta: g.delta,
                    gamma: g.gamma,
                    vega: g.vega,
                    theta: g.theta,
                });
            }
        }
    }
    Ok(snapshot)
}

/// Daily closes under exact GBM discretisation with a one-day step of
/// 1/365 year. Returns `days + 1` prices starting at `spot`.
pub fn generate_path(spot: f64, mu: f64, sigma: f64, days: usize, seed: u64) -> Vec<f64> {
    let dt = 1.0 / pricing::DAYS_PER_YEAR;
    let drift = (mu - 0.5 * sigma * sigma) * dt;
    let diffusion = sigma * dt.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut path = Vec::with_capacity(days + 1);
    let mut s = spot;
    path.push(s);
    for _ in 0..days {
        let z: f64 = rng.sample(StandardNormal);
        s *= (drift + diffusion * z).exp();
        path.push(s);
    }
    path
}

/// Dated closing prices of the underlying, one per calendar day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotSeries {
    pub points: Vec<(NaiveDate, f64)>,
}

impl SpotSeries {
    pub fn from_path(start: NaiveDate, closes: &[f64]) -> Self {
        Self {
            points: closes
                .iter()
                .enumerate()
                .map(|(i, &c)| (start + chrono::Days::new(i as u64), c))
                .collect(),
        }
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.points
            .binary_search_by_key(&date, |(d, _)| *d)
            .ok()
            .map(|i| self.points[i].1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,close\n");
        for (d, c) in &self.points {
            writeln!(out, "{d},{c}").unwrap();
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self, ChainError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == "date,close" => {}
            Some((i, _)) => return Err(format_err(i + 1, "missing header: expected `date,close`")),
            None => return Err(format_err(1, "missing header")),
        }
        let mut points: Vec<(NaiveDate, f64)> = Vec::new();
        for (i, line) in lines {
            let row = i + 1;
            let (d, c) = line
                .split_once(',')
                .ok_or_else(|| format_err(row, "expected `date,close`"))?;
            let date: NaiveDate = d.trim().parse().map_err(|_| format_err(row, format!("bad date `{d}`")))?;
            let close: f64 = c.trim().parse().map_err(|_| format_err(row, format!("bad close `{c}`")))?;
            if !(close.is_finite() && close >= 0.0) {
                return Err(ChainError::InvariantViolation {
                    row,
                    message: format!("close must be non-negative, got {close}"),
                });
            }
            if points.last().is_some_and(|(prev, _)| *prev >= date) {
                return Err(ChainError::InvariantViolation {
                    row,
                    message: "dates must be strictly increasing".into(),
                });
            }
            points.push((date, close));
        }
        Ok(Self { points })
    }
}
