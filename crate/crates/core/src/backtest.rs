//! Mark-to-model PnL paths for executed strategies, and the win-rate, risk
//! exposure, profit and return-on-cost statistics computed from them.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSnapshot, SpotSeries};
use crate::engine::{LegRecord, ResultDocument, StrategyRecord};
use crate::error::BacktestError;
use crate::pricing::{bsm_price, intrinsic, year_fraction, MarketParams};

/// How open legs are valued between entry and expiry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValuationPolicy {
    /// Each leg revalued by BSM at its own entry IV.
    #[default]
    StickyEntry,
    /// Each leg marked at its quoted price in daily chain snapshots.
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub entry_date: NaiveDate,
    pub exit_date: NaiveDate,
    pub rate: f64,
    pub multiplier: f64,
    pub policy: ValuationPolicy,
}

impl BacktestConfig {
    pub fn validate(&self) -> Result<(), BacktestError> {
        if self.entry_date >= self.exit_date {
            return Err(BacktestError::Window(format!(
                "entry {} must precede exit {}",
                self.entry_date, self.exit_date
            )));
        }
        if self.multiplier.is_nan() || self.multiplier < 1.0 {
            return Err(BacktestError::Window(format!("multiplier must be at least 1, got {}", self.multiplier)));
        }
        Ok(())
    }

    fn dates(&self) -> impl Iterator<Item = NaiveDate> {
        self.entry_date.iter_days().take_while({
            let exit = self.exit_date;
            move |d| *d <= exit
        })
    }
}

/// Cumulative PnL of one strategy on a daily calendar grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnlPath {
    pub dates: Vec<NaiveDate>,
    pub pnl: Vec<f64>,
    /// Signed entry cash flow; positive for a net debit.
    pub entry_cash: f64,
}

impl PnlPath {
    pub fn final_pnl(&self) -> f64 {
        *self.pnl.last().expect("paths are non-empty")
    }

    pub fn min_pnl(&self) -> f64 {
        self.pnl.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn signed_qty(leg: &LegRecord) -> f64 {
    f64::from(leg.quantity) * leg.direction.sign()
}

pub fn entry_cash(record: &StrategyRecord, multiplier: f64) -> f64 {
    record.legs.iter().map(|l| signed_qty(l) * l.price).sum::<f64>() * multiplier
}

/// Values every leg on every day of the window and sums
/// `q * d * (V_t - p_entry) * multiplier`. On the entry date legs are marked
/// at their entry premiums, so `P(0) = 0`. A leg whose expiry falls inside
/// the window settles at intrinsic on its expiry date and stays there.
pub fn mark_path(record: &StrategyRecord, spots: &SpotSeries, config: &BacktestConfig) -> Result<PnlPath, BacktestError> {
    config.validate()?;
    mark_with(record, config, |leg, date| {
        let settle = date.min(leg.expiry);
        let spot = spots.get(settle).ok_or(BacktestError::MissingSpot(settle))?;
        Ok(model_value(leg, spot, settle, config.rate))
    })
}

/// Like [`mark_path`], but open legs are marked at their quoted price in the
/// snapshot of each day. Expired legs settle at intrinsic on the snapshot
/// spot of their expiry date.
pub fn mark_path_snapshots(
    record: &StrategyRecord,
    snapshots: &BTreeMap<NaiveDate, ChainSnapshot>,
    config: &BacktestConfig,
) -> Result<PnlPath, BacktestError> {
    config.validate()?;
    mark_with(record, config, |leg, date| {
        if date >= leg.expiry {
            let snap = snapshots.get(&leg.expiry).ok_or(BacktestError::MissingSpot(leg.expiry))?;
            return Ok(intrinsic(leg.option_type, snap.spot, leg.strike));
        }
        let snap = snapshots.get(&date).ok_or(BacktestError::MissingSpot(date))?;
        snap.records
            .iter()
            .find(|r| r.ticker == leg.ticker)
            .map(|r| r.price)
            .ok_or_else(|| BacktestError::MissingQuote {
                ticker: leg.ticker.clone(),
                date,
            })
    })
}

fn model_value(leg: &LegRecord, spot: f64, on: NaiveDate, rate: f64) -> f64 {
    let tau = year_fraction((leg.expiry - on).num_days().max(0));
    bsm_price(&MarketParams::new(spot, rate, leg.iv, tau), leg.strike, leg.option_type)
}

fn mark_with(
    record: &StrategyRecord,
    config: &BacktestConfig,
    mut value: impl FnMut(&LegRecord, NaiveDate) -> Result<f64, BacktestError>,
) -> Result<PnlPath, BacktestError> {
    let mut dates = Vec::new();
    let mut pnl = Vec::new();
    for date in config.dates() {
        let mut total = 0.0;
        if date != config.entry_date {
            for leg in &record.legs {
                total += signed_qty(leg) * (value(leg, date)? - leg.price);
            }
        }
        dates.push(date);
        pnl.push(total * config.multiplier);
    }
    Ok(PnlPath {
        dates,
        pnl,
        entry_cash: entry_cash(record, config.multiplier),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buyer,
    Seller,
}

/// Buyer iff the entry is a net debit. A zero-cost entry counts as a buyer.
pub fn classify_side(entry_cash: f64) -> Side {
    if entry_cash < 0.0 {
        Side::Seller
    } else {
        Side::Buyer
    }
}

/// True iff the path's minimum is at or below `-tau_frac * |entry_cash|`.
pub fn risk_exposure(path: &PnlPath, tau_frac: f64) -> bool {
    path.min_pnl() <= -tau_frac * path.entry_cash.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    pub strategy_type: String,
    pub tickers: Vec<String>,
    pub side: Side,
    pub entry_cash: f64,
    pub final_pnl: f64,
    pub min_pnl: f64,
    /// `None` for zero-cost entries.
    pub roc: Option<f64>,
    pub re50_hit: bool,
    pub re90_hit: bool,
    pub zero_cost: bool,
}

impl StrategyOutcome {
    pub fn from_path(record: &StrategyRecord, path: &PnlPath) -> Self {
        let final_pnl = path.final_pnl();
        let zero_cost = path.entry_cash == 0.0;
        Self {
            strategy_type: record.strategy_type.clone(),
            tickers: record.legs.iter().map(|l| l.ticker.clone()).collect(),
            side: classify_side(path.entry_cash),
            entry_cash: path.entry_cash,
            final_pnl,
            min_pnl: path.min_pnl(),
            roc: (!zero_cost).then(|| final_pnl / path.entry_cash.abs()),
            re50_hit: risk_exposure(path, 0.5),
            re90_hit: risk_exposure(path, 0.9),
            zero_cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CohortStats {
    pub count: usize,
    pub wr: Option<f64>,
    pub re50: Option<f64>,
    pub re90: Option<f64>,
    pub mean_profit: Option<f64>,
    pub mean_roc: Option<f64>,
    /// Zero-cost strategies, left out of `mean_roc`.
    pub zero_cost: usize,
}

/// Order-independent mean: values are summed in sorted order.
fn mean(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    Some(xs.iter().sum::<f64>() / xs.len() as f64)
}

fn rate(outcomes: &[&StrategyOutcome], hit: impl Fn(&StrategyOutcome) -> bool) -> Option<f64> {
    (!outcomes.is_empty()).then(|| outcomes.iter().filter(|o| hit(o)).count() as f64 / outcomes.len() as f64)
}

pub fn cohort_stats(outcomes: &[&StrategyOutcome]) -> CohortStats {
    CohortStats {
        count: outcomes.len(),
        wr: rate(outcomes, |o| o.final_pnl > 0.0),
        re50: rate(outcomes, |o| o.re50_hit),
        re90: rate(outcomes, |o| o.re90_hit),
        mean_profit: mean(outcomes.iter().map(|o| o.final_pnl).collect()),
        mean_roc: mean(outcomes.iter().filter_map(|o| o.roc).collect()),
        zero_cost: outcomes.iter().filter(|o| o.zero_cost).count(),
    }
}

/// Which strategies of each result set enter the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cohort {
    #[default]
    All,
    /// Only the rank-1 strategy of each query.
    Top,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub config: BacktestConfig,
    pub cohort: Cohort,
    pub overall: CohortStats,
    pub buyer: CohortStats,
    pub seller: CohortStats,
    pub strategies: Vec<StrategyOutcome>,
}

pub fn report(outcomes: Vec<StrategyOutcome>, config: BacktestConfig, cohort: Cohort) -> Result<BacktestReport, BacktestError> {
    if outcomes.is_empty() {
        return Err(BacktestError::Empty);
    }
    let all: Vec<&StrategyOutcome> = outcomes.iter().collect();
    let side = |s: Side| -> Vec<&StrategyOutcome> { outcomes.iter().filter(|o| o.side == s).collect() };
    Ok(BacktestReport {
        overall: cohort_stats(&all),
        buyer: cohort_stats(&side(Side::Buyer)),
        seller: cohort_stats(&side(Side::Seller)),
        config,
        cohort,
        strategies: outcomes,
    })
}

/// Source of daily valuations for [`backtest_documents`].
#[derive(Debug, Clone, Copy)]
pub enum Marks<'a> {
    Spots(&'a SpotSeries),
    Snapshots(&'a BTreeMap<NaiveDate, ChainSnapshot>),
}

impl Marks<'_> {
    pub fn mark(&self, record: &StrategyRecord, config: &BacktestConfig) -> Result<PnlPath, BacktestError> {
        match self {
            Marks::Spots(spots) => mark_path(record, spots, config),
            Marks::Snapshots(snaps) => mark_path_snapshots(record, snaps, config),
        }
    }
}

/// Marks every selected strategy of the given result documents and reports.
pub fn backtest_documents(
    docs: &[ResultDocument],
    marks: Marks<'_>,
    config: &BacktestConfig,
    cohort: Cohort,
) -> Result<BacktestReport, BacktestError> {
    let mut outcomes = Vec::new();
    for doc in docs {
        let take = match cohort {
            Cohort::All => doc.strategies.len(),
            Cohort::Top => 1,
        };
        for record in doc.strategies.iter().take(take) {
            let path = marks.mark(record, config)?;
            outcomes.push(StrategyOutcome::from_path(record, &path));
        }
    }
    report(outcomes, config.clone(), cohort)
}
