//! Shared fixtures for the benchmarks.

use chrono::NaiveDate;
use oql_core::chain::{generate_synthetic, SyntheticParams};
use oql_core::ChainSnapshot;

pub const CONDOR: &str = "SELECT IRON_CONDOR FROM SPY
WHERE Dte ~ 30
AND SC.Delta < 0.20
AND LC.Delta < 0.05
AND SP.Delta > -0.20
AND LP.Delta > -0.05
HAVING net_theta > 0 AND max_loss < 500
ORDER BY rr_ratio DESC
LIMIT 10";

/// A seeded chain with `strikes` strikes at 1-point spacing around 100 and
/// six expiries.
pub fn chain(strikes: usize) -> ChainSnapshot {
    let lo = 100.0 - (strikes / 2) as f64;
    generate_synthetic(&SyntheticParams {
        underlying: "SPY".into(),
        as_of: NaiveDate::from_ymd_opt(2025, 1, 2).expect("valid date"),
        spot: 100.0,
        rate: 0.04,
        base_vol: 0.25,
        skew: -0.1,
        term: 0.0,
        strikes: (0..strikes).map(|i| lo + i as f64).collect(),
        expiries: vec![7, 14, 21, 30, 45, 60],
        seed: 1,
        base_volume: 5000.0,
    })
    .expect("valid parameters")
}
