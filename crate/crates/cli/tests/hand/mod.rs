//! Expected values for `fixtures/hand_results.json` over `fixtures/hand_spots.csv`.
//!
//! Each strategy expires on the exit date with the underlying at 103, one day
//! after entry, so its path is `[0, payoff - cost]` and every number below is
//! plain arithmetic on the fixture's premiums (multiplier 100).
#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub struct Row {
    pub entry_cash: f64,
    pub final_pnl: f64,
    pub roc: f64,
    pub re50: bool,
    pub re90: bool,
}

const fn row(entry_cash: f64, final_pnl: f64, roc: f64, re50: bool, re90: bool) -> Row {
    Row {
        entry_cash,
        final_pnl,
        roc,
        re50,
        re90,
    }
}

pub const ROWS: [Row; 20] = [
    row(200.0, 100.0, 100.0 / 200.0, false, false),
    row(100.0, -100.0, -1.0, true, true),
    row(150.0, -150.0, -1.0, true, true),
    row(300.0, -100.0, -100.0 / 300.0, false, false),
    row(100.0, 200.0, 2.0, false, false),
    row(300.0, 200.0, 200.0 / 300.0, false, false),
    row(50.0, -50.0, -1.0, true, true),
    row(150.0, 50.0, 50.0 / 150.0, false, false),
    row(100.0, -100.0, -1.0, true, true),
    row(-100.0, -200.0, -2.0, true, true),
    row(-50.0, 50.0, 1.0, false, false),
    row(350.0, -50.0, -50.0 / 350.0, false, false),
    // Loss of exactly half the cost: a breach at tau = 0.5.
    row(400.0, -200.0, -0.5, true, false),
    row(150.0, -150.0, -1.0, true, true),
    row(200.0, -200.0, -1.0, true, true),
    row(-150.0, 150.0, 1.0, false, false),
    row(-125.0, -175.0, -175.0 / 125.0, true, true),
    row(200.0, 0.0, 0.0, false, false),
    row(50.0, 250.0, 5.0, false, false),
    row(500.0, 300.0, 300.0 / 500.0, false, false),
];

pub const WR: f64 = 8.0 / 20.0;
pub const RE50: f64 = 9.0 / 20.0;
pub const RE90: f64 = 8.0 / 20.0;
pub const MEAN_PROFIT: f64 = -175.0 / 20.0;
/// Sum of the twenty ROCs is 0.2 + 2/3 - 1/7 = 76/105.
pub const MEAN_ROC: f64 = 19.0 / 525.0;
pub const BUYER_COUNT: usize = 16;
pub const BUYER_WR: f64 = 6.0 / 16.0;
pub const SELLER_COUNT: usize = 4;
pub const SELLER_WR: f64 = 2.0 / 4.0;
pub const SELLER_MEAN_ROC: f64 = -1.4 / 4.0;
