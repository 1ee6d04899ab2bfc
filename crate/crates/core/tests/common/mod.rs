//! Independent oracles and random generators shared by the integration
//! tests. Nothing here calls the code under test's own evaluation logic:
//! strategy layouts, leg predicates, aggregates and payoffs are re-derived
//! from first principles.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use oql_core::chain::{generate_synthetic, ChainSnapshot, ContractRecord, SyntheticParams};
use oql_core::pricing::{bsm_price, norm_cdf, norm_pdf, Greeks, MarketParams};
use oql_core::syntax::{CompOp, LegCondition, OrderItem, Query, SortDirection, StratCondition, StratPredicate, Symbol, Value};
use oql_core::OptionType;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub const MULTIPLIER: f64 = 100.0;
pub const EPSILON: f64 = 0.15;
pub const EPSILON_ABS: f64 = 0.01;
pub const ATM_BAND: f64 = 0.01;

pub fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

// ---------------------------------------------------------------- pricing

#[derive(Debug, Clone, Copy)]
pub struct Draw {
    pub spot: f64,
    pub strike: f64,
    pub rate: f64,
    pub vol: f64,
    pub tau: f64,
    pub option_type: OptionType,
}

impl Draw {
    pub fn market(&self) -> MarketParams {
        MarketParams::new(self.spot, self.rate, self.vol, self.tau)
    }
}

/// Spot 20..500, log-moneyness within +/-0.5, rate 0..10%, vol 5%..100%,
/// one day to three years.
pub fn random_draw(rng: &mut impl Rng) -> Draw {
    let spot: f64 = rng.random_range(20.0..500.0);
    Draw {
        spot,
        strike: spot * rng.random_range(-0.5f64..0.5).exp(),
        rate: rng.random_range(0.0..0.1),
        vol: rng.random_range(0.05..1.0),
        tau: rng.random_range(1.0 / 365.0..3.0),
        option_type: if rng.random_bool(0.5) { OptionType::Call } else { OptionType::Put },
    }
}

/// Central difference refined by one Richardson step (error O(h^4)).
pub fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Finite-difference Greeks, differencing whichever of the call and put is
/// out of the forward money and mapping back through put-call parity
/// (`C - P = S - K e^{-rt}`). The out-of-the-money price carries no intrinsic
/// part, so its rounding noise is relative to the quantity being
/// differenced. Steps shrink with `1 + d^2` because the log-price curvature
/// grows like `d^2` away from the money; gamma takes a wider step since a
/// second difference amplifies noise by `1/h^2`.
pub fn fd_greeks(d: &Draw) -> Greeks {
    let Draw {
        spot: s,
        strike: k,
        rate: r,
        vol: v,
        tau: t,
        option_type: ty,
    } = *d;
    let df = (-r * t).exp();
    let twin = if s > k * df { OptionType::Put } else { OptionType::Call };
    let price = |s: f64, r: f64, v: f64, t: f64| bsm_price(&MarketParams::new(s, r, v, t), k, twin);
    let sd = v * t.sqrt();
    let dp = ((s / k).ln() + (r + 0.5 * v * v) * t) / sd;
    let w = 0.5 * (1.0 + dp * dp);
    let (hs, hv, ht, hr) = (0.01 * s * sd / w, 0.01 * v / w, 0.01 * t / w, 0.01 * sd / (t * w));
    let hg = 0.04 * s * sd / (1.0 + dp.abs());
    let second = |h: f64| (price(s + h, r, v, t) - 2.0 * price(s, r, v, t) + price(s - h, r, v, t)) / (h * h);
    let mut g = Greeks {
        delta: richardson(|x| price(x, r, v, t), s, hs),
        gamma: (4.0 * second(hg / 2.0) - second(hg)) / 3.0,
        vega: richardson(|x| price(s, r, x, t), v, hv),
        theta: -richardson(|x| price(s, r, v, x), t, ht),
        rho: richardson(|x| price(s, x, v, t), r, hr),
    };
    if twin != ty {
        let sign = if ty == OptionType::Call { 1.0 } else { -1.0 };
        g.delta += sign;
        g.theta -= sign * r * k * df;
        g.rho += sign * k * t * df;
    }
    g
}

/// Magnitude of the larger of the two closed-form theta terms. A put's theta
/// changes sign where they cancel, so relative error there is measured
/// against this scale rather than against the near-zero difference.
pub fn theta_scale(d: &Draw) -> f64 {
    let sd = d.vol * d.tau.sqrt();
    let dp = ((d.spot / d.strike).ln() + (d.rate + 0.5 * d.vol * d.vol) * d.tau) / sd;
    let decay = d.spot * norm_pdf(dp) * d.vol / (2.0 * d.tau.sqrt());
    let carry = d.rate * d.strike * (-d.rate * d.tau).exp();
    decay.max(carry * norm_cdf(if d.option_type == OptionType::Call { dp - sd } else { sd - dp }))
}

// ---------------------------------------------------------------- payoffs

#[derive(Debug, Clone, Copy)]
pub struct OracleLeg {
    pub long: bool,
    pub call: bool,
    pub strike: f64,
    pub quantity: u32,
    pub premium: f64,
}

impl OracleLeg {
    pub fn to_leg(self, tau: f64) -> oql_core::pricing::Leg {
        oql_core::pricing::Leg {
            direction: if self.long { oql_core::Direction::Long } else { oql_core::Direction::Short },
            option_type: if self.call { OptionType::Call } else { OptionType::Put },
            strike: self.strike,
            expiry_tau: tau,
            quantity: self.quantity,
            premium: self.premium,
        }
    }
}

/// Sum over legs of `q * d * (max(0, +/-(S - K)) - premium)`.
pub fn leg_sum_payoff(legs: &[OracleLeg], s: f64) -> f64 {
    let mut total = 0.0;
    for leg in legs {
        let exercise = if leg.call { s - leg.strike } else { leg.strike - s };
        let payoff = if exercise > 0.0 { exercise } else { 0.0 };
        let sign = if leg.long { 1.0 } else { -1.0 };
        total += f64::from(leg.quantity) * sign * (payoff - leg.premium);
    }
    total
}

/// Min and max of the payoff on a uniform grid from 0 to three times the
/// largest strike.
pub fn grid_extremes(legs: &[OracleLeg], step: f64) -> (f64, f64) {
    let top = 3.0 * legs.iter().map(|l| l.strike).fold(0.0, f64::max);
    let n = (top / step).ceil() as usize;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=n {
        let v = leg_sum_payoff(legs, i as f64 * step);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

pub fn random_legs(rng: &mut impl Rng, n: usize) -> Vec<OracleLeg> {
    (0..n)
        .map(|_| OracleLeg {
            long: rng.random_bool(0.5),
            call: rng.random_bool(0.5),
            strike: rng.random_range(50.0..150.0),
            quantity: rng.random_range(1..=3),
            premium: rng.random_range(0.0..15.0),
        })
        .collect()
}

/// A defined-risk structure with strikes on a 0.5 grid and random premiums:
/// vertical spreads, iron condors or call butterflies.
pub fn random_defined_risk(rng: &mut impl Rng) -> (&'static str, Vec<OracleLeg>) {
    let mut strikes: Vec<f64> = (0..4).map(|_| f64::from(rng.random_range(100..300)) * 0.5).collect();
    strikes.sort_by(f64::total_cmp);
    strikes.dedup();
    while strikes.len() < 4 {
        let top = *strikes.last().unwrap();
        strikes.push(top + 0.5);
    }
    let premiums: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..10.0)).collect();
    let mut next = premiums.into_iter();
    let mut p = || next.next().unwrap();
    let leg = |long, call, strike, quantity, premium| OracleLeg {
        long,
        call,
        strike,
        quantity,
        premium,
    };
    let kind = ["bull_call", "bear_put", "bear_call", "condor", "butterfly"][rng.random_range(0..5)];
    let legs = match kind {
        "bull_call" => vec![leg(true, true, strikes[0], 1, p()), leg(false, true, strikes[1], 1, p())],
        "bear_put" => vec![leg(true, false, strikes[1], 1, p()), leg(false, false, strikes[0], 1, p())],
        "bear_call" => vec![leg(false, true, strikes[0], 1, p()), leg(true, true, strikes[1], 1, p())],
        "condor" => vec![
            leg(false, true, strikes[2], 1, p()),
            leg(true, true, strikes[3], 1, p()),
            leg(false, false, strikes[1], 1, p()),
            leg(true, false, strikes[0], 1, p()),
        ],
        _ => vec![
            leg(true, true, strikes[0], 1, p()),
            leg(false, true, strikes[1], 2, p()),
            leg(true, true, strikes[2], 1, p()),
        ],
    };
    (kind, legs)
}

// ---------------------------------------------------------------- grammar

const LEG_FIELDS: [&str; 11] = [
    "Dte", "Strike", "Price", "Volume", "Iv", "Delta", "Gamma", "Vega", "Theta", "Moneyness", "Type",
];
const AGG_FIELDS: [&str; 12] = [
    "net_debit",
    "net_credit",
    "net_delta",
    "net_gamma",
    "net_vega",
    "net_theta",
    "max_loss",
    "max_profit",
    "rr_ratio",
    "width",
    "breakeven_low",
    "breakeven_high",
];
const OPS: [CompOp; 7] = [CompOp::Eq, CompOp::Ne, CompOp::Lt, CompOp::Gt, CompOp::Le, CompOp::Ge, CompOp::Approx];
const SYMBOLS: [Symbol; 5] = [Symbol::Call, Symbol::Put, Symbol::Atm, Symbol::Otm, Symbol::Itm];

const KEYWORDS: [&str; 11] = [
    "SELECT", "FROM", "WHERE", "AND", "HAVING", "ORDER", "BY", "ASC", "DESC", "LIMIT", "BETWEEN",
];

fn random_ident(rng: &mut impl Rng, len: std::ops::RangeInclusive<usize>) -> String {
    loop {
        let s = random_word(rng, len.clone());
        if !KEYWORDS.contains(&s.as_str()) && !SYMBOLS.iter().any(|x| x.name() == s) {
            return s;
        }
    }
}

fn random_word(rng: &mut impl Rng, len: std::ops::RangeInclusive<usize>) -> String {
    let n = rng.random_range(len);
    let mut s: String = (0..n).map(|_| (b'A' + rng.random_range(0..26)) as char).collect();
    if rng.random_bool(0.3) {
        s.push('_');
        s.push((b'A' + rng.random_range(0..26)) as char);
    }
    s
}

pub fn random_number(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..4) {
        0 => f64::from(rng.random_range(-500i32..500)),
        1 => rng.random_range(-1.0..1.0),
        2 => (rng.random_range(-100000.0f64..100000.0) * 100.0).round() / 100.0,
        _ => rng.random_range(-1e4..1e4),
    }
}

/// Any syntactically valid query; names need not exist in the catalog.
pub fn random_ast(rng: &mut impl Rng) -> Query {
    let where_clause = (0..rng.random_range(0..5))
        .map(|_| LegCondition {
            role: rng.random_bool(0.7).then(|| random_ident(rng, 1..=3)),
            field: if rng.random_bool(0.8) {
                LEG_FIELDS.choose(rng).unwrap().to_string()
            } else {
                random_ident(rng, 2..=8).to_lowercase()
            },
            op: *OPS.choose(rng).unwrap(),
            value: if rng.random_bool(0.2) {
                Value::Symbol(*SYMBOLS.choose(rng).unwrap())
            } else {
                Value::Number(random_number(rng))
            },
        })
        .collect();
    let having = (0..rng.random_range(0..4))
        .map(|_| StratCondition {
            field: AGG_FIELDS.choose(rng).unwrap().to_string(),
            predicate: if rng.random_bool(0.3) {
                let a = random_number(rng);
                let b = random_number(rng);
                StratPredicate::Between { lo: a.min(b), hi: a.max(b) }
            } else {
                StratPredicate::Compare {
                    op: *OPS.choose(rng).unwrap(),
                    value: Value::Number(random_number(rng)),
                }
            },
        })
        .collect();
    let order_by = (0..rng.random_range(0..3))
        .map(|_| OrderItem {
            field: AGG_FIELDS.choose(rng).unwrap().to_string(),
            direction: if rng.random_bool(0.5) { SortDirection::Asc } else { SortDirection::Desc },
        })
        .collect();
    Query {
        strategy: random_ident(rng, 3..=10),
        underlying: random_ident(rng, 1..=5).replace('_', ""),
        where_clause,
        having,
        order_by,
        limit: rng.random_bool(0.5).then(|| rng.random_range(1..10_000)),
    }
}

// ---------------------------------------------------------------- chains

pub fn as_of() -> NaiveDate {
    date("2025-03-03")
}

/// A seeded synthetic SPY chain of at most `max_contracts` contracts, with
/// its records shuffled.
pub fn random_snapshot(rng: &mut impl Rng, max_contracts: usize) -> ChainSnapshot {
    let pool = [7u32, 14, 21, 30, 45, 60];
    let n_exp = rng.random_range(1..=3);
    let mut expiries: Vec<u32> = pool.choose_multiple(rng, n_exp).copied().collect();
    expiries.sort_unstable();
    let max_strikes = (max_contracts / (2 * n_exp)).max(1);
    let n_strikes = rng.random_range(2.min(max_strikes)..=max_strikes.min(12));
    let mut grid: Vec<f64> = (0..17).map(|i| 80.0 + 2.5 * f64::from(i)).collect();
    grid.shuffle(rng);
    let mut strikes: Vec<f64> = grid.into_iter().take(n_strikes).collect();
    strikes.sort_by(f64::total_cmp);
    let mut snap = generate_synthetic(&SyntheticParams {
        underlying: "SPY".into(),
        as_of: as_of(),
        spot: 100.0,
        rate: 0.04,
        base_vol: rng.random_range(0.15..0.35),
        skew: rng.random_range(-0.3..0.0),
        term: rng.random_range(-0.05..0.05),
        strikes,
        expiries,
        seed: rng.random(),
        base_volume: 1000.0,
    })
    .unwrap();
    snap.records.shuffle(rng);
    snap
}

// ---------------------------------------------------------------- engine

#[derive(Debug, Clone, Copy)]
pub struct OracleRole {
    pub id: &'static str,
    pub call: bool,
    pub long: bool,
    pub quantity: u32,
}

const fn r(id: &'static str, call: bool, long: bool, quantity: u32) -> OracleRole {
    OracleRole { id, call, long, quantity }
}

/// Role layout of each strategy, written out independently of the catalog.
pub fn oracle_roles(strategy: &str) -> Vec<OracleRole> {
    match strategy {
        "LONG_CALL" => vec![r("L", true, true, 1)],
        "LONG_PUT" => vec![r("L", false, true, 1)],
        "BULL_CALL_SPREAD" => vec![r("L", true, true, 1), r("S", true, false, 1)],
        "BEAR_PUT_SPREAD" => vec![r("L", false, true, 1), r("S", false, false, 1)],
        "BEAR_CALL_SPREAD" => vec![r("S", true, false, 1), r("L", true, true, 1)],
        "CALENDAR_CALL" => vec![r("F", true, false, 1), r("B", true, true, 1)],
        "STRADDLE" => vec![r("C", true, true, 1), r("P", false, true, 1)],
        "STRANGLE" => vec![r("P", false, true, 1), r("C", true, true, 1)],
        "IRON_CONDOR" => vec![
            r("SC", true, false, 1),
            r("LC", true, true, 1),
            r("SP", false, false, 1),
            r("LP", false, true, 1),
        ],
        "BUTTERFLY_CALL" => vec![r("L1", true, true, 1), r("S", true, false, 2), r("L2", true, true, 1)],
        other => panic!("oracle has no layout for {other}"),
    }
}

pub const STRATEGIES: [&str; 10] = [
    "LONG_CALL",
    "LONG_PUT",
    "BULL_CALL_SPREAD",
    "BEAR_PUT_SPREAD",
    "BEAR_CALL_SPREAD",
    "CALENDAR_CALL",
    "STRADDLE",
    "STRANGLE",
    "IRON_CONDOR",
    "BUTTERFLY_CALL",
];

/// Structural rules of each strategy over the chosen contracts, keyed by role.
pub fn oracle_structure(strategy: &str, c: &BTreeMap<&str, &ContractRecord>) -> bool {
    let k = |role: &str| c[role].strike;
    let t = |role: &str| c[role].expiry;
    let same_t = |roles: &[&str]| roles.iter().all(|x| t(x) == t(roles[0]));
    match strategy {
        "LONG_CALL" | "LONG_PUT" => true,
        "BULL_CALL_SPREAD" => k("L") < k("S") && same_t(&["L", "S"]),
        "BEAR_PUT_SPREAD" => k("S") < k("L") && same_t(&["L", "S"]),
        "BEAR_CALL_SPREAD" => k("S") < k("L") && same_t(&["L", "S"]),
        "CALENDAR_CALL" => k("F") == k("B") && t("F") < t("B"),
        "STRADDLE" => k("C") == k("P") && same_t(&["C", "P"]),
        "STRANGLE" => k("P") < k("C") && same_t(&["C", "P"]),
        "IRON_CONDOR" => k("LP") < k("SP") && k("SP") < k("SC") && k("SC") < k("LC") && same_t(&["SC", "LC", "SP", "LP"]),
        "BUTTERFLY_CALL" => k("L1") < k("S") && k("S") < k("L2") && same_t(&["L1", "S", "L2"]),
        other => panic!("oracle has no rules for {other}"),
    }
}

fn oracle_compare(actual: f64, op: CompOp, target: f64) -> bool {
    match op {
        CompOp::Eq => actual == target,
        CompOp::Ne => actual != target,
        CompOp::Lt => actual < target,
        CompOp::Gt => actual > target,
        CompOp::Le => actual <= target,
        CompOp::Ge => actual >= target,
        CompOp::Approx => {
            let band = if target == 0.0 { EPSILON_ABS } else { EPSILON * target.abs() };
            (actual - target).abs() <= band * (1.0 + 1e-12)
        }
    }
}

fn oracle_leg_value(field: &str, c: &ContractRecord, spot: f64) -> Result<f64, &'static str> {
    Ok(match field {
        "Dte" => (c.expiry - c.as_of).num_days() as f64,
        "Strike" => c.strike,
        "Price" => c.price,
        "Volume" => c.volume as f64,
        "Iv" => c.iv,
        "Delta" => c.delta,
        "Gamma" => c.gamma,
        "Vega" => c.vega,
        "Theta" => c.theta,
        "Moneyness" => {
            return Ok(if (c.strike - spot).abs() / spot <= ATM_BAND {
                1.0
            } else if (c.option_type == OptionType::Call) == (c.strike < spot) {
                2.0
            } else {
                3.0
            })
        }
        "Type" => return Ok(if c.option_type == OptionType::Call { 10.0 } else { 11.0 }),
        _ => return Err("unknown field"),
    })
}

fn symbol_code(s: Symbol) -> f64 {
    match s {
        Symbol::Atm => 1.0,
        Symbol::Itm => 2.0,
        Symbol::Otm => 3.0,
        Symbol::Call => 10.0,
        Symbol::Put => 11.0,
    }
}

fn oracle_leg_ok(cond: &LegCondition, c: &ContractRecord, spot: f64) -> bool {
    let actual = oracle_leg_value(&cond.field, c, spot).unwrap();
    match cond.value {
        Value::Number(t) => oracle_compare(actual, cond.op, t),
        Value::Symbol(s) => match cond.op {
            CompOp::Eq => actual == symbol_code(s),
            CompOp::Ne => actual != symbol_code(s),
            _ => false,
        },
    }
}

/// Aggregates recomputed from the chosen contracts. Breakevens are not
/// produced; `f64::INFINITY` marks an unbounded extreme.
pub fn oracle_aggregates(strategy: &str, roles: &[OracleRole], c: &BTreeMap<&str, &ContractRecord>) -> BTreeMap<&'static str, Option<f64>> {
    let sgn = |r: &OracleRole| f64::from(r.quantity) * if r.long { 1.0 } else { -1.0 };
    let sum = |f: &dyn Fn(&ContractRecord) -> f64| roles.iter().map(|r| sgn(r) * f(c[r.id])).sum::<f64>() * MULTIPLIER;
    let cash = sum(&|x| x.price);
    let mut out = BTreeMap::new();
    out.insert("net_debit", if cash > 0.0 { Some(cash) } else if cash < 0.0 { None } else { Some(0.0) });
    out.insert("net_credit", if cash < 0.0 { Some(-cash) } else if cash > 0.0 { None } else { Some(0.0) });
    out.insert("net_delta", Some(sum(&|x| x.delta)));
    out.insert("net_gamma", Some(sum(&|x| x.gamma)));
    out.insert("net_vega", Some(sum(&|x| x.vega)));
    out.insert("net_theta", Some(sum(&|x| x.theta)));
    let ks: Vec<f64> = roles.iter().map(|r| c[r.id].strike).collect();
    out.insert("width", Some(ks.iter().cloned().fold(f64::MIN, f64::max) - ks.iter().cloned().fold(f64::MAX, f64::min)));

    let (loss, profit) = if strategy == "CALENDAR_CALL" {
        (if cash > 0.0 { Some(cash) } else { None }, None)
    } else {
        let legs: Vec<OracleLeg> = roles
            .iter()
            .map(|r| OracleLeg {
                long: r.long,
                call: r.call,
                strike: c[r.id].strike,
                quantity: r.quantity,
                premium: c[r.id].price,
            })
            .collect();
        let mut kinks = vec![0.0];
        kinks.extend(ks.iter().copied());
        let values: Vec<f64> = kinks.iter().map(|&s| leg_sum_payoff(&legs, s)).collect();
        let slope: f64 = legs
            .iter()
            .filter(|l| l.call)
            .map(|l| f64::from(l.quantity) * if l.long { 1.0 } else { -1.0 })
            .sum();
        let hi = values.iter().cloned().fold(f64::MIN, f64::max);
        let lo = values.iter().cloned().fold(f64::MAX, f64::min);
        let profit = if slope > 0.0 { f64::INFINITY } else { hi * MULTIPLIER };
        let loss = if slope < 0.0 { f64::INFINITY } else { -lo * MULTIPLIER };
        (Some(loss), Some(profit))
    };
    out.insert("max_loss", loss);
    out.insert("max_profit", profit);
    let rr = match (profit, loss) {
        (Some(p), Some(l)) if p.is_finite() && l.is_finite() && l > 0.0 => Some(p / l),
        _ => None,
    };
    out.insert("rr_ratio", rr);
    out
}

pub type Assignment = BTreeMap<String, String>;

/// Every assignment of distinct contracts to roles that satisfies the
/// layout, the structural rules, WHERE and HAVING; full enumeration
/// without pruning. LIMIT and ORDER BY are ignored.
pub fn brute_force(query: &Query, snap: &ChainSnapshot) -> BTreeSet<Assignment> {
    let roles = oracle_roles(&query.strategy);
    let mut out = BTreeSet::new();
    let n = snap.records.len();
    let mut idx = vec![0usize; roles.len()];
    if n == 0 {
        return out;
    }
    loop {
        let distinct = {
            let mut s = idx.clone();
            s.sort_unstable();
            s.windows(2).all(|w| w[0] != w[1])
        };
        if distinct {
            let chosen: BTreeMap<&str, &ContractRecord> = roles.iter().zip(&idx).map(|(r, &i)| (r.id, &snap.records[i])).collect();
            if oracle_accepts(query, &roles, &chosen, snap.spot) {
                out.insert(chosen.iter().map(|(r, c)| (r.to_string(), c.ticker.clone())).collect());
            }
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return out;
            }
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Checks one complete assignment against every clause of the query.
pub fn oracle_accepts(query: &Query, roles: &[OracleRole], chosen: &BTreeMap<&str, &ContractRecord>, spot: f64) -> bool {
    let types_ok = roles
        .iter()
        .all(|r| (chosen[r.id].option_type == OptionType::Call) == r.call);
    if !types_ok || !oracle_structure(&query.strategy, chosen) {
        return false;
    }
    for cond in &query.where_clause {
        let targets: Vec<&str> = match &cond.role {
            Some(role) => vec![roles.iter().find(|r| r.id == role).expect("role exists").id],
            None => roles.iter().map(|r| r.id).collect(),
        };
        if !targets.iter().all(|r| oracle_leg_ok(cond, chosen[r], spot)) {
            return false;
        }
    }
    let aggs = oracle_aggregates(&query.strategy, roles, chosen);
    query.having.iter().all(|h| {
        let Some(actual) = aggs[h.field.as_str()] else {
            return false;
        };
        match h.predicate {
            StratPredicate::Between { lo, hi } => lo <= actual && actual <= hi,
            StratPredicate::Compare { op, value: Value::Number(t) } => oracle_compare(actual, op, t),
            StratPredicate::Compare { .. } => false,
        }
    })
}

const ORACLE_AGGS: [&str; 10] = [
    "net_debit",
    "net_credit",
    "net_delta",
    "net_gamma",
    "net_vega",
    "net_theta",
    "max_loss",
    "max_profit",
    "rr_ratio",
    "width",
];

fn leg_condition_for(rng: &mut impl Rng, snap: &ChainSnapshot, roles: &[OracleRole]) -> LegCondition {
    let role = rng.random_bool(0.8).then(|| roles.choose(rng).unwrap().id.to_string());
    let field = LEG_FIELDS.choose(rng).unwrap().to_string();
    let sample = snap.records.choose(rng).unwrap();
    let (op, value) = match field.as_str() {
        "Moneyness" => (
            *[CompOp::Eq, CompOp::Ne].choose(rng).unwrap(),
            Value::Symbol(*[Symbol::Atm, Symbol::Itm, Symbol::Otm].choose(rng).unwrap()),
        ),
        "Type" => (
            *[CompOp::Eq, CompOp::Ne].choose(rng).unwrap(),
            Value::Symbol(*[Symbol::Call, Symbol::Put].choose(rng).unwrap()),
        ),
        f => {
            let actual = oracle_leg_value(f, sample, snap.spot).unwrap();
            let value = if matches!(f, "Dte" | "Strike") || rng.random_bool(0.2) {
                actual
            } else {
                actual * rng.random_range(0.6..1.4)
            };
            (*OPS.choose(rng).unwrap(), Value::Number(value))
        }
    };
    LegCondition { role, field, op, value }
}

fn having_for(rng: &mut impl Rng) -> StratCondition {
    let field = *ORACLE_AGGS.choose(rng).unwrap();
    let scale = match field {
        "net_debit" | "max_loss" => 1500.0,
        "net_credit" => 800.0,
        "max_profit" => 3000.0,
        "rr_ratio" => 4.0,
        "width" => 30.0,
        "net_delta" => 100.0,
        "net_gamma" => 10.0,
        "net_vega" => 2000.0,
        _ => 3000.0,
    };
    let signed = matches!(field, "net_delta" | "net_gamma" | "net_vega" | "net_theta");
    let draw = |rng: &mut _| -> f64 {
        let x: f64 = Rng::random_range(rng, 0.0..scale);
        if signed && Rng::random_bool(rng, 0.5) {
            -x
        } else {
            x
        }
    };
    let predicate = if rng.random_bool(0.25) {
        let (a, b) = (draw(rng), draw(rng));
        StratPredicate::Between { lo: a.min(b), hi: a.max(b) }
    } else {
        let value = Value::Number(draw(rng));
        StratPredicate::Compare {
            op: *OPS.choose(rng).unwrap(),
            value,
        }
    };
    StratCondition {
        field: field.to_string(),
        predicate,
    }
}

/// A valid query for `snap`'s underlying with random WHERE and HAVING
/// conditions drawn near values present in the chain.
pub fn random_query(rng: &mut impl Rng, snap: &ChainSnapshot) -> Query {
    let strategy = *STRATEGIES.choose(rng).unwrap();
    let roles = oracle_roles(strategy);
    let where_clause = (0..rng.random_range(0..4)).map(|_| leg_condition_for(rng, snap, &roles)).collect();
    let having = (0..rng.random_range(0..3)).map(|_| having_for(rng)).collect();
    let order_by = (0..rng.random_range(0..3))
        .map(|_| OrderItem {
            field: ORACLE_AGGS.choose(rng).unwrap().to_string(),
            direction: if rng.random_bool(0.5) { SortDirection::Asc } else { SortDirection::Desc },
        })
        .collect();
    Query {
        strategy: strategy.to_string(),
        underlying: snap.underlying.clone(),
        where_clause,
        having,
        order_by,
        limit: rng.random_bool(0.3).then(|| rng.random_range(1..20)),
    }
}

/// `query` plus one more random condition, WHERE or HAVING.
pub fn tighten(rng: &mut impl Rng, query: &Query, snap: &ChainSnapshot) -> Query {
    let mut q = query.clone();
    if rng.random_bool(0.6) {
        let roles = oracle_roles(&q.strategy);
        q.where_clause.push(leg_condition_for(rng, snap, &roles));
    } else {
        q.having.push(having_for(rng));
    }
    q
}

pub fn assignment_of(inst: &oql_core::StrategyInstance) -> Assignment {
    inst.legs.iter().map(|l| (l.role.clone(), l.contract.ticker.clone())).collect()
}
