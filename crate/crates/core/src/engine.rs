//! Deterministic executor: role-wise filtering, Cartesian assembly under the
//! schema's structural rules, aggregate computation, HAVING, ORDER BY, LIMIT.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::catalog::{
    BoundLegCondition, BoundPredicate, BoundStratCondition, Catalog, CatalogOptions, StrategySchema,
    ValidatedQuery,
};
use crate::chain::{ChainSnapshot, ContractRecord, DerivedLegFields, DEFAULT_ATM_BAND};
use crate::error::{EngineError, OqlError};
use crate::fields::{AggField, LegField};
use crate::pricing::{entry_cash, payoff_extremes, Leg};
use crate::syntax::{parse_query, pretty_print, CompOp, SortDirection, Symbol, Value};
use crate::types::{Direction, Moneyness, OptionType};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Relative tolerance of the `~` operator.
    pub epsilon: f64,
    /// Absolute band used by `~ 0`, where the relative band would be empty.
    pub epsilon_abs: f64,
    /// Per-field overrides of `epsilon` for leg conditions.
    pub field_epsilon: BTreeMap<LegField, f64>,
    pub atm_band: f64,
    pub multiplier: f64,
    /// Largest raw Cartesian product the assembler will enumerate.
    pub combinatorial_cap: u64,
    pub symmetric_butterfly: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.15,
            epsilon_abs: 0.01,
            field_epsilon: BTreeMap::new(),
            atm_band: DEFAULT_ATM_BAND,
            multiplier: 100.0,
            combinatorial_cap: 10_000_000,
            symmetric_butterfly: false,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), String> {
        let eps_ok = |e: f64| e > 0.0 && e < 1.0;
        if !eps_ok(self.epsilon) {
            return Err(format!("epsilon must be in (0, 1), got {}", self.epsilon));
        }
        if let Some((field, e)) = self.field_epsilon.iter().find(|(_, e)| !eps_ok(**e)) {
            return Err(format!("epsilon for {field} must be in (0, 1), got {e}"));
        }
        if self.epsilon_abs.is_nan() || self.epsilon_abs < 0.0 {
            return Err(format!("epsilon_abs must be non-negative, got {}", self.epsilon_abs));
        }
        if self.atm_band.is_nan() || self.atm_band < 0.0 {
            return Err(format!("atm_band must be non-negative, got {}", self.atm_band));
        }
        if self.multiplier.is_nan() || self.multiplier < 1.0 {
            return Err(format!("multiplier must be at least 1, got {}", self.multiplier));
        }
        if self.combinatorial_cap < 1 {
            return Err("combinatorial_cap must be at least 1".into());
        }
        Ok(())
    }

    pub fn catalog(&self) -> Catalog {
        Catalog::new(CatalogOptions {
            symmetric_butterfly: self.symmetric_butterfly,
        })
    }

    fn epsilon_for(&self, field: LegField) -> f64 {
        self.field_epsilon.get(&field).copied().unwrap_or(self.epsilon)
    }
}

/// `|a - target| <= eps * |target|`, or `|a| <= eps_abs` when the target is 0.
pub fn soft_match(actual: f64, target: f64, epsilon: f64, epsilon_abs: f64) -> bool {
    let band = if target == 0.0 { epsilon_abs } else { epsilon * target.abs() };
    // A few ulps of slack so decimal boundaries such as 0.345 stay inclusive.
    (actual - target).abs() <= band * (1.0 + 1e-12)
}

fn compare(actual: f64, op: CompOp, target: f64, epsilon: f64, epsilon_abs: f64) -> bool {
    match op {
        CompOp::Eq => actual == target,
        CompOp::Ne => actual != target,
        CompOp::Lt => actual < target,
        CompOp::Gt => actual > target,
        CompOp::Le => actual <= target,
        CompOp::Ge => actual >= target,
        CompOp::Approx => soft_match(actual, target, epsilon, epsilon_abs),
    }
}

/// Numeric value of a leg field, `None` for categorical fields.
pub fn leg_field_value(field: LegField, record: &ContractRecord, derived: &DerivedLegFields) -> Option<f64> {
    Some(match field {
        LegField::Dte => derived.dte as f64,
        LegField::Strike => record.strike,
        LegField::Price => record.price,
        LegField::Volume => record.volume as f64,
        LegField::Iv => record.iv,
        LegField::Delta => record.delta,
        LegField::Gamma => record.gamma,
        LegField::Vega => record.vega,
        LegField::Theta => record.theta,
        LegField::Moneyness | LegField::Type => return None,
    })
}

fn symbol_matches(field: LegField, record: &ContractRecord, derived: &DerivedLegFields, sym: Symbol) -> bool {
    match field {
        LegField::Type => match sym {
            Symbol::Call => record.option_type == OptionType::Call,
            Symbol::Put => record.option_type == OptionType::Put,
            _ => false,
        },
        LegField::Moneyness => match sym {
            Symbol::Atm => derived.moneyness == Moneyness::Atm,
            Symbol::Itm => derived.moneyness == Moneyness::Itm,
            Symbol::Otm => derived.moneyness == Moneyness::Otm,
            _ => false,
        },
        _ => false,
    }
}

pub fn eval_leg_condition(
    cond: &BoundLegCondition,
    record: &ContractRecord,
    derived: &DerivedLegFields,
    config: &EngineConfig,
) -> bool {
    match cond.value {
        Value::Number(target) => match leg_field_value(cond.field, record, derived) {
            Some(actual) => compare(actual, cond.op, target, config.epsilon_for(cond.field), config.epsilon_abs),
            None => false,
        },
        Value::Symbol(sym) => {
            let hit = symbol_matches(cond.field, record, derived, sym);
            match cond.op {
                CompOp::Eq => hit,
                CompOp::Ne => !hit,
                _ => false,
            }
        }
    }
}

/// Contracts that may fill one role.
#[derive(Debug, Clone)]
pub struct CandidateSet<'a> {
    pub role: String,
    /// Sorted by (expiry, strike, ticker).
    pub contracts: Vec<&'a ContractRecord>,
}

/// Applies the role's option type and every WHERE condition bound to it.
pub fn filter_legs<'a>(vq: &ValidatedQuery, snapshot: &'a ChainSnapshot, config: &EngineConfig) -> Vec<CandidateSet<'a>> {
    vq.schema
        .roles
        .iter()
        .map(|role| {
            let conditions = vq.conditions_for(&role.id);
            let mut contracts: Vec<&ContractRecord> = snapshot
                .records
                .iter()
                .filter(|r| r.option_type == role.option_type)
                .filter(|r| {
                    let derived = snapshot.derived(r, config.atm_band);
                    conditions.iter().all(|c| eval_leg_condition(c, r, &derived, config))
                })
                .collect();
            contracts.sort_by(|a, b| cmp_records(a, b));
            CandidateSet {
                role: role.id.clone(),
                contracts,
            }
        })
        .collect()
}

fn cmp_records(a: &ContractRecord, b: &ContractRecord) -> Ordering {
    let (ea, ka, ta) = a.order_key();
    let (eb, kb, tb) = b.order_key();
    ea.cmp(&eb).then(ka.total_cmp(&kb)).then(ta.cmp(tb))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyLeg {
    pub role: String,
    pub direction: Direction,
    pub quantity: u32,
    pub contract: ContractRecord,
}

impl StrategyLeg {
    pub fn to_pricing_leg(&self) -> Leg {
        Leg {
            direction: self.direction,
            option_type: self.contract.option_type,
            strike: self.contract.strike,
            expiry_tau: self.contract.tau(),
            quantity: self.quantity,
            premium: self.contract.price,
        }
    }

    fn signed_qty(&self) -> f64 {
        f64::from(self.quantity) * self.direction.sign()
    }
}

/// Aggregates of an assembled strategy, in multiplied dollars where money is
/// involved. `None` marks a value that is undefined for this structure; any
/// HAVING condition on it rejects the strategy. An unbounded extreme is
/// stored as `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    /// Signed entry cash flow: positive for a net debit, negative for a net credit.
    pub entry_cash: f64,
    pub net_debit: Option<f64>,
    pub net_credit: Option<f64>,
    pub net_delta: f64,
    pub net_gamma: f64,
    pub net_vega: f64,
    pub net_theta: f64,
    pub max_loss: Option<f64>,
    pub max_profit: Option<f64>,
    pub rr_ratio: Option<f64>,
    pub width: f64,
    pub breakeven_low: Option<f64>,
    pub breakeven_high: Option<f64>,
}

impl Aggregates {
    pub fn get(&self, field: AggField) -> Option<f64> {
        match field {
            AggField::NetDebit => self.net_debit,
            AggField::NetCredit => self.net_credit,
            AggField::NetDelta => Some(self.net_delta),
            AggField::NetGamma => Some(self.net_gamma),
            AggField::NetVega => Some(self.net_vega),
            AggField::NetTheta => Some(self.net_theta),
            AggField::MaxLoss => self.max_loss,
            AggField::MaxProfit => self.max_profit,
            AggField::RrRatio => self.rr_ratio,
            AggField::Width => Some(self.width),
            AggField::BreakevenLow => self.breakeven_low,
            AggField::BreakevenHigh => self.breakeven_high,
        }
    }
}

pub fn compute_aggregates(legs: &[StrategyLeg], multiplier: f64) -> Aggregates {
    let pricing_legs: Vec<Leg> = legs.iter().map(StrategyLeg::to_pricing_leg).collect();
    let cash = entry_cash(&pricing_legs) * multiplier;
    let net = |greek: fn(&ContractRecord) -> f64| -> f64 {
        legs.iter().map(|l| l.signed_qty() * greek(&l.contract)).sum::<f64>() * multiplier
    };

    let (net_debit, net_credit) = match cash.partial_cmp(&0.0) {
        Some(Ordering::Greater) => (Some(cash), None),
        Some(Ordering::Less) => (None, Some(-cash)),
        _ => (Some(0.0), Some(0.0)),
    };

    let (max_loss, max_profit, breakeven_low, breakeven_high) = match payoff_extremes(&pricing_legs) {
        Ok(ex) => (
            Some(ex.max_loss.map_or(f64::INFINITY, |v| v * multiplier)),
            Some(ex.max_profit.map_or(f64::INFINITY, |v| v * multiplier)),
            ex.breakevens.first().copied(),
            ex.breakevens.last().copied(),
        ),
        // Mixed expiries: a long (debit) calendar cannot lose more than its
        // debit; a credit calendar's loss depends on the model.
        Err(_) => ((cash > 0.0).then_some(cash), None, None, None),
    };

    let rr_ratio = match (max_profit, max_loss) {
        (Some(p), Some(l)) if p.is_finite() && l.is_finite() && l > 0.0 => Some(p / l),
        _ => None,
    };

    let strikes = legs.iter().map(|l| l.contract.strike);
    let width = strikes.clone().fold(f64::NEG_INFINITY, f64::max) - strikes.fold(f64::INFINITY, f64::min);

    Aggregates {
        entry_cash: cash,
        net_debit,
        net_credit,
        net_delta: net(|c| c.delta),
        net_gamma: net(|c| c.gamma),
        net_vega: net(|c| c.vega),
        net_theta: net(|c| c.theta),
        max_loss,
        max_profit,
        rr_ratio,
        width,
        breakeven_low,
        breakeven_high,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyInstance {
    pub strategy: String,
    /// One leg per role, in schema order.
    pub legs: Vec<StrategyLeg>,
    pub aggregates: Aggregates,
}

impl StrategyInstance {
    /// Leg tickers joined in role order; the final ordering tie-break.
    pub fn key(&self) -> String {
        self.legs.iter().map(|l| l.contract.ticker.as_str()).collect::<Vec<_>>().join("|")
    }

    pub fn pricing_legs(&self) -> Vec<Leg> {
        self.legs.iter().map(StrategyLeg::to_pricing_leg).collect()
    }
}

/// Raw size of the Cartesian product over the candidate sets.
pub fn raw_combinations(candidates: &[CandidateSet<'_>]) -> u128 {
    candidates.iter().map(|c| c.contracts.len() as u128).product()
}

/// Enumerates the product of candidate sets in schema role order, keeping
/// assignments that satisfy every structural rule and use each contract at
/// most once. Rules are checked as soon as all of their roles are assigned.
pub fn assemble(
    candidates: &[CandidateSet<'_>],
    schema: &StrategySchema,
    config: &EngineConfig,
) -> Result<Vec<StrategyInstance>, EngineError> {
    let count = raw_combinations(candidates);
    if count > u128::from(config.combinatorial_cap) {
        return Err(EngineError::CombinatorialBudgetExceeded {
            count,
            cap: config.combinatorial_cap,
        });
    }
    if count == 0 {
        return Ok(Vec::new());
    }

    let role_index: BTreeMap<&str, usize> = schema.roles.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    // Rules become checkable once the highest-indexed role they mention is set.
    let mut rules_at: Vec<Vec<&crate::catalog::StructuralRule>> = vec![Vec::new(); schema.roles.len()];
    for rule in &schema.rules {
        let last = rule.roles.iter().map(|r| role_index[r.as_str()]).max().unwrap_or(0);
        rules_at[last].push(rule);
    }

    let mut out = Vec::new();
    let mut chosen: Vec<&ContractRecord> = Vec::with_capacity(schema.roles.len());
    descend(candidates, schema, &role_index, &rules_at, config, &mut chosen, &mut out);
    Ok(out)
}

fn descend<'a>(
    candidates: &[CandidateSet<'a>],
    schema: &StrategySchema,
    role_index: &BTreeMap<&str, usize>,
    rules_at: &[Vec<&crate::catalog::StructuralRule>],
    config: &EngineConfig,
    chosen: &mut Vec<&'a ContractRecord>,
    out: &mut Vec<StrategyInstance>,
) {
    let depth = chosen.len();
    if depth == schema.roles.len() {
        let legs: Vec<StrategyLeg> = schema
            .roles
            .iter()
            .zip(chosen.iter())
            .map(|(role, c)| StrategyLeg {
                role: role.id.clone(),
                direction: role.direction,
                quantity: role.quantity,
                contract: (*c).clone(),
            })
            .collect();
        let aggregates = compute_aggregates(&legs, config.multiplier);
        out.push(StrategyInstance {
            strategy: schema.name.clone(),
            legs,
            aggregates,
        });
        return;
    }
    for &contract in &candidates[depth].contracts {
        if chosen.iter().any(|c| std::ptr::eq(*c, contract)) {
            continue;
        }
        chosen.push(contract);
        let ok = rules_at[depth].iter().all(|rule| {
            rule.holds(|role| {
                let c = chosen[role_index[role]];
                (c.strike, c.expiry.num_days_from_ce_i64())
            })
        });
        if ok {
            descend(candidates, schema, role_index, rules_at, config, chosen, out);
        }
        chosen.pop();
    }
}

trait DayOrdinal {
    fn num_days_from_ce_i64(&self) -> i64;
}

impl DayOrdinal for NaiveDate {
    fn num_days_from_ce_i64(&self) -> i64 {
        i64::from(chrono::Datelike::num_days_from_ce(self))
    }
}

/// True when the strategy satisfies one HAVING condition. Undefined
/// aggregates never satisfy anything.
pub fn eval_strat_condition(cond: &BoundStratCondition, aggregates: &Aggregates, config: &EngineConfig) -> bool {
    let Some(actual) = aggregates.get(cond.field) else {
        return false;
    };
    match cond.predicate {
        BoundPredicate::Compare { op, target } => compare(actual, op, target, config.epsilon, config.epsilon_abs),
        BoundPredicate::Between { lo, hi } => lo <= actual && actual <= hi,
    }
}

pub fn apply_having(
    instances: Vec<StrategyInstance>,
    conditions: &[BoundStratCondition],
    config: &EngineConfig,
) -> Vec<StrategyInstance> {
    if conditions.is_empty() {
        return instances;
    }
    instances
        .into_iter()
        .filter(|inst| conditions.iter().all(|c| eval_strat_condition(c, &inst.aggregates, config)))
        .collect()
}

/// Stable multi-key sort; undefined keys sort last in either direction.
/// Ties are broken by [`StrategyInstance::key`] ascending.
pub fn order_and_limit(
    mut instances: Vec<StrategyInstance>,
    order_by: &[(AggField, SortDirection)],
    limit: Option<u64>,
) -> Vec<StrategyInstance> {
    instances.sort_by(|a, b| {
        for &(field, dir) in order_by {
            let ord = match (a.aggregates.get(field), b.aggregates.get(field)) {
                (Some(x), Some(y)) => {
                    let o = x.total_cmp(&y);
                    if dir == SortDirection::Desc {
                        o.reverse()
                    } else {
                        o
                    }
                }
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        a.key().cmp(&b.key())
    });
    if let Some(limit) = limit {
        instances.truncate(usize::try_from(limit).unwrap_or(usize::MAX));
    }
    instances
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleCount {
    pub role: String,
    pub count: usize,
}

/// Row counts after each pipeline stage.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StageStats {
    pub contracts: usize,
    pub filtered: Vec<RoleCount>,
    pub raw_combinations: u64,
    pub assembled: usize,
    pub having_passed: usize,
    pub returned: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultSet {
    pub query: ValidatedQuery,
    pub as_of: NaiveDate,
    pub spot: f64,
    pub rate: f64,
    pub strategies: Vec<StrategyInstance>,
    pub stats: StageStats,
    pub config: EngineConfig,
}

/// Parses, validates and runs a query against one snapshot.
pub fn execute(query_text: &str, snapshot: &ChainSnapshot, config: &EngineConfig) -> Result<ResultSet, OqlError> {
    let query = parse_query(query_text)?;
    let vq = config.catalog().validate(&query)?;
    Ok(execute_validated(&vq, snapshot, config)?)
}

pub fn execute_validated(vq: &ValidatedQuery, snapshot: &ChainSnapshot, config: &EngineConfig) -> Result<ResultSet, EngineError> {
    if vq.query.underlying != snapshot.underlying {
        return Err(EngineError::UnderlyingMismatch {
            query: vq.query.underlying.clone(),
            snapshot: snapshot.underlying.clone(),
        });
    }
    let candidates = filter_legs(vq, snapshot, config);
    let raw = raw_combinations(&candidates);
    let assembled = assemble(&candidates, &vq.schema, config)?;
    let mut stats = StageStats {
        contracts: snapshot.records.len(),
        filtered: candidates
            .iter()
            .map(|c| RoleCount {
                role: c.role.clone(),
                count: c.contracts.len(),
            })
            .collect(),
        raw_combinations: u64::try_from(raw).unwrap_or(u64::MAX),
        assembled: assembled.len(),
        ..StageStats::default()
    };
    let passed = apply_having(assembled, &vq.strategy_conditions, config);
    stats.having_passed = passed.len();
    let strategies = order_and_limit(passed, &vq.order_by, vq.limit);
    stats.returned = strategies.len();

    Ok(ResultSet {
        query: vq.clone(),
        as_of: snapshot.as_of,
        spot: snapshot.spot,
        rate: snapshot.rate,
        strategies,
        stats,
        config: config.clone(),
    })
}

/// A JSON-friendly aggregate value: a number, or `"unbounded"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AggValue {
    Number(f64),
    Label(String),
}

impl AggValue {
    fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            AggValue::Number(v)
        } else {
            AggValue::Label(if v > 0.0 { "unbounded" } else { "-unbounded" }.into())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegRecord {
    pub role: String,
    pub ticker: String,
    pub direction: Direction,
    #[serde(rename = "type")]
    pub option_type: OptionType,
    pub quantity: u32,
    pub strike: f64,
    pub expiry: NaiveDate,
    pub price: f64,
    pub iv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRecord {
    pub strategy_type: String,
    pub legs: Vec<LegRecord>,
    /// Keyed by aggregate name; `null` where undefined.
    pub aggregates: BTreeMap<String, Option<AggValue>>,
}

/// Serialized form of a [`ResultSet`]; also the backtester's input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub query: String,
    pub strategy: String,
    pub underlying: String,
    pub as_of: NaiveDate,
    pub spot: f64,
    pub rate: f64,
    pub config: EngineConfig,
    pub stats: StageStats,
    pub strategies: Vec<StrategyRecord>,
}

impl StrategyRecord {
    pub fn from_instance(inst: &StrategyInstance) -> Self {
        let mut aggregates: BTreeMap<String, Option<AggValue>> = AggField::ALL
            .iter()
            .map(|&f| (f.name().to_string(), inst.aggregates.get(f).map(AggValue::from_f64)))
            .collect();
        aggregates.insert("entry_cash".into(), Some(AggValue::from_f64(inst.aggregates.entry_cash)));
        Self {
            strategy_type: inst.strategy.clone(),
            legs: inst
                .legs
                .iter()
                .map(|l| LegRecord {
                    role: l.role.clone(),
                    ticker: l.contract.ticker.clone(),
                    direction: l.direction,
                    option_type: l.contract.option_type,
                    quantity: l.quantity,
                    strike: l.contract.strike,
                    expiry: l.contract.expiry,
                    price: l.contract.price,
                    iv: l.contract.iv,
                })
                .collect(),
            aggregates,
        }
    }

    /// PCG-style flat keys: `contract_ticker_<ROLE>` and `price_<ROLE>`.
    pub fn blueprint(&self) -> serde_json::Value {
        let mut details = serde_json::Map::new();
        for leg in &self.legs {
            details.insert(format!("contract_ticker_{}", leg.role), leg.ticker.clone().into());
            details.insert(format!("price_{}", leg.role), leg.price.into());
        }
        serde_json::json!({
            "strategy_type": self.strategy_type,
            "strategy_details": details,
        })
    }
}

impl ResultSet {
    pub fn to_document(&self) -> ResultDocument {
        ResultDocument {
            query: pretty_print(&self.query.query),
            strategy: self.query.schema.name.clone(),
            underlying: self.query.query.underlying.clone(),
            as_of: self.as_of,
            spot: self.spot,
            rate: self.rate,
            config: self.config.clone(),
            stats: self.stats.clone(),
            strategies: self.strategies.iter().map(StrategyRecord::from_instance).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("result document serializes")
    }

    pub fn to_blueprint_json(&self) -> String {
        let doc = self.to_document();
        let items: Vec<serde_json::Value> = doc.strategies.iter().map(StrategyRecord::blueprint).collect();
        serde_json::to_string_pretty(&items).expect("blueprint serializes")
    }
}
