//! Strategy role schemas and semantic validation of parsed queries.
//!
//! Every supported strategy declares a fixed set of roles (one contract per
//! role) plus structural rules over strikes and expiries. Validation binds a
//! [`Query`] to its schema, scopes each WHERE condition to the roles it
//! constrains and checks every field against the leg or aggregate vocabulary.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{FieldScope, ValidationError};
use crate::fields::{AggField, LegField};
use crate::syntax::{CompOp, Query, SortDirection, StratPredicate, Symbol, Value};
use crate::types::{Direction, OptionType};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoleSpec {
    pub id: String,
    pub option_type: OptionType,
    pub direction: Direction,
    pub quantity: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Strikes strictly increase in role order.
    StrikeOrder,
    StrikeEqual,
    ExpiryEqual,
    /// Expiries strictly increase in role order.
    ExpiryOrder,
    /// Three roles; middle strike equidistant from the outer two.
    SymmetricWings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralRule {
    pub kind: RuleKind,
    pub roles: Vec<String>,
}

impl StructuralRule {
    fn new(kind: RuleKind, roles: &[&str]) -> Self {
        Self {
            kind,
            roles: roles.iter().map(|r| r.to_string()).collect(),
        }
    }

    pub fn describe(&self) -> String {
        let join = |sep: &str, attr: &str| {
            self.roles
                .iter()
                .map(|r| format!("{attr}_{r}"))
                .collect::<Vec<_>>()
                .join(sep)
        };
        match self.kind {
            RuleKind::StrikeOrder => join(" < ", "K"),
            RuleKind::StrikeEqual => join(" = ", "K"),
            RuleKind::ExpiryEqual => join(" = ", "T"),
            RuleKind::ExpiryOrder => join(" < ", "T"),
            RuleKind::SymmetricWings => match self.roles.as_slice() {
                [a, b, c] => format!("K_{b} - K_{a} = K_{c} - K_{b}"),
                _ => "symmetric wings".to_string(),
            },
        }
    }

    /// Checks the rule against `(strike, expiry ordinal)` pairs looked up by role.
    pub fn holds<F>(&self, mut leg: F) -> bool
    where
        F: FnMut(&str) -> (f64, i64),
    {
        let vals: Vec<(f64, i64)> = self.roles.iter().map(|r| leg(r)).collect();
        match self.kind {
            RuleKind::StrikeOrder => vals.windows(2).all(|w| w[0].0 < w[1].0),
            RuleKind::StrikeEqual => vals.windows(2).all(|w| w[0].0 == w[1].0),
            RuleKind::ExpiryEqual => vals.windows(2).all(|w| w[0].1 == w[1].1),
            RuleKind::ExpiryOrder => vals.windows(2).all(|w| w[0].1 < w[1].1),
            RuleKind::SymmetricWings => match vals.as_slice() {
                [a, b, c] => {
                    let (lower, upper) = (b.0 - a.0, c.0 - b.0);
                    (lower - upper).abs() <= 1e-9 * lower.abs().max(upper.abs()).max(1.0)
                }
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySchema {
    pub name: String,
    pub description: String,
    pub roles: Vec<RoleSpec>,
    pub rules: Vec<StructuralRule>,
}

impl StrategySchema {
    pub fn role(&self, id: &str) -> Option<&RoleSpec> {
        self.roles.iter().find(|r| r.id == id)
    }

    pub fn role_ids(&self) -> Vec<String> {
        self.roles.iter().map(|r| r.id.clone()).collect()
    }

    /// True when every leg expires together, so the terminal payoff is a
    /// single function of the underlying price.
    pub fn single_expiry(&self) -> bool {
        self.roles.len() == 1
            || self
                .rules
                .iter()
                .any(|r| r.kind == RuleKind::ExpiryEqual && r.roles.len() == self.roles.len())
    }
}

fn role(id: &str, option_type: OptionType, direction: Direction, quantity: u32) -> RoleSpec {
    RoleSpec {
        id: id.to_string(),
        option_type,
        direction,
        quantity,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CatalogOptions {
    /// Require equal wing widths on BUTTERFLY_CALL.
    pub symmetric_butterfly: bool,
}

/// The compiled-in set of strategy schemas.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    schemas: Vec<StrategySchema>,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::new(CatalogOptions::default())
    }
}

impl Catalog {
    pub fn new(options: CatalogOptions) -> Self {
        use Direction::{Long, Short};
        use OptionType::{Call, Put};
        use RuleKind::*;

        let mut butterfly_rules = vec![
            StructuralRule::new(StrikeOrder, &["L1", "S", "L2"]),
            StructuralRule::new(ExpiryEqual, &["L1", "S", "L2"]),
        ];
        if options.symmetric_butterfly {
            butterfly_rules.push(StructuralRule::new(SymmetricWings, &["L1", "S", "L2"]));
        }

        let schema = |name: &str, description: &str, roles, rules| StrategySchema {
            name: name.to_string(),
            description: description.to_string(),
            roles,
            rules,
        };

        let schemas = vec![
            schema(
                "LONG_CALL",
                "Single long call",
                vec![role("L", Call, Long, 1)],
                vec![],
            ),
            schema(
                "LONG_PUT",
                "Single long put",
                vec![role("L", Put, Long, 1)],
                vec![],
            ),
            schema(
                "BULL_CALL_SPREAD",
                "Lower-strike long call + higher-strike short call",
                vec![role("L", Call, Long, 1), role("S", Call, Short, 1)],
                vec![
                    StructuralRule::new(StrikeOrder, &["L", "S"]),
                    StructuralRule::new(ExpiryEqual, &["L", "S"]),
                ],
            ),
            schema(
                "BEAR_PUT_SPREAD",
                "Higher-strike long put + lower-strike short put",
                vec![role("L", Put, Long, 1), role("S", Put, Short, 1)],
                vec![
                    StructuralRule::new(StrikeOrder, &["S", "L"]),
                    StructuralRule::new(ExpiryEqual, &["L", "S"]),
                ],
            ),
            schema(
                "BEAR_CALL_SPREAD",
                "Lower-strike short call + higher-strike long call",
                vec![role("S", Call, Short, 1), role("L", Call, Long, 1)],
                vec![
                    StructuralRule::new(StrikeOrder, &["S", "L"]),
                    StructuralRule::new(ExpiryEqual, &["S", "L"]),
                ],
            ),
            schema(
                "CALENDAR_CALL",
                "Near-term short call + far-term long call at one strike",
                vec![role("F", Call, Short, 1), role("B", Call, Long, 1)],
                vec![
                    StructuralRule::new(StrikeEqual, &["F", "B"]),
                    StructuralRule::new(ExpiryOrder, &["F", "B"]),
                ],
            ),
            schema(
                "STRADDLE",
                "Long call + long put at the same strike",
                vec![role("C", Call, Long, 1), role("P", Put, Long, 1)],
                vec![
                    StructuralRule::new(StrikeEqual, &["C", "P"]),
                    StructuralRule::new(ExpiryEqual, &["C", "P"]),
                ],
            ),
            schema(
                "STRANGLE",
                "Lower-strike long put + higher-strike long call",
                vec![role("P", Put, Long, 1), role("C", Call, Long, 1)],
                vec![
                    StructuralRule::new(StrikeOrder, &["P", "C"]),
                    StructuralRule::new(ExpiryEqual, &["P", "C"]),
                ],
            ),
            schema(
                "IRON_CONDOR",
                "Short put spread + short call spread",
                vec![
                    role("SC", Call, Short, 1),
                    role("LC", Call, Long, 1),
                    role("SP", Put, Short, 1),
                    role("LP", Put, Long, 1),
                ],
                vec![
                    StructuralRule::new(StrikeOrder, &["LP", "SP", "SC", "LC"]),
                    StructuralRule::new(ExpiryEqual, &["SC", "LC", "SP", "LP"]),
                ],
            ),
            schema(
                "BUTTERFLY_CALL",
                "Long wing calls + two short body calls",
                vec![
                    role("L1", Call, Long, 1),
                    role("S", Call, Short, 2),
                    role("L2", Call, Long, 1),
                ],
                butterfly_rules,
            ),
        ];
        Self { schemas }
    }

    pub fn schemas(&self) -> &[StrategySchema] {
        &self.schemas
    }

    pub fn lookup(&self, name: &str) -> Result<&StrategySchema, ValidationError> {
        self.schemas
            .iter()
            .find(|s| s.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| ValidationError::UnknownStrategy(name.to_string()))
    }

    /// Binds a parsed query to its schema and checks every field.
    pub fn validate(&self, query: &Query) -> Result<ValidatedQuery, ValidationError> {
        let schema = self.lookup(&query.strategy)?;

        let mut per_role: BTreeMap<String, Vec<BoundLegCondition>> =
            schema.roles.iter().map(|r| (r.id.clone(), Vec::new())).collect();

        for cond in &query.where_clause {
            let field = LegField::lookup(&cond.field).ok_or_else(|| ValidationError::UnknownField {
                scope: FieldScope::Leg,
                field: cond.field.clone(),
            })?;
            check_leg_value(field, cond.op, &cond.value)?;
            let bound = BoundLegCondition {
                field,
                op: cond.op,
                value: cond.value,
            };
            match &cond.role {
                Some(role) => {
                    let list = per_role.get_mut(role).ok_or_else(|| ValidationError::UnknownRole {
                        strategy: schema.name.clone(),
                        role: role.clone(),
                        allowed: schema.role_ids(),
                    })?;
                    list.push(bound);
                }
                None => per_role.values_mut().for_each(|list| list.push(bound)),
            }
        }

        let strategy_conditions = query
            .having
            .iter()
            .map(|cond| {
                let field = agg_field(&cond.field)?;
                let predicate = match cond.predicate {
                    StratPredicate::Between { lo, hi } => BoundPredicate::Between { lo, hi },
                    StratPredicate::Compare { op, value } => match value {
                        Value::Number(target) => BoundPredicate::Compare { op, target },
                        Value::Symbol(sym) => {
                            return Err(ValidationError::TypeMismatch {
                                field: cond.field.clone(),
                                message: format!("aggregate fields are numeric, got {}", sym.name()),
                            })
                        }
                    },
                };
                Ok(BoundStratCondition { field, predicate })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let order_by = query
            .order_by
            .iter()
            .map(|item| Ok((agg_field(&item.field)?, item.direction)))
            .collect::<Result<Vec<_>, ValidationError>>()?;

        let role_conditions = schema
            .roles
            .iter()
            .map(|r| (r.id.clone(), per_role.remove(&r.id).unwrap_or_default()))
            .collect();

        Ok(ValidatedQuery {
            query: query.clone(),
            schema: schema.clone(),
            role_conditions,
            strategy_conditions,
            order_by,
            limit: query.limit,
        })
    }
}

fn agg_field(name: &str) -> Result<AggField, ValidationError> {
    AggField::lookup(name).ok_or_else(|| ValidationError::UnknownField {
        scope: FieldScope::Aggregate,
        field: name.to_string(),
    })
}

fn check_leg_value(field: LegField, op: CompOp, value: &Value) -> Result<(), ValidationError> {
    let mismatch = |message: String| ValidationError::TypeMismatch {
        field: field.name().to_string(),
        message,
    };
    match (field.is_categorical(), value) {
        (false, Value::Number(_)) => Ok(()),
        (false, Value::Symbol(sym)) => Err(mismatch(format!("numeric field compared with {}", sym.name()))),
        (true, Value::Number(n)) => Err(mismatch(format!("categorical field compared with number {n}"))),
        (true, Value::Symbol(sym)) => {
            if !matches!(op, CompOp::Eq | CompOp::Ne) {
                return Err(mismatch(format!("operator {op} is not valid on a categorical field")));
            }
            let ok = match field {
                LegField::Type => matches!(sym, Symbol::Call | Symbol::Put),
                _ => matches!(sym, Symbol::Atm | Symbol::Itm | Symbol::Otm),
            };
            if ok {
                Ok(())
            } else {
                Err(mismatch(format!("{} is not a value of {}", sym.name(), field.name())))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundLegCondition {
    pub field: LegField,
    pub op: CompOp,
    pub value: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundPredicate {
    Compare { op: CompOp, target: f64 },
    Between { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundStratCondition {
    pub field: AggField,
    pub predicate: BoundPredicate,
}

/// A query bound to its schema. Role-less WHERE conditions have been copied
/// into every role's list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedQuery {
    pub query: Query,
    pub schema: StrategySchema,
    /// Conditions per role, in schema role order.
    pub role_conditions: Vec<(String, Vec<BoundLegCondition>)>,
    pub strategy_conditions: Vec<BoundStratCondition>,
    pub order_by: Vec<(AggField, SortDirection)>,
    pub limit: Option<u64>,
}

impl ValidatedQuery {
    pub fn conditions_for(&self, role: &str) -> &[BoundLegCondition] {
        self.role_conditions
            .iter()
            .find(|(r, _)| r == role)
            .map(|(_, c)| c.as_slice())
            .unwrap_or(&[])
    }
}

/// Plain-text table of every schema: roles, directions, quantities and rules.
pub fn schema_table(catalog: &Catalog) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<18} {:<6} {:<5} {:<6} {:>3}  {}\n", "STRATEGY", "ROLE", "TYPE", "SIDE", "QTY", "RULES"));
    for s in catalog.schemas() {
        let rules = s.rules.iter().map(StructuralRule::describe).collect::<Vec<_>>().join("; ");
        for (i, r) in s.roles.iter().enumerate() {
            let (name, rules) = if i == 0 { (s.name.as_str(), rules.as_str()) } else { ("", "") };
            out.push_str(
                format!(
                    "{:<18} {:<6} {:<5} {:<6} {:>3}  {}",
                    name, r.id, r.option_type, r.direction, r.quantity, rules
                )
                .trim_end(),
            );
            out.push('\n');
        }
    }
    out
}
