use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    /// Soft match: `|a - t| <= eps * |t|`.
    #[serde(rename = "~")]
    Approx,
}

impl CompOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompOp::Eq => "=",
            CompOp::Ne => "!=",
            CompOp::Lt => "<",
            CompOp::Gt => ">",
            CompOp::Le => "<=",
            CompOp::Ge => ">=",
            CompOp::Approx => "~",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "=" => CompOp::Eq,
            "!=" => CompOp::Ne,
            "<" => CompOp::Lt,
            ">" => CompOp::Gt,
            "<=" => CompOp::Le,
            ">=" => CompOp::Ge,
            "~" => CompOp::Approx,
            _ => return None,
        })
    }
}

impl fmt::Display for CompOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Symbolic literals accepted for categorical leg fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Symbol {
    Call,
    Put,
    Atm,
    Otm,
    Itm,
}

impl Symbol {
    pub fn lookup(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "CALL" => Symbol::Call,
            "PUT" => Symbol::Put,
            "ATM" => Symbol::Atm,
            "OTM" => Symbol::Otm,
            "ITM" => Symbol::Itm,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Symbol::Call => "CALL",
            Symbol::Put => "PUT",
            Symbol::Atm => "ATM",
            Symbol::Otm => "OTM",
            Symbol::Itm => "ITM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Symbol(Symbol),
}

/// A WHERE predicate. `role == None` means the condition applies to every role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegCondition {
    pub role: Option<String>,
    pub field: String,
    pub op: CompOp,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StratPredicate {
    Compare { op: CompOp, value: Value },
    Between { lo: f64, hi: f64 },
}

/// A HAVING predicate over a strategy aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratCondition {
    pub field: String,
    pub predicate: StratPredicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SortDirection {
    #[default]
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderItem {
    pub field: String,
    pub direction: SortDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub strategy: String,
    pub underlying: String,
    #[serde(rename = "where")]
    pub where_clause: Vec<LegCondition>,
    pub having: Vec<StratCondition>,
    pub order_by: Vec<OrderItem>,
    pub limit: Option<u64>,
}
