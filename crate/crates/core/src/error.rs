use std::fmt;

use thiserror::Error;

use crate::syntax::Position;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("lex error at {position}: {message}")]
pub struct LexError {
    pub message: String,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at {position}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub expected: Vec<String>,
    pub found: String,
    pub position: Position,
}

/// Failures while binding a parsed query to a strategy schema.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("role `{role}` is not defined for {strategy} (roles: {})", allowed.join(", "))]
    UnknownRole {
        strategy: String,
        role: String,
        allowed: Vec<String>,
    },
    #[error("unknown {scope} field `{field}`")]
    UnknownField { scope: FieldScope, field: String },
    #[error("type mismatch on `{field}`: {message}")]
    TypeMismatch { field: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldScope {
    Leg,
    Aggregate,
}

impl fmt::Display for FieldScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldScope::Leg => f.write_str("leg"),
            FieldScope::Aggregate => f.write_str("aggregate"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("no implied volatility: {0}")]
    NoSolution(String),
    #[error("implied volatility did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("payoff extremes are undefined for legs with different expiries")]
    MultiExpiryUnsupported,
}

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("format error at row {row}: {message}")]
    Format { row: usize, message: String },
    #[error("invariant violation at row {row}: {message}")]
    InvariantViolation { row: usize, message: String },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("query targets {query} but the chain is for {snapshot}")]
    UnderlyingMismatch { query: String, snapshot: String },
    #[error("raw combination count {count} exceeds the cap of {cap}; add leg conditions")]
    CombinatorialBudgetExceeded { count: u128, cap: u64 },
}

/// Error from the full query pipeline, labelled with the stage that failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OqlError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validate(#[from] ValidationError),
    #[error(transparent)]
    Execute(#[from] EngineError),
}

impl OqlError {
    pub fn stage(&self) -> &'static str {
        match self {
            OqlError::Lex(_) => "lex",
            OqlError::Parse(_) => "parse",
            OqlError::Validate(_) => "validate",
            OqlError::Execute(_) => "execute",
        }
    }

    /// Source position for syntax errors.
    pub fn position(&self) -> Option<Position> {
        match self {
            OqlError::Lex(e) => Some(e.position),
            OqlError::Parse(e) => Some(e.position),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("no spot price for {0}")]
    MissingSpot(chrono::NaiveDate),
    #[error("invalid backtest window: {0}")]
    Window(String),
    #[error("no quote for {ticker} on {date} in the valuation snapshots")]
    MissingQuote {
        ticker: String,
        date: chrono::NaiveDate,
    },
    #[error("backtest report needs at least one path")]
    Empty,
    #[error(transparent)]
    Pricing(#[from] PricingError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no evaluation cases")]
    EmptyInput,
    #[error("gold label `{0}` does not map to a strategy family")]
    UnknownGoldLabel(String),
    #[error("no case was solved within the attempt budget")]
    NoSolvedCases,
    #[error("case `{id}`: {message}")]
    InvalidCase { id: String, message: String },
}
