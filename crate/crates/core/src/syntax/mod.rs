//! Lexer, recursive-descent parser, AST and canonical printer for OQL.
//!
//! ```text
//! SELECT IRON_CONDOR FROM TSLA
//! WHERE Dte ~ 30 AND SC.Delta < 0.20
//! HAVING net_theta > 0 AND max_loss < 500
//! ORDER BY rr_ratio DESC
//! LIMIT 10
//! ```

mod ast;
mod lexer;
mod parser;
mod printer;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::{
    CompOp, LegCondition, OrderItem, Query, SortDirection, StratCondition, StratPredicate, Symbol,
    Value,
};
pub use lexer::{tokenize, Keyword, Token, TokenKind};
pub use parser::{parse, parse_query};
pub use printer::pretty_print;

/// 1-based line and column plus the 0-based byte offset into the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Position {
    pub line: u32,
    pub column: u32,
    pub offset: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}
