use super::ast::{
    CompOp, LegCondition, OrderItem, Query, SortDirection, StratCondition, StratPredicate, Symbol,
    Value,
};
use super::lexer::{tokenize, Keyword, Token, TokenKind};
use crate::error::{OqlError, ParseError};
use crate::fields::canonical_field_name;

/// Tokenizes and parses in one step.
pub fn parse_query(source: &str) -> Result<Query, OqlError> {
    let tokens = tokenize(source)?;
    Ok(parse(&tokens)?)
}

/// Parses a token stream produced by [`tokenize`].
///
/// Strategy names are not checked against the catalog here; binding happens
/// during validation.
pub fn parse(tokens: &[Token]) -> Result<Query, ParseError> {
    let mut p = Parser { tokens, pos: 0 };
    p.query()
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        // The lexer guarantees a trailing End token; clamp so a hand-built
        // stream without one still reports cleanly.
        &self.tokens[self.pos.min(self.tokens.len().saturating_sub(1))]
    }

    fn advance(&mut self) -> &'t Token {
        let tok = self.peek();
        if tok.kind != TokenKind::End {
            self.pos += 1;
        }
        tok
    }

    fn at_keyword(&self, kw: Keyword) -> bool {
        self.peek().kind == TokenKind::Keyword(kw)
    }

    fn eat_keyword(&mut self, kw: Keyword) -> bool {
        if self.at_keyword(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<S: Into<String>>(&self, expected: impl IntoIterator<Item = S>) -> ParseError {
        let tok = self.peek();
        ParseError {
            expected: expected.into_iter().map(Into::into).collect(),
            found: tok.describe(),
            position: tok.position,
        }
    }

    fn expect_keyword(&mut self, kw: Keyword) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error([kw.as_str()]))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<&'t Token, ParseError> {
        if self.peek().kind == TokenKind::Ident {
            Ok(self.advance())
        } else {
            Err(self.error([what]))
        }
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        self.expect_keyword(Keyword::Select)?;
        let strategy = self.expect_ident("strategy name")?.text.to_ascii_uppercase();
        self.expect_keyword(Keyword::From)?;
        let underlying = self.underlying()?;

        let mut query = Query {
            strategy,
            underlying,
            where_clause: Vec::new(),
            having: Vec::new(),
            order_by: Vec::new(),
            limit: None,
        };

        if self.eat_keyword(Keyword::Where) {
            query.where_clause.push(self.leg_condition()?);
            while self.eat_keyword(Keyword::And) {
                query.where_clause.push(self.leg_condition()?);
            }
        }
        if self.eat_keyword(Keyword::Having) {
            query.having.push(self.strat_condition()?);
            while self.eat_keyword(Keyword::And) {
                query.having.push(self.strat_condition()?);
            }
        }
        if self.eat_keyword(Keyword::Order) {
            self.expect_keyword(Keyword::By)?;
            query.order_by.push(self.order_item()?);
            while self.peek().kind == TokenKind::Comma {
                self.advance();
                query.order_by.push(self.order_item()?);
            }
        }
        if self.eat_keyword(Keyword::Limit) {
            query.limit = Some(self.limit()?);
        }

        if self.peek().kind != TokenKind::End {
            let mut expected = Vec::new();
            if query.where_clause.is_empty() && query.having.is_empty() && query.order_by.is_empty() && query.limit.is_none() {
                expected.push("WHERE");
            }
            if query.having.is_empty() && query.order_by.is_empty() && query.limit.is_none() {
                expected.push("HAVING");
            }
            if query.order_by.is_empty() && query.limit.is_none() {
                expected.push("ORDER");
            }
            if !query.where_clause.is_empty() || !query.having.is_empty() {
                expected.push("AND");
            }
            if !query.order_by.is_empty() && query.limit.is_none() {
                expected.push(",");
            }
            if query.limit.is_none() {
                expected.push("LIMIT");
            }
            expected.push("end of input");
            return Err(self.error(expected));
        }
        Ok(query)
    }

    fn underlying(&mut self) -> Result<String, ParseError> {
        let tok = self.peek();
        if tok.kind == TokenKind::Ident && tok.text.chars().all(|c| c.is_ascii_alphabetic()) {
            self.advance();
            Ok(tok.text.to_ascii_uppercase())
        } else {
            Err(self.error(["underlying ticker"]))
        }
    }

    fn leg_condition(&mut self) -> Result<LegCondition, ParseError> {
        let first = self.expect_ident("role or field")?;
        let (role, field) = if self.peek().kind == TokenKind::Dot {
            self.advance();
            let field = self.expect_ident("field")?;
            (Some(first.text.to_ascii_uppercase()), field.text.as_str())
        } else {
            (None, first.text.as_str())
        };
        let op = self.op()?;
        let value = self.value()?;
        Ok(LegCondition {
            role,
            field: canonical_field_name(field),
            op,
            value,
        })
    }

    fn strat_condition(&mut self) -> Result<StratCondition, ParseError> {
        let field = canonical_field_name(&self.expect_ident("aggregate field")?.text);
        let predicate = if self.eat_keyword(Keyword::Between) {
            let lo_tok = self.peek();
            let lo = self.number()?;
            self.expect_keyword(Keyword::And)?;
            let hi = self.number()?;
            if lo > hi {
                return Err(ParseError {
                    expected: vec![format!("BETWEEN bounds with lower <= upper ({lo} > {hi})")],
                    found: lo_tok.describe(),
                    position: lo_tok.position,
                });
            }
            StratPredicate::Between { lo, hi }
        } else {
            let op = match self.op() {
                Ok(op) => op,
                Err(mut e) => {
                    e.expected.push("BETWEEN".to_string());
                    return Err(e);
                }
            };
            StratPredicate::Compare {
                op,
                value: self.value()?,
            }
        };
        Ok(StratCondition { field, predicate })
    }

    fn order_item(&mut self) -> Result<OrderItem, ParseError> {
        let field = canonical_field_name(&self.expect_ident("order field")?.text);
        let direction = if self.eat_keyword(Keyword::Desc) {
            SortDirection::Desc
        } else {
            self.eat_keyword(Keyword::Asc);
            SortDirection::Asc
        };
        Ok(OrderItem { field, direction })
    }

    fn limit(&mut self) -> Result<u64, ParseError> {
        let tok = self.peek();
        let parsed = (tok.kind == TokenKind::Number && tok.text.chars().all(|c| c.is_ascii_digit()))
            .then(|| tok.text.parse::<u64>().ok())
            .flatten()
            .filter(|n| *n > 0);
        match parsed {
            Some(n) => {
                self.advance();
                Ok(n)
            }
            None => Err(self.error(["positive integer"])),
        }
    }

    fn op(&mut self) -> Result<CompOp, ParseError> {
        match self.peek().kind {
            TokenKind::Op(op) => {
                self.advance();
                Ok(op)
            }
            _ => Err(self.error(["=", "!=", "<", ">", "<=", ">=", "~"])),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let tok = self.peek();
        match (tok.kind, tok.text.parse::<f64>()) {
            (TokenKind::Number, Ok(v)) if v.is_finite() => {
                self.advance();
                Ok(v)
            }
            _ => Err(self.error(["number"])),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        let tok = self.peek();
        if tok.kind == TokenKind::Ident {
            if let Some(sym) = Symbol::lookup(&tok.text) {
                self.advance();
                return Ok(Value::Symbol(sym));
            }
        }
        self.number()
            .map(Value::Number)
            .map_err(|_| self.error(["number", "CALL", "PUT", "ATM", "OTM", "ITM"]))
    }
}
