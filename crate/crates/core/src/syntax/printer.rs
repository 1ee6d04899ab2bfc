use std::fmt::Write;

use super::ast::{Query, SortDirection, StratPredicate, Value};

/// Canonical single-line rendering. Re-parsing the output yields an equal AST.
pub fn pretty_print(query: &Query) -> String {
    let mut out = format!("SELECT {} FROM {}", query.strategy, query.underlying);

    for (i, cond) in query.where_clause.iter().enumerate() {
        out.push_str(if i == 0 { " WHERE " } else { " AND " });
        if let Some(role) = &cond.role {
            write!(out, "{role}.").unwrap();
        }
        write!(out, "{} {} {}", cond.field, cond.op, format_value(&cond.value)).unwrap();
    }

    for (i, cond) in query.having.iter().enumerate() {
        out.push_str(if i == 0 { " HAVING " } else { " AND " });
        match &cond.predicate {
            StratPredicate::Compare { op, value } => {
                write!(out, "{} {} {}", cond.field, op, format_value(value)).unwrap()
            }
            StratPredicate::Between { lo, hi } => write!(
                out,
                "{} BETWEEN {} AND {}",
                cond.field,
                format_number(*lo),
                format_number(*hi)
            )
            .unwrap(),
        }
    }

    for (i, item) in query.order_by.iter().enumerate() {
        out.push_str(if i == 0 { " ORDER BY " } else { ", " });
        out.push_str(&item.field);
        if item.direction == SortDirection::Desc {
            out.push_str(" DESC");
        }
    }

    if let Some(limit) = query.limit {
        write!(out, " LIMIT {limit}").unwrap();
    }
    out
}

fn format_value(v: &Value) -> String {
    v.to_string()
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Number(n) => f.write_str(&format_number(*n)),
            Value::Symbol(s) => f.write_str(s.name()),
        }
    }
}

// `Display` for f64 is the shortest string that parses back to the same bits
// and never uses exponent notation, which the lexer does not accept.
fn format_number(n: f64) -> String {
    n.to_string()
}
