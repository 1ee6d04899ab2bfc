//! Plain-text tables for terminal output.

use oql_core::backtest::{BacktestReport, CohortStats};
use oql_core::catalog::{StrategySchema, ValidatedQuery};
use oql_core::engine::{AggValue, ResultDocument};
use oql_core::evalkit::EvalReport;
use oql_core::catalog::BoundPredicate;
use oql_core::syntax::pretty_print;

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

fn agg(doc_value: Option<&Option<AggValue>>) -> String {
    match doc_value {
        Some(Some(AggValue::Number(x))) => format!("{x:.2}"),
        Some(Some(AggValue::Label(s))) => s.clone(),
        _ => "-".into(),
    }
}

pub fn strategies(doc: &ResultDocument, limit: Option<usize>) -> String {
    let mut out = format!(
        "{} on {} {} (spot {:.2}): {} of {} assembled\n",
        doc.strategy,
        doc.underlying,
        doc.as_of,
        doc.spot,
        doc.stats.returned,
        doc.stats.assembled
    );
    let cols = ["entry_cash", "max_loss", "max_profit", "rr_ratio", "net_delta", "net_theta"];
    let take = limit.unwrap_or(usize::MAX);
    let legs: Vec<String> = doc
        .strategies
        .iter()
        .take(take)
        .map(|s| s.legs.iter().map(|l| format!("{}:{}", l.role, l.ticker)).collect::<Vec<_>>().join(" "))
        .collect();
    let w = legs.iter().map(String::len).max().unwrap_or(0).max(4);
    out.push_str(&format!("{:>3}  {:<w$}", "#", "LEGS"));
    for c in cols {
        out.push_str(&format!(" {:>11}", c.to_uppercase()));
    }
    out.push('\n');
    for (i, (s, legs)) in doc.strategies.iter().zip(&legs).enumerate() {
        out.push_str(&format!("{:>3}  {:<w$}", i + 1, legs));
        for c in cols {
            out.push_str(&format!(" {:>11}", agg(s.aggregates.get(c))));
        }
        out.push('\n');
    }
    if doc.strategies.len() > take {
        out.push_str(&format!("... {} more\n", doc.strategies.len() - take));
    }
    out
}

pub fn schema(schema: &StrategySchema) -> String {
    let mut out = format!("{}: {}\n{:<6} {:<5} {:<6} {:>3}\n", schema.name, schema.description, "ROLE", "TYPE", "SIDE", "QTY");
    for r in &schema.roles {
        out.push_str(&format!("{:<6} {:<5} {:<6} {:>3}\n", r.id, r.option_type, r.direction, r.quantity));
    }
    for rule in &schema.rules {
        out.push_str(&format!("rule: {}\n", rule.describe()));
    }
    out
}

pub fn check(vq: &ValidatedQuery) -> String {
    let mut out = format!("{}\n\n", pretty_print(&vq.query));
    out.push_str(&format!("{:<6} {:<5} {:<6} {:>3}  {}\n", "ROLE", "TYPE", "SIDE", "QTY", "CONDITIONS"));
    for (role, conds) in &vq.role_conditions {
        let spec = vq.schema.role(role).expect("bound roles come from the schema");
        let text = conds
            .iter()
            .map(|c| format!("{} {} {}", c.field.name(), c.op.symbol(), c.value))
            .collect::<Vec<_>>()
            .join(" AND ");
        out.push_str(format!("{:<6} {:<5} {:<6} {:>3}  {}", role, spec.option_type, spec.direction, spec.quantity, text).trim_end());
        out.push('\n');
    }
    for c in &vq.strategy_conditions {
        out.push_str(&format!("having: {} {}\n", c.field.name(), predicate(&c.predicate)));
    }
    for (field, dir) in &vq.order_by {
        out.push_str(&format!("order: {} {dir:?}\n", field.name()));
    }
    if let Some(n) = vq.limit {
        out.push_str(&format!("limit: {n}\n"));
    }
    out
}

fn predicate(p: &BoundPredicate) -> String {
    match p {
        BoundPredicate::Compare { op, target } => format!("{} {target}", op.symbol()),
        BoundPredicate::Between { lo, hi } => format!("BETWEEN {lo} AND {hi}"),
    }
}

fn cohort_row(name: &str, s: &CohortStats) -> String {
    format!(
        "{:<8} {:>5} {:>7} {:>7} {:>7} {:>12} {:>9}\n",
        name,
        s.count,
        opt(s.wr, 3),
        opt(s.re50, 3),
        opt(s.re90, 3),
        opt(s.mean_profit, 2),
        opt(s.mean_roc, 4)
    )
}

pub fn backtest(report: &BacktestReport) -> String {
    let mut out = format!(
        "backtest {} -> {} ({} strategies, cohort {:?})\n",
        report.config.entry_date,
        report.config.exit_date,
        report.strategies.len(),
        report.cohort
    );
    out.push_str(&format!(
        "{:<8} {:>5} {:>7} {:>7} {:>7} {:>12} {:>9}\n",
        "SIDE", "N", "WR", "RE50", "RE90", "MEAN_PNL", "MEAN_ROC"
    ));
    out.push_str(&cohort_row("all", &report.overall));
    out.push_str(&cohort_row("buyer", &report.buyer));
    out.push_str(&cohort_row("seller", &report.seller));
    out
}

pub fn eval(report: &EvalReport) -> String {
    let mut out = format!("cases {} (K = {}), solved {}\n", report.n, report.k, report.solved);
    out.push_str(&format!("VR        {:.4}\n", report.vr));
    out.push_str(&format!("SM        {} (solved cases)\n", opt(report.sm_conditional, 4)));
    out.push_str(&format!("SM_all    {:.4}\n", report.sm_unconditional));
    out.push_str(&format!("Eff       {:.4}\n", report.eff));
    out.push_str(&format!("AvgRows   {}\n", opt(report.avg_rows, 2)));
    for s in &report.skipped {
        out.push_str(&format!("skipped {}: {}\n", s.id, s.error));
    }
    out
}
