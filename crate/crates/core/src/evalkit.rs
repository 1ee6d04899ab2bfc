//! Query-quality metrics over stored query attempts: validity rate (VR),
//! strategy match (SM), efficiency (Eff) and selectivity (AvgRows).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::ChainSnapshot;
use crate::engine::{execute, EngineConfig};
use crate::error::EvalError;

pub const DEFAULT_ATTEMPT_BUDGET: usize = 3;

/// One line of a cases file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCase {
    pub id: String,
    #[serde(default)]
    pub intent: String,
    pub gold_strategy: String,
    /// Chain snapshot path, resolved by the caller.
    pub chain: String,
    pub attempts: Vec<String>,
    /// Externally produced semantic-accuracy grade, averaged when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sa_grade: Option<f64>,
}

/// Parses a JSONL cases file; blank lines are skipped.
pub fn parse_cases(text: &str) -> Result<Vec<EvalCase>, EvalError> {
    let mut cases = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let case: EvalCase = serde_json::from_str(line).map_err(|e| EvalError::InvalidCase {
            id: format!("line {}", i + 1),
            message: e.to_string(),
        })?;
        if case.attempts.is_empty() {
            return Err(EvalError::InvalidCase {
                id: case.id,
                message: "no attempts".into(),
            });
        }
        cases.push(case);
    }
    if cases.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    Ok(cases)
}

/// Strategy family of a catalog name or a common alias. Calls and puts,
/// bull and bear, spreads and condors are all distinct families.
pub fn strategy_family(label: &str) -> Option<&'static str> {
    let upper = label.trim().to_ascii_uppercase();
    Some(match upper.as_str() {
        "LONG_CALL" => "LONG_CALL",
        "LONG_PUT" => "LONG_PUT",
        "BULL_CALL_SPREAD" | "BULL_SPREAD" => "BULL_CALL_SPREAD",
        "BEAR_PUT_SPREAD" | "BEAR_SPREAD" => "BEAR_PUT_SPREAD",
        "BEAR_CALL_SPREAD" => "BEAR_CALL_SPREAD",
        "CALENDAR_CALL" | "CALENDAR" | "CALENDAR_SPREAD" => "CALENDAR_CALL",
        "STRADDLE" | "LONG_STRADDLE" => "STRADDLE",
        "STRANGLE" | "LONG_STRANGLE" => "STRANGLE",
        "IRON_CONDOR" => "IRON_CONDOR",
        "BUTTERFLY_CALL" | "BUTTERFLY" | "CALL_BUTTERFLY" => "BUTTERFLY_CALL",
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptResult {
    /// Rows returned, or `None` when the attempt failed.
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub id: String,
    pub gold_strategy: String,
    /// 1-based index of the first attempt returning at least one strategy;
    /// `None` when no attempt within the budget did.
    pub k_first_success: Option<usize>,
    pub rows_at_success: Option<usize>,
    pub selected_strategy: Option<String>,
    pub attempts: Vec<AttemptResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sa_grade: Option<f64>,
}

impl CaseOutcome {
    pub fn solved(&self) -> bool {
        self.k_first_success.is_some()
    }
}

/// Runs the first `k_budget` attempts in order, stopping at the first one
/// that executes and returns at least one strategy.
pub fn run_case(case: &EvalCase, snapshot: &ChainSnapshot, config: &EngineConfig, k_budget: usize) -> CaseOutcome {
    let mut outcome = CaseOutcome {
        id: case.id.clone(),
        gold_strategy: case.gold_strategy.clone(),
        k_first_success: None,
        rows_at_success: None,
        selected_strategy: None,
        attempts: Vec::new(),
        sa_grade: case.sa_grade,
    };
    for (i, text) in case.attempts.iter().take(k_budget).enumerate() {
        match execute(text, snapshot, config) {
            Ok(rs) => {
                let rows = rs.strategies.len();
                outcome.attempts.push(AttemptResult { rows: Some(rows), error: None });
                if rows > 0 {
                    outcome.k_first_success = Some(i + 1);
                    outcome.rows_at_success = Some(rows);
                    outcome.selected_strategy = Some(rs.query.schema.name.clone());
                    break;
                }
            }
            Err(e) => outcome.attempts.push(AttemptResult {
                rows: None,
                error: Some(format!("{} error: {e}", e.stage())),
            }),
        }
    }
    outcome
}

fn non_empty<T>(xs: &[T]) -> Result<(), EvalError> {
    if xs.is_empty() {
        Err(EvalError::EmptyInput)
    } else {
        Ok(())
    }
}

/// Fraction of cases solved within the budget.
pub fn validity_rate(outcomes: &[CaseOutcome]) -> Result<f64, EvalError> {
    non_empty(outcomes)?;
    Ok(outcomes.iter().filter(|o| o.solved()).count() as f64 / outcomes.len() as f64)
}

fn family_hits(outcomes: &[CaseOutcome]) -> Result<usize, EvalError> {
    let mut hits = 0;
    for o in outcomes {
        let gold = strategy_family(&o.gold_strategy).ok_or_else(|| EvalError::UnknownGoldLabel(o.gold_strategy.clone()))?;
        if o.selected_strategy.as_deref().and_then(strategy_family) == Some(gold) {
            hits += 1;
        }
    }
    Ok(hits)
}

/// Family matches over solved cases only.
pub fn strategy_match(outcomes: &[CaseOutcome]) -> Result<f64, EvalError> {
    let solved = outcomes.iter().filter(|o| o.solved()).count();
    let hits = family_hits(outcomes)?;
    if solved == 0 {
        return Err(EvalError::NoSolvedCases);
    }
    Ok(hits as f64 / solved as f64)
}

/// Family matches over all cases.
pub fn strategy_match_unconditional(outcomes: &[CaseOutcome]) -> Result<f64, EvalError> {
    non_empty(outcomes)?;
    Ok(family_hits(outcomes)? as f64 / outcomes.len() as f64)
}

/// `(1/N) * sum 1[k_j <= K] * (1 - k_j / K)`, with `None` standing for an
/// unsolved case.
pub fn efficiency(first_success: &[Option<usize>], k_budget: usize) -> Result<f64, EvalError> {
    non_empty(first_success)?;
    // (K - k) / K is the same ratio as 1 - k/K but rounds only once.
    let total: f64 = first_success
        .iter()
        .map(|k| match k {
            Some(k) if *k <= k_budget => (k_budget - k) as f64 / k_budget as f64,
            _ => 0.0,
        })
        .sum();
    Ok(total / first_success.len() as f64)
}

/// Mean row count over solved cases.
pub fn avg_rows(outcomes: &[CaseOutcome]) -> Result<f64, EvalError> {
    let rows: Vec<usize> = outcomes.iter().filter_map(|o| o.rows_at_success).collect();
    if rows.is_empty() {
        return Err(EvalError::NoSolvedCases);
    }
    Ok(rows.iter().sum::<usize>() as f64 / rows.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCase {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub vr: f64,
    /// Denominator: solved cases. `None` when nothing was solved.
    pub sm_conditional: Option<f64>,
    /// Denominator: all evaluated cases.
    pub sm_unconditional: f64,
    pub eff: f64,
    /// `None` when nothing was solved.
    pub avg_rows: Option<f64>,
    pub n: usize,
    pub k: usize,
    pub solved: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sa_mean: Option<f64>,
    pub skipped: Vec<SkippedCase>,
    pub cases: Vec<CaseOutcome>,
}

pub fn summarize(outcomes: Vec<CaseOutcome>, skipped: Vec<SkippedCase>, k_budget: usize) -> Result<EvalReport, EvalError> {
    let ks: Vec<Option<usize>> = outcomes.iter().map(|o| o.k_first_success).collect();
    let grades: Vec<f64> = outcomes.iter().filter_map(|o| o.sa_grade).collect();
    Ok(EvalReport {
        vr: validity_rate(&outcomes)?,
        sm_conditional: match strategy_match(&outcomes) {
            Err(EvalError::NoSolvedCases) => None,
            other => Some(other?),
        },
        sm_unconditional: strategy_match_unconditional(&outcomes)?,
        eff: efficiency(&ks, k_budget)?,
        avg_rows: avg_rows(&outcomes).ok(),
        n: outcomes.len(),
        k: k_budget,
        solved: outcomes.iter().filter(|o| o.solved()).count(),
        sa_mean: (!grades.is_empty()).then(|| grades.iter().sum::<f64>() / grades.len() as f64),
        skipped,
        cases: outcomes,
    })
}

/// Runs every case, loading each distinct chain once. Cases whose chain
/// fails to load are skipped and listed in the report.
pub fn evaluate(
    cases: &[EvalCase],
    config: &EngineConfig,
    k_budget: usize,
    mut load: impl FnMut(&str) -> Result<ChainSnapshot, String>,
) -> Result<EvalReport, EvalError> {
    non_empty(cases)?;
    if k_budget == 0 {
        return Err(EvalError::InvalidCase {
            id: "-".into(),
            message: "attempt budget must be at least 1".into(),
        });
    }
    for case in cases {
        if strategy_family(&case.gold_strategy).is_none() {
            return Err(EvalError::UnknownGoldLabel(case.gold_strategy.clone()));
        }
    }
    let mut chains: BTreeMap<&str, Result<ChainSnapshot, String>> = BTreeMap::new();
    let mut outcomes = Vec::new();
    let mut skipped = Vec::new();
    for case in cases {
        let snap = chains.entry(case.chain.as_str()).or_insert_with(|| load(&case.chain));
        match snap {
            Ok(snap) => outcomes.push(run_case(case, snap, config, k_budget)),
            Err(e) => skipped.push(SkippedCase {
                id: case.id.clone(),
                error: e.clone(),
            }),
        }
    }
    summarize(outcomes, skipped, k_budget)
}
