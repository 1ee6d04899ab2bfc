//! Field vocabularies for leg-level (WHERE) and strategy-level (HAVING,
//! ORDER BY) conditions.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Per-contract attribute usable in a WHERE condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LegField {
    Dte,
    Strike,
    Price,
    Volume,
    Iv,
    Delta,
    Gamma,
    Vega,
    Theta,
    Moneyness,
    Type,
}

impl LegField {
    pub const ALL: [LegField; 11] = [
        LegField::Dte,
        LegField::Strike,
        LegField::Price,
        LegField::Volume,
        LegField::Iv,
        LegField::Delta,
        LegField::Gamma,
        LegField::Vega,
        LegField::Theta,
        LegField::Moneyness,
        LegField::Type,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LegField::Dte => "Dte",
            LegField::Strike => "Strike",
            LegField::Price => "Price",
            LegField::Volume => "Volume",
            LegField::Iv => "Iv",
            LegField::Delta => "Delta",
            LegField::Gamma => "Gamma",
            LegField::Vega => "Vega",
            LegField::Theta => "Theta",
            LegField::Moneyness => "Moneyness",
            LegField::Type => "Type",
        }
    }

    pub fn lookup(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(name))
    }

    /// Categorical fields only support `=` and `!=` against symbolic literals.
    pub fn is_categorical(self) -> bool {
        matches!(self, LegField::Moneyness | LegField::Type)
    }
}

impl fmt::Display for LegField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Strategy aggregate usable in HAVING and ORDER BY.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AggField {
    NetDebit,
    NetCredit,
    NetDelta,
    NetGamma,
    NetVega,
    NetTheta,
    MaxLoss,
    MaxProfit,
    RrRatio,
    Width,
    BreakevenLow,
    BreakevenHigh,
}

impl AggField {
    pub const ALL: [AggField; 12] = [
        AggField::NetDebit,
        AggField::NetCredit,
        AggField::NetDelta,
        AggField::NetGamma,
        AggField::NetVega,
        AggField::NetTheta,
        AggField::MaxLoss,
        AggField::MaxProfit,
        AggField::RrRatio,
        AggField::Width,
        AggField::BreakevenLow,
        AggField::BreakevenHigh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggField::NetDebit => "net_debit",
            AggField::NetCredit => "net_credit",
            AggField::NetDelta => "net_delta",
            AggField::NetGamma => "net_gamma",
            AggField::NetVega => "net_vega",
            AggField::NetTheta => "net_theta",
            AggField::MaxLoss => "max_loss",
            AggField::MaxProfit => "max_profit",
            AggField::RrRatio => "rr_ratio",
            AggField::Width => "width",
            AggField::BreakevenLow => "breakeven_low",
            AggField::BreakevenHigh => "breakeven_high",
        }
    }

    pub fn lookup(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for AggField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Canonical spelling of a known field name, or the input unchanged.
pub fn canonical_field_name(name: &str) -> String {
    if let Some(f) = LegField::lookup(name) {
        return f.name().to_string();
    }
    if let Some(f) = AggField::lookup(name) {
        return f.name().to_string();
    }
    name.to_string()
}
