//! European Black-Scholes-Merton valuation, Greeks, implied volatility and the
//! terminal payoff algebra of multi-leg positions.
//!
//! Conventions: `tau` is a year fraction (calendar days / 365), vega is per
//! 1.0 of volatility, theta is dV/dt per year (negative of dV/dtau) and rho is
//! per 1.0 of rate. The normal CDF is `0.5 * erfc(-x / sqrt(2))` using the
//! `libm` port of the FreeBSD msun `erfc`, which is accurate to within one ulp.

use serde::{Deserialize, Serialize};

use crate::error::PricingError;
use crate::types::{Direction, OptionType};

/// Calendar days per year used for every tau conversion.
pub const DAYS_PER_YEAR: f64 = 365.0;

pub const IV_LOWER: f64 = 1e-6;
pub const IV_UPPER: f64 = 10.0;

/// Year fraction for a whole number of calendar days.
pub fn year_fraction(days: i64) -> f64 {
    days as f64 / DAYS_PER_YEAR
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub spot: f64,
    pub rate: f64,
    pub vol: f64,
    pub tau: f64,
}

impl MarketParams {
    pub fn new(spot: f64, rate: f64, vol: f64, tau: f64) -> Self {
        Self { spot, rate, vol, tau }
    }

    pub fn with_vol(self, vol: f64) -> Self {
        Self { vol, ..self }
    }
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

pub fn d_plus_minus(m: &MarketParams, strike: f64) -> Result<(f64, f64), PricingError> {
    if m.tau <= 0.0 {
        return Err(PricingError::Domain("tau must be positive"));
    }
    if m.vol <= 0.0 {
        return Err(PricingError::Domain("volatility must be positive"));
    }
    let sd = m.vol * m.tau.sqrt();
    let d_plus = ((m.spot / strike).ln() + (m.rate + 0.5 * m.vol * m.vol) * m.tau) / sd;
    Ok((d_plus, d_plus - sd))
}

/// Intrinsic value at expiry.
pub fn intrinsic(option_type: OptionType, spot: f64, strike: f64) -> f64 {
    match option_type {
        OptionType::Call => (spot - strike).max(0.0),
        OptionType::Put => (strike - spot).max(0.0),
    }
}

/// European option premium.
///
/// At `tau == 0` this is the raw intrinsic value. At `vol == 0` with time
/// left it is the discounted forward intrinsic `e^{-r tau} (F - K)^+`, the
/// zero-volatility limit of the closed form.
pub fn bsm_price(m: &MarketParams, strike: f64, option_type: OptionType) -> f64 {
    if m.tau <= 0.0 {
        return intrinsic(option_type, m.spot, strike);
    }
    let df = (-m.rate * m.tau).exp();
    if m.vol <= 0.0 {
        return match option_type {
            OptionType::Call => (m.spot - strike * df).max(0.0),
            OptionType::Put => (strike * df - m.spot).max(0.0),
        };
    }
    let (dp, dm) = d_plus_minus(m, strike).expect("tau and vol checked above");
    match option_type {
        OptionType::Call => m.spot * norm_cdf(dp) - strike * df * norm_cdf(dm),
        OptionType::Put => strike * df * norm_cdf(-dm) - m.spot * norm_cdf(-dp),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Greeks {
    pub delta: f64,
    pub gamma: f64,
    pub vega: f64,
    pub theta: f64,
    pub rho: f64,
}

/// Closed-form sensitivities. Undefined at expiry or zero volatility.
pub fn greeks(m: &MarketParams, strike: f64, option_type: OptionType) -> Result<Greeks, PricingError> {
    let (dp, dm) = d_plus_minus(m, strike)?;
    let sqrt_tau = m.tau.sqrt();
    let df = (-m.rate * m.tau).exp();
    let pdf = norm_pdf(dp);

    let gamma = pdf / (m.spot * m.vol * sqrt_tau);
    let vega = m.spot * pdf * sqrt_tau;
    let decay = -m.spot * pdf * m.vol / (2.0 * sqrt_tau);

    Ok(match option_type {
        OptionType::Call => Greeks {
            delta: norm_cdf(dp),
            gamma,
            vega,
            theta: decay - m.rate * strike * df * norm_cdf(dm),
            rho: strike * m.tau * df * norm_cdf(dm),
        },
        OptionType::Put => Greeks {
            delta: -norm_cdf(-dp),
            gamma,
            vega,
            theta: decay + m.rate * strike * df * norm_cdf(-dm),
            rho: -strike * m.tau * df * norm_cdf(-dm),
        },
    })
}

/// What to do when the observed price sits at (or below the reach of) the
/// lower end of the volatility bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBoundPolicy {
    #[default]
    Reject,
    ClampToMin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvOptions {
    pub lower_bound: LowerBoundPolicy,
    pub max_iterations: usize,
    /// Absolute price residual the solution must reach.
    pub price_tolerance: f64,
}

impl Default for IvOptions {
    fn default() -> Self {
        Self {
            lower_bound: LowerBoundPolicy::Reject,
            max_iterations: 200,
            price_tolerance: 1e-10,
        }
    }
}

/// No-arbitrage premium bounds `[lower, upper)` for `tau > 0`.
pub fn arbitrage_bounds(spot: f64, rate: f64, tau: f64, strike: f64, option_type: OptionType) -> (f64, f64) {
    let pv_strike = strike * (-rate * tau).exp();
    match option_type {
        OptionType::Call => ((spot - pv_strike).max(0.0), spot),
        OptionType::Put => ((pv_strike - spot).max(0.0), pv_strike),
    }
}

/// Volatility that reproduces `observed` under BSM, searched on
/// `[IV_LOWER, IV_UPPER]` with Newton steps safeguarded by bisection.
/// `m.vol` is ignored.
pub fn implied_vol(
    m: &MarketParams,
    strike: f64,
    option_type: OptionType,
    observed: f64,
    opts: &IvOptions,
) -> Result<f64, PricingError> {
    if m.tau <= 0.0 {
        return Err(PricingError::NoSolution("no time value at expiry".into()));
    }
    if !observed.is_finite() {
        return Err(PricingError::NoSolution(format!("price {observed} is not finite")));
    }
    let (lower, upper) = arbitrage_bounds(m.spot, m.rate, m.tau, strike, option_type);
    if observed < lower {
        return Err(PricingError::NoSolution(format!(
            "price {observed} is below the arbitrage bound {lower}"
        )));
    }
    if observed >= upper {
        return Err(PricingError::NoSolution(format!(
            "price {observed} is at or above the arbitrage bound {upper}"
        )));
    }

    let f = |vol: f64| bsm_price(&m.with_vol(vol), strike, option_type) - observed;
    let (mut lo, mut hi) = (IV_LOWER, IV_UPPER);
    let f_lo = f(lo);
    if f_lo >= 0.0 {
        // Price is reached at or below the smallest volatility we search.
        return match opts.lower_bound {
            LowerBoundPolicy::ClampToMin => Ok(IV_LOWER),
            LowerBoundPolicy::Reject if f_lo.abs() <= opts.price_tolerance && observed > lower => Ok(IV_LOWER),
            LowerBoundPolicy::Reject => Err(PricingError::NoSolution(format!(
                "price {observed} is at or below the value at the lowest volatility"
            ))),
        };
    }
    if f(hi) < 0.0 {
        return Err(PricingError::NoSolution(format!(
            "price {observed} exceeds the value at volatility {IV_UPPER}"
        )));
    }

    let mut vol = initial_guess(m, strike, observed).clamp(lo, hi);
    let mut best = (f64::INFINITY, vol);
    for _ in 0..opts.max_iterations {
        let diff = f(vol);
        if diff.abs() < best.0 {
            best = (diff.abs(), vol);
        }
        if diff == 0.0 {
            return Ok(vol);
        }
        if diff > 0.0 {
            hi = vol;
        } else {
            lo = vol;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let vega = greeks(&m.with_vol(vol), strike, option_type).map(|g| g.vega).unwrap_or(0.0);
        let newton = vol - diff / vega;
        vol = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if vol == lo || vol == hi {
            break;
        }
    }

    if best.0 <= opts.price_tolerance {
        Ok(best.1)
    } else {
        Err(PricingError::NonConvergence(opts.max_iterations))
    }
}

// Brenner-Subrahmanyam style starting point, good near the money.
fn initial_guess(m: &MarketParams, strike: f64, observed: f64) -> f64 {
    let forward = m.spot * (m.rate * m.tau).exp();
    let guess = (2.0 * std::f64::consts::PI / m.tau).sqrt() * observed / forward;
    if guess.is_finite() && guess > 0.0 && (forward / strike).ln().abs() < 0.5 {
        guess
    } else {
        0.3
    }
}

/// One position of a strategy: direction, type, strike, expiry (as a year
/// fraction from entry), quantity and entry premium per unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub direction: Direction,
    pub option_type: OptionType,
    pub strike: f64,
    pub expiry_tau: f64,
    pub quantity: u32,
    pub premium: f64,
}

/// Terminal intrinsic value of one unit, ignoring direction, quantity and premium.
pub fn leg_payoff(leg: &Leg, terminal_spot: f64) -> f64 {
    intrinsic(leg.option_type, terminal_spot, leg.strike)
}

/// Net profit at expiry per unit of the contract multiplier:
/// `sum(q * d * (payoff - premium))`.
pub fn strategy_payoff(legs: &[Leg], terminal_spot: f64) -> f64 {
    legs.iter()
        .map(|l| f64::from(l.quantity) * l.direction.sign() * (leg_payoff(l, terminal_spot) - l.premium))
        .sum()
}

/// Entry cash flow per unit: positive is a net debit, negative a net credit.
pub fn entry_cash(legs: &[Leg]) -> f64 {
    legs.iter()
        .map(|l| f64::from(l.quantity) * l.direction.sign() * l.premium)
        .sum()
}

/// Extremes of the terminal payoff over `S_T >= 0`. `None` means unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffExtremes {
    pub max_profit: Option<f64>,
    /// Positive when the position can lose money.
    pub max_loss: Option<f64>,
    /// Terminal prices where the payoff crosses zero, ascending.
    pub breakevens: Vec<f64>,
}

/// Evaluates the piecewise-linear payoff at `{0} ∪ strikes` and uses the slope
/// beyond the highest strike to detect unbounded tails.
pub fn payoff_extremes(legs: &[Leg]) -> Result<PayoffExtremes, PricingError> {
    if let Some(first) = legs.first() {
        if legs.iter().any(|l| l.expiry_tau != first.expiry_tau) {
            return Err(PricingError::MultiExpiryUnsupported);
        }
    }

    let mut points: Vec<f64> = std::iter::once(0.0).chain(legs.iter().map(|l| l.strike)).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let values: Vec<f64> = points.iter().map(|&s| strategy_payoff(legs, s)).collect();

    let right_slope: f64 = legs
        .iter()
        .filter(|l| l.option_type == OptionType::Call)
        .map(|l| f64::from(l.quantity) * l.direction.sign())
        .sum();

    let max_v = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_v = values.iter().copied().fold(f64::INFINITY, f64::min);

    let mut breakevens = Vec::new();
    for i in 0..points.len() {
        let (x0, v0) = (points[i], values[i]);
        if v0 == 0.0 {
            breakevens.push(x0);
        }
        if let (Some(&x1), Some(&v1)) = (points.get(i + 1), values.get(i + 1)) {
            if (v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0) {
                breakevens.push(x0 + (x1 - x0) * v0 / (v0 - v1));
            }
        } else if right_slope != 0.0 && v0 * right_slope < 0.0 {
            breakevens.push(x0 - v0 / right_slope);
        }
    }

    Ok(PayoffExtremes {
        max_profit: (right_slope <= 0.0).then_some(max_v),
        max_loss: (right_slope >= 0.0).then_some(-min_v),
        breakevens,
    })
}
