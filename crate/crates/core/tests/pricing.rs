mod common;

use common::{fd_greeks, random_draw, theta_scale};
use oql_core::error::PricingError;
use oql_core::pricing::{bsm_price, greeks, implied_vol, norm_cdf, IvOptions, MarketParams};
use oql_core::OptionType;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Standard normal CDF at 50 significant digits, rounded to f64.
const NORMAL_CDF: [(f64, f64); 28] = [
    (-37.5, 4.605353009581955e-308),
    (-20.0, 2.7536241186062337e-89),
    (-10.0, 7.619853024160525e-24),
    (-8.0, 6.220960574271784e-16),
    (-6.0, 9.86587645037698e-10),
    (-5.0, 2.866515718791939e-07),
    (-4.0, 3.1671241833119924e-05),
    (-3.0, 0.0013498980316300946),
    (-2.5, 0.006209665325776135),
    (-2.0, 0.02275013194817921),
    (-1.5, 0.06680720126885807),
    (-1.0, 0.15865525393145705),
    (-0.5, 0.3085375387259869),
    (-0.25, 0.4012936743170763),
    (-0.001, 0.49960105778608893),
    (0.0, 0.5),
    (0.001, 0.500398942213911),
    (0.25, 0.5987063256829237),
    (0.5, 0.6914624612740131),
    (1.0, 0.8413447460685429),
    (1.5, 0.9331927987311419),
    (2.0, 0.9772498680518208),
    (2.5, 0.9937903346742238),
    (3.0, 0.9986501019683699),
    (4.0, 0.9999683287581669),
    (5.0, 0.9999997133484281),
    (6.0, 0.9999999990134123),
    (8.0, 0.9999999999999993),
];

#[test]
fn normal_cdf_matches_high_precision_table() {
    for (x, want) in NORMAL_CDF {
        let got = norm_cdf(x);
        let rel = (got - want).abs() / want;
        // Near the bottom of the normal range erfc loses a few digits.
        let tol = if x < -30.0 { 1e-11 } else { 1e-13 };
        assert!(rel <= tol, "N({x}) = {got:e}, want {want:e}");
    }
}

struct Ref {
    s: f64,
    k: f64,
    r: f64,
    v: f64,
    t: f64,
    call: f64,
    put: f64,
    call_delta: f64,
    put_delta: f64,
    gamma: f64,
    vega: f64,
    call_theta: f64,
    put_theta: f64,
    call_rho: f64,
    put_rho: f64,
}

// Closed forms evaluated at 50 significant digits.
const REFERENCE: [Ref; 5] = [
    Ref { s: 100.0, k: 100.0, r: 0.05, v: 0.2, t: 1.0, call: 10.450583572185568, put: 5.573526022256968, call_delta: 0.6368306511756191, put_delta: -0.3631693488243809, gamma: 0.01876201734584689, vega: 37.524034691693785, call_theta: -6.414027546438196, put_theta: -1.6578804239346259, call_rho: 53.23248154537634, put_rho: -41.89046090469506 },
    Ref { s: 100.0, k: 120.0, r: 0.03, v: 0.35, t: 0.25, call: 1.5904281497022135, put: 20.693794727998824, call_delta: 0.18102117395258369, put_delta: -0.8189788260474163, gamma: 0.015047587417189524, vega: 13.166638990040832, call_theta: -9.711997970395267, put_theta: -6.138896973046368, call_rho: 4.127922311389039, put_rho: -25.647919333185115 },
    Ref { s: 50.0, k: 40.0, r: 0.0, v: 0.6, t: 2.0, call: 20.264383141011436, put: 10.264383141011436, call_delta: 0.7540346479776354, put_delta: -0.24596535202236458, gamma: 0.007425317873795763, vega: 22.275953621387288, call_theta: -3.341393043208093, put_theta: -3.341393043208093, call_rho: 34.87469851574067, put_rho: -45.12530148425933 },
    Ref { s: 340.0, k: 345.0, r: 0.04, v: 0.18, t: 0.0821917808219178, call: 5.273231678792726, put: 9.140847576742937, call_delta: 0.4233279328057936, put_delta: -0.5766720671942064, gamma: 0.022316365068314616, vega: 38.1664869321773, call_theta: -47.338633809741225, put_theta: -33.583929173823215, call_rho: 11.396569765083049, put_rho: -16.866521952556692 },
    Ref { s: 1000.0, k: 700.0, r: 0.08, v: 0.12, t: 0.5, call: 327.44741281438814, put: 2.0221014371197566e-05, call_delta: 0.9999988049388338, put_delta: -1.1950611662233403e-06, gamma: 6.920119472388001e-08, vega: 0.0041520716834328, call_theta: -53.80460961855766, put_theta: -0.00040102602756437295, call_rho: 336.27569606222283, put_rho: -0.0006076410902972689 },
];

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

#[test]
fn closed_forms_match_high_precision_values() {
    for r in REFERENCE {
        let m = MarketParams::new(r.s, r.r, r.v, r.t);
        let c = greeks(&m, r.k, OptionType::Call).unwrap();
        let p = greeks(&m, r.k, OptionType::Put).unwrap();
        let checks = [
            (bsm_price(&m, r.k, OptionType::Call), r.call, 1e-12),
            (bsm_price(&m, r.k, OptionType::Put), r.put, 1e-8),
            (c.delta, r.call_delta, 1e-12),
            (p.delta, r.put_delta, 1e-9),
            (c.gamma, r.gamma, 1e-12),
            (p.gamma, r.gamma, 1e-12),
            (c.vega, r.vega, 1e-12),
            (c.theta, r.call_theta, 1e-12),
            (p.theta, r.put_theta, 1e-9),
            (c.rho, r.call_rho, 1e-12),
            (p.rho, r.put_rho, 1e-9),
        ];
        for (i, (got, want, tol)) in checks.into_iter().enumerate() {
            assert!(close(got, want, tol), "S={} K={} check {i}: {got:e} vs {want:e}", r.s, r.k);
        }
    }
}

/// Discounted expected payoff under the risk-neutral lognormal law,
/// integrated by composite Simpson over the standard normal variable.
fn quadrature_call(s: f64, k: f64, r: f64, v: f64, t: f64) -> f64 {
    let n = 40_000;
    let (a, b) = (-12.0, 12.0);
    let h = (b - a) / n as f64;
    let f = |z: f64| {
        let st = s * ((r - 0.5 * v * v) * t + v * t.sqrt() * z).exp();
        (st - k).max(0.0) * (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
    };
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    (-r * t).exp() * sum * h / 3.0
}

#[test]
fn call_price_matches_quadrature() {
    for (s, k, r, v, t) in [(100.0, 100.0, 0.05, 0.2, 1.0), (100.0, 80.0, 0.01, 0.5, 0.1), (42.0, 45.0, 0.07, 0.3, 2.5)] {
        let got = bsm_price(&MarketParams::new(s, r, v, t), k, OptionType::Call);
        let want = quadrature_call(s, k, r, v, t);
        assert!(close(got, want, 1e-7), "{got} vs {want}");
    }
}

#[test]
fn put_call_parity_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let d = random_draw(&mut rng);
        let m = d.market();
        let c = bsm_price(&m, d.strike, OptionType::Call);
        let p = bsm_price(&m, d.strike, OptionType::Put);
        let residual = c - p - (d.spot - d.strike * (-d.rate * d.tau).exp());
        assert!(residual.abs() <= 1e-10, "{d:?}: {residual:e}");
    }
}

#[test]
fn greeks_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10_000 {
        let d = random_draw(&mut rng);
        let g = greeks(&d.market(), d.strike, d.option_type).unwrap();
        let fd = fd_greeks(&d);
        let pairs = [
            ("delta", g.delta, fd.delta, 0.0),
            ("gamma", g.gamma, fd.gamma, 0.0),
            ("vega", g.vega, fd.vega, 0.0),
            ("theta", g.theta, fd.theta, theta_scale(&d)),
            ("rho", g.rho, fd.rho, 0.0),
        ];
        for (name, a, b, scale) in pairs {
            assert!((a - b).abs() <= 1e-5 * a.abs().max(b.abs()).max(scale), "{name} {d:?}: {a:e} vs {b:e}");
        }
    }
}

/// Where the recovered volatility misses by more than 1e-8, the price it
/// produces must be bit-identical to the input: the price then carries no
/// further information about the volatility.
#[test]
fn implied_vol_is_as_accurate_as_the_price_allows() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    for _ in 0..10_000 {
        let d = random_draw(&mut rng);
        let m = d.market();
        let g = greeks(&m, d.strike, d.option_type).unwrap();
        if g.vega <= 1e-12 {
            continue;
        }
        checked += 1;
        let price = bsm_price(&m, d.strike, d.option_type);
        match implied_vol(&m, d.strike, d.option_type, price, &IvOptions::default()) {
            Ok(iv) if (iv - d.vol).abs() <= 1e-8 => {}
            Ok(iv) => {
                let back = bsm_price(&m.with_vol(iv), d.strike, d.option_type);
                assert_eq!(back, price, "{d:?}: iv {iv}");
            }
            Err(PricingError::NoSolution(_)) => {
                let floor = bsm_price(&m.with_vol(1e-6), d.strike, d.option_type);
                assert_eq!(floor, price, "{d:?}");
            }
            Err(e) => panic!("{d:?}: {e}"),
        }
    }
    assert!(checked > 9_000);
}

#[test]
fn near_the_money_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..2_000 {
        let mut d = random_draw(&mut rng);
        d.strike = d.spot * (1.0 + 0.1 * (d.strike / d.spot - 1.0));
        let m = d.market();
        let price = bsm_price(&m, d.strike, d.option_type);
        let iv = implied_vol(&m, d.strike, d.option_type, price, &IvOptions::default()).unwrap();
        assert!((iv - d.vol).abs() <= 1e-8, "{d:?}: {iv}");
    }
}

#[test]
fn price_is_continuous_in_the_zero_vol_limit() {
    for (s, k) in [(100.0, 90.0), (100.0, 110.0), (100.0, 100.0)] {
        for ty in [OptionType::Call, OptionType::Put] {
            let at_zero = bsm_price(&MarketParams::new(s, 0.03, 0.0, 0.5), k, ty);
            let tiny = bsm_price(&MarketParams::new(s, 0.03, 1e-9, 0.5), k, ty);
            assert!((at_zero - tiny).abs() <= 1e-9, "{s} {k} {ty:?}");
        }
    }
}
