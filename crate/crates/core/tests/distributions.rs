use proptest::prelude::*;
use trunctail::HeavyTailModel;

fn models() -> Vec<HeavyTailModel> {
    vec![
        HeavyTailModel::burr(0.25, 0.6).unwrap(),
        HeavyTailModel::burr(0.25, 0.8).unwrap(),
        HeavyTailModel::burr(1.0, 1.0).unwrap(),
        HeavyTailModel::pareto(0.5).unwrap(),
        HeavyTailModel::frechet(0.5).unwrap(),
    ]
}

#[test]
fn survival_is_monotone_on_geometric_grid() {
    for m in models() {
        let mut prev = f64::INFINITY;
        for i in 0..1000 {
            let x = 1e-3 * 1e9f64.powf(i as f64 / 999.0);
            let s = m.survival(x).unwrap();
            assert!((0.0..=1.0).contains(&s));
            assert!(s <= prev, "{m}: survival increases at {x}");
            prev = s;
        }
        assert!(m.survival(1e300).unwrap() < 1e-100);
    }
}

#[test]
fn log_log_slope_at_one_million() {
    for m in models() {
        let x = 1e6;
        let slope = (m.survival(2.0 * x).unwrap().ln() - m.survival(x).unwrap().ln()) / 2f64.ln();
        assert!((slope + 1.0 / m.tail_index()).abs() < 1e-3, "{m}: slope {slope}");
    }
}

#[test]
fn sample_exceedance_fraction() {
    let m = HeavyTailModel::burr(0.25, 0.6).unwrap();
    let xs = m.sample(100_000, 2024).unwrap();
    let frac = xs.iter().filter(|&&x| x > 1.0).count() as f64 / xs.len() as f64;
    assert!((frac - 0.74916).abs() < 0.005, "{frac}");
}

/// `U(tx)/U(t) - x^gamma` for Burr, computed without cancellation from the
/// survival `(1 + x^{1/delta})^{-delta/gamma}` inverted by hand.
fn burr_quantile_ratio_excess(delta: f64, gamma: f64, t: f64, x: f64) -> f64 {
    let a = gamma / delta;
    let log_ratio = delta * ((-(t * x).powf(-a)).ln_1p() - (-t.powf(-a)).ln_1p());
    x.powf(gamma) * log_ratio.exp_m1()
}

#[test]
fn burr_second_order_parameter_matches_numeric_limit() {
    for (delta, gamma) in [(0.25, 0.6), (0.25, 0.8), (1.0, 1.0)] {
        let m = HeavyTailModel::burr(delta, gamma).unwrap();
        let tau = m.second_order_tau();
        let r = |t: f64| burr_quantile_ratio_excess(delta, gamma, t, 2.0);
        // A(t) is regularly varying with index tau: log-ratios over a
        // factor 100 in t settle on tau.
        let slopes: Vec<f64> = [1e2, 1e4].iter().map(|&t| (r(100.0 * t) / r(t)).ln() / 100f64.ln()).collect();
        assert!((slopes[1] - tau).abs() < 1e-3, "delta {delta}, gamma {gamma}: {slopes:?} vs {tau}");
        assert!((slopes[0] - tau).abs() < 0.05);
        // and the limit shape x^gamma (x^tau - 1)/tau is reached after
        // normalizing by A(t) = c t^tau
        let shape = |x: f64| x.powf(gamma) * (x.powf(tau) - 1.0) / tau;
        let ratios: Vec<f64> = [1e2, 1e4, 1e6]
            .iter()
            .map(|&t| burr_quantile_ratio_excess(delta, gamma, t, 2.0) / shape(2.0) / t.powf(tau))
            .collect();
        assert!((ratios[2] / ratios[1] - 1.0).abs() < 1e-3, "{ratios:?}");
    }
    assert_eq!(HeavyTailModel::burr(0.25, 0.6).unwrap().second_order_tau(), -2.4);
    assert_eq!(HeavyTailModel::burr(0.25, 0.8).unwrap().second_order_tau(), -3.2);
    assert_eq!(HeavyTailModel::burr(1.0, 1.0).unwrap().second_order_tau(), -1.0);
}

#[test]
fn frechet_second_order_parameter() {
    let gamma = 0.5;
    let m = HeavyTailModel::frechet(gamma).unwrap();
    // log U(t) = gamma ln t - gamma ln h(1/t), h(s) = -ln(1 - s)/s
    let log_h = |s: f64| (-(-s).ln_1p() / s).ln();
    let r = |t: f64| -gamma * (log_h(1.0 / (2.0 * t)) - log_h(1.0 / t));
    let slope = (r(1e6) / r(1e4)).ln() / 100f64.ln();
    assert!((slope - m.second_order_tau()).abs() < 1e-3);
}

fn model_strategy() -> impl Strategy<Value = HeavyTailModel> {
    prop_oneof![
        (0.1f64..2.0, 0.2f64..2.0).prop_map(|(d, g)| HeavyTailModel::burr(d, g).unwrap()),
        (0.2f64..2.0).prop_map(|g| HeavyTailModel::pareto(g).unwrap()),
        (0.2f64..2.0).prop_map(|g| HeavyTailModel::frechet(g).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn quantile_round_trips(m in model_strategy(), u in 1e-6f64..(1.0 - 1e-6)) {
        let x = m.quantile(u).unwrap();
        prop_assert!((m.df(x).unwrap() - u).abs() < 1e-10);
        prop_assert!((m.survival(x).unwrap() - (1.0 - u)).abs() < 1e-12);
    }

    #[test]
    fn df_round_trips(m in model_strategy(), lx in -3.0f64..6.0) {
        let x = 10f64.powf(lx);
        let u = m.df(x).unwrap();
        prop_assume!(u > 1e-6 && u < 1.0 - 1e-6);
        let back = m.quantile(u).unwrap();
        prop_assert!((m.df(back).unwrap() - u).abs() < 1e-10);
    }

    #[test]
    fn spec_string_round_trips(m in model_strategy()) {
        let parsed: HeavyTailModel = m.to_string().parse().unwrap();
        prop_assert_eq!(parsed, m);
    }
}
