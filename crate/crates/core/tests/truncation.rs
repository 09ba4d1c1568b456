use trunctail::quadrature::{integrate, Tolerance};
use trunctail::{HeavyTailModel, TruncationModel};

fn burr_pair() -> TruncationModel {
    TruncationModel::burr_pair(0.25, 0.6, 1.4).unwrap()
}

#[test]
fn closed_form_probability_matches_quadrature() {
    for (g1, g2) in [(0.6, 1.4), (0.8, 7.2), (0.6, 0.6), (0.8, 3.2)] {
        let m = TruncationModel::burr_pair(0.25, g1, g2).unwrap();
        let q = m.truncation_probability_quadrature().unwrap();
        assert!((q - m.truncation_probability()).abs() < 1e-6, "{g1} {g2}: {q}");
    }
    assert!((burr_pair().truncation_probability() - 0.7).abs() < 1e-15);
    assert!((TruncationModel::burr_pair(0.25, 0.8, 7.2).unwrap().truncation_probability() - 0.9).abs() < 1e-15);
}

#[test]
fn quadrature_probability_for_mixed_families() {
    // X Pareto(1/2), Y Pareto(1): P(X <= Y) = int_1^inf (1 - y^-2) y^-2 dy = 2/3
    let m = TruncationModel::new(HeavyTailModel::pareto(0.5).unwrap(), HeavyTailModel::pareto(1.0).unwrap()).unwrap();
    assert!((m.truncation_probability() - 2.0 / 3.0).abs() < 1e-8);
}

/// `p Fbar(x) = int_x^inf Gbar dF`, evaluated on the probability scale
/// `u = F(z)` so the oracle shares no code path with the library's.
fn observed_tail_oracle(f: &HeavyTailModel, g: &HeavyTailModel, x: f64) -> f64 {
    let u0 = f.df(x).unwrap();
    integrate(
        |u: f64| if u >= 1.0 { 0.0 } else { g.survival(f.quantile(u).unwrap()).unwrap() },
        u0,
        1.0,
        16,
        Tolerance { relative: 1e-10, absolute: 1e-300 },
    )
    .unwrap()
    .value
}

#[test]
fn observed_survival_matches_probability_scale_quadrature() {
    let m = burr_pair();
    let (f, g) = (m.truncated(), m.truncation());
    for i in 0..20 {
        let x = 1e-2 * 1e5f64.powf(i as f64 / 19.0);
        let lhs = m.observed_survival_x(x).unwrap() * m.truncation_probability();
        let rhs = observed_tail_oracle(f, g, x);
        assert!((lhs / rhs - 1.0).abs() < 1e-6, "x = {x}: {lhs} vs {rhs}");
    }
}

#[test]
fn observed_tail_has_combined_index() {
    let m = burr_pair();
    let x = 1e4;
    let slope = (m.observed_survival_x(2.0 * x).unwrap().ln() - m.observed_survival_x(x).unwrap().ln()) / 2f64.ln();
    assert!((slope + 1.0 / m.gamma()).abs() < 1e-2, "{slope}");
    assert!((m.gamma() - 0.42).abs() < 1e-15);
}

#[test]
fn c_relative_to_truncation_tail() {
    let m = burr_pair();
    let om = m.observed_marginals(1e6).unwrap();
    assert!((om.c / om.survival_y - 1.0).abs() < 1e-4);
    for x in [0.1, 1.0, 10.0, 1e3] {
        let om = m.observed_marginals(x).unwrap();
        assert!((om.c - (om.df_x - om.df_y)).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&om.c));
    }
}

#[test]
fn marginal_tails_are_asymptotically_pure_power_laws() {
    let m = burr_pair();
    let fx: Vec<f64> =
        [1e4, 1e5, 1e6].iter().map(|&x: &f64| x.powf(1.0 / m.gamma()) * m.observed_survival_x(x).unwrap()).collect();
    let gy: Vec<f64> =
        [1e4, 1e5, 1e6].iter().map(|&x: &f64| x.powf(1.0 / m.gamma2()) * m.observed_survival_y(x).unwrap()).collect();
    for v in [&fx, &gy] {
        assert!(v.iter().all(|&c| c > 0.0));
        assert!((v[1] / v[0] - 1.0).abs() < 0.02 && (v[2] / v[1] - 1.0).abs() < 0.02, "{v:?}");
    }
}

#[test]
fn c_at_tail_quantile_decays_slower_than_any_power_below_one_over_nu() {
    let m = burr_pair();
    for nu in [0.5, 1.0] {
        let vals: Vec<f64> = [1e2, 1e3, 1e4]
            .iter()
            .map(|&t: &f64| t.powf(1.0 / nu) * m.observed_marginals(m.observed_tail_quantile(t).unwrap()).unwrap().c)
            .collect();
        assert!(vals[0] < vals[1] && vals[1] < vals[2], "nu {nu}: {vals:?}");
    }
}

#[test]
fn sampled_fraction_concentrates_at_p() {
    let s = burr_pair().sample_truncated(100_000, 77).unwrap();
    let frac = s.len() as f64 / 1e5;
    assert!((frac - 0.7).abs() < 0.01, "{frac}");
    assert!(s.pairs().iter().all(|&(x, y)| x <= y));
    let prov = s.provenance().unwrap();
    assert_eq!((prov.requested, prov.seed), (100_000, 77));
}

#[test]
fn average_observed_count_at_n_1000() {
    let m = burr_pair();
    let mean = (0..200).map(|s| m.sample_truncated(1000, s).unwrap().len() as f64).sum::<f64>() / 200.0;
    // binomial sd of the mean is sqrt(1000 * 0.21 / 200) ~ 1.02
    assert!((mean - 700.0).abs() < 4.0, "{mean}");
}

#[test]
fn heavy_truncation_warns() {
    let m = TruncationModel::burr_pair(0.25, 0.8, 0.5).unwrap();
    assert!(!m.warnings().is_empty());
    assert!(burr_pair().warnings().is_empty());
}
