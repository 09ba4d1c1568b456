use trunctail::limit_process::{
    assembled_delta_variance, delta_coefficients, mc_delta_moments, DeltaFunctionals, GammaProcess, LimitingRv,
    PathGrid, DEFAULT_HEAD_LEVELS,
};
use trunctail::stats::{mean, variance};
use trunctail::{asymptotic_variance, delta_moments, gamma_process, limiting_rv, mc_variance, simulate_wiener, WienerPath};

const M: usize = 1 << 14;
const PATHS: usize = 100_000;

#[test]
fn terminal_value_has_unit_variance() {
    let w1: Vec<f64> = (0..PATHS as u64).map(|s| *simulate_wiener(1024, s).unwrap().values().last().unwrap()).collect();
    assert!((variance(&w1) - 1.0).abs() < 0.02, "{}", variance(&w1));
}

#[test]
fn increments_have_variance_one_over_m() {
    let m = 256;
    let incs: Vec<f64> = (0..2000u64)
        .flat_map(|s| {
            let v = simulate_wiener(m, s).unwrap().uniform_values();
            v.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>()
        })
        .collect();
    assert!((variance(&incs) * m as f64 - 1.0).abs() < 0.01);
    assert!(mean(&incs).abs() < 3.0 * (1.0 / m as f64 / incs.len() as f64).sqrt());
}

#[test]
fn gamma_process_is_centered_at_two() {
    let grid = PathGrid::new(1 << 12, DEFAULT_HEAD_LEVELS).unwrap();
    let g = GammaProcess::new(2.0, 0.6, 1.4, &grid).unwrap();
    let v: Vec<f64> = (0..PATHS as u64).map(|s| g.apply(&WienerPath::simulate(&grid, s))).collect();
    let sd = variance(&v).sqrt();
    assert!(mean(&v).abs() < 3.0 * sd / (PATHS as f64).sqrt(), "mean {} sd {sd}", mean(&v));
}

#[test]
fn functionals_vanish_where_expected() {
    let grid = PathGrid::new(512, DEFAULT_HEAD_LEVELS).unwrap();
    let zero = WienerPath::zero(&grid);
    for seed in 0..20 {
        let p = WienerPath::simulate(&grid, seed);
        assert_eq!(gamma_process(1.0, &p, 0.6, 1.4).unwrap(), 0.0);
    }
    for x in [1.0, 1.5, 3.0, 100.0] {
        assert_eq!(gamma_process(x, &zero, 0.6, 1.4).unwrap(), 0.0);
    }
    assert_eq!(limiting_rv(&zero, 0.6, 1.4).unwrap(), 0.0);
    assert!(gamma_process(0.0, &zero, 0.6, 1.4).is_err());
    assert!(limiting_rv(&zero, 0.6, 0.5).is_err());
}

#[test]
fn functionals_are_linear_in_the_path() {
    let grid = PathGrid::new(4096, DEFAULT_HEAD_LEVELS).unwrap();
    let gp = GammaProcess::new(2.5, 0.8, 3.2, &grid).unwrap();
    let rv = LimitingRv::new(0.8, 3.2, &grid).unwrap();
    let df = DeltaFunctionals::new(0.7, &grid).unwrap();
    for seed in 0..10 {
        let a = WienerPath::simulate(&grid, seed);
        let b = WienerPath::simulate(&grid, seed + 100);
        let sum = a.add(&b).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() < 1e-10 * (1.0 + y.abs());
        assert!(close(gp.apply(&sum), gp.apply(&a) + gp.apply(&b)));
        assert!(close(rv.apply(&sum), rv.apply(&a) + rv.apply(&b)));
        let (ds, da, db) = (df.apply(&sum), df.apply(&a), df.apply(&b));
        for i in 0..3 {
            assert!(close(ds[i], da[i] + db[i]));
        }
    }
}

#[test]
fn delta_moments_match_monte_carlo() {
    for (i, rho) in [0.6, 0.7, 0.9].into_iter().enumerate() {
        let exact = delta_moments(rho).unwrap().as_array();
        let mc = mc_delta_moments(rho, PATHS, M, 31 + i as u64).unwrap().as_array();
        for j in 0..6 {
            let rel = (mc[j] - exact[j]).abs() / exact[j].abs();
            assert!(rel < 0.03, "rho {rho}, entry {j}: mc {} vs {} ({:.2}%)", mc[j], exact[j], 100.0 * rel);
        }
    }
}

#[test]
fn assembled_moments_reproduce_asymptotic_variance() {
    for (g1, g2) in [(0.6, 1.4), (0.8, 7.2), (0.8, 3.2), (0.3, 0.31)] {
        let (a, b, rho) = delta_coefficients(g1, g2).unwrap();
        let gamma = g1 * g2 / (g1 + g2);
        let assembled = gamma * gamma * assembled_delta_variance(a, b, rho).unwrap();
        let closed = asymptotic_variance(g1, g2).unwrap();
        assert!((assembled - closed).abs() < 1e-9 * closed, "{g1} {g2}");
    }
}

#[test]
fn limiting_variance_matches_closed_form() {
    for (i, (g1, g2)) in [(0.6, 1.4), (0.8, 7.2), (0.8, 3.2)].into_iter().enumerate() {
        let s = mc_variance(g1, g2, PATHS, M, 500 + i as u64).unwrap();
        let rel = (s.variance - s.sigma2_closed_form).abs() / s.sigma2_closed_form;
        assert!(rel < 0.05, "({g1}, {g2}): {} vs {}", s.variance, s.sigma2_closed_form);
        assert!(s.mean.abs() < 3.0 * s.mean_std_error, "mean {} se {}", s.mean, s.mean_std_error);
    }
}

#[test]
fn variance_estimate_is_stable_across_seeds() {
    let a = mc_variance(0.8, 3.2, 20_000, 1 << 12, 1).unwrap();
    let b = mc_variance(0.8, 3.2, 20_000, 1 << 12, 2).unwrap();
    assert!((a.variance - b.variance).abs() < 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt());
    assert_eq!(a, mc_variance(0.8, 3.2, 20_000, 1 << 12, 1).unwrap());
    assert!(mc_variance(0.8, 3.2, 999, 64, 1).is_err());
}
