mod support {
    pub mod oracles;
}

use plcoh::fluctuation::cross_moments;
use plcoh::{
    arfima_coefficients, build_profile, coherency_profile, BoxStep, Method, Profile, ScaleGrid,
    ScaleKind, SeriesPair,
};
use statrs::function::gamma::ln_gamma;
use support::oracles;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() < 1e-14
}

fn assert_moments(got: &plcoh::fluctuation::CrossMoments, want: (f64, f64, f64), rel: f64, ctx: &str) {
    assert!(close(got.xy, want.0, rel), "{ctx}: xy {} vs {}", got.xy, want.0);
    assert!(close(got.xx, want.1, rel), "{ctx}: xx {} vs {}", got.xx, want.1);
    assert!(close(got.yy, want.2, rel), "{ctx}: yy {} vs {}", got.yy, want.2);
}

#[test]
fn profile_matches_naive_cumsum() {
    for (x, _) in oracles::corpus() {
        let fast = build_profile(&x).unwrap();
        let naive = oracles::profile(&x);
        for (a, b) in fast.values().iter().zip(&naive) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
        }
        assert!(fast.values().last().unwrap().abs() < 1e-8);
    }
}

#[test]
fn dcca_matches_normal_equation_solve() {
    for (case, (x, y)) in oracles::corpus().into_iter().enumerate() {
        let px = oracles::profile(&x);
        let py = oracles::profile(&y);
        let t = x.len();
        let scales: Vec<usize> = (4..=t / 2).collect();
        let grid = ScaleGrid::new(scales.clone(), ScaleKind::BoxSize).unwrap();
        let (fx, fy) = (Profile::from_values(px.clone()).unwrap(), Profile::from_values(py.clone()).unwrap());
        for step in [BoxStep::NonOverlapping, BoxStep::Fixed(1), BoxStep::Fixed(3)] {
            let got = cross_moments(Method::Dcca, &fx, &fy, &grid, step).unwrap();
            for (&s, m) in scales.iter().zip(&got) {
                let want = oracles::dcca(&px, &py, s, step.stride(s));
                assert_moments(m, want, 1e-10, &format!("case {case} s={s} {step}"));
            }
        }
    }
}

#[test]
fn dmca_matches_two_pass_moving_average() {
    for (case, (x, y)) in oracles::corpus().into_iter().enumerate() {
        let px = oracles::profile(&x);
        let py = oracles::profile(&y);
        let t = x.len();
        let windows: Vec<usize> = (3..=t).step_by(2).collect();
        let grid = ScaleGrid::new(windows.clone(), ScaleKind::Window).unwrap();
        let (fx, fy) = (Profile::from_values(px.clone()).unwrap(), Profile::from_values(py.clone()).unwrap());
        let got = cross_moments(Method::Dmca, &fx, &fy, &grid, BoxStep::default()).unwrap();
        for (&k, m) in windows.iter().zip(&got) {
            assert_moments(m, oracles::dmca(&px, &py, k), 1e-10, &format!("case {case} kappa={k}"));
        }
    }
}

#[test]
fn hxa_matches_direct_increments() {
    for (case, (x, y)) in oracles::corpus().into_iter().enumerate() {
        let px = oracles::profile(&x);
        let py = oracles::profile(&y);
        let lags: Vec<usize> = (1..x.len()).collect();
        let grid = ScaleGrid::new(lags.clone(), ScaleKind::Lag).unwrap();
        let (fx, fy) = (Profile::from_values(px.clone()).unwrap(), Profile::from_values(py.clone()).unwrap());
        let got = cross_moments(Method::Hxa, &fx, &fy, &grid, BoxStep::default()).unwrap();
        for (&tau, m) in lags.iter().zip(&got) {
            assert_moments(m, oracles::hxa(&px, &py, tau), 1e-12, &format!("case {case} tau={tau}"));
        }
    }
}

#[test]
fn squared_correlation_matches_oracle_moments() {
    let (x, y) = oracles::corpus().remove(0);
    let pair = SeriesPair::new(x.clone(), y.clone()).unwrap();
    let (px, py) = (oracles::profile(&x), oracles::profile(&y));
    let grid = ScaleGrid::odd_windows(3, 15).unwrap();
    let prof = coherency_profile(Method::Dmca, &pair, &grid, BoxStep::default()).unwrap();
    for &(k, r2) in &prof.entries {
        let (xy, xx, yy) = oracles::dmca(&px, &py, k);
        assert!(close(r2, xy * xy / (xx * yy), 1e-9), "kappa={k}");
        assert!((0.0..=1.0 + 1e-12).contains(&r2));
    }
}

fn ln_gamma_coefficient(d: f64, n: usize) -> f64 {
    (ln_gamma(n as f64 + d) - ln_gamma(d) - ln_gamma(n as f64 + 1.0)).exp()
}

#[test]
fn arfima_coefficients_match_log_gamma_form() {
    for d in [0.1, 0.2, 0.4, 0.49] {
        let table = arfima_coefficients(d, 10_000).unwrap();
        assert_eq!(table.coeffs[0], 1.0);
        for n in [1usize, 2, 3, 10, 57, 100, 999, 1000, 4321, 10_000] {
            let want = ln_gamma_coefficient(d, n);
            let got = table.coeffs[n];
            assert!(((got - want) / want).abs() < 1e-10, "d={d} n={n}: {got} vs {want}");
        }
        // monotone decay with the n^(d-1) asymptote
        assert!(table.coeffs.windows(2).all(|w| w[1] < w[0]));
        let tail = table.coeffs[10_000] / table.coeffs[5_000];
        assert!((tail - 2f64.powf(d - 1.0)).abs() < 1e-3);
    }
}

#[test]
fn negative_memory_coefficients_match_small_n() {
    // a_1 = d, a_2 = d(1+d)/2, a_3 = d(1+d)(2+d)/6
    let d = -0.3;
    let c = arfima_coefficients(d, 3).unwrap().coeffs;
    assert!((c[1] - d).abs() < 1e-15);
    assert!((c[2] - d * (1.0 + d) / 2.0).abs() < 1e-15);
    assert!((c[3] - d * (1.0 + d) * (2.0 + d) / 6.0).abs() < 1e-15);
}
