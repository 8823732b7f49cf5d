use fractrans::analysis::{alpha_n, rate_fit, sup_norm_diff};
use fractrans::doss_sussmann::{compose_x, euler_y, solve_y, CoefficientSet, EulerGridH, HEvaluator};
use fractrans::fbm::{exact_fbm, fbm_covariance, uniform_grid, DriverKind, DriverPath};
use fractrans::transport::generate_forward;
use fractrans::RngSeed;
use proptest::prelude::*;

fn path(values: Vec<f64>) -> DriverPath {
    let grid = uniform_grid(1.0, values.len() - 1);
    DriverPath {
        grid,
        values,
        kind: DriverKind::ExactFbm,
        hurst: 0.7,
        params: None,
        seed: None,
        lipschitz_certificate: None,
    }
}

fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..40).prop_flat_map(|len| {
        let v = || prop::collection::vec(-10.0..10.0f64, len);
        (v(), v(), v())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_moves_at_speed_n(rate in 1.0..30.0f64, seed in any::<u64>(), s in 0.0..1.0f64, t in 0.0..1.0f64) {
        let z = generate_forward(rate, 1.0, RngSeed::new(seed, 0)).unwrap();
        prop_assert_eq!(z.eval(0.0).unwrap(), 0.0);
        let (zs, zt) = (z.eval(s).unwrap(), z.eval(t).unwrap());
        prop_assert!((zs - zt).abs() <= rate * (s - t).abs() * (1.0 + 1e-12) + 1e-12);
        prop_assert!(zt.abs() <= rate * t * (1.0 + 1e-12) + 1e-12);
        prop_assert!((z.gaps().iter().sum::<f64>()) >= 1.0);
    }

    #[test]
    fn fbm_covariance_is_symmetric_with_power_diagonal(h in 0.05..0.95f64, s in 0.0..5.0f64, t in 0.0..5.0f64) {
        let a = fbm_covariance(h, s, t).unwrap();
        let b = fbm_covariance(h, t, s).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((fbm_covariance(h, t, t).unwrap() - t.powf(2.0 * h)).abs() <= 1e-12 * (1.0 + t.powf(2.0 * h)));
        // Cauchy-Schwarz
        prop_assert!(a * a <= s.powf(2.0 * h) * t.powf(2.0 * h) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn sup_norm_is_a_metric((a, b, c) in triple()) {
        let (pa, pb, pc) = (path(a), path(b), path(c));
        let ab = sup_norm_diff(&pa, &pb).unwrap();
        prop_assert_eq!(ab, sup_norm_diff(&pb, &pa).unwrap());
        prop_assert_eq!(sup_norm_diff(&pa, &pa).unwrap(), 0.0);
        let ac = sup_norm_diff(&pa, &pc).unwrap();
        let cb = sup_norm_diff(&pc, &pb).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn rate_fit_recovers_power_laws(slope in -2.0..1.0f64, scale in 1e-6..1e3f64, n0 in 2.0..20.0f64, k in 3usize..8) {
        let ns: Vec<f64> = (0..k).map(|i| n0 * 2f64.powi(i as i32)).collect();
        let errs: Vec<f64> = ns.iter().map(|n| scale * n.powf(slope)).collect();
        let fit = rate_fit(&ns, &errs).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!((fit.intercept - scale.ln()).abs() < 1e-8);
        prop_assert!(fit.residual < 1e-9);
    }

    #[test]
    fn rate_fit_slope_ignores_scale(errs in prop::collection::vec(1e-6..1.0f64, 3..8), scale in 1e-3..1e3f64) {
        let ns: Vec<f64> = (0..errs.len()).map(|i| 8.0 * 2f64.powi(i as i32)).collect();
        let scaled: Vec<f64> = errs.iter().map(|e| e * scale).collect();
        let a = rate_fit(&ns, &errs).unwrap();
        let b = rate_fit(&ns, &scaled).unwrap();
        prop_assert!((a.slope - b.slope).abs() < 1e-9);
        prop_assert!((a.residual - b.residual).abs() < 1e-9);
    }

    #[test]
    fn alpha_n_decreases_past_its_turning_point(beta in 0.05..0.3f64, delta in 0.01..0.1f64, x in 0.0..5.0f64, y in 0.01..5.0f64) {
        // d/d(log n) log alpha = -(1/2 - beta - delta) + (5/2)/log n, negative once log n exceeds this
        let turn = 2.5 / (0.5 - beta - delta);
        let (l1, l2) = (turn + x, turn + x + y);
        let a1 = alpha_n(l1.exp(), beta, delta).unwrap();
        let a2 = alpha_n(l2.exp(), beta, delta).unwrap();
        prop_assert!(a2 < a1);
    }

    #[test]
    fn linear_euler_scheme_is_exact(b0 in -2.0..2.0f64, c in -2.0..2.0f64, x0 in -1.0..1.0f64, seed in any::<u64>()) {
        let d = exact_fbm(0.7, &uniform_grid(1.0, 32), RngSeed::new(seed, 0)).unwrap();
        let coeffs = CoefficientSet::linear(b0, c, x0);
        let y = euler_y(&coeffs, 4, 32, &d).unwrap();
        let flow = EulerGridH::new(coeffs.clone(), 4);
        let x = compose_x(HEvaluator::Euler(&flow), &y, &d).unwrap();
        let xs = x.x.as_ref().unwrap();
        for (i, t) in d.grid.iter().enumerate() {
            let want = x0 + b0 * t + c * d.values[i];
            prop_assert!((xs[i] - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }
}

#[test]
fn alpha_n_log_slope_matches_its_derivative() {
    let (beta, delta) = (0.3, 0.05);
    for centre in [1e3f64, 1e8, 1e12] {
        let ns: Vec<f64> = (-2..=2).map(|k| centre * 1.01f64.powi(k)).collect();
        let vals: Vec<f64> = ns.iter().map(|&n| alpha_n(n, beta, delta).unwrap()).collect();
        let fit = rate_fit(&ns, &vals).unwrap();
        let oracle = -0.5 + beta + delta + 2.5 / centre.ln();
        assert!((fit.slope - oracle).abs() < 1e-5, "n={centre}: {} vs {oracle}", fit.slope);
    }
    // below the turning point the target still grows
    assert!(alpha_n(1e6, beta, delta).unwrap() < alpha_n(1e7, beta, delta).unwrap());
}

#[test]
fn reference_solver_self_converges() {
    let d = exact_fbm(0.75, &uniform_grid(1.0, 64), RngSeed::new(11, 3)).unwrap();
    let c = CoefficientSet::sin_cos(0.1);
    let coarse = solve_y(&c, &d, 1.0 / 256.0).unwrap();
    let fine = solve_y(&c, &d, 1.0 / 1024.0).unwrap();
    let (cy, fy) = (coarse.y.unwrap(), fine.y.unwrap());
    let gap = cy.iter().zip(fy.iter().step_by(4)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-6, "step refinement moved Y by {gap}");
}
