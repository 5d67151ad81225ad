use std::f64::consts::PI;

use num_complex::Complex64;

use super::*;
use crate::ensembles::{EnsembleSpec, HyperparameterLaw};
use crate::numeric::{trapezoid_integrate, LambdaGrid, SolverConfig, SpectralPoint};

const ONE: HyperparameterLaw = HyperparameterLaw::Constant { value: 1.0 };

fn pt(lambda: f64, epsilon: f64) -> SpectralPoint {
    SpectralPoint::new(lambda, epsilon).unwrap()
}

/// Independent closed form for unit-variance i.i.d. entries.
fn mp_unit_oracle(alpha: f64, lambda: f64) -> f64 {
    let lo = (1.0 - alpha.sqrt()).powi(2);
    let hi = (1.0 + alpha.sqrt()).powi(2);
    ((hi - lambda).max(0.0) * (lambda - lo).max(0.0)).sqrt() / (2.0 * PI * lambda)
}

#[test]
fn case1_mp_bulk_point() {
    let cfg = SolverConfig::default();
    let p = solve_case1(&ONE, 4.0, pt(4.0, 1e-9), &cfg, None).unwrap();
    let rho = density_from_chi(&p).unwrap();
    let expected = 15f64.sqrt() / (8.0 * PI);
    assert!((expected - mp_unit_oracle(4.0, 4.0)).abs() < 1e-15);
    assert!((rho - expected).abs() < 1e-6, "{rho} vs {expected}");
    assert!((rho - 0.15410).abs() < 1e-5);
    assert!(p.chi_w.im < 0.0);
}

#[test]
fn case1_outside_support() {
    let p = solve_case1(&ONE, 4.0, pt(20.0, 1e-9), &SolverConfig::default(), None).unwrap();
    assert!(density_from_chi(&p).unwrap() <= 1e-6);
}

#[test]
fn case2_zero_variance_columns() {
    let zero = HyperparameterLaw::Constant { value: 0.0 };
    let p = solve_case2(&zero, 4.0, pt(5.0, 1e-9), &SolverConfig::default(), None).unwrap();
    assert_eq!(p.chi_t * 4.0, Complex64::new(0.0, 0.0));
    let z = Complex64::new(5.0, 1e-9);
    assert!((p.chi_w - 1.0 / z).norm() < 1e-15);
    assert!(density_from_chi(&p).unwrap() < 1e-9);
}

#[test]
fn case3_reduces_to_case1_and_case2() {
    let cfg = SolverConfig::default();
    let law = HyperparameterLaw::Uniform { min: 1.0, max: 5.0 };
    for &l in &[3.0, 8.0, 15.0, 25.0] {
        let a = solve_case1(&law, 4.0, pt(l, 1e-6), &cfg, None).unwrap();
        let b = solve_case3(&law, &ONE, 4.0, pt(l, 1e-6), &cfg, None).unwrap();
        assert!((a.chi_w - b.chi_w).norm() < 1e-10, "case1 vs case3 at {l}");
        let c = solve_case2(&law, 4.0, pt(l, 1e-6), &cfg, None).unwrap();
        let d = solve_case3(&ONE, &law, 4.0, pt(l, 1e-6), &cfg, None).unwrap();
        assert!((c.chi_w - d.chi_w).norm() < 1e-10, "case2 vs case3 at {l}");
    }
}

#[test]
fn case3_mp_point_and_consistency() {
    let cfg = SolverConfig::default();
    let p = solve_case3(&ONE, &ONE, 4.0, pt(4.0, 1e-9), &cfg, None).unwrap();
    assert!((density_from_chi(&p).unwrap() - 15f64.sqrt() / (8.0 * PI)).abs() < 1e-6);

    let s = HyperparameterLaw::Uniform { min: 1.0, max: 5.0 };
    let t = HyperparameterLaw::Uniform { min: 0.0, max: 2.0 };
    for &l in &[2.5, 6.0, 12.0, 30.0, 50.0] {
        let p = solve_case3(&s, &t, 4.0, pt(l, 1e-6), &cfg, None).unwrap();
        let (r1, r2) = p.consistency_residuals(4.0);
        assert!(r1 <= 100.0 * cfg.tolerance && r2 <= 100.0 * cfg.tolerance, "{l}: {r1:e} {r2:e}");
    }
}

#[test]
fn all_cases_match_mp_closed_form() {
    let cfg = SolverConfig::default();
    let v = 3.0;
    let c3 = HyperparameterLaw::Constant { value: v };
    let eps: f64 = 1e-9;
    let (lo, hi) = mp_edges(4.0, v).unwrap();
    let mut l = 0.5;
    while l < 32.0 {
        if (l - lo).abs() > 0.1 && (l - hi).abs() > 0.1 {
            let oracle = v.recip() * mp_unit_oracle(4.0, l / v);
            let tol = (10.0 * eps).max(1e-6);
            for p in [
                solve_case1(&c3, 4.0, pt(l, eps), &cfg, None).unwrap(),
                solve_case2(&c3, 4.0, pt(l, eps), &cfg, None).unwrap(),
                solve_case3(&c3, &ONE, 4.0, pt(l, eps), &cfg, None).unwrap(),
                solve_case3(&ONE, &c3, 4.0, pt(l, eps), &cfg, None).unwrap(),
            ] {
                let rho = density_from_chi(&p).unwrap();
                assert!((rho - oracle).abs() <= tol, "lambda {l}: {rho} vs {oracle}");
            }
        }
        l += 0.37;
    }
}

#[test]
fn density_from_chi_definition() {
    let mut p = solve_case1(&ONE, 4.0, pt(4.0, 1e-9), &SolverConfig::default(), None).unwrap();
    p.chi_w = Complex64::new(0.0, -PI);
    assert!((density_from_chi(&p).unwrap() - 1.0).abs() < 1e-15);
    p.chi_w = Complex64::new(0.3, 0.0);
    assert_eq!(density_from_chi(&p).unwrap(), 0.0);
    p.chi_w = Complex64::new(0.3, 1e-9);
    assert_eq!(density_from_chi(&p).unwrap(), 0.0);
    p.chi_w = Complex64::new(0.3, 1e-3);
    assert!(matches!(density_from_chi(&p), Err(crate::Error::NegativeDensity { .. })));
}

#[test]
fn singular_and_nonconvergent_paths() {
    let cfg = SolverConfig::default();
    let err = solve_case1(&ONE, 4.0, pt(4.0, 1e-9), &cfg, Some(Complex64::new(1.0, 0.0))).unwrap_err();
    assert!(matches!(err, crate::Error::SingularDenominator(_)), "{err:?}");

    let short = SolverConfig {
        max_iterations: 2,
        ..cfg
    };
    match solve_case1(&ONE, 4.0, pt(4.0, 1e-9), &short, None) {
        Err(crate::Error::NonConvergence { iterations, best, .. }) => {
            assert_eq!(iterations, 2);
            assert_eq!(best.len(), 2);
        }
        other => panic!("expected NonConvergence, got {other:?}"),
    }
    assert!(solve_case1(&ONE, -1.0, pt(4.0, 1e-9), &cfg, None).is_err());
}

#[test]
fn scale_covariance_case1() {
    let cfg = SolverConfig::default();
    let law = HyperparameterLaw::Uniform { min: 1.0, max: 5.0 };
    let c = 2.5;
    for &l in &[3.0, 10.0, 20.0, 31.0] {
        let base = solve_case1(&law, 4.0, pt(l, 1e-6), &cfg, None).unwrap();
        let scaled = solve_case1(&law.scaled(c), 4.0, pt(c * l, c * 1e-6), &cfg, None).unwrap();
        let lhs = density_from_chi(&scaled).unwrap();
        let rhs = density_from_chi(&base).unwrap() / c;
        assert!((lhs - rhs).abs() < 1e-8, "{l}: {lhs} vs {rhs}");
    }
}

#[test]
fn curve_single_point_and_mass() {
    let spec = EnsembleSpec::marchenko_pastur(4.0, 3.0).unwrap();
    let cfg = SolverConfig::default();
    let one = replica_density_curve(&spec, &LambdaGrid::linspace(4.0, 4.0, 1, 1e-6).unwrap(), &cfg).unwrap();
    assert_eq!(one.len(), 1);

    let grid = LambdaGrid::linspace(0.5, 30.0, 1000, 1e-6).unwrap();
    let curve = replica_density_curve(&spec, &grid, &cfg).unwrap();
    assert_eq!(curve.converged_count(), 1000);
    let mass = trapezoid_integrate(&curve, |_| 1.0).unwrap();
    assert!((mass - 1.0).abs() < 0.005, "{mass}");
    assert!(curve.entries.iter().all(|e| e.rho >= -1e-8));
}

#[test]
fn cold_and_warm_sweeps_agree_in_bulk() {
    let spec = EnsembleSpec::row_variance(4.0, HyperparameterLaw::Uniform { min: 1.0, max: 5.0 }).unwrap();
    let grid = LambdaGrid::linspace(3.0, 30.0, 28, 1e-6).unwrap();
    let warm = replica_density_curve(&spec, &grid, &SolverConfig::default()).unwrap();
    let cold = replica_density_curve(
        &spec,
        &grid,
        &SolverConfig {
            warm_start: false,
            ..Default::default()
        },
    )
    .unwrap();
    for (a, b) in warm.entries.iter().zip(&cold.entries) {
        assert!((a.rho - b.rho).abs() < 1e-9, "{} {} {}", a.lambda, a.rho, b.rho);
    }
}

#[test]
fn halving_damping_keeps_attractor() {
    let law = HyperparameterLaw::Uniform { min: 2.0, max: 4.0 };
    let cfg = SolverConfig::default();
    let half = SolverConfig { damping: 0.25, ..cfg };
    for &l in &[4.0, 12.0, 26.0] {
        let a = solve_case1(&law, 4.0, pt(l, 1e-6), &cfg, None).unwrap();
        let b = solve_case1(&law, 4.0, pt(l, 1e-6), &half, None).unwrap();
        assert!((a.chi_s - b.chi_s).norm() < 1e-10);
    }
}

#[test]
fn richardson_curve_improves_on_single_epsilon() {
    let spec = EnsembleSpec::marchenko_pastur(4.0, 1.0).unwrap();
    let grid = LambdaGrid::from_lambdas(&[2.0, 4.0, 6.0], 1e-2).unwrap();
    let cfg = SolverConfig::default();
    let plain = replica_density_curve(&spec, &grid, &cfg).unwrap();
    let extra = replica_density_curve_extrapolated(&spec, &grid, &cfg).unwrap();
    for (a, b) in plain.entries.iter().zip(&extra.entries) {
        let exact = mp_unit_oracle(4.0, a.lambda);
        assert!((b.rho - exact).abs() < 0.2 * (a.rho - exact).abs(), "{}", a.lambda);
    }
}
