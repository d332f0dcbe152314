mod common;

use deformexp::scalar::{self, ConstantScan};
use deformexp::{DeformationParameter, Error, ScalarEvalConfig};

fn unit() -> DeformationParameter {
    DeformationParameter::UNIT
}

fn cfg() -> ScalarEvalConfig {
    ScalarEvalConfig::default()
}

#[test]
fn phi_values() {
    assert_eq!(scalar::phi(1.0, unit()).unwrap(), 0.5);
    let two = DeformationParameter::new(2.0).unwrap();
    assert!((scalar::phi(3.0, two).unwrap() - 0.6).abs() < 1e-15);
    assert!(scalar::phi(1e-12, unit()).unwrap() < 1e-9);
    assert!((1.0 - scalar::phi(1e12, unit()).unwrap()) < 1e-9);
    assert!(matches!(scalar::phi(0.0, unit()), Err(Error::Domain { .. })));
    assert!(matches!(scalar::phi(-1.0, unit()), Err(Error::Domain { .. })));
}

#[test]
fn log_phi_values() {
    assert_eq!(scalar::log_phi(1.0, unit()).unwrap(), 0.0);
    assert!((scalar::log_phi(2.0, unit()).unwrap() - (1.0 + 2f64.ln())).abs() < 1e-15);
    let e = std::f64::consts::E;
    assert!((scalar::log_phi(e, unit()).unwrap() - e).abs() < 1e-15);
    assert!(scalar::log_phi(0.0, unit()).is_err());
}

#[test]
fn exp_phi_reference_values() {
    assert_eq!(scalar::exp_phi(0.0, unit(), &cfg()).unwrap(), 1.0);
    let at_one = scalar::exp_phi(1.0, unit(), &cfg()).unwrap();
    assert!((at_one - common::exp_phi(1.0, 1.0)).abs() < 1e-14);
    assert!((at_one - 1.557146).abs() < 1e-6);
    // omega constant W₀(1)
    let at_minus_one = scalar::exp_phi(-1.0, unit(), &cfg()).unwrap();
    assert!((at_minus_one * at_minus_one.exp() - 1.0).abs() < 1e-15);
    assert!((at_minus_one - 0.567143).abs() < 1e-6);
}

#[test]
fn exp_phi_matches_bisection_oracle() {
    for &lam in &[0.1, 0.5, 1.0, 2.0, 10.0] {
        let p = DeformationParameter::new(lam).unwrap();
        for i in 0..=400 {
            let u = -60.0 + 0.3 * i as f64;
            let got = scalar::exp_phi_ln(u, p, &cfg()).unwrap();
            let want = common::ln_exp_phi(u, lam);
            assert!((got - want).abs() <= 1e-13 * (1.0 + want.abs()), "lam {lam} u {u}: {got} vs {want}");
        }
    }
}

#[test]
fn exp_phi_solves_lambert_equation() {
    // v e^v = e^{1+u} at λ = 1, checked in logarithms
    for &u in &[-1e6, -1e3, -20.0, -1.0, 0.5, 10.0, 1e3, 1e6, 1e15] {
        let w = scalar::exp_phi_ln(u, unit(), &cfg()).unwrap();
        let lhs = w.exp() + w;
        assert!((lhs - (1.0 + u)).abs() <= 1e-12 * (1.0 + u.abs()), "u {u}");
    }
}

#[test]
fn derivative_values() {
    assert_eq!(scalar::exp_phi_derivative(0.0, unit(), &cfg()).unwrap(), 0.5);
    let d1 = scalar::exp_phi_derivative(1.0, unit(), &cfg()).unwrap();
    let v = common::exp_phi(1.0, 1.0);
    assert!((d1 - v / (1.0 + v)).abs() < 1e-14);
    assert!((d1 - 0.60894).abs() < 1e-5);
    let h = 1e-6;
    let fd = (scalar::exp_phi(0.3 + h, unit(), &cfg()).unwrap() - scalar::exp_phi(0.3 - h, unit(), &cfg()).unwrap())
        / (2.0 * h);
    assert!((fd - scalar::exp_phi_derivative(0.3, unit(), &cfg()).unwrap()).abs() < 1e-6);
}

#[test]
fn two_argument_function() {
    let f = scalar::f_t(0.5, 1.0, 0.0, unit(), &cfg()).unwrap();
    assert_eq!(f, 1.0);
    assert!(f >= scalar::ft_lower_bound(0.5, 1.0, 0.0).unwrap());
    let f = scalar::f_t(0.5, 4.0, 0.2, unit(), &cfg()).unwrap();
    let gamma = (1.0 + (0.2 - 0.5 * 0.5f64.ln()) / 0.5).exp();
    assert!((gamma.ln() - 2.0931).abs() < 1e-4);
    assert!(f <= 2.0 + gamma);
    assert_eq!(scalar::ft_upper_bound(0.5, 4.0, 0.2), Some(2.0 + gamma));
    assert!(scalar::f_t(0.0, 1.0, 0.0, unit(), &cfg()).is_err());
    assert!(scalar::f_t(0.5, -1.0, 0.0, unit(), &cfg()).is_err());
}

#[test]
fn secant_values() {
    assert_eq!(scalar::secant_f(0.0, unit(), &cfg()).unwrap(), 0.5);
    let s1 = scalar::secant_f(1.0, unit(), &cfg()).unwrap();
    assert!((s1 - (common::exp_phi(1.0, 1.0) - 1.0)).abs() < 1e-14);
    assert!(scalar::secant_f(-1e6, unit(), &cfg()).unwrap() < 1e-3);
    assert!((scalar::secant_f(1e6, unit(), &cfg()).unwrap() - 1.0).abs() < 1e-3);
    // continuity through the removable singularity
    let near = scalar::secant_f(1e-9, unit(), &cfg()).unwrap();
    assert!((near - 0.5).abs() < 1e-9);
}

#[test]
fn square_gap_vanishes_only_at_zero() {
    assert_eq!(scalar::square_gap(0.0, unit(), &cfg()).unwrap(), 0.0);
    for &u in &[-40.0, -1.0, -1e-3, 1e-3, 1.0, 40.0] {
        let g = scalar::square_gap(u, unit(), &cfg()).unwrap();
        let v = common::exp_phi(u, 1.0);
        let direct = 1.0 + u * v - v * v;
        assert!(g > 0.0, "u {u}");
        assert!((g - direct).abs() <= 1e-12 * (1.0 + (u * v).abs()), "u {u}");
    }
}

#[test]
fn constant_scan() {
    let grid = scalar::default_constant_grid();
    assert!(grid.len() >= 100_000);
    assert_eq!(grid[0], 1e-8);
    assert_eq!(*grid.last().unwrap(), 1e8);
    let ConstantScan { sup, argmax, .. } = scalar::scan_constant_c(&grid).unwrap();
    let ln2 = std::f64::consts::LN_2;
    assert!((scalar::log_square_excess(1.0) - ln2 * ln2).abs() < 1e-15);
    assert!(sup > ln2 * ln2 && sup < 0.52);
    assert!(argmax > 0.5 && argmax < 1.0);
    // independent evaluation at the argmax
    let direct = (argmax / (1.0 + argmax)).ln().powi(2) - (argmax - 1.0 + argmax.ln()).powi(2);
    assert!((direct - sup).abs() < 1e-14);
    for &u in &grid {
        assert!(scalar::log_square_excess(u) <= scalar::LOG_SQUARE_CONSTANT);
    }
}

#[test]
fn config_validation() {
    let mut c = cfg();
    c.newton_tol = 1e-3;
    assert!(c.validate().is_err());
    c = cfg();
    c.max_iter = 5;
    assert!(c.validate().is_err());
    assert!(DeformationParameter::new(0.0).is_err());
    assert!(DeformationParameter::new(f64::NAN).is_err());
}

#[test]
fn extreme_arguments_converge() {
    for &u in &[1e15, -1e15, 1e6, -1e6, 709.0, -709.0, 745.0, -745.0] {
        let w = scalar::exp_phi_ln(u, unit(), &cfg()).unwrap();
        assert!(w.is_finite());
        let want = common::ln_exp_phi(u, 1.0);
        assert!((w - want).abs() <= 1e-12 * (1.0 + want.abs()), "u {u}");
    }
}
