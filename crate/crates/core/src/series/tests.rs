use alloc::format;
use alloc::vec::Vec;

use super::*;
use crate::parse::{parse_expression, parse_problem};
use crate::zero::prove_zero;

const REACTION_DIFFUSION: &str = include_str!("../../../../problems/reaction_diffusion.prob");
const KDV_LATTICE: &str = include_str!("../../../../problems/kdv_lattice.prob");

fn p(s: &str) -> Expr {
    parse_expression(s).unwrap()
}

fn single(kind: &str, rhs: &str, ic: &str) -> ProblemSpec {
    parse_problem(&format!(
        "[problem]\nkind = {kind}\nfields = u\nparams = a\n[equations]\ndt(u) = {rhs}\n[initial]\nu = {ic}\n"
    ))
    .unwrap()
}

fn same(a: &Expr, b: &Expr) -> bool {
    prove_zero(&(a.clone() - b.clone())).unwrap()
}

#[test]
fn zeroth_order_is_the_initial_condition() {
    let spec = parse_problem(REACTION_DIFFUSION).unwrap();
    let s = pde_taylor(&spec, 0).unwrap();
    assert_eq!(s.len(), 2);
    for (ts, ic) in s.iter().zip(&spec.initial) {
        assert_eq!(ts.coefficients, core::slice::from_ref(ic));
    }
}

#[test]
fn heat_equation_coefficients() {
    let spec = single("pde", "dxx(u)", "exp(x)");
    let s = pde_taylor(&spec, 6).unwrap();
    let mut fact = 1i64;
    for (j, c) in s[0].coefficients.iter().enumerate() {
        if j > 0 {
            fact *= j as i64;
        }
        assert_eq!(c, &p(&format!("exp(x)/{fact}")), "order {j}");
    }
}

#[test]
fn growth_equation_coefficients() {
    let spec = single("pde", "u", "1");
    let s = pde_taylor(&spec, 6).unwrap();
    let expected: Vec<Expr> = [1, 1, 2, 6, 24, 120, 720].iter().map(|&f| Expr::ratio(1, f)).collect();
    assert_eq!(s[0].coefficients, expected);
}

#[test]
fn first_order_reaction_diffusion() {
    let spec = parse_problem(REACTION_DIFFUSION).unwrap();
    let s = pde_taylor(&spec, 1).unwrap();
    let (u0, v0) = (&spec.initial[0], &spec.initial[1]);
    let x = Symbol::new("x");
    let u0xx = u0.differentiate(&x).unwrap().differentiate(&x).unwrap();
    let v0xx = v0.differentiate(&x).unwrap().differentiate(&x).unwrap();
    let cu = u0.clone() * (Expr::one() - u0.clone() - v0.clone()) + u0xx;
    let cv = v0xx - u0.clone() * v0.clone();
    assert!(same(&s[0].coefficients[1], &cu));
    assert!(same(&s[1].coefficients[1], &cv));
}

#[test]
fn linear_lattice() {
    let spec = single("dde", "shift(u, 1) - shift(u, -1)", "n");
    let s = dde_taylor(&spec, 3).unwrap();
    assert_eq!(s[0].coefficients, [p("n"), Expr::int(2), Expr::zero(), Expr::zero()]);
}

#[test]
fn first_order_lattice() {
    let spec = parse_problem(KDV_LATTICE).unwrap();
    let s = dde_taylor(&spec, 1).unwrap();
    let c0 = &spec.initial[0];
    let n = Symbol::new("n");
    let up = c0.substitute(&n, &p("n + 1")).unwrap();
    let dn = c0.substitute(&n, &p("n - 1")).unwrap();
    let expected = (Expr::one() + p("alpha") * c0.clone() + p("beta") * c0.clone() * c0.clone()) * (up - dn);
    assert!(same(&s[0].coefficients[1], &expected));
}

#[test]
fn wrong_kind_is_rejected() {
    let spec = parse_problem(KDV_LATTICE).unwrap();
    assert!(matches!(pde_taylor(&spec, 1), Err(SeriesError::WrongKind { .. })));
}

#[test]
fn lattice_and_continuum_agree_without_operators() {
    let rhs = "a*u^2 - exp(u)/(1 + u)";
    let pde = pde_taylor(&single("pde", rhs, "a/2"), 4).unwrap();
    let dde = dde_taylor(&single("dde", rhs, "a/2"), 4).unwrap();
    assert_eq!(pde[0].coefficients, dde[0].coefficients);
}

#[test]
fn elementary_function_recurrences() {
    for rhs in ["tanh(u)", "sech(a*u)", "cosh(u) - sinh(u)^2", "1/(2 + u^2)", "exp(-u)*u^3", "u^-2"] {
        let spec = single("pde", rhs, "1 + x");
        let s = pde_taylor(&spec, 4).unwrap();
        assert!(defect_vanishes(&spec, &s).unwrap(), "{rhs}");
    }
}

#[test]
fn defects_vanish_for_case_studies() {
    let spec = parse_problem(REACTION_DIFFUSION).unwrap();
    let s = pde_taylor(&spec, 3).unwrap();
    assert!(defect_vanishes(&spec, &s).unwrap());
    let spec = parse_problem(KDV_LATTICE).unwrap();
    let s = dde_taylor(&spec, 2).unwrap();
    assert!(defect_vanishes(&spec, &s).unwrap());
}

#[test]
fn defect_detects_a_wrong_coefficient() {
    let spec = single("pde", "dxx(u)", "exp(x)");
    let mut s = pde_taylor(&spec, 3).unwrap();
    s[0].coefficients[2] = p("exp(x)/3");
    assert!(!defect_vanishes(&spec, &s).unwrap());
}

#[test]
fn node_budget_is_enforced() {
    let spec = parse_problem(KDV_LATTICE).unwrap();
    let err = taylor(&spec, 2, &SeriesOptions { node_budget: 50 }).unwrap_err();
    assert!(matches!(err, SeriesError::OrderOverflow { .. }), "{err}");
}

#[test]
fn heat_series_sums_to_e() {
    let spec = single("pde", "dxx(u)", "exp(x)");
    let s = pde_taylor(&spec, 10).unwrap();
    let one = Rational::from_integer(1.into());
    let v = series_eval(&s[0], &Rational::zero(), &one, &Bindings::new(), 30).unwrap();
    assert!((v.to_f64() - core::f64::consts::E).abs() < 1e-6);
    let v0 = series_eval(&s[0], &one, &Rational::zero(), &Bindings::new(), 30).unwrap();
    assert!((v0.to_f64() - core::f64::consts::E).abs() < 1e-15);
}

fn slope(spec: &ProblemSpec, order: usize) -> f64 {
    let s = taylor(spec, order, &SeriesOptions::default()).unwrap();
    match series_residual_order(spec, &s, &ResidualSamples::for_spec(spec)).unwrap() {
        OrderEstimate::Slope(m) => m,
        OrderEstimate::Exact => f64::INFINITY,
    }
}

#[test]
fn residual_order_matches_truncation() {
    let rd = parse_problem(REACTION_DIFFUSION).unwrap();
    let kdv = parse_problem(KDV_LATTICE).unwrap();
    for n in 1..=3 {
        let m = slope(&rd, n);
        assert!(m >= n as f64 - 0.2, "reaction-diffusion order {n}: slope {m}");
        let m = slope(&kdv, n);
        assert!(m >= n as f64 - 0.2, "lattice order {n}: slope {m}");
    }
}

#[test]
fn exact_solution_has_exact_residual() {
    let spec = single("pde", "dxx(u)", "exp(x)");
    let est = residual_order(&spec, &[p("exp(x + t)")], &ResidualSamples::for_spec(&spec)).unwrap();
    assert_eq!(est, OrderEstimate::Exact);
}
