use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::float::{bits_for_digits, BigFloat};
use crate::parse::parse_expression;
use crate::zero::{default_samples, is_zero, prove_zero, ZeroVerdict};

fn x() -> Expr {
    Expr::symbol("x")
}

fn p(s: &str) -> Expr {
    parse_expression(s).unwrap()
}

fn b(pairs: &[(&str, i64, i64)]) -> Bindings {
    pairs.iter().fold(Bindings::new(), |acc, &(s, n, d)| acc.with_ratio(s, n, d))
}

#[test]
fn collects_like_terms() {
    let e = Expr::raw_sum(vec![x(), Expr::raw_product(vec![Expr::zero(), Expr::symbol("y")]), x()]);
    assert_eq!(e.simplify().unwrap(), Expr::int(2) * x());
}

#[test]
fn exp_of_zero_folds() {
    assert_eq!(Expr::raw_func(Func::Exp, Expr::zero()).simplify().unwrap(), Expr::one());
    assert_eq!(p("tanh(0)").eval(&Bindings::new(), 30).unwrap().to_f64(), 0.0);
}

#[test]
fn constant_division_by_zero_is_degenerate() {
    let e = Expr::raw_pow(Expr::zero(), -1);
    assert!(matches!(e.simplify(), Err(ExprError::DegenerateExpression(_))));
}

#[test]
fn canonical_form_ignores_grouping() {
    assert_eq!(p("2*(1 + x)*y"), p("(2*(1 + x))*y"));
    assert_eq!(p("2*(1 + x)*y"), p("2*((1 + x)*y)"));
    assert_eq!(p("1 + n - (-1 + n)"), Expr::int(2));
}

#[test]
fn derivative_examples() {
    let k = Symbol::new("k");
    let xs = Symbol::new("x");
    assert_eq!(p("tanh(k*x)").differentiate(&xs).unwrap(), p("k*sech(k*x)^2"));
    assert_eq!(p("c").differentiate(&xs).unwrap(), Expr::zero());
    assert_eq!(p("sech(a)").differentiate(&Symbol::new("a")).unwrap(), p("-sech(a)*tanh(a)"));
    assert_eq!(p("exp(k*x)").differentiate(&k).unwrap(), p("x*exp(k*x)"));
}

#[test]
fn derivative_matches_central_difference_on_profile() {
    let e = p("exp(-k*x)/(1 + exp(-k*x/2))^2");
    let d = e.differentiate(&Symbol::new("x")).unwrap();
    let exact = d.eval(&b(&[("x", 0, 1), ("k", 1, 1)]), 30).unwrap().to_f64();
    let h = 1e-6;
    let f = |xv: f64| e.eval_f64(&F64Bindings::new().with("x", xv).with("k", 1.0)).unwrap();
    let fd = (f(h) - f(-h)) / (2.0 * h);
    assert!((exact - fd).abs() < 1e-8, "{exact} vs {fd}");
}

#[test]
fn substitution_examples() {
    let z = Symbol::new("z");
    let t = Symbol::new("t");
    let v = p("1/(1 + exp(k*z/2))").substitute(&z, &p("x + x*t")).unwrap();
    assert_eq!(v.substitute(&t, &Expr::zero()).unwrap(), p("1/(1 + exp(k*x/2))"));
    let n = Symbol::new("n");
    assert_eq!(p("tanh(k*n + c)").substitute(&n, &p("n + 1")).unwrap(), p("tanh(k*n + k + c)"));
    assert_eq!(p("x + y").substitute(&z, &Expr::int(5)).unwrap(), p("x + y"));
}

#[test]
fn evaluation_examples() {
    let e = p("exp(-k*x)/(1 + exp(-k*x/2))^2");
    let v = e.eval(&b(&[("x", 0, 1), ("k", 1, 1)]), 30).unwrap();
    assert_eq!(v.to_rational(), Rational::new(1.into(), 4.into()));
    let e = p("1/(1 + exp(-k*x/2))");
    let v = e.eval(&b(&[("x", 0, 1), ("k", 7, 1)]), 30).unwrap();
    assert_eq!(v.to_rational(), Rational::new(1.into(), 2.into()));
}

#[test]
fn evaluation_errors() {
    assert!(matches!(p("x + 1").eval(&Bindings::new(), 30), Err(ExprError::UnboundSymbol(_))));
    assert!(matches!(p("1/(x - 1)").eval(&b(&[("x", 1, 1)]), 30), Err(ExprError::PoleEvaluation)));
    assert!(matches!(p("x").eval(&b(&[("x", 1, 1)]), 10), Err(ExprError::PrecisionTooLow(10))));
}

#[test]
fn hyperbolic_identity_simplifies_through_atoms() {
    assert_eq!(is_zero(&p("tanh(k*x)^2 + sech(k*x)^2 - 1")), ZeroVerdict::ProvenZero);
    assert_eq!(is_zero(&p("cosh(x)^2 - sinh(x)^2 - 1")), ZeroVerdict::ProvenZero);
}

fn arb_expr(depth: u32) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-4i64..5).prop_map(Expr::int),
        (-4i64..5, 1i64..4).prop_map(|(a, b)| Expr::ratio(a, b)),
        prop::sample::select(vec!["x", "y", "k"]).prop_map(Expr::symbol),
    ];
    leaf.prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::raw_sum),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::raw_product),
            (inner.clone(), -2i64..4).prop_map(|(b, n)| Expr::raw_pow(b, n)),
            (inner, 0usize..5).prop_map(|(a, f)| {
                let f = [Func::Exp, Func::Tanh, Func::Sech, Func::Cosh, Func::Sinh][f];
                Expr::raw_func(f, a)
            }),
        ]
    })
}

fn arb_point() -> impl Strategy<Value = Bindings> {
    (-12i64..13, -12i64..13, -12i64..13).prop_map(|(a, c, d)| b(&[("x", a, 8), ("y", c, 8), ("k", d, 8)]))
}

fn close(a: &BigFloat, b: &BigFloat, rel: f64) -> bool {
    let (a, b) = (a.to_f64(), b.to_f64());
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

/// Central difference in `x` with step `h`, evaluated at high precision.
fn central_difference(e: &Expr, at: &Bindings, h: &Rational) -> Result<BigFloat, ExprError> {
    let xs = Symbol::new("x");
    let x0 = at.get(&xs).cloned().unwrap_or_else(Rational::zero);
    let plus = e.eval(&at.clone().with("x", &x0 + h), 40)?;
    let minus = e.eval(&at.clone().with("x", &x0 - h), 40)?;
    let bits = bits_for_digits(40);
    let two_h = BigFloat::from_rational(&(h * Rational::from_integer(2.into())), bits);
    plus.sub(&minus, bits).div(&two_h, bits).map_err(|_| ExprError::PoleEvaluation)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn simplify_is_idempotent(e in arb_expr(4)) {
        if let Ok(s) = e.simplify() {
            let again = Expr::from_node(s.node().clone()).simplify().unwrap();
            prop_assert_eq!(&again, &s);
            prop_assert_eq!(s.simplify().unwrap(), s);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplify_preserves_value(e in arb_expr(3), at in arb_point(), digits in 20u32..40) {
        let Ok(s) = e.simplify() else { return Ok(()) };
        let (Ok(raw), Ok(canon)) = (e.eval(&at, digits), s.eval(&at, digits)) else { return Ok(()) };
        let scale = raw.to_f64().abs().max(1.0);
        let tol = libm::pow(10.0, 5.0 - f64::from(digits)) * scale;
        prop_assert!(crate::float::abs_diff_le(&raw, &canon, tol, bits_for_digits(digits)),
            "{} vs {} for {}", raw.to_f64(), canon.to_f64(), e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn derivative_matches_finite_difference(e in arb_expr(3), at in arb_point()) {
        let Ok(d) = e.differentiate(&Symbol::new("x")) else { return Ok(()) };
        let Ok(exact) = d.eval(&at, 40) else { return Ok(()) };
        let h = Rational::new(1.into(), 1_000_000.into());
        let Ok(fd) = central_difference(&e, &at, &h) else { return Ok(()) };
        prop_assert!(close(&exact, &fd, 1e-6), "{} vs {} for {}", exact.to_f64(), fd.to_f64(), e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn leibniz_rule(a in arb_expr(2), c in arb_expr(2)) {
        let xs = Symbol::new("x");
        let (Ok(da), Ok(dc), Ok(dac)) = (a.differentiate(&xs), c.differentiate(&xs), (a.clone() * c.clone()).differentiate(&xs))
        else { return Ok(()) };
        let defect = dac - (da * c.clone() + a.clone() * dc);
        prop_assert_eq!(prove_zero(&defect), Ok(true));
    }

    #[test]
    fn substitution_commutes_with_derivative(e in arb_expr(3), r in arb_expr(2)) {
        let xs = Symbol::new("x");
        let s = Symbol::new("y");
        prop_assume!(!r.contains_symbol(&s) && !r.contains_symbol(&xs));
        let (Ok(d), Ok(sub)) = (e.differentiate(&xs), e.substitute(&s, &r)) else { return Ok(()) };
        let (Ok(left), Ok(right)) = (d.substitute(&s, &r), sub.differentiate(&xs)) else { return Ok(()) };
        prop_assert_eq!(left, right);
    }

    #[test]
    fn zero_test_is_sound(e in arb_expr(3)) {
        let verdict = is_zero(&e);
        match &verdict {
            ZeroVerdict::ProvenZero => {
                for at in default_samples(&e.free_symbols(), 8) {
                    if let Ok(v) = e.eval(&at, 30) {
                        prop_assert!(v.to_f64().abs() <= 1e-6, "{} at {:?} for {}", v.to_f64(), at, e);
                    }
                }
            }
            ZeroVerdict::ProvenNonZero(w) => {
                prop_assert_ne!(prove_zero(&e), Ok(true));
                prop_assert!(w.value.to_f64().abs() > 1e-6);
            }
            ZeroVerdict::Unknown => {}
        }
    }

    #[test]
    fn differences_of_equal_forms_are_proven_zero(e in arb_expr(3)) {
        let Ok(s) = e.simplify() else { return Ok(()) };
        let Ok(d) = e.differentiate(&Symbol::new("k")) else { return Ok(()) };
        let rebuilt = Expr::raw_sum(vec![s.clone(), Expr::raw_product(vec![Expr::int(-1), e.clone()])]);
        prop_assert_eq!(prove_zero(&rebuilt), Ok(true));
        let twice: Vec<Expr> = vec![d.clone(), d.clone()];
        let doubled = Expr::raw_sum(twice) - Expr::int(2) * d;
        prop_assert_eq!(prove_zero(&doubled), Ok(true));
    }
}
