#![allow(clippy::excessive_precision)]

use alloc::format;
use alloc::string::String;

use super::*;
use crate::parse::parse_problem;

const REACTION_DIFFUSION: &str = include_str!("../../../../problems/reaction_diffusion.prob");
const KDV_LATTICE: &str = include_str!("../../../../problems/kdv_lattice.prob");
const HEAT: &str = include_str!("../../../../problems/heat.prob");

fn report(text: &str, claim: &str) -> ClaimReport {
    let spec = parse_problem(text).unwrap();
    let c = spec.claim(claim).unwrap();
    check_claim(&spec, c, &default_plan(&spec, c)).unwrap()
}

fn single(kind: &str, rhs: &str, ic: &str, claim: &str) -> String {
    format!(
        "[problem]\nkind = {kind}\nfields = u\n[equations]\ndt(u) = {rhs}\n[initial]\nu = {ic}\n[claim.c]\nparams = c\nu = {claim}\n"
    )
}

fn value_at(check: &Check, point: &Bindings) -> f64 {
    let rec = check.samples.iter().find(|s| &s.bindings == point).expect("sample present");
    match &rec.value {
        SampleValue::Value(v) => v.to_f64(),
        SampleValue::Skipped(e) => panic!("skipped: {e}"),
    }
}

#[test]
fn default_plan_shape() {
    let spec = parse_problem(KDV_LATTICE).unwrap();
    let plan = default_plan(&spec, spec.claim("tanh_soliton").unwrap());
    assert_eq!(plan.space.len(), 7);
    assert_eq!(plan.times.len(), 3);
    assert_eq!(plan.params.len(), 1 + PERTURBATIONS);
    assert_eq!(plan.params[0], Bindings::new().with_int("alpha", 1).with_int("beta", 1).with_int("a0", 1).with_int("k", 1).with_int("c", 1));
    assert_ne!(plan.params[1], plan.params[0]);
    let again = default_plan(&spec, spec.claim("tanh_soliton").unwrap());
    assert_eq!(plan, again);
}

#[test]
fn heat_exact_is_satisfied() {
    let r = report(HEAT, "exact");
    assert_eq!(r.status, Status::Satisfied);
    assert!(r.checks().all(|c| c.verdict.is_proven_zero()));
}

#[test]
fn heat_shifted_is_violated() {
    let r = report(HEAT, "shifted");
    assert_eq!(r.status, Status::Violated);
    assert!(r.initial[0].verdict.is_proven_zero());
}

#[test]
fn forcing_term_breaks_heat_solution() {
    let r = report(&single("pde", "dxx(u) + u", "exp(x)", "exp(x + t)"), "c");
    assert_eq!(r.status, Status::Violated);
    let at = Bindings::new().with_int("c", 1).with_int("x", 1).with_int("t", 1);
    assert!((value_at(&r.equations[0], &at) + core::f64::consts::E.powi(2)).abs() < 1e-12);
}

#[test]
fn published_wave_fails_the_equations() {
    let r = report(REACTION_DIFFUSION, "exact_wave_xt");
    assert_eq!(r.status, Status::Violated);
    assert!(matches!(r.equations[0].verdict, ZeroVerdict::ProvenNonZero(_)));
    assert!(matches!(r.equations[1].verdict, ZeroVerdict::ProvenNonZero(_)));
    // independent 40-digit substitution at (x, t, k) = (1, 1/2, 1)
    let at = Bindings::new().with_int("k", 1).with_int("x", 1).with_ratio("t", 1, 2);
    let u = value_at(&r.equations[0], &at);
    let v = value_at(&r.equations[1], &at);
    assert!((u / 0.053727550994631806414 - 1.0).abs() < 1e-9, "{u}");
    assert!((v / -0.0048802676923840255593 - 1.0).abs() < 1e-9, "{v}");
}

#[test]
fn published_wave_initial_sign() {
    let r = report(REACTION_DIFFUSION, "exact_wave_xt");
    let at = Bindings::new().with_int("k", 1).with_int("x", 2);
    assert!((value_at(&r.initial[0], &at) - 0.4621171572600097585).abs() < 1e-15);
    assert!(matches!(r.initial[0].verdict, ZeroVerdict::ProvenNonZero(_)));
}

#[test]
fn travelling_coordinate_variant_is_also_violated() {
    let r = report(REACTION_DIFFUSION, "exact_wave_ct");
    assert_eq!(r.status, Status::Violated);
    let at = Bindings::new().with_int("k", 1).with_int("c", 1).with_int("x", 1).with_ratio("t", 1, 2);
    assert!((value_at(&r.equations[0], &at) - 0.050255705).abs() < 1e-8);
    assert!((value_at(&r.equations[1], &at) - 0.019521071).abs() < 1e-8);
}

#[test]
fn front_variant_misses_the_initial_condition() {
    let spec = parse_problem(REACTION_DIFFUSION).unwrap();
    let claim = spec.claim("traveling_front").unwrap();
    let plan = default_plan(&spec, claim);
    let ic = check_initial_condition(&spec, claim, &plan).unwrap();
    assert!(matches!(ic[1].verdict, ZeroVerdict::ProvenNonZero(_)));
    let at = Bindings::new().with_int("k", 1).with_int("c", 1).with_int("x", 2);
    assert!((value_at(&ic[1], &at) + 0.4621171572600097585).abs() < 1e-15);

    let grid: Vec<Rational> = [(-2, 1), (-1, 1), (-1, 2), (1, 2), (1, 1), (2, 1)].iter().map(|&(p, q)| ratio(p, q)).collect();
    let scan = parameter_scan(&spec, claim, &Symbol::new("k"), &grid, &plan).unwrap();
    assert_eq!(scan.initial_zeros(1), [ratio(-1, 1)]);
    let expected = [0.149738499348, 0.0, 0.108599247428, 0.353517909832, 0.46211715726, 0.611855656608];
    // the mpmath oracle took the maximum over x only, at c = 1
    let x_only = SamplePlan { params: alloc::vec![plan.params[0].clone()], ..plan.clone() };
    let scan = parameter_scan(&spec, claim, &Symbol::new("k"), &grid, &x_only).unwrap();
    for (row, want) in scan.rows.iter().zip(expected) {
        assert!((row.initial[1].unwrap() - want).abs() < 1e-11, "k = {}", row.value);
    }
}

#[test]
fn lattice_constant_solves_the_equation() {
    let r = report(KDV_LATTICE, "constant");
    assert!(r.equations[0].verdict.is_proven_zero());
    // a0 differs from the initial profile, so only the equation holds
    assert!(matches!(r.initial[0].verdict, ZeroVerdict::ProvenNonZero(_)));
    let text = KDV_LATTICE.replace("u = a0 - (alpha*a0 + 2)/alpha*tanh(k)^2*tanh(k*n + c)^2\n\n[claim.tanh", "u = a0\n\n[claim.tanh");
    assert_eq!(report(&text, "constant").status, Status::Satisfied);
}

#[test]
fn lattice_soliton_at_defaults() {
    let r = report(KDV_LATTICE, "tanh_soliton");
    assert_eq!(r.status, Status::Violated);
    assert!(r.initial[0].verdict.is_proven_zero());
    let at = Bindings::new()
        .with_int("alpha", 1)
        .with_int("beta", 1)
        .with_int("a0", 1)
        .with_int("k", 1)
        .with_int("c", 1)
        .with_int("n", -1)
        .with_ratio("t", 1, 10);
    assert!((value_at(&r.equations[0], &at) - 0.22271731).abs() < 1e-8);
}

#[test]
fn lattice_soliton_on_the_constrained_family() {
    let text = KDV_LATTICE.replace("params = alpha, beta, a0, k, c", "params = alpha, a0, k, c").replace("beta*u^2", "alpha^2/4*u^2");
    let r = report(&text, "tanh_soliton");
    assert_eq!(r.status, Status::Satisfied);
}

#[test]
fn lattice_linear_profile_is_violated() {
    let r = report(&single("dde", "shift(u, 1) - shift(u, -1)", "n", "n"), "c");
    assert_eq!(r.status, Status::Violated);
    let w = r.worst_witness().unwrap();
    assert!((w.value.to_f64() + 2.0).abs() < 1e-20);
}

#[test]
fn textbook_solutions_and_their_perturbations() {
    let cases = [
        ("pde", "dxx(u)", "exp(x)", "exp(x + T*t)"),
        ("pde", "u", "exp(x)", "exp(x + T*t)"),
        ("pde", "u*(1 - u)", "1/(1 + exp(-x))", "1/(1 + exp(-x - T*t))"),
        ("pde", "1 - u^2", "tanh(x)", "tanh(x + T*t)"),
        ("dde", "shift(u, 1) - shift(u, -1)", "n", "n + 2*T*t"),
        ("pde", "dx(u)", "sech(x)^2", "sech(x + T*t)^2"),
    ];
    for (kind, rhs, ic, claim) in cases {
        let good = report(&single(kind, rhs, ic, &claim.replace('T', "1")), "c");
        assert_eq!(good.status, Status::Satisfied, "{rhs}");
        let bad = report(&single(kind, rhs, ic, &claim.replace('T', "(1 + 1/1000)")), "c");
        assert_eq!(bad.status, Status::Violated, "{rhs}");
        assert!(bad.initial[0].verdict.is_proven_zero());
    }
}

#[test]
fn witnesses_reproduce() {
    let r = report(REACTION_DIFFUSION, "exact_wave_xt");
    let spec = parse_problem(REACTION_DIFFUSION).unwrap();
    let res = residuals(&spec, &spec.claim("exact_wave_xt").unwrap().solutions).unwrap();
    for (check, e) in r.equations.iter().zip(&res) {
        let w = check.verdict.witness().unwrap();
        let again = e.eval(&w.bindings, 40).unwrap().to_f64();
        let recorded = w.value.to_f64();
        assert!((again - recorded).abs() <= 1e-10 * recorded.abs());
    }
}

#[test]
fn reports_are_deterministic() {
    assert_eq!(report(KDV_LATTICE, "tanh_soliton"), report(KDV_LATTICE, "tanh_soliton"));
}

#[test]
fn scan_finds_the_heat_speed() {
    let text = single("pde", "dxx(u)", "exp(x)", "exp(x + c*t)");
    let spec = parse_problem(&text).unwrap();
    let claim = spec.claim("c").unwrap();
    let grid = linear_grid(&ratio(0, 1), &ratio(2, 1), 5);
    let scan = parameter_scan(&spec, claim, &Symbol::new("c"), &grid, &default_plan(&spec, claim)).unwrap();
    assert_eq!(scan.residual_zeros(), [ratio(1, 1)]);
    assert_eq!(scan.local_minima(), [ratio(1, 1)]);
    assert_eq!(scan.initial_zeros(0).len(), 5);
}

#[test]
fn scan_over_an_unused_parameter_is_flat() {
    let text = single("pde", "dxx(u)", "exp(x)", "exp(x + t)");
    let spec = parse_problem(&text).unwrap();
    let claim = spec.claim("c").unwrap();
    let grid = linear_grid(&ratio(-1, 1), &ratio(1, 1), 3);
    let scan = parameter_scan(&spec, claim, &Symbol::new("c"), &grid, &default_plan(&spec, claim)).unwrap();
    assert!(scan.rows.windows(2).all(|w| w[0].residual == w[1].residual && w[0].initial == w[1].initial));
}

#[test]
fn lattice_scan_over_alpha() {
    let spec = parse_problem(KDV_LATTICE).unwrap();
    let claim = spec.claim("tanh_soliton").unwrap();
    let grid = linear_grid(&ratio(-2, 1), &ratio(2, 1), 9);
    let plan = SamplePlan { params: alloc::vec![default_plan(&spec, claim).params[0].clone()], ..default_plan(&spec, claim) };
    let scan = parameter_scan(&spec, claim, &Symbol::new("alpha"), &grid, &plan).unwrap();
    // beta = 1 = alpha^2/4 at alpha = -2 and 2; alpha = 0 is a pole
    assert_eq!(scan.residual_zeros(), [ratio(-2, 1), ratio(2, 1)]);
    assert_eq!(scan.rows[4].residual, None);
}

#[test]
fn scan_rejects_bad_input() {
    let spec = parse_problem(HEAT).unwrap();
    let claim = spec.claim("exact").unwrap();
    let plan = default_plan(&spec, claim);
    assert_eq!(parameter_scan(&spec, claim, &Symbol::new("q"), &[ratio(1, 1)], &plan), Err(VerifyError::UnknownParameter("q".into())));
    assert_eq!(parameter_scan(&spec, claim, &Symbol::new("q"), &[], &plan), Err(VerifyError::EmptyGrid));
}

#[test]
fn kind_is_checked() {
    let spec = parse_problem(HEAT).unwrap();
    let claim = spec.claim("exact").unwrap();
    assert!(matches!(check_dde_claim(&spec, claim, &default_plan(&spec, claim)), Err(VerifyError::WrongKind { .. })));
    assert!(check_pde_claim(&spec, claim, &default_plan(&spec, claim)).is_ok());
}
