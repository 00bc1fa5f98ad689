use taylorcheck_core::numeric::{dde_integrate, mol_integrate, validity_window, LatticeOptions, MolOptions};
use taylorcheck_core::parse::{parse_expression, parse_problem, ProblemSpec};
use taylorcheck_core::series::{dde_taylor, defect_vanishes, pde_taylor, series_residual_order, OrderEstimate, ResidualSamples};
use taylorcheck_core::verify::{check_claim, default_plan, Status};
use taylorcheck_core::zero::prove_zero;
use taylorcheck_core::{Bindings, Expr};

fn shipped(name: &str) -> ProblemSpec {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../problems/");
    parse_problem(&std::fs::read_to_string(format!("{path}{name}")).unwrap()).unwrap()
}

#[test]
fn heat_series_is_the_exponential() {
    let spec = shipped("heat.prob");
    let series = pde_taylor(&spec, 5).unwrap();
    let mut factorial = 1;
    for (j, c) in series[0].coefficients.iter().enumerate() {
        factorial *= j.max(1) as i64;
        let want = parse_expression(&format!("exp(x)/{factorial}")).unwrap();
        assert!(prove_zero(&(c.clone() - want)).unwrap(), "c{j} = {c}");
    }
}

#[test]
fn every_shipped_claim_has_a_verdict() {
    let expected = [
        ("heat.prob", "exact", Status::Satisfied),
        ("heat.prob", "shifted", Status::Violated),
        ("reaction_diffusion.prob", "exact_wave_xt", Status::Violated),
        ("reaction_diffusion.prob", "exact_wave_ct", Status::Violated),
        ("reaction_diffusion.prob", "traveling_front", Status::Violated),
        ("kdv_lattice.prob", "tanh_soliton", Status::Violated),
        ("kdv_lattice.prob", "constant", Status::Violated),
    ];
    for (file, name, status) in expected {
        let spec = shipped(file);
        let claim = spec.claim(name).unwrap();
        let report = check_claim(&spec, claim, &default_plan(&spec, claim)).unwrap();
        assert_eq!(report.status, status, "{file} {name}");
    }
}

#[test]
fn reaction_diffusion_pipeline() {
    let spec = shipped("reaction_diffusion.prob");
    let series = pde_taylor(&spec, 3).unwrap();
    assert!(defect_vanishes(&spec, &series).unwrap());
    let OrderEstimate::Slope(slope) = series_residual_order(&spec, &series, &ResidualSamples::for_spec(&spec)).unwrap() else {
        panic!("truncated series cannot be exact")
    };
    assert!(slope >= 2.8, "{slope}");
    let grid = mol_integrate(&spec, &Bindings::new(), &MolOptions { t_end: 0.1, ..MolOptions::default() }).unwrap();
    let w = validity_window(&series, &grid, 1e-4).unwrap();
    assert_eq!(w.t_star, 0.1);
}

#[test]
fn claim_solutions_match_the_initial_data_where_expected() {
    let spec = shipped("kdv_lattice.prob");
    let claim = spec.claim("tanh_soliton").unwrap();
    let at_zero = claim.solutions[0].substitute(&spec.time(), &Expr::zero()).unwrap();
    assert!(prove_zero(&(at_zero - spec.initial[0].clone())).unwrap());
}

#[test]
fn series_and_references_agree_over_short_times() {
    let rd = shipped("reaction_diffusion.prob");
    let grid = mol_integrate(&rd, &Bindings::new(), &MolOptions { t_end: 0.05, ..MolOptions::default() }).unwrap();
    let w = validity_window(&pde_taylor(&rd, 3).unwrap(), &grid, 1e-4).unwrap();
    assert_eq!(w.t_star, 0.05);
    let kdv = shipped("kdv_lattice.prob");
    let grid = dde_integrate(&kdv, &Bindings::new(), &LatticeOptions { t_end: 0.05, ..LatticeOptions::default() }).unwrap();
    let w = validity_window(&dde_taylor(&kdv, 3).unwrap(), &grid, 1e-4).unwrap();
    assert_eq!(w.t_star, 0.05, "{:?}", w.max_errors().last());
}
