//! Command implementations. Each returns the exit code and the rendered
//! report.

use std::collections::BTreeMap;
use std::path::Path;

use taylorcheck_core::numeric::{dde_integrate, mol_integrate, validity_window, GridSolution, LatticeOptions, MolOptions};
use taylorcheck_core::parse::{Claim, ProblemKind, ProblemSpec};
use taylorcheck_core::series::{defect_coefficients, series_residual_order, taylor, ResidualSamples, SeriesOptions};
use taylorcheck_core::verify::{check_claim, linear_grid, parameter_scan, ClaimReport, SamplePlan};
use taylorcheck_core::zero::prove_zero;
use taylorcheck_core::{Bindings, Symbol};

use crate::config::{Cli, Command, Common, CompareArgs, ParamOverride, ReportArgs, VerifyArgs, WindowArgs};
use crate::report::{self, CompareBody, DefectRow, FieldSeries, Meta, Report, ReportBody, SolveBody, VerifyBody};
use crate::{export, load_problem, status_exit_code, CliError, EXIT_NUMERIC, EXIT_OK};

pub fn dispatch(cli: &Cli) -> Result<(i32, String), CliError> {
    let common = cli.command.common();
    let loaded = load_problem(&common.problem)?;
    let mut spec = loaded.spec;
    apply_overrides(&mut spec, &common.params)?;
    let meta = |params: BTreeMap<String, String>| Meta {
        tool: "taylorcheck",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        problem: common.problem.display().to_string(),
        problem_sha256: loaded.sha256.clone(),
        seed: common.seed,
        precision: common.precision,
        params,
    };
    match &cli.command {
        Command::Solve(a) => {
            let body = solve(&spec, a.order, common.precision)?;
            Ok((EXIT_OK, render(common, &Report { meta: meta(spec_params(&spec, None)), body }, report::solve_text)))
        }
        Command::Verify(a) => verify_command(&spec, a, meta),
        Command::Compare(a) => compare_command(&spec, a, meta),
        Command::Report(a) => report_command(&spec, a, meta),
    }
}

fn render<T: serde::Serialize>(common: &Common, r: &Report<T>, text: fn(&mut String, &T)) -> String {
    if common.json {
        report::to_json(r)
    } else {
        report::text(r, text)
    }
}

/// Overrides must name a parameter of the problem or of one of its claims.
pub fn apply_overrides(spec: &mut ProblemSpec, overrides: &[ParamOverride]) -> Result<(), CliError> {
    for o in overrides {
        let name = Symbol::new(&o.name);
        let mut found = false;
        let claim_params = spec.claims.iter_mut().flat_map(|c| c.extra_params.iter_mut());
        for p in spec.params.iter_mut().chain(claim_params) {
            if p.name == name {
                p.default = o.value.clone();
                found = true;
            }
        }
        if !found {
            return Err(CliError::Config(format!("unknown parameter `{}`", o.name)));
        }
    }
    Ok(())
}

fn spec_params(spec: &ProblemSpec, claim: Option<&Claim>) -> BTreeMap<String, String> {
    let params = match claim {
        Some(c) => spec.claim_parameters(c),
        None => spec.params.clone(),
    };
    params.iter().map(|p| (p.name.to_string(), p.default.to_string())).collect()
}

pub fn solve(spec: &ProblemSpec, order: usize, precision: u32) -> Result<SolveBody, CliError> {
    let series = taylor(spec, order, &SeriesOptions::default())?;
    let defects = defect_coefficients(spec, &series, order)?;
    let mut defect = Vec::with_capacity(order);
    for power in 0..order {
        let proven_zero = defects.iter().map(|d| prove_zero(&d[power])).collect::<Result<_, _>>()?;
        defect.push(DefectRow { power, proven_zero });
    }
    let mut samples = ResidualSamples::for_spec(spec);
    samples.digits = samples.digits.max(precision);
    let residual_order = series_residual_order(spec, &series, &samples)?.into();
    Ok(SolveBody {
        kind: spec.kind.as_str(),
        space: spec.space.to_string(),
        order,
        fields: series.iter().map(FieldSeries::from_series).collect(),
        defect,
        residual_order,
    })
}

fn find_claim<'a>(spec: &'a ProblemSpec, name: &str) -> Result<&'a Claim, CliError> {
    spec.claim(name).ok_or_else(|| {
        let names: Vec<&str> = spec.claims.iter().map(|c| c.name.as_str()).collect();
        CliError::Config(format!("unknown claim `{name}` (available: {})", names.join(", ")))
    })
}

pub fn verify(spec: &ProblemSpec, claim: &Claim, seed: u64, precision: u32) -> Result<ClaimReport, CliError> {
    let plan = SamplePlan::for_claim(spec, claim, seed, precision);
    Ok(check_claim(spec, claim, &plan)?)
}

fn verify_command(
    spec: &ProblemSpec,
    a: &VerifyArgs,
    meta: impl Fn(BTreeMap<String, String>) -> Meta,
) -> Result<(i32, String), CliError> {
    let common = &a.common;
    let claim = find_claim(spec, &a.claim)?;
    let mut r = verify(spec, claim, common.seed, common.precision)?;
    if let Some(s) = &a.scan {
        let plan = SamplePlan::for_claim(spec, claim, common.seed, common.precision);
        let grid = linear_grid(&s.lo, &s.hi, s.count);
        r.scan = Some(parameter_scan(spec, claim, &Symbol::new(&s.name), &grid, &plan)?);
    }
    let body = VerifyBody::new(&r, &field_names(spec));
    let out = render(common, &Report { meta: meta(spec_params(spec, Some(claim))), body }, report::verify_text);
    Ok((status_exit_code(r.status), out))
}

fn field_names(spec: &ProblemSpec) -> Vec<String> {
    spec.fields.iter().map(ToString::to_string).collect()
}

fn check_window(w: &WindowArgs) -> Result<(), CliError> {
    if !(w.t_max.is_finite() && w.t_max >= 0.0) {
        return Err(CliError::Config(format!("--t-max must be finite and nonnegative, got {}", w.t_max)));
    }
    if w.tol.is_nan() || w.tol < 0.0 {
        return Err(CliError::Config(format!("--tol must be nonnegative, got {}", w.tol)));
    }
    Ok(())
}

/// Numeric reference with the default grid of the problem kind.
pub fn reference(spec: &ProblemSpec, t_max: f64) -> Result<GridSolution, CliError> {
    let params = Bindings::new();
    Ok(match spec.kind {
        ProblemKind::Pde => mol_integrate(spec, &params, &MolOptions { t_end: t_max, ..MolOptions::default() })?,
        ProblemKind::Dde => dde_integrate(spec, &params, &LatticeOptions { t_end: t_max, ..LatticeOptions::default() })?,
    })
}

pub fn compare(spec: &ProblemSpec, w: &WindowArgs) -> Result<(CompareBody, GridSolution), CliError> {
    check_window(w)?;
    let series = taylor(spec, w.order, &SeriesOptions::default())?;
    let grid = reference(spec, w.t_max)?;
    let window = validity_window(&series, &grid, w.tol)?;
    Ok((CompareBody::new(w.order, w.t_max, w.tol, &grid, &window), grid))
}

fn write_file(path: &Path, write: impl FnOnce(&mut std::fs::File) -> Result<(), String>) -> Result<(), CliError> {
    let err = |message: String| CliError::Write { path: path.to_path_buf(), message };
    let mut f = std::fs::File::create(path).map_err(|e| err(e.to_string()))?;
    write(&mut f).map_err(err)
}

fn compare_command(
    spec: &ProblemSpec,
    a: &CompareArgs,
    meta: impl Fn(BTreeMap<String, String>) -> Meta,
) -> Result<(i32, String), CliError> {
    let (body, grid) = compare(spec, &a.window)?;
    if let Some(p) = &a.grid_csv {
        write_file(p, |f| export::write_csv(&grid, f).map_err(|e| e.to_string()))?;
    }
    if let Some(p) = &a.grid_json {
        write_file(p, |f| std::io::Write::write_all(f, export::to_json(&grid).as_bytes()).map_err(|e| e.to_string()))?;
    }
    let out = render(&a.common, &Report { meta: meta(spec_params(spec, None)), body }, report::compare_text);
    Ok((EXIT_OK, out))
}

/// Verdicts do not affect the exit code of `report`; a failed comparison is
/// recorded in the report and exits with its own code.
fn report_command(
    spec: &ProblemSpec,
    a: &ReportArgs,
    meta: impl Fn(BTreeMap<String, String>) -> Meta,
) -> Result<(i32, String), CliError> {
    let common = &a.common;
    let solve = solve(spec, a.window.order, common.precision)?;
    let fields = field_names(spec);
    let claims = spec
        .claims
        .iter()
        .map(|c| verify(spec, c, common.seed, common.precision).map(|r| VerifyBody::new(&r, &fields)))
        .collect::<Result<Vec<_>, _>>()?;
    let (compare, compare_error, code) = match compare(spec, &a.window) {
        Ok((body, _)) => (Some(body), None, EXIT_OK),
        Err(e @ CliError::Numeric(_)) if e.exit_code() == EXIT_NUMERIC => (None, Some(e.to_string()), EXIT_NUMERIC),
        Err(e) => return Err(e),
    };
    let body = ReportBody { solve, claims, compare, compare_error };
    let mut params = spec_params(spec, None);
    for c in &spec.claims {
        params.extend(spec_params(spec, Some(c)));
    }
    Ok((code, render(common, &Report { meta: meta(params), body }, report::report_text)))
}
