//! Double-precision reference solutions: method of lines for PDE systems,
//! classical RK4 on a finite window for lattice systems, and the validity
//! window of a truncated series against such a reference.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::expr::{Bindings, ExprError, SpaceOp, Symbol};
use crate::float::rational_to_f64;
use crate::parse::{ProblemKind, ProblemSpec};
use crate::series::TimeSeries;

mod program;

use program::{Compiler, Program};

/// Magnitude treated as a blow-up.
pub const BLOW_UP: f64 = 1e10;
/// Default half-width of the PDE domain.
pub const DEFAULT_HALF_WIDTH: f64 = 20.0;
/// Default number of PDE grid intervals.
pub const DEFAULT_INTERVALS: usize = 400;
/// Default lattice half-window.
pub const DEFAULT_WINDOW: i64 = 20;
/// Default lattice time step.
pub const DEFAULT_LATTICE_DT: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("expected a {expected} problem, got {found}")]
    WrongKind { expected: &'static str, found: &'static str },
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("time step {dt} exceeds the stability bound {bound}")]
    StabilityViolation { dt: f64, bound: f64 },
    #[error("blow-up: |{field}| exceeds 1e10 at {space} = {position}, t = {t}")]
    BlowUp { t: f64, field: Symbol, space: Symbol, position: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// How a reference solution was produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Scheme {
    pub method: &'static str,
    /// Grid spacing (1 on a lattice).
    pub h: f64,
    pub dt: f64,
    /// Largest admissible `dt`, when the scheme has one.
    pub stability_bound: Option<f64>,
    pub boundary: &'static str,
    /// Points with `|position| <= trust_radius` are unaffected by the boundary policy.
    pub trust_radius: f64,
    pub params: Vec<(Symbol, f64)>,
}

/// Reference trajectory on a space (or lattice) by time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution {
    pub kind: ProblemKind,
    pub space: Symbol,
    pub fields: Vec<Symbol>,
    pub points: Vec<f64>,
    pub times: Vec<f64>,
    /// `values[time][field * points.len() + point]`.
    pub values: Vec<Vec<f64>>,
    pub scheme: Scheme,
}

impl GridSolution {
    pub fn value(&self, time: usize, field: usize, point: usize) -> f64 {
        self.values[time][field * self.points.len() + point]
    }

    /// Indices of the points inside the trust region.
    pub fn trusted(&self) -> Vec<usize> {
        let r = self.scheme.trust_radius;
        (0..self.points.len()).filter(|&i| self.points[i].abs() <= r + 1e-12).collect()
    }

    pub fn point_index(&self, position: f64) -> Option<usize> {
        self.points.iter().position(|p| (p - position).abs() < 1e-9)
    }

    /// Index of the recorded time closest to `t`.
    pub fn time_index(&self, t: f64) -> usize {
        let mut best = 0;
        for (i, s) in self.times.iter().enumerate() {
            if (s - t).abs() < (self.times[best] - t).abs() {
                best = i;
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MolOptions {
    /// The domain is `[-half_width, half_width]`.
    pub half_width: f64,
    pub intervals: usize,
    pub t_end: f64,
    /// Time step; `h^2/4` when `None`.
    pub dt: Option<f64>,
    /// Record every this many steps.
    pub record_every: usize,
}

impl Default for MolOptions {
    fn default() -> Self {
        MolOptions { half_width: DEFAULT_HALF_WIDTH, intervals: DEFAULT_INTERVALS, t_end: 0.1, dt: None, record_every: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeOptions {
    /// Sites `-window ..= window`.
    pub window: i64,
    pub t_end: f64,
    pub dt: f64,
    pub record_every: usize,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions { window: DEFAULT_WINDOW, t_end: 0.1, dt: DEFAULT_LATTICE_DT, record_every: 1 }
    }
}

/// Parameter values for a spec: declared defaults overridden by `params`.
pub fn parameter_values(spec: &ProblemSpec, params: &Bindings) -> Vec<(Symbol, f64)> {
    spec.params
        .iter()
        .map(|p| {
            let q = params.get(&p.name).unwrap_or(&p.default);
            (p.name.clone(), rational_to_f64(q))
        })
        .collect()
}

fn expect_kind(spec: &ProblemSpec, kind: ProblemKind) -> Result<(), NumericError> {
    if spec.kind == kind {
        Ok(())
    } else {
        Err(NumericError::WrongKind { expected: kind.as_str(), found: spec.kind.as_str() })
    }
}

/// Method of lines on `[-L, L]`: central differences in space, classical
/// RK4 in time, Dirichlet values frozen at the initial profile.
pub fn mol_integrate(spec: &ProblemSpec, params: &Bindings, options: &MolOptions) -> Result<GridSolution, NumericError> {
    expect_kind(spec, ProblemKind::Pde)?;
    let points = pde_points(options)?;
    let values = parameter_values(spec, params);
    let initial = sample_initial(spec, &values, &points)?;
    mol_integrate_from(spec, params, options, initial)
}

/// [`mol_integrate`] from explicit initial values, `initial[field][point]`
/// on the grid `-L + i h`.
pub fn mol_integrate_from(
    spec: &ProblemSpec,
    params: &Bindings,
    options: &MolOptions,
    initial: Vec<Vec<f64>>,
) -> Result<GridSolution, NumericError> {
    expect_kind(spec, ProblemKind::Pde)?;
    let points = pde_points(options)?;
    let h = 2.0 * options.half_width / options.intervals as f64;
    let bound = h * h / 4.0;
    let dt = options.dt.unwrap_or(bound);
    if dt.is_nan() || dt <= 0.0 {
        return Err(NumericError::InvalidGrid("time step must be positive"));
    }
    if dt > bound * (1.0 + 1e-12) {
        return Err(NumericError::StabilityViolation { dt, bound });
    }
    let l = options.half_width;
    let scheme = Scheme {
        method: "method of lines, central differences, classical RK4",
        h,
        dt,
        stability_bound: Some(bound),
        boundary: "frozen Dirichlet",
        trust_radius: l - (l / 4.0).max(1.0),
        params: parameter_values(spec, params),
    };
    let active = 1..points.len() - 1;
    integrate(spec, points, initial, active, scheme, options.t_end, options.record_every)
}

fn pde_points(options: &MolOptions) -> Result<Vec<f64>, NumericError> {
    if options.intervals < 16 {
        return Err(NumericError::InvalidGrid("at least 16 intervals are required"));
    }
    if options.half_width.is_nan() || options.half_width <= 0.0 || options.t_end.is_nan() || options.t_end < 0.0 {
        return Err(NumericError::InvalidGrid("half-width must be positive and t_end nonnegative"));
    }
    let h = 2.0 * options.half_width / options.intervals as f64;
    Ok((0..=options.intervals).map(|i| -options.half_width + i as f64 * h).collect())
}

/// Classical RK4 on the sites `-W ..= W`; sites within the largest shift of
/// either edge are held at their initial values.
pub fn dde_integrate(spec: &ProblemSpec, params: &Bindings, options: &LatticeOptions) -> Result<GridSolution, NumericError> {
    expect_kind(spec, ProblemKind::Dde)?;
    if options.window < 8 {
        return Err(NumericError::InvalidGrid("the window must be at least 8"));
    }
    if options.dt.is_nan() || options.dt <= 0.0 || options.t_end.is_nan() || options.t_end < 0.0 {
        return Err(NumericError::InvalidGrid("time step must be positive and t_end nonnegative"));
    }
    let reach = spec.shifts().iter().map(|s| s.unsigned_abs() as usize).max().unwrap_or(0);
    let points: Vec<f64> = (-options.window..=options.window).map(|n| n as f64).collect();
    if 2 * reach >= points.len() {
        return Err(NumericError::InvalidGrid("shifts reach across the whole window"));
    }
    let values = parameter_values(spec, params);
    let initial = sample_initial(spec, &values, &points)?;
    let scheme = Scheme {
        method: "classical RK4 on a finite lattice window",
        h: 1.0,
        dt: options.dt,
        stability_bound: None,
        boundary: "edge sites frozen",
        trust_radius: (options.window - 2 * reach.max(1) as i64) as f64,
        params: values,
    };
    let active = reach..points.len() - reach;
    integrate(spec, points, initial, active, scheme, options.t_end, options.record_every)
}

fn sample_initial(spec: &ProblemSpec, params: &[(Symbol, f64)], points: &[f64]) -> Result<Vec<Vec<f64>>, NumericError> {
    let mut c = Compiler::new(&[], &spec.space, params);
    let outs = spec.initial.iter().map(|e| c.compile(e)).collect::<Result<Vec<_>, _>>()?;
    let prog = c.finish(outs);
    let mut out = alloc::vec![Vec::with_capacity(points.len()); spec.fields.len()];
    let mut regs = Vec::new();
    for &x in points {
        let v = prog.run(&[x], &mut regs);
        for (f, val) in v.iter().enumerate() {
            out[f].push(*val);
        }
    }
    Ok(out)
}

/// Right-hand side compiled for grid evaluation.
struct System {
    /// Arguments of the spatial operators, over fields and the coordinate.
    args: Program,
    ops: Vec<SpaceOp>,
    /// Right-hand sides over fields, the coordinate and operator values.
    rhs: Program,
    fields: usize,
    h: f64,
}

impl System {
    fn compile(spec: &ProblemSpec, params: &[(Symbol, f64)], h: f64) -> Result<System, NumericError> {
        let mut ops: Vec<(SpaceOp, crate::Expr)> = Vec::new();
        for e in &spec.equations {
            for op in e.operators() {
                if !ops.contains(&op) {
                    ops.push(op);
                }
            }
        }
        let mut ac = Compiler::new(&spec.fields, &spec.space, params);
        let arg_outs = ops.iter().map(|(_, a)| ac.compile(a)).collect::<Result<Vec<_>, _>>()?;
        let args = ac.finish(arg_outs);
        let mut rc = Compiler::new(&spec.fields, &spec.space, params).with_operators(&ops);
        let rhs_outs = spec.equations.iter().map(|e| rc.compile(e)).collect::<Result<Vec<_>, _>>()?;
        let rhs = rc.finish(rhs_outs);
        Ok(System { args, ops: ops.into_iter().map(|(op, _)| op).collect(), rhs, fields: spec.fields.len(), h })
    }

    /// Time derivative of the flattened state at the active points.
    fn derivative(&self, points: &[f64], active: &core::ops::Range<usize>, state: &[f64], out: &mut [f64]) {
        let np = points.len();
        let nf = self.fields;
        let mut regs = Vec::new();
        let mut slots = alloc::vec![0.0; nf + 1 + self.ops.len()];
        let mut arg_values = alloc::vec![0.0; self.ops.len() * np];
        if !self.ops.is_empty() {
            for i in 0..np {
                for f in 0..nf {
                    slots[f] = state[f * np + i];
                }
                slots[nf] = points[i];
                let v = self.args.run(&slots[..nf + 1], &mut regs);
                for (j, a) in v.iter().enumerate() {
                    arg_values[j * np + i] = *a;
                }
            }
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        let h = self.h;
        for i in active.clone() {
            for f in 0..nf {
                slots[f] = state[f * np + i];
            }
            slots[nf] = points[i];
            for (j, op) in self.ops.iter().enumerate() {
                let a = &arg_values[j * np..(j + 1) * np];
                slots[nf + 1 + j] = match op {
                    SpaceOp::Dx => (a[i + 1] - a[i - 1]) / (2.0 * h),
                    SpaceOp::Dxx => (a[i + 1] - 2.0 * a[i] + a[i - 1]) / (h * h),
                    SpaceOp::Shift(s) => a[(i as i64 + s) as usize],
                };
            }
            let v = self.rhs.run(&slots, &mut regs);
            for f in 0..nf {
                out[f * np + i] = v[f];
            }
        }
    }
}

fn integrate(
    spec: &ProblemSpec,
    points: Vec<f64>,
    initial: Vec<Vec<f64>>,
    active: core::ops::Range<usize>,
    scheme: Scheme,
    t_end: f64,
    record_every: usize,
) -> Result<GridSolution, NumericError> {
    let system = System::compile(spec, &scheme.params, scheme.h)?;
    let np = points.len();
    let nf = spec.fields.len();
    let mut state: Vec<f64> = initial.into_iter().flatten().collect();
    let ratio = t_end / scheme.dt;
    let steps = if (ratio - libm::round(ratio)).abs() <= 1e-9 * ratio.max(1.0) {
        libm::round(ratio) as usize
    } else {
        libm::ceil(ratio) as usize
    };
    let dt = if steps == 0 { scheme.dt } else { t_end / steps as f64 };
    let mut solution = GridSolution {
        kind: spec.kind,
        space: spec.space.clone(),
        fields: spec.fields.clone(),
        points: points.clone(),
        times: alloc::vec![0.0],
        values: alloc::vec![state.clone()],
        scheme: Scheme { dt, ..scheme },
    };
    check_finite(&solution, &state, 0.0, nf, np)?;
    let n = state.len();
    let (mut k1, mut k2, mut k3, mut k4) = (alloc::vec![0.0; n], alloc::vec![0.0; n], alloc::vec![0.0; n], alloc::vec![0.0; n]);
    let mut tmp = alloc::vec![0.0; n];
    let every = record_every.max(1);
    for step in 1..=steps {
        system.derivative(&points, &active, &state, &mut k1);
        axpy(&mut tmp, &state, dt / 2.0, &k1);
        system.derivative(&points, &active, &tmp, &mut k2);
        axpy(&mut tmp, &state, dt / 2.0, &k2);
        system.derivative(&points, &active, &tmp, &mut k3);
        axpy(&mut tmp, &state, dt, &k3);
        system.derivative(&points, &active, &tmp, &mut k4);
        for i in 0..n {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = step as f64 * dt;
        check_finite(&solution, &state, t, nf, np)?;
        if step % every == 0 || step == steps {
            solution.times.push(t);
            solution.values.push(state.clone());
        }
    }
    Ok(solution)
}

fn axpy(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    for i in 0..out.len() {
        out[i] = x[i] + a * y[i];
    }
}

fn check_finite(sol: &GridSolution, state: &[f64], t: f64, nf: usize, np: usize) -> Result<(), NumericError> {
    for f in 0..nf {
        for i in 0..np {
            let v = state[f * np + i];
            if !v.is_finite() || v.abs() > BLOW_UP {
                return Err(NumericError::BlowUp {
                    t,
                    field: sol.fields[f].clone(),
                    space: sol.space.clone(),
                    position: sol.points[i],
                });
            }
        }
    }
    Ok(())
}

/// Closed-form solutions sampled on a grid, one expression per field in
/// `space`, `t` and the parameters.
pub fn closed_form_grid(
    spec: &ProblemSpec,
    solutions: &[crate::Expr],
    params: &Bindings,
    points: Vec<f64>,
    times: Vec<f64>,
    trust_radius: f64,
) -> Result<GridSolution, NumericError> {
    let values = parameter_values(spec, params);
    let t = Symbol::new(crate::parse::TIME);
    let mut c = Compiler::new(core::slice::from_ref(&t), &spec.space, &values);
    let outs = solutions.iter().map(|e| c.compile(e)).collect::<Result<Vec<_>, _>>()?;
    let prog = c.finish(outs);
    let mut regs = Vec::new();
    let grid = times
        .iter()
        .map(|&tv| {
            let mut row = alloc::vec![0.0; solutions.len() * points.len()];
            for (i, &x) in points.iter().enumerate() {
                for (f, v) in prog.run(&[tv, x], &mut regs).into_iter().enumerate() {
                    row[f * points.len() + i] = v;
                }
            }
            row
        })
        .collect();
    let h = if points.len() > 1 { points[1] - points[0] } else { 0.0 };
    Ok(GridSolution {
        kind: spec.kind,
        space: spec.space.clone(),
        fields: spec.fields.clone(),
        points,
        times,
        values: grid,
        scheme: Scheme {
            method: "closed form",
            h,
            dt: 0.0,
            stability_bound: None,
            boundary: "none",
            trust_radius,
            params: values,
        },
    })
}

/// Series-versus-reference error curve and the first-crossing window.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidityWindow {
    /// Largest sampled time up to which every field stays within tolerance.
    pub t_star: f64,
    /// The same per field.
    pub per_field: Vec<f64>,
    /// `(t, max error per field)` over the trust region, for every recorded time.
    pub errors: Vec<(f64, Vec<f64>)>,
}

impl ValidityWindow {
    /// Largest error over fields at each recorded time.
    pub fn max_errors(&self) -> Vec<(f64, f64)> {
        self.errors.iter().map(|(t, e)| (*t, e.iter().copied().fold(0.0, f64::max))).collect()
    }
}

/// Compares truncated series with a reference over its trust region.
pub fn validity_window(series: &[TimeSeries], reference: &GridSolution, tol: f64) -> Result<ValidityWindow, NumericError> {
    let trusted = reference.trusted();
    if trusted.is_empty() {
        return Err(NumericError::InvalidGrid("empty trust region"));
    }
    // coefficient values at every trusted point, per field
    let mut coeffs: Vec<Vec<Vec<f64>>> = Vec::with_capacity(series.len());
    for ts in series {
        let mut c = Compiler::new(&[], &reference.space, &reference.scheme.params);
        let outs = ts.coefficients.iter().map(|e| c.compile(e)).collect::<Result<Vec<_>, _>>()?;
        let prog = c.finish(outs);
        let mut regs = Vec::new();
        coeffs.push(trusted.iter().map(|&i| prog.run(&[reference.points[i]], &mut regs)).collect());
    }
    let field_of: Vec<usize> = series
        .iter()
        .map(|ts| {
            reference
                .fields
                .iter()
                .position(|f| f == &ts.field)
                .ok_or(NumericError::Expr(ExprError::UnboundSymbol(ts.field.to_string())))
        })
        .collect::<Result<_, _>>()?;
    let mut errors = Vec::with_capacity(reference.times.len());
    for (ti, &t) in reference.times.iter().enumerate() {
        let per: Vec<f64> = coeffs
            .iter()
            .zip(&field_of)
            .map(|(c, &f)| {
                trusted
                    .iter()
                    .zip(c)
                    .map(|(&i, cs)| (horner(cs, t) - reference.value(ti, f, i)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        errors.push((t, per));
    }
    let per_field: Vec<f64> = (0..series.len()).map(|f| first_crossing(&errors, |e| e[f], tol)).collect();
    let t_star = first_crossing(&errors, |e| e.iter().copied().fold(0.0, f64::max), tol);
    Ok(ValidityWindow { t_star, per_field, errors })
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * t + x)
}

fn first_crossing(errors: &[(f64, Vec<f64>)], pick: impl Fn(&[f64]) -> f64, tol: f64) -> f64 {
    let mut t_star = 0.0;
    for (t, e) in errors {
        let v = pick(e);
        if v.is_nan() || v > tol {
            break;
        }
        t_star = *t;
    }
    t_star
}
